"""Colored-cube varieties, composability oracles, and exact searches.

The package decides which 2x2x2 solids a multiset of colored unit cubes
can build: the 30 cube varieties and their table live in `varieties`,
the two independent composability oracles in `composability`, constraint
models and their exports in `model` / `export`, the backtracking engine
in `solver`, and packaged reproductions of the headline results in
`experiments`.  The `eightblocks` command wraps all of it.
"""

from .composability import (
    classify,
    count_bound,
    extract_arrangement,
    hall_witness,
    is_composable_matching,
    is_composable_treecount,
    max_matching,
    solution_set,
    universal_lower_bound,
    verify_arrangement,
)
from .errors import (
    CertificateError,
    EightBlocksError,
    ExperimentError,
    InstanceFormatError,
    InvalidInputError,
    TableConstructionError,
    UnsupportedModelError,
)
from .instances import Instance, parse_instance
from .model import existence_model, max_infeasible_model, min_universal_model
from .solver import SearchOptions, SearchResult, enumerate_all, solve
from .varieties import Catalog, catalog

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CertificateError",
    "EightBlocksError",
    "ExperimentError",
    "Instance",
    "InstanceFormatError",
    "InvalidInputError",
    "SearchOptions",
    "SearchResult",
    "TableConstructionError",
    "UnsupportedModelError",
    "catalog",
    "classify",
    "count_bound",
    "enumerate_all",
    "existence_model",
    "extract_arrangement",
    "hall_witness",
    "is_composable_matching",
    "is_composable_treecount",
    "max_matching",
    "max_infeasible_model",
    "min_universal_model",
    "parse_instance",
    "solution_set",
    "solve",
    "universal_lower_bound",
    "verify_arrangement",
]

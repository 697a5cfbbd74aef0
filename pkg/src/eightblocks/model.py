"""Declarative constraint models over variety count vectors.

A model fixes one integer variable per table cell together with
constraints of four kinds: plain linear comparisons, covering
conditions that force a target to be composable, disjunctions that
forbid it, and capped supply bounds that any forbidden target must
respect.  Models are data; solving and exporting live elsewhere.

Composability of a target is equivalent to the full family of covering
conditions over the 256 subsets of its corner triples: every subset
must be coverable by at least as many usable cubes as it has members.
Forbidding a target asserts the negation, a 256-way disjunction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

from .cubes import Triple
from .errors import InvalidInputError
from .instances import Instance
from .varieties import CELLS, CELL_INDEX, Catalog, catalog

Cell = tuple[int, int]

MODES = ("capped", "full")

# a cube count of eight of one variety always builds that variety's solid
SELF_BUILD_COUNT = 8
CAPPED_LIMIT = 2


@dataclass(frozen=True)
class VarietyVariable:
    coords: Cell
    lo: int
    hi: int

    def __post_init__(self):
        if self.coords not in CELL_INDEX:
            raise InvalidInputError(f"no table cell {self.coords}")
        if not (0 <= self.lo <= self.hi):
            raise InvalidInputError(
                f"bad domain [{self.lo},{self.hi}] for {self.coords}"
            )


@dataclass(frozen=True)
class LinearConstraint:
    """sum of the named cells  <sense>  rhs, unit coefficients."""

    label: str
    sense: str  # 'ge' | 'le' | 'eq'
    cells: tuple[Cell, ...]
    rhs: int

    def __post_init__(self):
        if self.sense not in ("ge", "le", "eq"):
            raise InvalidInputError(f"unknown sense {self.sense!r}")


@dataclass(frozen=True)
class HallConstraint:
    """Usable supply for a subset of the target's corner triples.

    cells lists the target itself plus every compatible variety whose
    shared pair meets the subset; their total count must reach rhs,
    the subset size.
    """

    target: Cell
    triples: tuple[Triple, ...]
    cells: tuple[Cell, ...]
    rhs: int


@dataclass(frozen=True)
class ForbiddenDisjunct:
    triples: tuple[Triple, ...]
    cells: tuple[Cell, ...]
    max_total: int  # subset size minus one; -1 marks the vacuous empty case


@dataclass(frozen=True)
class ForbiddenConstraint:
    """Target not composable: some triple subset is under-supplied."""

    target: Cell
    disjuncts: tuple[ForbiddenDisjunct, ...]


@dataclass(frozen=True)
class CapBoundConstraint:
    """Necessary condition at a forbidden target, one table line at a time.

    own + sum over the line's compatible cells of min(count, cap) must
    stay below the eight corners, else the target is composable outright.
    """

    target: Cell
    axis: str  # 'row' | 'col'
    line: int
    own_cell: Cell
    capped_cells: tuple[Cell, ...]
    cap: int = CAPPED_LIMIT
    limit: int = SELF_BUILD_COUNT - 1


Constraint = LinearConstraint | HallConstraint | ForbiddenConstraint | CapBoundConstraint


@dataclass(frozen=True)
class Model:
    name: str
    variables: tuple[VarietyVariable, ...]  # one per cell, canonical order
    constraints: tuple[Constraint, ...]
    objective: str | None = None  # None or 'minimize-total'
    required: frozenset[Cell] = field(default_factory=frozenset)
    forbidden: frozenset[Cell] = field(default_factory=frozenset)
    mode: str = "full"

    def variable(self, cell: Cell) -> VarietyVariable:
        return self.variables[CELL_INDEX[cell]]

    def domains(self) -> tuple[tuple[int, int], ...]:
        return tuple((v.lo, v.hi) for v in self.variables)

    def restrict(self, cell: Cell, lo: int, hi: int) -> "Model":
        """Copy of the model with one domain tightened (used for splitting)."""
        k = CELL_INDEX[cell]
        old = self.variables[k]
        nlo, nhi = max(old.lo, lo), min(old.hi, hi)
        if nlo > nhi:
            raise InvalidInputError(f"empty domain for {cell}: [{nlo},{nhi}]")
        new_vars = (
            self.variables[:k]
            + (VarietyVariable(cell, nlo, nhi),)
            + self.variables[k + 1 :]
        )
        return replace(self, variables=new_vars)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    violations: tuple[str, ...]


# ----------------------------------------------------------------------
# constraint families


def _subset_cells(
    target: Cell, mask: int, cat: Catalog
) -> tuple[tuple[Triple, ...], tuple[Cell, ...]]:
    t = CELL_INDEX[target]
    nodes = cat.triple_nodes[t]
    triples = tuple(nodes[k] for k in range(8) if mask >> k & 1)
    cells: list[Cell] = []
    if mask:
        cells.append(target)  # the target's own cubes cover every triple
    for w in cat.compatible_cells[t]:
        a, b = cat.shared_pairs[t][w]
        if mask >> a & 1 or mask >> b & 1:
            cells.append(CELLS[w])
    return triples, tuple(cells)


def hall_family(target: Cell, cat: Catalog | None = None) -> tuple[HallConstraint, ...]:
    """All 256 covering conditions of one target, empty subset included."""
    cat = cat or catalog()
    out = []
    for mask in range(256):
        triples, cells = _subset_cells(target, mask, cat)
        out.append(
            HallConstraint(
                target=target, triples=triples, cells=cells, rhs=len(triples)
            )
        )
    return tuple(out)


def forbidden_constraint(
    target: Cell, cat: Catalog | None = None
) -> ForbiddenConstraint:
    cat = cat or catalog()
    disjuncts = []
    for mask in range(256):
        triples, cells = _subset_cells(target, mask, cat)
        disjuncts.append(
            ForbiddenDisjunct(
                triples=triples, cells=cells, max_total=len(triples) - 1
            )
        )
    return ForbiddenConstraint(target=target, disjuncts=tuple(disjuncts))


def cap_bounds(
    target: Cell, cat: Catalog | None = None
) -> tuple[CapBoundConstraint, ...]:
    """The ten per-line supply caps a forbidden target must satisfy."""
    cat = cat or catalog()
    t = CELL_INDEX[target]
    ti, tj = target
    out = []
    for r in range(1, 7):
        if r == ti:
            continue
        line = tuple(
            (r, jj)
            for jj in range(1, 7)
            if jj != r and cat.share_table[t][CELL_INDEX[(r, jj)]] == 2
        )
        out.append(
            CapBoundConstraint(
                target=target, axis="row", line=r, own_cell=target, capped_cells=line
            )
        )
    for c in range(1, 7):
        if c == tj:
            continue
        line = tuple(
            (ii, c)
            for ii in range(1, 7)
            if ii != c and cat.share_table[t][CELL_INDEX[(ii, c)]] == 2
        )
        out.append(
            CapBoundConstraint(
                target=target, axis="col", line=c, own_cell=target, capped_cells=line
            )
        )
    assert all(len(b.capped_cells) == 4 for b in out)
    return tuple(out)


# ----------------------------------------------------------------------
# model builders


def _validated_cells(cells) -> frozenset[Cell]:
    out = set()
    for c in cells:
        c = tuple(c)
        if c not in CELL_INDEX:
            raise InvalidInputError(f"no table cell {c}")
        out.add(c)
    return frozenset(out)


def _check_mode(mode: str):
    if mode not in MODES:
        raise InvalidInputError(f"unknown domain mode {mode!r}; pick from {MODES}")


def existence_model(
    required, mode: str = "capped", cat: Catalog | None = None
) -> Model:
    """Instance whose composable targets are exactly `required`.

    Non-required counts stay below the self-build threshold; in capped
    mode they are further cut to two, which loses no witnesses: a
    matching never uses more than two cubes of a non-target variety,
    and shrinking counts cannot make a forbidden target composable.
    """
    _check_mode(mode)
    cat = cat or catalog()
    req = _validated_cells(required)
    other_hi = CAPPED_LIMIT if mode == "capped" else SELF_BUILD_COUNT - 1
    variables = tuple(
        VarietyVariable(c, 0, SELF_BUILD_COUNT if c in req else other_hi)
        for c in CELLS
    )
    constraints: list[Constraint] = []
    if req:
        # some target must be composed, which takes eight cubes
        constraints.append(
            LinearConstraint("total-supply", "ge", CELLS, SELF_BUILD_COUNT)
        )
    for c in CELLS:
        if c in req:
            constraints.extend(hall_family(c, cat))
        else:
            constraints.append(forbidden_constraint(c, cat))
            constraints.extend(cap_bounds(c, cat))
    label = ",".join(f"({i},{j})" for i, j in sorted(req)) or "none"
    return Model(
        name=f"existence[{label}|{mode}]",
        variables=variables,
        constraints=tuple(constraints),
        objective=None,
        required=req,
        forbidden=frozenset(CELLS) - req,
        mode=mode,
    )


def max_infeasible_model(
    size: int, mode: str = "full", cat: Catalog | None = None
) -> Model:
    """Instance of exactly `size` cubes with no composable target at all."""
    _check_mode(mode)
    if size < 0:
        raise InvalidInputError(f"negative size {size}")
    cat = cat or catalog()
    hi = CAPPED_LIMIT if mode == "capped" else SELF_BUILD_COUNT - 1
    hi = min(hi, size)
    variables = tuple(VarietyVariable(c, 0, hi) for c in CELLS)
    constraints: list[Constraint] = [
        LinearConstraint("total-supply", "eq", CELLS, size)
    ]
    for c in CELLS:
        constraints.append(forbidden_constraint(c, cat))
        constraints.extend(cap_bounds(c, cat))
    return Model(
        name=f"max-infeasible[{size}|{mode}]",
        variables=variables,
        constraints=tuple(constraints),
        objective=None,
        required=frozenset(),
        forbidden=frozenset(CELLS),
        mode=mode,
    )


def min_universal_model(cat: Catalog | None = None) -> Model:
    """Smallest instance composable for every target; pure covering model."""
    cat = cat or catalog()
    variables = tuple(
        VarietyVariable(c, 0, SELF_BUILD_COUNT) for c in CELLS
    )
    constraints: list[Constraint] = []
    for c in CELLS:
        constraints.extend(hall_family(c, cat))
    return Model(
        name="min-universal",
        variables=variables,
        constraints=tuple(constraints),
        objective="minimize-total",
        required=frozenset(CELLS),
        forbidden=frozenset(),
        mode="full",
    )


# ----------------------------------------------------------------------
# assignment checking


def check_assignment(model: Model, instance: Instance) -> CheckResult:
    """Literal evaluation of every domain and constraint, no oracles."""
    vec = instance.vector()
    at = {c: vec[CELL_INDEX[c]] for c in CELLS}
    bad: list[str] = []
    for v in model.variables:
        n = at[v.coords]
        if not (v.lo <= n <= v.hi):
            bad.append(f"domain {v.coords}: {n} outside [{v.lo},{v.hi}]")
    for con in model.constraints:
        if isinstance(con, LinearConstraint):
            s = sum(at[c] for c in con.cells)
            ok = (
                s >= con.rhs
                if con.sense == "ge"
                else s <= con.rhs
                if con.sense == "le"
                else s == con.rhs
            )
            if not ok:
                bad.append(f"linear {con.label}: sum={s} {con.sense} {con.rhs} fails")
        elif isinstance(con, HallConstraint):
            s = sum(at[c] for c in con.cells)
            if s < con.rhs:
                names = ",".join("".join(tr) for tr in con.triples)
                bad.append(
                    f"cover {con.target} [{names}]: supply {s} < {con.rhs}"
                )
        elif isinstance(con, ForbiddenConstraint):
            hit = any(
                sum(at[c] for c in d.cells) <= d.max_total for d in con.disjuncts
            )
            if not hit:
                bad.append(f"forbid {con.target}: every triple subset is supplied")
        elif isinstance(con, CapBoundConstraint):
            s = at[con.own_cell] + sum(
                min(at[c], con.cap) for c in con.capped_cells
            )
            if s > con.limit:
                bad.append(
                    f"capbound {con.target} {con.axis} {con.line}: {s} > {con.limit}"
                )
        else:
            raise InvalidInputError(f"unknown constraint type {type(con).__name__}")
    return CheckResult(ok=not bad, violations=tuple(bad))


@lru_cache(maxsize=None)
def _builders_selfcheck() -> bool:
    # structural counts the rest of the package leans on
    m = min_universal_model()
    assert len(m.constraints) == 30 * 256
    m2 = existence_model([(1, 2)])
    assert len(m2.constraints) == 1 + 256 + 29 * 11
    return True

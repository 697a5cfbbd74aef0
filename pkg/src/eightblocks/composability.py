"""Exact composability oracles and certificates.

A target variety is composable from an instance when eight of its cubes
can be oriented into a 2x2x2 solid showing the target's face colors.
Two independent routes decide this:

* matching route: bipartite graph between usable cubes and the eight
  corner triples of the target; composable iff a matching of size eight
  exists.
* tree route: multigraph on the eight target triples with one edge per
  compatible cube joining its two shared triples; composable iff the
  number of cubes of the target variety is at least the number of tree
  components.

Both routes are kept separate so they can cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Sequence

from . import cubes
from .cubes import Coloring, Triple
from .errors import CertificateError, InvalidInputError
from .graphs import (
    deficient_right_set,
    maximum_bipartite_matching,
    tree_component_count as _tree_count_raw,
)
from .instances import Instance
from .varieties import CELLS, CELL_INDEX, Catalog, catalog


def _cell_index(target: tuple[int, int]) -> int:
    try:
        return CELL_INDEX[tuple(target)]
    except KeyError:
        raise InvalidInputError(f"no table cell {target!r}") from None


# ----------------------------------------------------------------------
# matching route


@dataclass(frozen=True)
class MatchingReport:
    """Outcome of the bipartite matching for one target."""

    target: tuple[int, int]
    size: int
    #: per triple node: ((cell coords, copy index) or None)
    matched: tuple[tuple[tuple[int, int], int] | None, ...]

    @property
    def composable(self) -> bool:
        return self.size == 8


def bipartite_adjacency(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> tuple[list[tuple[tuple[int, int], int]], list[list[int]]]:
    """Usable cubes and their triple-node adjacency for one target.

    Cubes of the target variety reach all eight nodes, compatible cubes
    reach exactly their two shared nodes, everything else is left out.
    Cube order follows the cell order, copies numbered from zero.
    """
    cat = cat or catalog()
    t = _cell_index(target)
    cubes_out: list[tuple[tuple[int, int], int]] = []
    adjacency: list[list[int]] = []
    vec = instance.vector()
    for k, n in enumerate(vec):
        if not n:
            continue
        if k == t:
            nbrs = list(range(8))
        else:
            pair = cat.shared_pairs[t][k]
            if pair is None:
                continue
            nbrs = list(pair)
        for copy in range(n):
            cubes_out.append((CELLS[k], copy))
            adjacency.append(nbrs)
    return cubes_out, adjacency


def max_matching(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> MatchingReport:
    cat = cat or catalog()
    cubes_list, adjacency = bipartite_adjacency(instance, target, cat)
    size, match_of_right = maximum_bipartite_matching(adjacency, 8)
    matched = tuple(
        cubes_list[u] if u != -1 else None for u in match_of_right
    )
    return MatchingReport(target=tuple(target), size=size, matched=matched)


def is_composable_matching(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> bool:
    return max_matching(instance, target, cat).composable


@dataclass(frozen=True)
class HallWitness:
    """Triple subset with too few usable cubes."""

    target: tuple[int, int]
    triples: frozenset[Triple]
    usable_cubes: int

    @property
    def violated(self) -> bool:
        return len(self.triples) > self.usable_cubes


def usable_cube_count(
    instance: Instance,
    target: tuple[int, int],
    triple_subset: frozenset[Triple],
    cat: Catalog | None = None,
) -> int:
    """Cubes carrying at least one triple of the subset at a target corner."""
    cat = cat or catalog()
    t = _cell_index(target)
    if not triple_subset:
        return 0
    total = 0
    vec = instance.vector()
    for k, n in enumerate(vec):
        if not n:
            continue
        if k == t:
            total += n
            continue
        pair = cat.shared_pairs[t][k]
        if pair is None:
            continue
        nodes = cat.triple_nodes[t]
        if nodes[pair[0]] in triple_subset or nodes[pair[1]] in triple_subset:
            total += n
    return total


def hall_witness(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> HallWitness | None:
    """A violated triple subset, or None when the target is composable."""
    cat = cat or catalog()
    t = _cell_index(target)
    cubes_list, adjacency = bipartite_adjacency(instance, target, cat)
    size, match_of_right = maximum_bipartite_matching(adjacency, 8)
    if size == 8:
        return None
    deficient = deficient_right_set(adjacency, 8, match_of_right)
    nodes = cat.triple_nodes[t]
    subset = frozenset(nodes[v] for v in deficient)
    witness = HallWitness(
        target=tuple(target),
        triples=subset,
        usable_cubes=usable_cube_count(instance, target, subset, cat),
    )
    if not witness.violated:
        raise CertificateError("internal: deficient set fails to violate the count condition")
    return witness


def hall_satisfied(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> bool:
    """Check every one of the 256 triple subsets directly."""
    cat = cat or catalog()
    t = _cell_index(target)
    nodes = cat.triple_nodes[t]
    # per-cell node masks for fast subset overlap
    vec = instance.vector()
    own = vec[t]
    masked: list[tuple[int, int]] = []  # (mask, count)
    for k, n in enumerate(vec):
        if n and k != t:
            pair = cat.shared_pairs[t][k]
            if pair is not None:
                masked.append(((1 << pair[0]) | (1 << pair[1]), n))
    for mask in range(256):
        need = mask.bit_count()
        have = own if mask else 0
        for m, n in masked:
            if m & mask:
                have += n
        if have < need:
            return False
    return True


# ----------------------------------------------------------------------
# tree route


@dataclass(frozen=True)
class SharedTripleGraph:
    """Multigraph of shared triples for one target."""

    target: tuple[int, int]
    nodes: tuple[Triple, ...]
    edges: tuple[tuple[int, int, int], ...]  # (node, node, multiplicity)


def shared_multigraph(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> SharedTripleGraph:
    cat = cat or catalog()
    t = _cell_index(target)
    edges = []
    vec = instance.vector()
    for k, n in enumerate(vec):
        if n and k != t:
            pair = cat.shared_pairs[t][k]
            if pair is not None:
                edges.append((pair[0], pair[1], n))
    return SharedTripleGraph(
        target=tuple(target), nodes=cat.triple_nodes[t], edges=tuple(edges)
    )


def tree_component_count(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> int:
    g = shared_multigraph(instance, target, cat)
    return _tree_count_raw(8, g.edges)


def is_composable_treecount(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> bool:
    t = _cell_index(target)
    return instance.vector()[t] >= tree_component_count(instance, target, cat)


# vector-level variants used by scans and the solver; same mathematics,
# no Instance wrapper on the hot path


def treecount_from_vector(
    vec: Sequence[int], target_index: int, cat: Catalog
) -> int:
    pairs = cat.shared_pairs[target_index]
    edges = []
    for k in cat.compatible_cells[target_index]:
        n = vec[k]
        if n:
            a, b = pairs[k]
            edges.append((a, b, n))
    return _tree_count_raw(8, edges)


def composable_from_vector(
    vec: Sequence[int], target_index: int, cat: Catalog
) -> bool:
    return vec[target_index] >= treecount_from_vector(vec, target_index, cat)


# ----------------------------------------------------------------------
# count-based sufficient bound


def count_bound(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> int:
    """Supply bound from capped row or column counts.

    Own count plus the best single row or column of compatible supply,
    each source capped at two (one cube covers at most two target
    triples).  A value of eight or more guarantees composability; smaller
    values decide nothing.
    """
    cat = cat or catalog()
    t = _cell_index(target)
    ti, tj = target
    vec = instance.vector()
    best_row = 0
    for r in range(1, 7):
        if r == ti:
            continue
        s = 0
        for jj in range(1, 7):
            if jj == r:
                continue
            k = CELL_INDEX[(r, jj)]
            if cat.share_table[t][k] == 2:
                s += min(vec[k], 2)
        best_row = max(best_row, s)
    best_col = 0
    for c in range(1, 7):
        if c == tj:
            continue
        s = 0
        for ii in range(1, 7):
            if ii == c:
                continue
            k = CELL_INDEX[(ii, c)]
            if cat.share_table[t][k] == 2:
                s += min(vec[k], 2)
        best_col = max(best_col, s)
    return vec[t] + max(best_row, best_col)


# ----------------------------------------------------------------------
# solution sets


def solution_set(
    instance: Instance, cat: Catalog | None = None, oracle: str = "matching"
) -> frozenset[tuple[int, int]]:
    """All table cells whose solid the instance can compose."""
    cat = cat or catalog()
    if oracle == "matching":
        test = is_composable_matching
    elif oracle == "treecount":
        test = is_composable_treecount
    else:
        raise InvalidInputError(f"unknown oracle {oracle!r}")
    return frozenset(c for c in CELLS if test(instance, c, cat))


def classify(
    instance: Instance, cat: Catalog | None = None, oracle: str = "matching"
) -> str:
    s = solution_set(instance, cat, oracle)
    if not s:
        return "infeasible"
    if len(s) == len(CELLS):
        return "universal"
    return "other"


def universal_lower_bound(cat: Catalog | None = None) -> int:
    """Smallest conceivable size of an instance that generates all varieties.

    Every target needs eight corner contributions and a single cube can
    serve its own variety plus each compatible one, so the per-cube yield
    caps the total demand.
    """
    cat = cat or catalog()
    spans = {1 + len(cat.compatible_cells[k]) for k in range(len(CELLS))}
    per_cube = max(spans)
    demand = len(CELLS) * 8
    return math.ceil(demand / per_cube)


# ----------------------------------------------------------------------
# bulk scans
#
# Corpus-wide oracle sweeps need verdicts for millions of (instance,
# target) pairs.  For a fixed small support with every count positive
# the shared-triple graph's component structure does not depend on the
# counts, and the matching question dualizes to a minimum vertex cover
# in which each cube class is either taken whole or pays for all corner
# nodes it reaches.  Both routes therefore vectorize over the axis of
# count combinations.  The per-call oracles above stay the ground truth;
# scans are expected to anchor bulk results against them on samples.


@dataclass(frozen=True)
class BulkVerdicts:
    """Verdict arrays for every count combination of one support.

    Rows follow the input combination order, columns follow CELLS.
    ``supply_bound`` holds the capped row/column bound; at least eight
    implies composable, less decides nothing.
    """

    support: tuple[tuple[int, int], ...]
    tree: object  # bool array, combinations x cells
    matching: object  # bool array, combinations x cells
    supply_bound: object  # int array, combinations x cells


def bulk_target_verdicts(
    support: Sequence[tuple[int, int]],
    counts: Sequence[Sequence[int]],
    cat: Catalog | None = None,
) -> BulkVerdicts:
    """Evaluate both oracles for many count vectors on a common support.

    ``counts`` is a combinations x support matrix of positive cube
    counts; zero is not allowed because the fixed component structure of
    the tree route assumes every support cell is present.  The cover
    enumeration is exponential in the support size, so this is meant for
    supports of a handful of cells.
    """
    import numpy as np

    cat = cat or catalog()
    sup = tuple(tuple(c) for c in support)
    if len(set(sup)) != len(sup):
        raise InvalidInputError("support lists a cell twice")
    if len(sup) > 12:
        raise InvalidInputError("bulk scan is limited to small supports")
    sup_idx = [_cell_index(c) for c in sup]
    arr = np.asarray(counts, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != len(sup):
        raise InvalidInputError("counts must be a combinations x support matrix")
    if arr.size and int(arr.min()) < 1:
        raise InvalidInputError("bulk scan needs every support count positive")
    m = arr.shape[0]
    caps = np.minimum(arr, 2)
    zeros = np.zeros(m, dtype=np.int64)
    tree = np.zeros((m, len(CELLS)), dtype=bool)
    matching = np.zeros((m, len(CELLS)), dtype=bool)
    supply = np.zeros((m, len(CELLS)), dtype=np.int64)

    for t in range(len(CELLS)):
        ti, tj = CELLS[t]
        own_pos = None
        compat: list[tuple[int, int, int]] = []
        for pos, k in enumerate(sup_idx):
            if k == t:
                own_pos = pos
            else:
                pair = cat.shared_pairs[t][k]
                if pair is not None:
                    compat.append((pos, pair[0], pair[1]))
        own = arr[:, own_pos] if own_pos is not None else zeros

        # tree route: components are fixed, a component with node count s
        # is a tree exactly when its edge multiplicities sum to s - 1
        parent = list(range(8))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for _, a, b in compat:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        comp_size: dict[int, int] = {}
        for v in range(8):
            r = find(v)
            comp_size[r] = comp_size.get(r, 0) + 1
        edge_cols: dict[int, list[int]] = {}
        for pos, a, b in compat:
            edge_cols.setdefault(find(a), []).append(pos)
        isolated = sum(1 for r in comp_size if r not in edge_cols)
        tree_comps = np.full(m, isolated, dtype=np.int64)
        for root, cols in edge_cols.items():
            tree_comps += arr[:, cols].sum(axis=1) == comp_size[root] - 1
        tree[:, t] = own >= tree_comps

        # matching route: minimum vertex cover picks a subset of cube
        # classes whole and buys every corner node the rest can reach;
        # a perfect matching exists iff no cover costs less than eight
        active: list[tuple[int, int]] = []
        if own_pos is not None:
            active.append((own_pos, 0xFF))
        for pos, a, b in compat:
            active.append((pos, (1 << a) | (1 << b)))
        cover = None
        for chosen in range(1 << len(active)):
            node_mask = 0
            cols = []
            for bit, (pos, mask) in enumerate(active):
                if chosen >> bit & 1:
                    cols.append(pos)
                else:
                    node_mask |= mask
            cost = arr[:, cols].sum(axis=1) + node_mask.bit_count()
            cover = cost if cover is None else np.minimum(cover, cost)
        matching[:, t] = cover >= 8

        # capped row/column supply bound, same lines as count_bound
        groups: dict[tuple[str, int], list[int]] = {}
        for pos, k in enumerate(sup_idx):
            if k == t or cat.share_table[t][k] != 2:
                continue
            i, j = CELLS[k]
            if i != ti:
                groups.setdefault(("r", i), []).append(pos)
            if j != tj:
                groups.setdefault(("c", j), []).append(pos)
        best = zeros
        for cols in groups.values():
            best = np.maximum(best, caps[:, cols].sum(axis=1))
        supply[:, t] = own + best

    return BulkVerdicts(support=sup, tree=tree, matching=matching, supply_bound=supply)


# ----------------------------------------------------------------------
# arrangements


@dataclass(frozen=True)
class Placement:
    """One cube assigned to one solid corner with a fixed orientation."""

    corner: tuple[int, int, int]
    source: tuple[int, int]
    copy: int
    coloring: Coloring


@dataclass(frozen=True)
class Arrangement:
    target: tuple[int, int]
    solid_coloring: Coloring
    placements: tuple[Placement, ...]


def extract_arrangement(
    instance: Instance, target: tuple[int, int], cat: Catalog | None = None
) -> Arrangement:
    """Concrete witness arrangement for a composable target.

    The matching assigns one cube per corner triple; each cube is then
    rotated so its three corner faces coincide with the solid's colors,
    which pins the orientation completely.  Raises CertificateError when
    the target is not composable.
    """
    cat = cat or catalog()
    report = max_matching(instance, target, cat)
    if not report.composable:
        raise CertificateError(f"target {tuple(target)} is not composable here")
    solid = cat.variety(*target).coloring
    nodes = cat.triple_nodes[_cell_index(target)]
    corner_of_triple: dict[Triple, tuple[int, int, int]] = {}
    for signs in cubes.CORNER_SIGNS:
        corner_of_triple[cubes.corner_triple(solid, signs)] = signs

    placements = []
    for node_idx, assigned in enumerate(report.matched):
        triple = nodes[node_idx]
        signs = corner_of_triple[triple]
        source, copy = assigned
        base = cat.variety(*source).coloring
        slots = cubes.CORNER_SLOTS[signs]
        oriented = None
        for rot in cubes.ROTATIONS:
            cand = cubes.apply_face_perm(base, rot)
            if all(cand[s] == solid[s] for s in slots):
                oriented = cand
                break
        if oriented is None:
            raise CertificateError(
                f"internal: matched cube {source} cannot realize {triple} at {signs}"
            )
        placements.append(
            Placement(corner=signs, source=source, copy=copy, coloring=oriented)
        )
    placements.sort(key=lambda p: p.corner, reverse=True)
    return Arrangement(
        target=tuple(target), solid_coloring=solid, placements=tuple(placements)
    )


def verify_arrangement(
    instance: Instance,
    target: tuple[int, int],
    arrangement: Arrangement,
    cat: Catalog | None = None,
) -> None:
    """Independent check of an arrangement; raises CertificateError on failure.

    Verifies corner coverage, exact face-color agreement on every exposed
    face, truthful source varieties and multiset usage within the instance.
    """
    cat = cat or catalog()
    if tuple(arrangement.target) != tuple(target):
        raise CertificateError("arrangement targets a different variety")
    solid = cat.variety(*target).coloring
    if arrangement.solid_coloring != solid:
        raise CertificateError("solid coloring is not the target's canonical coloring")
    if len(arrangement.placements) != 8:
        raise CertificateError("an arrangement needs exactly eight placements")
    corners_seen = set()
    usage: dict[tuple[int, int], set[int]] = {}
    for p in arrangement.placements:
        if p.corner not in cubes.CORNER_SLOTS:
            raise CertificateError(f"unknown corner {p.corner!r}")
        if p.corner in corners_seen:
            raise CertificateError(f"corner {p.corner} used twice")
        corners_seen.add(p.corner)
        coloring = cubes.validate_coloring(p.coloring)
        if cubes.canonical_coloring(coloring) != cat.variety(*p.source).coloring:
            raise CertificateError(
                f"placement at {p.corner} is not an orientation of variety {p.source}"
            )
        for slot in cubes.CORNER_SLOTS[p.corner]:
            if coloring[slot] != solid[slot]:
                raise CertificateError(
                    f"face mismatch at corner {p.corner}, slot {cubes.FACES[slot]}"
                )
        copies = usage.setdefault(tuple(p.source), set())
        if p.copy in copies:
            raise CertificateError(f"cube copy {p.source}#{p.copy} used twice")
        copies.add(p.copy)
    for source, copies in usage.items():
        available = instance.count(*source)
        if len(copies) > available or any(c >= available or c < 0 for c in copies):
            raise CertificateError(
                f"instance provides {available} cubes of {source}, arrangement wants {sorted(copies)}"
            )

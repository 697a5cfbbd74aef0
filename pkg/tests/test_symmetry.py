import math
import random
from itertools import combinations

from eightblocks import composability as co
from eightblocks import symmetry as sym
from eightblocks.instances import Instance
from eightblocks.varieties import CELL_INDEX, CELLS


def test_group_order_and_faithfulness(cat):
    g = sym.group(cat)
    assert len(g) == 1440
    perms = sym.cell_perms(cat)
    assert len(perms) == 1440
    assert len(set(perms)) == 1440  # acts faithfully on the table cells
    assert tuple(range(30)) in perms  # identity


def test_symmetry_composition_matches_cell_action(cat):
    g = sym.group(cat)
    perms = sym.cell_perms(cat)
    rng = random.Random(11)
    for _ in range(40):
        a, b = rng.randrange(1440), rng.randrange(1440)
        composed = g[a].compose(g[b])
        idx = g.index(composed)
        pa, pb, pc = perms[a], perms[b], perms[idx]
        assert all(pc[k] == pa[pb[k]] for k in range(30))


def test_inverse_perms(cat):
    perms = sym.cell_perms(cat)
    inv = sym.inverse_cell_perms(cat)
    for p, q in random.Random(12).sample(list(zip(perms, inv)), 50):
        assert all(q[p[k]] == k for k in range(30))


def test_canonical_vector_is_orbit_invariant(cat):
    rng = random.Random(13)
    perms = sym.cell_perms(cat)
    for _ in range(20):
        inst = Instance.from_pairs(
            (c, rng.randint(1, 4)) for c in rng.sample(CELLS, rng.randint(1, 5))
        )
        vec = inst.vector()
        canon = sym.canonical_vector(vec, cat)
        assert canon <= vec
        for p in rng.sample(perms, 30):
            assert sym.canonical_vector(sym.permuted_vector(vec, p), cat) == canon


def test_solution_sets_transform_with_the_group(cat):
    # a symmetry relabels which targets are composable but not how many
    rng = random.Random(14)
    g = sym.group(cat)
    for _ in range(8):
        inst = Instance.from_pairs(
            (c, rng.randint(1, 6)) for c in rng.sample(CELLS, rng.randint(2, 6))
        )
        base = co.solution_set(inst, cat)
        s = g[rng.randrange(1440)]
        moved = sym.apply_to_instance(s, inst, cat)
        expected = frozenset(s.apply_to_variety(cat.variety(*c), cat).coords for c in base)
        assert co.solution_set(moved, cat) == expected


def test_orbit_size_divides_group_order(cat):
    rng = random.Random(15)
    perms = sym.cell_perms(cat)
    for _ in range(10):
        inst = Instance.from_pairs(
            (c, rng.randint(1, 3)) for c in rng.sample(CELLS, rng.randint(1, 4))
        )
        n = sym.orbit_size(inst, cat)
        assert 1440 % n == 0
        direct = {sym.permuted_vector(inst.vector(), p) for p in perms}
        assert len(direct) == n


def test_empty_set_stabilizer_is_whole_group(cat):
    assert len(sym.stabilizer(frozenset(), cat)) == 1440
    assert len(sym.stabilizer(frozenset(CELLS), cat)) == 1440


def test_stabilizer_preserves_the_cell_set(cat):
    cells = frozenset({(1, 2), (1, 3)})
    idx = frozenset(CELL_INDEX[c] for c in cells)
    for p in sym.stabilizer_perms(cells, cat):
        assert frozenset(p[k] for k in idx) == idx


def test_canonical_supports_cover_all_small_subsets(cat):
    # one listed support per orbit of subsets with at most 2 cells
    supports = sym.canonical_supports(2, cat)
    perms = sym.cell_perms(cat)

    def orbit_key(cells):
        return min(tuple(sorted(p[k] for k in cells)) for p in perms)

    listed = [orbit_key(s) for s in supports]
    assert len(listed) == len(set(listed))
    reachable = set()
    for size in (1, 2):  # the empty support is handled outside the DFS
        for combo in combinations(range(30), size):
            reachable.add(orbit_key(combo))
    assert set(listed) == reachable
    # single-cell orbit plus the four pair types: swap, rotation,
    # mirror pair, same line
    assert len(listed) == 5


def test_orbit_vectors_partition_the_multisets(cat):
    for size in (0, 1, 2, 3):
        reps = list(sym.orbit_vectors(size, cat))
        # one representative per orbit, counted by the averaging formula
        assert len(reps) == sym.count_orbits(size, cat)
        # orbit sizes add up to the number of raw multisets
        assert sum(o for _, o in reps) == math.comb(30 + size - 1, size)
        # representatives are canonical and pairwise distinct
        vecs = {v for v, _ in reps}
        assert len(vecs) == len(reps)
        for v, _ in reps:
            assert sym.canonical_vector(v, cat) == v
            assert sum(v) == size


def test_orbit_vectors_respect_cap(cat):
    capped = list(sym.orbit_vectors(2, cat, cap=1))
    assert all(max(v) <= 1 for v, _ in capped)
    # orbits of 2-subsets: pairs sharing 0 or 2 triples, ordered or not
    assert sum(o for _, o in capped) == math.comb(30, 2)


def test_burnside_octet_count(cat):
    assert sym.count_orbits(8, cat) == 30510


def test_canonical_instance(cat):
    inst = Instance.from_pairs({(5, 6): 2, (6, 5): 1})
    canon = sym.canonical_instance(inst, cat)
    assert canon.vector() == sym.canonical_vector(inst.vector(), cat)
    assert sym.canonical_instance(canon, cat) == canon

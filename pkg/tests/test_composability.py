import random

import pytest

from eightblocks import composability as co
from eightblocks.errors import CertificateError, InvalidInputError
from eightblocks.instances import Instance
from eightblocks.varieties import CELLS

DEMO = Instance.from_pairs(
    {(1, 2): 2, (2, 6): 1, (3, 5): 1, (3, 6): 1, (5, 6): 2, (6, 4): 1, (6, 5): 1}
)
DEMO_SOLUTIONS = frozenset({(1, 2), (4, 1), (4, 3)})
INFEASIBLE_23 = Instance.from_pairs(
    {(1, 2): 7, (1, 3): 7, (1, 4): 7, (1, 5): 1, (1, 6): 1}
)
UNIVERSAL_12 = Instance.from_pairs(
    {
        (1, 2): 1, (1, 3): 1, (2, 1): 1, (2, 3): 1, (3, 1): 1, (3, 2): 1,
        (4, 5): 1, (4, 6): 1, (5, 4): 1, (5, 6): 1, (6, 4): 1, (6, 5): 1,
    }
)


def _random_instance(rng):
    k = rng.randint(1, 10)
    return Instance.from_pairs(
        (c, rng.randint(1, 8)) for c in rng.sample(CELLS, k)
    )


def test_demo_headline_verdicts(cat):
    assert co.is_composable_matching(DEMO, (1, 2), cat)
    assert co.is_composable_treecount(DEMO, (1, 2), cat)
    assert not co.is_composable_matching(DEMO, (2, 3), cat)
    assert not co.is_composable_treecount(DEMO, (2, 3), cat)


def test_demo_solution_set_frozen(cat):
    assert co.solution_set(DEMO, cat, oracle="matching") == DEMO_SOLUTIONS
    assert co.solution_set(DEMO, cat, oracle="treecount") == DEMO_SOLUTIONS
    assert co.classify(DEMO, cat) == "other"


def test_reference_extremes(cat):
    assert co.solution_set(INFEASIBLE_23, cat) == frozenset()
    assert co.classify(INFEASIBLE_23, cat) == "infeasible"
    assert co.solution_set(UNIVERSAL_12, cat) == frozenset(CELLS)
    assert co.classify(UNIVERSAL_12, cat) == "universal"


def test_eight_copies_compose_their_own_variety(cat):
    inst = Instance.from_pairs({(3, 5): 8})
    assert co.solution_set(inst, cat) == {(3, 5)}
    seven = Instance.from_pairs({(3, 5): 7})
    assert co.solution_set(seven, cat) == frozenset()


def test_oracles_agree_on_random_corpus(cat):
    rng = random.Random(404)
    for _ in range(250):
        inst = _random_instance(rng)
        target = rng.choice(CELLS)
        m = co.is_composable_matching(inst, target, cat)
        assert m == co.is_composable_treecount(inst, target, cat)
        assert m == co.hall_satisfied(inst, target, cat)


def test_hall_witness_is_valid_or_absent(cat):
    rng = random.Random(405)
    seen_violated = 0
    for _ in range(150):
        inst = _random_instance(rng)
        target = rng.choice(CELLS)
        w = co.hall_witness(inst, target, cat)
        if co.is_composable_matching(inst, target, cat):
            assert w is None
        else:
            assert w is not None and w.violated
            assert w.triples <= cat.varieties[
                co._cell_index(target)
            ].triples
            recount = co.usable_cube_count(inst, target, w.triples, cat)
            assert recount == w.usable_cubes < len(w.triples)
            seen_violated += 1
    assert seen_violated > 10


def test_count_bound_is_sufficient(cat):
    rng = random.Random(406)
    for _ in range(300):
        inst = _random_instance(rng)
        target = rng.choice(CELLS)
        if co.count_bound(inst, target, cat) >= 8:
            assert co.is_composable_matching(inst, target, cat)


def test_usable_cube_count_empty_subset(cat):
    assert co.usable_cube_count(DEMO, (1, 2), frozenset(), cat) == 0


def test_solution_set_rejects_unknown_oracle(cat):
    with pytest.raises(InvalidInputError):
        co.solution_set(DEMO, cat, oracle="guess")


def test_matching_report_details(cat):
    report = co.max_matching(DEMO, (1, 2), cat)
    assert report.composable and report.size == 8
    assert len(report.matched) == 8
    assert all(entry is not None for entry in report.matched)
    used = {}
    for source, copy in report.matched:
        used.setdefault(source, set()).add(copy)
    for source, copies in used.items():
        assert len(copies) <= DEMO.count(*source)


def test_arrangement_extract_and_verify(cat):
    for target in sorted(DEMO_SOLUTIONS):
        arr = co.extract_arrangement(DEMO, target, cat)
        co.verify_arrangement(DEMO, target, arr, cat)
    with pytest.raises(CertificateError):
        co.extract_arrangement(DEMO, (2, 3), cat)


def test_verify_arrangement_catches_tampering(cat):
    from dataclasses import replace

    arr = co.extract_arrangement(DEMO, (1, 2), cat)
    # swap one placement's coloring for a different rotation of itself
    import eightblocks.cubes as cubes

    victim = arr.placements[0]
    other = next(
        c
        for c in cubes.rotations_of(victim.coloring)
        if c != victim.coloring
    )
    bad = replace(
        arr, placements=(replace(victim, coloring=other),) + arr.placements[1:]
    )
    with pytest.raises(CertificateError):
        co.verify_arrangement(DEMO, (1, 2), bad, cat)


def test_universal_lower_bound(cat):
    assert co.universal_lower_bound(cat) == 12


def test_bulk_verdicts_match_per_call(cat):
    rng = random.Random(407)
    for _ in range(12):
        k = rng.randint(1, 3)
        support = rng.sample(CELLS, k)
        combos = [[rng.randint(1, 8) for _ in range(k)] for _ in range(25)]
        bulk = co.bulk_target_verdicts(support, combos, cat)
        for r, counts in enumerate(combos):
            inst = Instance.from_pairs(zip(support, counts))
            for t, cell in enumerate(CELLS):
                assert bool(bulk.matching[r, t]) == co.is_composable_matching(
                    inst, cell, cat
                )
                assert bool(bulk.tree[r, t]) == co.is_composable_treecount(
                    inst, cell, cat
                )
                assert int(bulk.supply_bound[r, t]) == co.count_bound(
                    inst, cell, cat
                )


def test_bulk_verdicts_input_validation(cat):
    with pytest.raises(InvalidInputError):
        co.bulk_target_verdicts([(1, 2), (1, 2)], [[1, 1]], cat)
    with pytest.raises(InvalidInputError):
        co.bulk_target_verdicts([(1, 2)], [[0]], cat)
    with pytest.raises(InvalidInputError):
        co.bulk_target_verdicts([(1, 2)], [[1, 2]], cat)

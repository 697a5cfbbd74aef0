"""Packaged experiment reproductions.

Each operation here re-derives a headline fact about colored-cube
instances from scratch: the bundled reference instances behave as
documented, small instances compose nothing, the two oracles agree on
large corpora, the eight-cube census tops out, the single-row scan is
extremal, and the three named searches reach their verdicts.  Every
witness that leaves this module is re-verified by the matching oracle
first; a failed check raises ExperimentError rather than returning a
doctored report.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path

from .composability import (
    bulk_target_verdicts,
    composable_from_vector,
    count_bound,
    extract_arrangement,
    hall_witness,
    is_composable_matching,
    is_composable_treecount,
    solution_set,
    universal_lower_bound,
    usable_cube_count,
    verify_arrangement,
)
from .errors import CertificateError, ExperimentError, InvalidInputError
from .instances import Instance
from .model import (
    Model,
    check_assignment,
    existence_model,
    max_infeasible_model,
    min_universal_model,
)
from .solver import SearchOptions, SearchResult, solve, split_subproblems
from .symmetry import count_orbits, orbit_vectors
from .varieties import CELL_INDEX, CELLS, Catalog, catalog


# ----------------------------------------------------------------------
# reference instances

#: nine cubes spread over seven varieties; composes (1,2) but not (2,3)
NINE_CUBE_DEMO = Instance.from_pairs(
    {(1, 2): 2, (2, 6): 1, (3, 5): 1, (3, 6): 1, (5, 6): 2, (6, 4): 1, (6, 5): 1}
)

#: largest known instance composing nothing: one row, entries 7,7,7,1,1
MAX_INFEASIBLE_23 = Instance.from_pairs(
    {(1, 2): 7, (1, 3): 7, (1, 4): 7, (1, 5): 1, (1, 6): 1}
)

#: twelve cubes on two diagonal blocks; composes every variety
MIN_UNIVERSAL_12 = Instance.from_pairs(
    {
        (1, 2): 1, (1, 3): 1, (2, 1): 1, (2, 3): 1, (3, 1): 1, (3, 2): 1,
        (4, 5): 1, (4, 6): 1, (5, 4): 1, (5, 6): 1, (6, 4): 1, (6, 5): 1,
    }
)


def reference_instances() -> dict[str, Instance]:
    """Named bundled instances, keyed by what they demonstrate."""
    return {
        "nine-cube-demo": NINE_CUBE_DEMO,
        "max-infeasible-23": MAX_INFEASIBLE_23,
        "min-universal-12": MIN_UNIVERSAL_12,
    }


@dataclass(frozen=True)
class ReferenceCheck:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class ReferenceReport:
    checks: tuple[ReferenceCheck, ...]
    demo_solution_set: frozenset[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def verify_reference_facts(cat: Catalog | None = None) -> ReferenceReport:
    """Re-derive the headline facts about the three reference instances.

    Runs every check with both oracles; any failure raises
    ExperimentError naming the checks, since it signals a defect in the
    table construction or the oracles rather than in the instances.
    """
    cat = cat or catalog()
    checks: list[ReferenceCheck] = []

    def add(name: str, ok: bool, detail: str = "") -> None:
        checks.append(ReferenceCheck(name, bool(ok), detail))

    demo = NINE_CUBE_DEMO
    add(
        "demo-composes-(1,2)",
        is_composable_matching(demo, (1, 2), cat)
        and is_composable_treecount(demo, (1, 2), cat),
        "both oracles",
    )
    add(
        "demo-misses-(2,3)",
        not is_composable_matching(demo, (2, 3), cat)
        and not is_composable_treecount(demo, (2, 3), cat),
        "both oracles",
    )
    add("demo-size", demo.size == 9, f"size {demo.size}")
    demo_set = solution_set(demo, cat, oracle="matching")
    add(
        "demo-oracle-agreement",
        demo_set == solution_set(demo, cat, oracle="treecount"),
        f"solution set {sorted(demo_set)}",
    )
    arranged = True
    arr_detail = "arrangements verified"
    for target in sorted(demo_set):
        try:
            verify_arrangement(demo, target, extract_arrangement(demo, target, cat), cat)
        except CertificateError as exc:
            arranged = False
            arr_detail = f"{target}: {exc}"
            break
    add("demo-arrangements", arranged, arr_detail)

    inf = MAX_INFEASIBLE_23
    add("infeasible-23-size", inf.size == 23, f"size {inf.size}")
    add(
        "infeasible-23-empty",
        not solution_set(inf, cat, oracle="matching")
        and not solution_set(inf, cat, oracle="treecount"),
        "both oracles",
    )
    halls_ok = True
    hall_detail = "violated subset for every target"
    for target in CELLS:
        w = hall_witness(inf, target, cat)
        if w is None or not w.violated:
            halls_ok = False
            hall_detail = f"no violated subset at {target}"
            break
    add("infeasible-23-witnesses", halls_ok, hall_detail)

    uni = MIN_UNIVERSAL_12
    add("universal-12-size", uni.size == 12, f"size {uni.size}")
    full = frozenset(CELLS)
    add(
        "universal-12-complete",
        solution_set(uni, cat, oracle="matching") == full
        and solution_set(uni, cat, oracle="treecount") == full,
        "both oracles",
    )
    bound = universal_lower_bound(cat)
    add("universal-lower-bound", bound == 12 == uni.size, f"bound {bound}")

    report = ReferenceReport(checks=tuple(checks), demo_solution_set=demo_set)
    failed = [c.name for c in checks if not c.ok]
    if failed:
        raise ExperimentError("reference checks failed: " + ", ".join(failed))
    return report


# ----------------------------------------------------------------------
# exhaustive small-size sweep


def verify_small_sizes_infeasible(
    limit: int = 7, cat: Catalog | None = None, anchor_stride: int = 97
) -> int:
    """Confirm no instance of at most `limit` cubes composes anything.

    Sweeps one representative per symmetry orbit, deciding all thirty
    targets with the tree oracle and re-checking every
    `anchor_stride`-th representative with the matching oracle.
    Returns the number of representatives checked.
    """
    cat = cat or catalog()
    if limit >= 8:
        raise InvalidInputError("eight cubes can compose a solid; keep the limit below")
    checked = 0
    for size in range(limit + 1):
        for vec, _orbit in orbit_vectors(size, cat):
            for t in range(len(CELLS)):
                if composable_from_vector(vec, t, cat):
                    raise ExperimentError(
                        f"size-{size} instance {vec} composes {CELLS[t]}"
                    )
            if checked % anchor_stride == 0:
                inst = Instance.from_vector(vec)
                if solution_set(inst, cat, oracle="matching"):
                    raise ExperimentError(
                        f"matching oracle disagrees on size-{size} instance {vec}"
                    )
            checked += 1
    return checked


# ----------------------------------------------------------------------
# oracle agreement corpus


@dataclass(frozen=True)
class AgreementReport:
    """Tally of a dual-oracle sweep; all *disagreement* fields must be zero."""

    corpus_supports: int
    corpus_instances: int
    corpus_pairs: int
    corpus_disagreements: int
    corpus_bound_violations: int
    anchored_comparisons: int
    random_instances: int
    random_disagreements: int
    random_bound_violations: int
    hall_witnesses_checked: int

    @property
    def ok(self) -> bool:
        return not (
            self.corpus_disagreements
            or self.corpus_bound_violations
            or self.random_disagreements
            or self.random_bound_violations
        )


def oracle_agreement(
    random_count: int = 100_000,
    seed: int = 20260823,
    anchors_per_size: int = 400,
    sizes: tuple[int, ...] = (1, 2, 3),
    support_limit: int | None = None,
    cat: Catalog | None = None,
    progress: Callable[[str, int, int], None] | None = None,
) -> AgreementReport:
    """Compare the two oracles across a dense corpus plus random draws.

    The dense part covers every instance supported on at most three
    varieties with entries one to eight, evaluated in bulk; a seeded
    sample of those verdicts is re-derived with the per-call oracles so
    the vectorized path stays anchored to the ground truth.  The random
    part draws `random_count` seeded instances, compares both oracles on
    a random target each, validates the returned violated subset
    whenever a target is not composable, and checks that a capped
    row/column supply of eight or more always means composable.
    `sizes` and `support_limit` narrow the dense corpus for smoke runs;
    the defaults cover it completely.
    """
    import numpy as np

    cat = cat or catalog()
    rng = random.Random(seed)

    supports = instances = pairs = disagreements = bound_violations = 0
    anchored = 0
    for s in sizes:
        mesh = np.indices((8,) * s).reshape(s, -1).T + 1
        combos = list(itertools.combinations(CELLS, s))
        if support_limit is not None:
            combos = combos[:support_limit]
        anchor_rate = min(1.0, anchors_per_size / len(combos))
        for done, sup in enumerate(combos):
            bv = bulk_target_verdicts(sup, mesh, cat)
            tree = np.asarray(bv.tree)
            matching = np.asarray(bv.matching)
            disagreements += int((tree != matching).sum())
            bound_violations += int(
                ((np.asarray(bv.supply_bound) >= 8) & ~matching).sum()
            )
            supports += 1
            instances += mesh.shape[0]
            pairs += tree.size
            if rng.random() < anchor_rate:
                row = rng.randrange(mesh.shape[0])
                t = rng.randrange(len(CELLS))
                inst = Instance.from_pairs(zip(sup, (int(v) for v in mesh[row])))
                if bool(matching[row, t]) != is_composable_matching(inst, CELLS[t], cat):
                    disagreements += 1
                if bool(tree[row, t]) != is_composable_treecount(inst, CELLS[t], cat):
                    disagreements += 1
                if int(bv.supply_bound[row, t]) != count_bound(inst, CELLS[t], cat):
                    bound_violations += 1
                anchored += 3
            if progress and done % 500 == 0:
                progress(f"support size {s}", done, len(combos))

    rand_disagreements = rand_bound_violations = halls = 0
    for done in range(random_count):
        k = rng.randint(1, 10)
        chosen = rng.sample(CELLS, k)
        inst = Instance.from_pairs((c, rng.randint(1, 8)) for c in chosen)
        target = rng.choice(CELLS)
        by_matching = is_composable_matching(inst, target, cat)
        if by_matching != is_composable_treecount(inst, target, cat):
            rand_disagreements += 1
        if count_bound(inst, target, cat) >= 8 and not by_matching:
            rand_bound_violations += 1
        if not by_matching:
            w = hall_witness(inst, target, cat)
            recount = (
                usable_cube_count(inst, target, w.triples, cat) if w else -1
            )
            if w is None or len(w.triples) <= recount or recount != w.usable_cubes:
                raise ExperimentError(
                    f"invalid violated subset for {inst.to_text('sparse')!r} at {target}"
                )
            halls += 1
        if progress and done % 20_000 == 0:
            progress("random corpus", done, random_count)

    return AgreementReport(
        corpus_supports=supports,
        corpus_instances=instances,
        corpus_pairs=pairs,
        corpus_disagreements=disagreements,
        corpus_bound_violations=bound_violations,
        anchored_comparisons=anchored,
        random_instances=random_count,
        random_disagreements=rand_disagreements,
        random_bound_violations=rand_bound_violations,
        hall_witnesses_checked=halls,
    )


# ----------------------------------------------------------------------
# eight-cube census


@dataclass(frozen=True)
class CensusReport:
    #: rows of (solution-set size, orbit count, raw instance count)
    histogram: tuple[tuple[int, int, int], ...]
    max_size: int
    example: Instance
    orbit_total: int
    raw_total: int
    wall_time: float


def _count_solutions(vec: tuple[int, ...], cat: Catalog) -> int:
    return sum(
        1 for t in range(len(CELLS)) if composable_from_vector(vec, t, cat)
    )


def _census_chunk(
    chunk: list[tuple[tuple[int, ...], int]]
) -> tuple[dict[int, list[int]], tuple[int, tuple[int, ...]] | None]:
    cat = catalog()
    hist: dict[int, list[int]] = {}
    best: tuple[int, tuple[int, ...]] | None = None
    for vec, orbit in chunk:
        n = _count_solutions(vec, cat)
        row = hist.setdefault(n, [0, 0])
        row[0] += 1
        row[1] += orbit
        if best is None or n > best[0] or (n == best[0] and vec < best[1]):
            best = (n, vec)
    return hist, best


def octet_census(
    cat: Catalog | None = None,
    jobs: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> CensusReport:
    """Solution-set size distribution over every eight-cube instance.

    Enumerates one representative per symmetry orbit and weighs it by
    its orbit size, so the raw column reconstructs the full multiset
    count.  The report is cross-checked before return: raw total,
    orbit total against the cycle-count formula, and the attaining
    example against the matching oracle.
    """
    cat = cat or catalog()
    start = time.monotonic()
    reps = list(orbit_vectors(8, cat))

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        step = max(1, len(reps) // (jobs * 4))
        chunks = [reps[i : i + step] for i in range(0, len(reps), step)]
        hist: dict[int, list[int]] = {}
        best: tuple[int, tuple[int, ...]] | None = None
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part_hist, part_best in pool.map(_census_chunk, chunks):
                for n, (orbits, raw) in part_hist.items():
                    row = hist.setdefault(n, [0, 0])
                    row[0] += orbits
                    row[1] += raw
                if part_best is not None and (
                    best is None
                    or part_best[0] > best[0]
                    or (part_best[0] == best[0] and part_best[1] < best[1])
                ):
                    best = part_best
    else:
        hist = {}
        best = None
        for done, (vec, orbit) in enumerate(reps):
            n = _count_solutions(vec, cat)
            row = hist.setdefault(n, [0, 0])
            row[0] += 1
            row[1] += orbit
            if best is None or n > best[0] or (n == best[0] and vec < best[1]):
                best = (n, vec)
            if progress and done % 2000 == 0:
                progress(done, len(reps))

    orbit_total = sum(r[0] for r in hist.values())
    raw_total = sum(r[1] for r in hist.values())
    expected_raw = math.comb(len(CELLS) + 8 - 1, 8)
    if raw_total != expected_raw:
        raise ExperimentError(
            f"census raw total {raw_total} != multiset count {expected_raw}"
        )
    if orbit_total != count_orbits(8, cat):
        raise ExperimentError("census orbit total disagrees with the cycle count")
    example = Instance.from_vector(best[1])
    if len(solution_set(example, cat, oracle="matching")) != best[0]:
        raise ExperimentError("census example fails matching-oracle re-verification")
    histogram = tuple(
        (n, hist[n][0], hist[n][1]) for n in sorted(hist)
    )
    return CensusReport(
        histogram=histogram,
        max_size=best[0],
        example=example,
        orbit_total=orbit_total,
        raw_total=raw_total,
        wall_time=time.monotonic() - start,
    )


def census_csv(report: CensusReport) -> str:
    lines = ["solution_set_size,orbit_count,raw_count"]
    for n, orbits, raw in report.histogram:
        lines.append(f"{n},{orbits},{raw}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# single-row extremal scan


@dataclass(frozen=True)
class RowScanReport:
    row: int
    scanned: int
    max_size: int
    maximizers: tuple[Instance, ...]


def row_restricted_max_infeasible(
    row: int = 1, cat: Catalog | None = None
) -> RowScanReport:
    """Largest instance on one table row that composes nothing.

    Scans all 8^5 entry combinations 0..7 on the row's five cells.  An
    entry of eight or more would compose that cell's own variety
    outright, so the cap loses no infeasible instances.
    """
    cat = cat or catalog()
    if not 1 <= row <= 6:
        raise InvalidInputError(f"row {row} out of range")
    cells = [(row, j) for j in range(1, 7) if j != row]
    idx = [CELL_INDEX[c] for c in cells]
    vec = [0] * len(CELLS)
    targets = range(len(CELLS))
    best = -1
    winners: list[tuple[int, ...]] = []
    for counts in itertools.product(range(8), repeat=len(cells)):
        for k, n in zip(idx, counts):
            vec[k] = n
        if any(composable_from_vector(vec, t, cat) for t in targets):
            continue
        total = sum(counts)
        if total > best:
            best = total
            winners = [counts]
        elif total == best:
            winners.append(counts)
    maximizers = tuple(
        Instance.from_pairs(
            (c, n) for c, n in zip(cells, counts) if n
        )
        for counts in winners
    )
    return RowScanReport(
        row=row, scanned=8 ** len(cells), max_size=best, maximizers=maximizers
    )


# ----------------------------------------------------------------------
# named searches


def _verify_generates_exactly(
    witness: Instance, required: frozenset[tuple[int, int]], cat: Catalog
) -> None:
    got = solution_set(witness, cat, oracle="matching")
    if got != required:
        raise ExperimentError(
            f"witness composes {sorted(got)} instead of {sorted(required)}"
        )


def run_existence(
    required: Iterable[tuple[int, int]],
    mode: str = "capped",
    options: SearchOptions | None = None,
    cat: Catalog | None = None,
    checkpoint: str | Path | None = None,
    split_depth: int = 2,
) -> SearchResult:
    """Search for an instance whose composable set is exactly `required`."""
    cat = cat or catalog()
    m = existence_model(required, mode, cat)
    if checkpoint is not None:
        result = checkpointed_solve(m, checkpoint, options, split_depth, cat)
    else:
        result = solve(m, options, cat)
    if result.witness is not None:
        _verify_generates_exactly(result.witness, m.required, cat)
    return result


def run_max_infeasible(
    size: int,
    mode: str = "full",
    options: SearchOptions | None = None,
    cat: Catalog | None = None,
    checkpoint: str | Path | None = None,
    split_depth: int = 2,
) -> SearchResult:
    """Search for a `size`-cube instance that composes nothing."""
    cat = cat or catalog()
    m = max_infeasible_model(size, mode, cat)
    if checkpoint is not None:
        result = checkpointed_solve(m, checkpoint, options, split_depth, cat)
    else:
        result = solve(m, options, cat)
    if result.witness is not None:
        if result.witness.size != size:
            raise ExperimentError(
                f"witness has {result.witness.size} cubes, wanted {size}"
            )
        _verify_generates_exactly(result.witness, frozenset(), cat)
    return result


def run_min_universal(
    options: SearchOptions | None = None, cat: Catalog | None = None
) -> SearchResult:
    """Minimize the size of an instance that composes every variety."""
    cat = cat or catalog()
    result = solve(min_universal_model(cat), options, cat)
    if result.witness is not None:
        _verify_generates_exactly(result.witness, frozenset(CELLS), cat)
        if result.objective != result.witness.size:
            raise ExperimentError("optimal objective disagrees with witness size")
    return result


# ----------------------------------------------------------------------
# checkpointed long runs


def checkpointed_solve(
    model: Model,
    checkpoint: str | Path,
    options: SearchOptions | None = None,
    split_depth: int = 2,
    cat: Catalog | None = None,
) -> SearchResult:
    """Decision solve split into subproblems with progress on disk.

    The model is partitioned by fixing its first free cells; each
    subproblem verdict is appended to the checkpoint file as one JSON
    line, so an interrupted run resumes where it stopped.  Budgets in
    `options` apply per subproblem; subproblems recorded as timed out
    are retried on resume.  The first satisfiable subproblem in split
    order ends the run.
    """
    if model.objective is not None:
        raise InvalidInputError("checkpointing covers decision models only")
    cat = cat or catalog()
    path = Path(checkpoint)
    subs = split_subproblems(model, split_depth)
    # restricted variants share a builder name, so identity needs the domains
    header = {
        "model": model.name,
        "domains": [list(d) for d in model.domains()],
        "split_depth": split_depth,
        "subproblems": len(subs),
    }

    done: dict[int, dict] = {}
    fresh = True
    if path.exists() and path.stat().st_size:
        lines = path.read_text().splitlines()
        try:
            stored = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise ExperimentError(f"unreadable checkpoint header: {exc}") from None
        if stored != header:
            raise ExperimentError(
                f"checkpoint {path} belongs to a different run: {stored}"
            )
        fresh = False
        for line in lines[1:]:
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                break  # torn final write from an interrupted run
            done[rec["index"]] = rec

    nodes = 0
    wall = 0.0
    prunes: dict[str, int] = {}
    sat_vec: list[int] | None = None
    timed_out = False

    with path.open("a") as fh:
        if fresh:
            fh.write(json.dumps(header) + "\n")
            fh.flush()
        for i, sub in enumerate(subs):
            rec = done.get(i)
            if rec is None or rec["status"] == "timeout":
                r = solve(sub, options, cat)
                rec = {
                    "index": i,
                    "status": r.status,
                    "nodes": r.nodes,
                    "wall_time": r.wall_time,
                    "prunes": r.prunes,
                    "witness": list(r.witness.vector()) if r.witness else None,
                }
                fh.write(json.dumps(rec) + "\n")
                fh.flush()
            nodes += rec["nodes"]
            wall += rec["wall_time"]
            for k, v in rec.get("prunes", {}).items():
                prunes[k] = prunes.get(k, 0) + v
            if rec["status"] == "sat":
                sat_vec = rec["witness"]
                break
            if rec["status"] == "timeout":
                timed_out = True

    if sat_vec is not None:
        witness = Instance.from_vector(sat_vec)
        confirm = check_assignment(model, witness)
        if not confirm.ok:
            raise ExperimentError(
                f"checkpointed witness fails verification: {confirm.violations[:3]}"
            )
        status = "sat"
    else:
        witness = None
        status = "timeout" if timed_out else "unsat"
    return SearchResult(
        status=status,
        witness=witness,
        objective=None,
        nodes=nodes,
        prunes=dict(sorted(prunes.items())),
        wall_time=wall,
        complete=status in ("sat", "unsat"),
    )


# ----------------------------------------------------------------------
# open-ended exploration


@dataclass(frozen=True)
class ExplorationEntry:
    label: str
    targets: tuple[tuple[int, int], ...]
    status: str
    nodes: int
    wall_time: float
    witness: Instance | None


def _family_sets(
    spec: Mapping[str, object]
) -> list[tuple[str, frozenset[tuple[int, int]]]]:
    family = spec.get("family", "rows")
    if family == "empty":
        return [("empty", frozenset())]
    if family == "all":
        return [("all", frozenset(CELLS))]
    if family == "singletons":
        limit = spec.get("limit")
        cells = CELLS[: int(limit)] if limit else CELLS
        return [(f"({i},{j})", frozenset({(i, j)})) for i, j in cells]
    if family == "rows":
        return [
            (f"row-{r}", frozenset((r, j) for j in range(1, 7) if j != r))
            for r in range(1, 7)
        ]
    if family == "columns":
        return [
            (f"col-{c}", frozenset((i, c) for i in range(1, 7) if i != c))
            for c in range(1, 7)
        ]
    if family == "explicit":
        sets = spec.get("sets")
        if not sets:
            raise InvalidInputError("explicit family needs a 'sets' entry")
        out = []
        for k, cells in enumerate(sets):
            out.append((f"set-{k}", frozenset(tuple(c) for c in cells)))
        return out
    raise InvalidInputError(f"unknown family {family!r}")


def explore_open_problems(
    spec: Mapping[str, object], cat: Catalog | None = None
) -> tuple[ExplorationEntry, ...]:
    """Tabulate existence verdicts for a family of target sets.

    `spec` picks the family ('empty', 'all', 'singletons', 'rows',
    'columns', 'explicit' with 'sets') plus optional 'mode',
    'node_budget', 'time_budget', 'jobs' and, for singletons, 'limit'.
    Exploratory data only; timeouts are recorded, not retried.
    """
    cat = cat or catalog()
    options = SearchOptions(
        node_budget=spec.get("node_budget"),
        time_budget=spec.get("time_budget"),
        jobs=int(spec.get("jobs", 1)),
    )
    mode = str(spec.get("mode", "capped"))
    entries = []
    for label, targets in _family_sets(spec):
        result = run_existence(targets, mode=mode, options=options, cat=cat)
        entries.append(
            ExplorationEntry(
                label=label,
                targets=tuple(sorted(targets)),
                status=result.status,
                nodes=result.nodes,
                wall_time=result.wall_time,
                witness=result.witness,
            )
        )
    return tuple(entries)

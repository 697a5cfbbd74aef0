"""Command-line behavior: exit codes, machine records, determinism."""

import pytest

from eightblocks.cli import _build_parser, main, parse_machine_report
from eightblocks.errors import InvalidInputError

DEMO_SPARSE = """\
# nine cubes
1 2 2
2 6 1
3 5 1
3 6 1
5 6 2
6 4 1
6 5 1
"""


@pytest.fixture
def demo_file(tmp_path):
    f = tmp_path / "demo.txt"
    f.write_text(DEMO_SPARSE)
    return str(f)


def test_table_text(capsys):
    assert main(["table"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert len(lines) == 31  # header plus thirty varieties
    assert any(l.startswith("(1,2)") for l in lines)


def test_table_machine_round_trips(capsys):
    assert main(["table", "--format", "machine"]) == 0
    rec = parse_machine_report(capsys.readouterr().out)
    assert rec["varieties"] == 30 and rec["triples"] == 40
    v12 = rec["variety_1_2"]
    assert len(v12["coloring"]) == 6
    assert len(v12["triples"]) == 8


def test_table_bad_format_exits_2():
    with pytest.raises(SystemExit) as e:
        main(["table", "--format", "bogus"])
    assert e.value.code == 2


def test_check_demo(demo_file, capsys):
    assert main(["check", demo_file, "--machine"]) == 0
    rec = parse_machine_report(capsys.readouterr().out)
    assert rec["size"] == 9
    assert rec["solution_count"] == 3
    assert rec["solution_set"] == [[1, 2], [4, 1], [4, 3]]
    assert rec["classification"] == "other"


def test_check_dense_equals_sparse(demo_file, tmp_path, capsys):
    main(["check", demo_file, "--machine"])
    sparse_out = capsys.readouterr().out
    dense = tmp_path / "demo-dense.txt"
    dense.write_text(
        "0 2 0 0 0 0\n"
        "0 0 0 0 0 1\n"
        "0 0 0 0 1 1\n"
        "0 0 0 0 0 0\n"
        "0 0 0 0 0 2\n"
        "0 0 0 1 1 0\n"
    )
    main(["check", str(dense), "--machine"])
    assert capsys.readouterr().out == sparse_out


def test_check_certificates_and_witnesses(demo_file, capsys):
    assert main(["check", demo_file, "--certificates", "--witnesses",
                 "--machine"]) == 0
    rec = parse_machine_report(capsys.readouterr().out)
    arr = rec["arrangement_1_2"]
    assert len(arr) == 8
    assert {tuple(p["corner"]) for p in arr} == {
        (x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)
    }
    blocked = [k for k in rec if k.startswith("blocked_")]
    assert len(blocked) == 27
    w23 = rec["blocked_2_3"]
    assert w23["usable_cubes"] < len(w23["triples"])


def test_check_missing_file_exits_3(tmp_path):
    assert main(["check", str(tmp_path / "nope.txt")]) == 3


def test_check_malformed_file_exits_3(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("1 1 4\n")
    assert main(["check", str(f)]) == 3


def test_search_existence_machine(capsys):
    rc = main(["search", "existence", "--solutions", "1,2", "--machine"])
    assert rc == 0
    rec = parse_machine_report(capsys.readouterr().out)
    assert rec["status"] == "sat" and rec["complete"] is True
    assert rec["witness_size"] >= 8
    matrix = rec["witness"]
    assert len(matrix) == 6 and all(len(row) == 6 for row in matrix)
    assert sum(sum(row) for row in matrix) == rec["witness_size"]


def test_search_existence_none_is_empty_instance(capsys):
    rc = main(["search", "existence", "--solutions", "none", "--machine"])
    assert rc == 0
    rec = parse_machine_report(capsys.readouterr().out)
    assert rec["status"] == "sat"
    assert rec["witness_size"] == 0


def test_search_existence_deterministic_bytes(capsys):
    argv = ["search", "existence", "--solutions", "3,4", "--machine",
            "--seedless-deterministic"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    assert "wall_time" not in first


def test_search_existence_text_output(capsys):
    assert main(["search", "existence", "--solutions", "2,4"]) == 0
    out = capsys.readouterr().out
    assert "status: sat" in out
    assert "witness:" in out


def test_search_existence_bad_target_exits_2(capsys):
    assert main(["search", "existence", "--solutions", "1,1"]) == 2
    assert main(["search", "existence", "--solutions", "1,2,3"]) == 2


def test_search_max_infeasible(capsys):
    rc = main(["search", "max-infeasible", "--size", "9", "--machine"])
    assert rc == 0
    rec = parse_machine_report(capsys.readouterr().out)
    assert rec["status"] == "sat" and rec["witness_size"] == 9


def test_search_budget_timeout_exits_4(capsys):
    rc = main(["search", "min-universal", "--node-budget", "5", "--machine"])
    assert rc == 4
    rec = parse_machine_report(capsys.readouterr().out)
    assert rec["status"] == "timeout" and rec["complete"] is False


def test_jobs_env_default(monkeypatch):
    monkeypatch.setenv("EIGHTBLOCKS_JOBS", "3")
    args = _build_parser().parse_args(
        ["search", "existence", "--solutions", "1,2"]
    )
    assert args.jobs == 3
    monkeypatch.delenv("EIGHTBLOCKS_JOBS")
    args = _build_parser().parse_args(
        ["search", "existence", "--solutions", "1,2", "--jobs", "2"]
    )
    assert args.jobs == 2


def test_scan_row_machine(capsys):
    rc = main(["scan", "row-infeasible", "--row", "2", "--machine"])
    assert rc == 0
    rec = parse_machine_report(capsys.readouterr().out)
    assert rec["max_infeasible_size"] == 23
    assert rec["maximizer_count"] == 10
    assert rec["entry_multisets"] == [[7, 7, 7, 1, 1]]
    assert rec["scanned"] == 8**5


def test_scan_row_out_of_range_exits_2(capsys):
    assert main(["scan", "row-infeasible", "--row", "9"]) == 2


def test_export_lp_to_file(tmp_path, capsys):
    out = tmp_path / "model.lp"
    rc = main(["export", "min-universal", "--format", "lp", "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert text.startswith("\\ model: min-universal")
    assert "Generals" in text and text.rstrip().endswith("End")


def test_export_neutral_to_stdout(capsys):
    rc = main(["export", "existence", "--format", "neutral",
               "--solutions", "1,2"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("model existence[(1,2)|capped]")


def test_export_dimacs_decision(tmp_path):
    out = tmp_path / "model.cnf"
    rc = main(["export", "max-infeasible", "--format", "dimacs",
               "--size", "9", "--mode", "capped", "--out", str(out)])
    assert rc == 0
    assert "p cnf " in out.read_text()


def test_export_usage_errors(capsys):
    assert main(["export", "existence", "--format", "lp"]) == 2
    assert main(["export", "max-infeasible", "--format", "lp"]) == 2
    assert main(["export", "min-universal", "--format", "dimacs"]) == 2
    assert main(["export", "existence", "--format", "lp",
                 "--solutions", "1,2"]) == 2  # disjunctive, no LP form


def test_parse_machine_report_errors():
    with pytest.raises(InvalidInputError):
        parse_machine_report("no separator here")
    with pytest.raises(InvalidInputError):
        parse_machine_report("key=not json at all")
    with pytest.raises(InvalidInputError):
        parse_machine_report("=5")
    assert parse_machine_report("") == {}
    assert parse_machine_report('a=1\n\nb="x"\n') == {"a": 1, "b": "x"}

import json

import pytest

from reference_data import N105_F, N120_F, PERIODIC_30, SPORADIC_30
from reinhardt.cli import EXIT_BUDGET, EXIT_EXPECT, EXIT_OK, EXIT_USAGE, PolyRecord, build_parser, main
from reinhardt.seqcore import TernarySeq

GOLDEN_120_INDEX = 7012649473


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse-level usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_construct_30(capsys):
    code, out, _ = run(capsys, "construct", "--n", "30", "--p", "3", "--q", "5", "--c", "1,1")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 256
    recs = [PolyRecord.from_json(x) for x in lines]
    assert len({r.coeffs for r in recs}) == 256
    assert {r.s for r in recs} == {1, -1}
    assert PolyRecord.from_json(recs[3].to_json()) == recs[3]


def test_construct_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        assert main(["construct", "--n", "45", "--p", "3", "--q", "5", "--c", "1,2", "--s", "1",
                     "-o", str(path)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 4096


def test_construct_120_contains_golden(capsys):
    code, out, _ = run(capsys, "construct", "--n", "120", "--p", "3", "--q", "5", "--c", "1,3,2,2",
                       "--s", "1", "--start", str(GOLDEN_120_INDEX - 50), "--limit", "100")
    assert code == EXIT_OK
    golden = str(TernarySeq.parse(N120_F))
    recs = [PolyRecord.from_json(x) for x in out.splitlines()]
    assert len(recs) == 100
    hit = [r for r in recs if r.coeffs == golden]
    assert len(hit) == 1 and hit[0].index == GOLDEN_120_INDEX and hit[0].sporadic


def test_construct_start_and_limit(capsys):
    _, full, _ = run(capsys, "construct", "--n", "30", "--p", "3", "--q", "5", "--c", "1,1")
    _, part, _ = run(capsys, "construct", "--n", "30", "--p", "3", "--q", "5", "--c", "1,1",
                     "--start", "100", "--limit", "50")
    lines = full.splitlines()
    # 28 records left in the s=+1 stream, then 22 from s=-1 starting at the same index
    assert part.splitlines() == lines[100:128] + lines[228:250]
    assert run(capsys, "construct", "--n", "30", "--p", "3", "--q", "5", "--c", "1,1",
               "--start", "128")[0] == EXIT_USAGE


def test_construct_bad_spec(capsys):
    code, _, err = run(capsys, "construct", "--n", "30", "--p", "3", "--q", "5", "--c", "1,2")
    assert code == EXIT_USAGE and "error" in err


def test_census_expect(capsys):
    code, out, _ = run(capsys, "census", "--n", "30", "--expect", "E1=3")
    assert code == EXIT_OK and json.loads(out)["E1"] == 3
    code, _, err = run(capsys, "census", "--n", "30", "--expect", "E1=4")
    assert code == EXIT_EXPECT and "E1=3" in err


def test_census_brute_force(capsys):
    code, out, _ = run(capsys, "census", "--n", "30", "--mode", "brute-force",
                       "--expect", "E1=3", "--expect", "E0=38")
    assert code == EXIT_OK
    assert json.loads(out)["E0"] == 38


def test_census_budget_refusal(capsys):
    code, _, err = run(capsys, "census", "--n", "105")
    assert code == EXIT_BUDGET and "--budget-override" in err
    code, _, _ = run(capsys, "census", "--n", "105", "--mode", "brute-force", "--m", "20")
    assert code == EXIT_BUDGET


def test_census_classes_file(capsys, tmp_path):
    path = tmp_path / "classes.txt"
    assert main(["census", "--n", "45", "--classes", str(path)]) == EXIT_OK
    capsys.readouterr()
    lines = [x for x in path.read_text().splitlines() if x]
    assert len(lines) >= 144


def test_census_usage_errors(capsys):
    assert run(capsys, "census", "--n", "30", "--expect", "E2=1")[0] == EXIT_USAGE
    assert run(capsys, "census", "--n", "30", "--workers", "0")[0] == EXIT_USAGE
    assert run(capsys, "census", "--n", "30", "--mode", "brute-force", "--both-signs")[0] == EXIT_USAGE
    assert run(capsys, "census", "--n", "27")[0] == EXIT_USAGE


def test_workers_env_default(monkeypatch):
    monkeypatch.setenv("REINHARDT_WORKERS", "3")
    args = build_parser().parse_args(["census", "--n", "30"])
    assert args.workers == 3


def test_verify_regular_pentagon(capsys):
    code, out, _ = run(capsys, "verify", "+-+-+")
    assert code == EXIT_OK
    assert "Reinhardt, n=5, l=5" in out
    # the regular polygon counts as periodic
    assert "periodic? yes" in out


def test_verify_sporadic_30(capsys):
    comp = ",".join(map(str, SPORADIC_30[0]))
    code, out, _ = run(capsys, "verify", comp, "--decompose", "3,5")
    assert code == EXIT_OK
    assert "periodic? no" in out and "f1 = " in out and "f2 = " in out


def test_verify_105_has_no_decomposition(capsys):
    for pq in ("3,5", "3,7", "5,7"):
        code, out, _ = run(capsys, "verify", N105_F, "--n", "105", "--decompose", pq)
        assert code == EXIT_OK
        assert "Reinhardt, n=105" in out and "no decomposition" in out


def test_verify_not_reinhardt(capsys):
    code, out, _ = run(capsys, "verify", "+0-0+")
    assert code == EXIT_OK and out.startswith("not Reinhardt")


def test_verify_formulas(capsys):
    assert run(capsys, "verify", "--formula", "2pq", "--p", "11", "--q", "13")[1].strip() == "29295"
    out = run(capsys, "verify", "--formula", "u-bound", "--n", "105", "--p", "5", "--q", "7", "--c", "1,2")[1]
    assert int(out) > 0
    out = run(capsys, "verify", "--formula", "sporadic-exact", "--n", "60", "--p", "3", "--q", "5",
              "--c", "1,1,1,1")[1]
    assert int(out) == 61200
    assert run(capsys, "verify", "--formula", "u-bound", "--p", "5")[0] == EXIT_USAGE


def test_render_thirty_gons(capsys, tmp_path):
    comps = [",".join(map(str, p)) for p in SPORADIC_30 + PERIODIC_30]
    code, out, _ = run(capsys, "render", *comps, "--outdir", str(tmp_path))
    assert code == EXIT_OK
    files = sorted(tmp_path.glob("*.svg"))
    assert len(files) == len(set(out.splitlines())) == len(comps)
    first = files[0].read_text()
    run(capsys, "render", *comps, "--outdir", str(tmp_path))
    assert files[0].read_text() == first


def test_render_jsonl_and_errors(capsys, tmp_path):
    src = tmp_path / "in.jsonl"
    main(["construct", "--n", "30", "--p", "3", "--q", "5", "--c", "1,1", "--limit", "5", "-o", str(src)])
    with src.open("a") as fh:
        fh.write("1,2\n")
    capsys.readouterr()
    code, out, err = run(capsys, "render", "--input", str(src), "--outdir", str(tmp_path / "svg"))
    assert code == EXIT_OK
    assert "error: 1,2" in err and "1 record(s) skipped" in err
    assert len(out.splitlines()) == 5


def test_render_empty_input(capsys, tmp_path):
    src = tmp_path / "empty.txt"
    src.write_text("")
    code, out, _ = run(capsys, "render", "--input", str(src), "--outdir", str(tmp_path / "o"))
    assert code == EXIT_OK and out == ""
    assert not list((tmp_path / "o").glob("*.svg"))

"""Command-line entry points, exit codes, output files."""
import json
import math
from fractions import Fraction
from pathlib import Path

import pytest

from dkbounds.cli import cmd_bound, cmd_compare, cmd_tables, main
from dkbounds.config import RunConfig
from dkbounds.engine import Domain, ExplicitBound
from dkbounds.numerics import BigPoint, DirectedReal, Up
from dkbounds.tables import Source, compare_partition

DEFAULT = json.loads((Path(__file__).parents[1] / "src/dkbounds/data/default_config.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def subset_config(ids, **extra):
    rows = [r for r in DEFAULT["rows"] if r["id"] in ids]
    return RunConfig.from_dict({"rows": rows, "table1": [], **extra})


def test_bound_k7(capsys):
    code, out, _ = run(capsys, "bound", "7", "1e21")
    rec = json.loads(out)
    assert code == 0
    assert rec["gamma"] == "5/6" and rec["beta"] == "23/3"
    assert float(rec["omega"]) == 0.004
    assert "T_k" not in rec  # beyond the sieve limit


def test_bound_below_every_threshold(capsys):
    code, out, _ = run(capsys, "bound", "3", "1e50")
    rec = json.loads(out)
    assert code == 2
    assert rec["error"] == "NoApplicableBound"
    assert BigPoint.parse(rec["nearest_threshold"]).fraction() == Fraction(1601) * 10 ** 95


def test_bound_k5_small_x_against_float_formula():
    rec = cmd_bound(RunConfig.load(), 5, "2000")
    x = 2000.0
    want = 9.271 * x ** (11 / 14) * math.log(x) ** (41 / 7)
    assert float(rec["bound_value"]) == pytest.approx(want, rel=1e-9)
    assert float(rec["bound_value"]) >= want * (1 - 1e-12)
    assert rec["T_k"] == "673904"
    lo, hi = (float(v) for v in rec["delta_k"])
    assert lo <= hi and float(rec["ratio_up"]) < 1


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "2", "2", "100000", "--bound", "pair:0.961,1/2,0,2")
    assert code == 0 and json.loads(out)["result"] == "PASS"
    code, out, _ = run(capsys, "verify", "2", "2", "100000", "--bound", "pair:0.4805,1/2,0,2")
    assert code == 1 and json.loads(out)["result"] == "FAIL"
    code, _, err = run(capsys, "verify", "2", "2", "6000000", "--bound", "pair:0.961,1/2,0,2")
    assert code == 2 and "sieve limit" in err


def test_verify_selector_errors(capsys):
    assert run(capsys, "verify", "5", "2000", "3000", "--bound", "table1:9")[0] == 2
    assert run(capsys, "verify", "5", "2000", "3000", "--bound", "row:T3-08")[0] == 2
    assert run(capsys, "verify", "5", "2000", "3000", "--bound", "nonsense:1")[0] == 2
    assert run(capsys, "verify", "5", "2000", "3000", "--bound", "pair:1,2")[0] == 2


def test_bad_config(capsys, tmp_path):
    assert run(capsys, "bound", "5", "2000", "--config", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"rows": [], "colour": "blue"}))
    code, _, err = run(capsys, "bound", "5", "2000", "--config", str(bad))
    assert code == 2 and "colour" in err
    bad.write_text("{not json")
    assert run(capsys, "bound", "5", "2000", "--config", str(bad))[0] == 2
    bad.write_text(json.dumps({"rows": [{"id": "r", "k": 5, "method": "FourthSmallT", "eps": "-1",
                                         "eps1": "0.8", "a": "1.6", "x0": "1e7"}]}))
    assert run(capsys, "bound", "5", "2000", "--config", str(bad))[0] == 2


def test_empty_config_writes_headers_only(capsys, tmp_path):
    cfg = tmp_path / "empty.json"
    cfg.write_text(json.dumps({"rows": [], "table1": []}))
    out = tmp_path / "out"
    code, msg, _ = run(capsys, "tables", "--config", str(cfg), "--out", str(out))
    assert code == 0 and msg.startswith("0 rows")
    for name in ("table3", "table4", "table5", "table6", "table1"):
        lines = (out / f"{name}.csv").read_text().splitlines()
        assert len(lines) == 1 and "," in lines[0]
    assert (out / "diff_report.txt").exists()


def test_tables_subset_deterministic_across_workers(tmp_path):
    ids = {"T3-03", "T3-08", "T4-01", "T5-05"}
    a = cmd_tables(subset_config(ids, workers=1), tmp_path / "a")
    b = cmd_tables(subset_config(ids, workers=2), tmp_path / "b")
    assert [r.spec.id for r in a.results] == [r.spec.id for r in b.results]
    for name in ("table3.csv", "table4.csv", "table5.csv", "table6.csv", "diff_report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_tables_jsonl_format(tmp_path):
    cmd_tables(subset_config({"T3-03"}, format="jsonl"), tmp_path)
    recs = [json.loads(line) for line in (tmp_path / "table3.jsonl").read_text().splitlines()]
    assert len(recs) == 1 and recs[0]["k"] == "5" and recs[0]["x1_mantissa"]


def test_compare_partitions(tmp_path):
    recs = cmd_compare(RunConfig.load(), tmp_path)
    by_k = {}
    for r in recs:
        by_k.setdefault(int(r["k"]), []).append(r)
    k4 = by_k[4]
    assert BigPoint.parse(k4[-1]["x_lo"]).fraction() == Fraction(2855) * 10 ** 38
    assert k4[-1]["source"] == "this work" and k4[-1]["x_hi"] == ""
    k5 = [(BigPoint.parse(r["x_lo"]).fraction(), r["source"]) for r in by_k[5]]
    assert k5[0] == (1667, "this work")
    assert k5[1][0] == 10 ** 12 and k5[1][1] != "this work"
    assert k5[2] == (Fraction(1601) * 10 ** 26, "this work")
    # consecutive pieces tile the range
    for k, rows in by_k.items():
        for a, b in zip(rows, rows[1:]):
            assert a["x_hi"] == b["x_lo"], k
    assert (tmp_path / "table2.csv").exists()
    assert "transcribed" in (tmp_path / "table2_diff.txt").read_text()


def test_compare_single_source_degenerate():
    b = ExplicitBound(5, DirectedReal(Fraction(1), Up, 128), Fraction(1, 2), Fraction(4), BigPoint.parse(2),
                      Domain.AllReals, "only")
    assert compare_partition(5, [b], []) == [(Fraction(2), None, "this work")]
    lit = [Source("lit", Fraction(2))]
    parts = compare_partition(5, [], lit)
    assert len(parts) == 1 and parts[0][0] == 2 and parts[0][1] is None


def test_sieve_cache_round_trip(capsys, tmp_path):
    path = tmp_path / "s5.bin"
    assert run(capsys, "sieve-cache", "5", "20001", str(path))[0] == 0
    code, out, _ = run(capsys, "verify", "5", "1667", "20000", "--bound", "table1:1", "--sieve", str(path))
    assert code == 0 and json.loads(out)["result"] == "PASS"
    # a cache for the wrong k is rejected
    assert run(capsys, "verify", "6", "162727", "163000", "--bound", "table1:1", "--sieve", str(path))[0] == 2
    assert run(capsys, "sieve-cache", "5", "6000000", str(path))[0] == 2

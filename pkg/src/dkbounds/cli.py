"""Command-line front end: tables, verify, bound, compare, sieve-cache.

Exit codes: 0 success, 1 verification failure (or strict diff failure),
2 configuration error, 3 numeric or precision failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from mpmath import iv

from .config import RunConfig, load_data_json
from .divisor import build_sieve, load_sieve, save_sieve
from .engine import (
    Domain,
    ExplicitBound,
    as_rational,
    best_bound,
    extend_to_reals,
    omega_bound,
    rational_text,
)
from .errors import ConfigError, DkBoundsError, NoApplicableBound, RangeError
from .mainterm import mainterm_enclosure, mainterm_poly
from .numerics import BigPoint, DirectedReal, Direction, PrecisionConfig, working_precision
from .tables import (
    CSV_COLUMNS,
    TABLE1_COLUMNS,
    TABLE6_COLUMNS,
    RowResult,
    Table1Entry,
    build_table1,
    compare_partition,
    compare_records,
    diff_rows,
    diff_table1,
    diff_table2,
    diff_table6,
    literature_sources,
    regenerate_rows,
    render,
    render_diff,
    row_record,
    select_best,
)
from .verify import VerificationReport, verify_bound

Up, Down = Direction.UP, Direction.DOWN

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
ROW_TABLES = ("table3", "table4", "table5")
TABLE2_COLUMNS = ["k", "x_lo", "x_hi", "source"]


def _ext(config: RunConfig) -> str:
    return "jsonl" if config.format == "jsonl" else "csv"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / name
    p.write_text(text)
    return p


# ---------------------------------------------------------------------------
# tables


@dataclasses.dataclass
class TablesRun:
    results: List[RowResult]
    best: Dict[int, list]
    table1: list
    diffs: list


def run_tables(config: RunConfig, reference: Optional[Dict] = None) -> TablesRun:
    reference = reference if reference is not None else load_data_json("reference_tables.json")
    results = regenerate_rows(config)
    ks = sorted({r.spec.params.k for r in results})
    best = {k: select_best(results, k) for k in ks}
    t1 = build_table1(config, results, best)
    diffs = []
    if config.rows:
        diffs = diff_rows(results, reference) + diff_table6(best, reference) + diff_table1(t1, reference)
    return TablesRun(results, best, t1, diffs)


def cmd_tables(config: RunConfig, out: Path, reference: Optional[Dict] = None) -> TablesRun:
    run = run_tables(config, reference)
    ext, fmt = _ext(config), config.format
    for t in ROW_TABLES:
        recs = [row_record(r) for r in run.results if r.spec.table == t]
        _write(out, f"{t}.{ext}", render(recs, CSV_COLUMNS, fmt))
    segs = [s.record() for k in sorted(run.best) for s in run.best[k]]
    _write(out, f"table6.{ext}", render(segs, TABLE6_COLUMNS, fmt))
    _write(out, f"table1.{ext}", render([e.record() for e in run.table1], TABLE1_COLUMNS, fmt))
    errors = [f"row {r.spec.id}: {r.error}" for r in run.results if r.error]
    report = render_diff(run.diffs)
    if errors:
        report += "\n# rows aborted by engine errors\n" + "\n".join(errors) + "\n"
    _write(out, "diff_report.txt", report)
    return run


# ---------------------------------------------------------------------------
# verify


def resolve_selector(config: RunConfig, k: int, selector: str):
    """(bound for integers and half-integers, all-reals bound, label).

    Selectors: ``table1:J``, ``row:ID``, ``pair:OMEGA,GAMMA,BETA,X1``.
    """
    kind, _, arg = selector.partition(":")
    cfg = PrecisionConfig(bits=config.precision)
    if kind == "table1":
        j = int(arg)
        sel = [s for s in config.table1 if s.k == k and s.j == j]
        if not sel:
            raise NoApplicableBound(f"no Table 1 selection (k={k}, j={j}) in the configuration")
        spec = config.row(sel[0].row)
        b = omega_bound(spec.params, x1=spec.x1, config=cfg)
        ent = Table1Entry(k, j, spec.id, extend_to_reals(b, b, config=cfg), True)
        pub = ent.as_bound()
        return pub, pub, selector
    if kind == "row":
        try:
            spec = config.row(arg)
        except KeyError:
            raise ConfigError(f"unknown row {arg!r}") from None
        if spec.params.k != k:
            raise ConfigError(f"row {arg} is for k={spec.params.k}")
        b = omega_bound(spec.params, x1=spec.x1, config=cfg)
        return b, extend_to_reals(b, b, config=cfg), selector
    if kind == "pair":
        parts = arg.split(",")
        if len(parts) != 4:
            raise ConfigError("pair selector needs OMEGA,GAMMA,BETA,X1")
        om, g, be, x1 = parts
        b = ExplicitBound(k, DirectedReal(as_rational(om), Up, 128), as_rational(g), as_rational(be),
                          BigPoint.parse(x1), Domain.AllReals, selector)
        return b, b, selector
    raise ConfigError(f"unknown bound selector {selector!r}")


def cmd_verify(config: RunConfig, k: int, x_lo: int, x_hi: int, selector: str,
               sieve_path: Optional[str] = None) -> VerificationReport:
    if x_hi > config.sieve_limit:
        raise RangeError(f"x_hi = {x_hi} beyond the configured sieve limit {config.sieve_limit}")
    bound, real, label = resolve_selector(config, k, selector)
    if x_lo > x_hi:
        return VerificationReport(k, x_lo, x_hi, label, 0, None, None)
    sieve = None
    if sieve_path:
        sieve = load_sieve(sieve_path)
        if sieve.k != k or sieve.limit < x_hi + 1:
            raise ConfigError(f"cached sieve {sieve_path} is for k={sieve.k} up to {sieve.limit}")
    return verify_bound(k, x_lo, x_hi, bound, sieve=sieve, real_bound=real, workers=config.workers, label=label)


# ---------------------------------------------------------------------------
# bound


def table1_candidates(config: RunConfig, k: int) -> List[ExplicitBound]:
    cfg = PrecisionConfig(bits=config.precision)
    out = []
    for s in config.table1:
        if s.k != k:
            continue
        spec = config.row(s.row)
        b = omega_bound(spec.params, x1=spec.x1, config=cfg)
        out.append(Table1Entry(k, s.j, spec.id, extend_to_reals(b, b, config=cfg), True).as_bound())
    return out


def cmd_bound(config: RunConfig, k: int, x: str) -> Dict:
    xp = BigPoint.parse(x)
    cands = table1_candidates(config, k)
    rec: Dict = {"k": k, "x": xp.format()}
    if not cands:
        raise NoApplicableBound(f"no bounds configured for k={k}")
    b = best_bound(cands, xp, PrecisionConfig(bits=config.precision))
    with working_precision(config.precision):
        val = b.value_at(xp)
        rec.update({
            "omega": b.omega.format(12),
            "gamma": rational_text(b.gamma),
            "beta": rational_text(b.beta),
            "x1": b.threshold.format(),
            "source": b.provenance,
            "params": b.params.to_record() if b.params is not None else None,
            "bound_value": DirectedReal.from_interval(val, Up).format(12),
        })
        xf = xp.fraction()
        if xf <= config.sieve_limit:
            n = math.floor(xf)
            sieve = build_sieve(k, max(n, 1))
            P = mainterm_poly(k, PrecisionConfig(bits=config.precision))
            delta = iv.mpf(sieve.T(n)) - mainterm_enclosure(P, xp)
            rec["T_k"] = str(sieve.T(n))
            rec["delta_k"] = [DirectedReal.from_interval(delta, Down).format(15),
                              DirectedReal.from_interval(delta, Up).format(15)]
            rec["ratio_up"] = DirectedReal.from_interval(abs(delta) / val, Up).format(8)
    return rec


# ---------------------------------------------------------------------------
# compare


def cmd_compare(config: RunConfig, out: Path, literature: Optional[str] = None,
                reference: Optional[Dict] = None) -> List[Dict[str, str]]:
    lit = load_data_json("literature.json", literature)
    reference = reference if reference is not None else load_data_json("reference_tables.json")
    recs: List[Dict[str, str]] = []
    for k in range(3, 10):
        ours = table1_candidates(config, k)
        recs += compare_records(k, compare_partition(k, ours, literature_sources(lit, k)))
    ext = _ext(config)
    _write(out, f"table2.{ext}", render(recs, TABLE2_COLUMNS, config.format))
    note = ("# literature boundary values are transcribed constants, not re-derived here\n\n")
    _write(out, "table2_diff.txt", note + render_diff(diff_table2(recs, reference)))
    return recs


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (JSON); default: bundled")
    common.add_argument("--precision", type=int, help="working precision in bits")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--format", choices=["csv", "jsonl"], help="table output format")

    p = argparse.ArgumentParser(prog="dkbounds", description="Explicit bounds for the k-fold divisor problem.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tables", parents=[common], help="regenerate the result tables and a diff report")
    t.add_argument("--strict", action="store_true", help="exit 1 when any cell differs from the transcription")

    v = sub.add_parser("verify", parents=[common], help="check a bound against exact divisor sums")
    v.add_argument("k", type=int)
    v.add_argument("x_lo", type=int)
    v.add_argument("x_hi", type=int)
    v.add_argument("--bound", required=True, help="table1:J | row:ID | pair:OMEGA,GAMMA,BETA,X1")
    v.add_argument("--sieve", help="cached sieve file from sieve-cache")

    b = sub.add_parser("bound", parents=[common], help="best proven bound at one point")
    b.add_argument("k", type=int)
    b.add_argument("x", help="decimal string, e.g. 1e21")

    c = sub.add_parser("compare", parents=[common], help="range partition against the literature")
    c.add_argument("--literature", help="literature constants file (JSON)")

    s = sub.add_parser("sieve-cache", parents=[common], help="build and store a d_k sieve")
    s.add_argument("k", type=int)
    s.add_argument("N", type=int)
    s.add_argument("path")
    return p


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config)
    over = {f: getattr(args, f) for f in ("precision", "workers", "format") if getattr(args, f, None) is not None}
    return dataclasses.replace(cfg, **over) if over else cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        out = Path(args.out)
        if args.command == "tables":
            run = cmd_tables(config, out)
            bad = [d for d in run.diffs if not d.ok]
            failed = [r for r in run.results if r.error]
            print(f"{len(run.results)} rows, {len(run.diffs)} cells compared, {len(bad)} differ, "
                  f"{len(failed)} rows aborted; written to {out}")
            return EXIT_FAIL if args.strict and (bad or failed) else EXIT_OK
        if args.command == "verify":
            rep = cmd_verify(config, args.k, args.x_lo, args.x_hi, args.bound, args.sieve)
            print(json.dumps(rep.to_record()))
            return EXIT_OK if rep.passed else EXIT_FAIL
        if args.command == "bound":
            print(json.dumps(cmd_bound(config, args.k, args.x), indent=1))
            return EXIT_OK
        if args.command == "compare":
            recs = cmd_compare(config, out, args.literature)
            print(render(recs, TABLE2_COLUMNS, config.format), end="")
            return EXIT_OK
        if args.command == "sieve-cache":
            if args.N > config.sieve_limit:
                raise RangeError(f"N = {args.N} beyond the configured sieve limit {config.sieve_limit}")
            save_sieve(build_sieve(args.k, args.N), args.path)
            print(f"sieve k={args.k} N={args.N} written to {args.path}")
            return EXIT_OK
    except NoApplicableBound as exc:
        rec = {"error": "NoApplicableBound", "message": str(exc)}
        if exc.nearest_threshold is not None:
            rec["nearest_threshold"] = str(exc.nearest_threshold)
        print(json.dumps(rec, indent=1))
        return EXIT_CONFIG
    except (ConfigError, RangeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DkBoundsError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

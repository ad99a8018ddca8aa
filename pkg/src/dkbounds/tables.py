"""Regeneration of the result tables, best-of selection, and diff reports
against the bundled transcription of printed values."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from mpmath import iv

from .config import RowSpec, RunConfig, Table1Selection, load_data_json
from .engine import (
    Domain,
    ExplicitBound,
    as_rational,
    best_bound,
    extend_to_reals,
    omega_bound,
    publication_alpha,
    publication_threshold,
    rational_text,
)
from .errors import DkBoundsError, MismatchError, NoApplicableBound
from .numerics import BigPoint, DirectedReal, Direction, PrecisionConfig, fraction_to_decimal, upper, working_precision

Up = Direction.UP

CSV_COLUMNS = ["k", "method", "eps", "eps1", "a", "x0", "omega", "x1_mantissa", "x1_exp10",
               "gamma_num", "gamma_den", "beta_num", "beta_den"]
TABLE6_COLUMNS = ["k", "x_lo", "x_hi", "omega", "gamma", "beta", "row"]
TABLE1_COLUMNS = ["k", "j", "x_mantissa", "x_exp10", "alpha", "alpha_published",
                  "beta_num", "beta_den", "gamma_num", "gamma_den", "row"]
OMEGA_DIGITS = 10

OMEGA_TOL = Fraction(5, 10000)
ALPHA_REL_TOL = Fraction(2, 1000)


@dataclass
class RowResult:
    spec: RowSpec
    bound: Optional[ExplicitBound] = None
    error: Optional[str] = None


def _compute_row(args) -> Tuple[str, Optional[ExplicitBound], Optional[str]]:
    spec, bits = args
    try:
        b = omega_bound(spec.params, x1=spec.x1, config=PrecisionConfig(bits=bits))
        return spec.id, b, None
    except DkBoundsError as exc:
        return spec.id, None, f"{type(exc).__name__}: {exc}"


def regenerate_rows(config: RunConfig, rows: Optional[Sequence[RowSpec]] = None) -> List[RowResult]:
    """omega_bound for every configured row; order follows the configuration."""
    rows = list(config.rows if rows is None else rows)
    jobs = [(r, config.precision) for r in rows]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            out = list(pool.map(_compute_row, jobs))
    else:
        out = [_compute_row(j) for j in jobs]
    by_id = {rid: (b, e) for rid, b, e in out}
    return [RowResult(r, *by_id[r.id]) for r in rows]


# ---------------------------------------------------------------------------
# CSV / JSONL


def _frac_parts(f: Fraction) -> Tuple[str, str]:
    return str(f.numerator), str(f.denominator)


def row_record(res: RowResult) -> Dict[str, str]:
    p = res.spec.params
    rec = {
        "k": str(p.k),
        "method": p.method.value,
        "eps": rational_text(p.eps),
        "eps1": rational_text(p.eps1),
        "a": rational_text(p.a),
        "x0": p.x0.format(),
    }
    b = res.bound
    if b is None:
        rec.update({c: "" for c in CSV_COLUMNS[6:]})
        return rec
    rec["omega"] = b.omega.format(OMEGA_DIGITS)
    rec["x1_mantissa"] = format(b.threshold.mantissa, "f")
    rec["x1_exp10"] = str(b.threshold.exponent10)
    rec["gamma_num"], rec["gamma_den"] = _frac_parts(b.gamma)
    rec["beta_num"], rec["beta_den"] = _frac_parts(b.beta)
    return rec


def render(records: List[Dict[str, str]], columns: List[str], fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps({c: r.get(c, "") for c in columns}, sort_keys=False) + "\n" for r in records)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in records:
        w.writerow(r)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# best-of selection


@dataclass
class Segment:
    k: int
    lo: BigPoint
    hi: Optional[BigPoint]
    row: str
    bound: ExplicitBound

    def record(self) -> Dict[str, str]:
        return {
            "k": str(self.k),
            "x_lo": self.lo.format(),
            "x_hi": "" if self.hi is None else self.hi.format(),
            "omega": self.bound.omega.format(OMEGA_DIGITS),
            "gamma": rational_text(self.bound.gamma),
            "beta": rational_text(self.bound.beta),
            "row": self.row,
        }


def _log10_point(e: Fraction) -> BigPoint:
    """BigPoint for 10^e, rounded Up to 5 significant digits."""
    with working_precision(128):
        v = iv.exp(iv.mpf([float(e) - 1e-12, float(e) + 1e-12]) * iv.log(10))
    return BigPoint.from_interval_up(v, 5)


def _winner(cands: List[Tuple[str, ExplicitBound]], x: BigPoint) -> Tuple[str, ExplicitBound]:
    b = best_bound([c[1] for c in cands], x)
    for rid, c in cands:
        if c is b:
            return rid, c
    raise AssertionError("best_bound returned an unknown candidate")


def select_best(results: Sequence[RowResult], k: int, grid: int = 48,
                horizon_decades: int = 400) -> List[Segment]:
    """Piecewise-best bound over x >= smallest threshold.

    Breakpoints are the thresholds plus crossovers between them, the latter
    located by bisection in log x and reported 5 digits Up.
    """
    cands = [(r.spec.id, r.bound) for r in results if r.bound is not None and r.bound.k == k]
    if not cands:
        return []
    cands.sort(key=lambda c: c[1].threshold.fraction())
    thresholds = sorted({c[1].threshold.fraction() for c in cands})
    points = [BigPoint.from_fraction(t, 60) for t in thresholds]
    segs: List[Segment] = []

    def push(lo: BigPoint, rid: str, b: ExplicitBound):
        if segs and segs[-1].row == rid:
            return
        if segs:
            segs[-1].hi = lo
        segs.append(Segment(k, lo, None, rid, b))

    for i, lo in enumerate(points):
        hi = points[i + 1] if i + 1 < len(points) else None
        live = [c for c in cands if c[1].threshold <= lo]
        rid, b = _winner(live, lo)
        push(lo, rid, b)
        # scan for crossovers inside (lo, hi)
        l0 = float(lo.logValue[1]) / math.log(10)
        l1 = float(hi.logValue[0]) / math.log(10) if hi is not None else l0 + horizon_decades
        prev_e = Fraction(l0)
        for g in range(1, grid + 1):
            e = Fraction(l0) + (Fraction(l1) - Fraction(l0)) * g / grid
            x = _log10_point(e)
            if hi is not None and not x < hi:
                break
            rid2, b2 = _winner(live, x)
            if rid2 != segs[-1].row:
                a_, z_ = prev_e, e
                for _ in range(60):
                    m_ = (a_ + z_) / 2
                    if _winner(live, _log10_point(m_))[0] == segs[-1].row:
                        a_ = m_
                    else:
                        z_ = m_
                    if z_ - a_ < Fraction(1, 10 ** 7):
                        break
                push(_log10_point(z_), rid2, b2)
            prev_e = e
    return segs


# ---------------------------------------------------------------------------
# Table 1


@dataclass
class Table1Entry:
    k: int
    j: int
    row: str
    bound: ExplicitBound
    on_best_path: bool

    @property
    def alpha_published(self) -> str:
        return publication_alpha(self.bound.omega)

    @property
    def x_published(self) -> str:
        return publication_threshold(self.bound.threshold)

    def as_bound(self) -> ExplicitBound:
        """The statement with the published alpha (rounded up) as constant."""
        om = DirectedReal(as_rational(self.alpha_published.replace("e", "E")), Up, 128)
        return ExplicitBound(self.k, om, self.bound.gamma, self.bound.beta,
                             BigPoint.parse(self.x_published), Domain.AllReals,
                             f"table1:{self.k}:{self.j}", self.bound.params)

    def record(self) -> Dict[str, str]:
        xp = BigPoint.parse(self.x_published)
        g, b = self.bound.gamma, self.bound.beta
        return {
            "k": str(self.k), "j": str(self.j),
            "x_mantissa": format(xp.mantissa, "f"), "x_exp10": str(xp.exponent10),
            "alpha": self.bound.omega.format(OMEGA_DIGITS), "alpha_published": self.alpha_published,
            "beta_num": str(b.numerator), "beta_den": str(b.denominator),
            "gamma_num": str(g.numerator), "gamma_den": str(g.denominator),
            "row": self.row,
        }


def build_table1(config: RunConfig, results: Sequence[RowResult],
                 best: Dict[int, List[Segment]]) -> List[Table1Entry]:
    by_id = {r.spec.id: r for r in results}
    out = []
    for sel in config.table1:
        res = by_id.get(sel.row)
        if res is None or res.bound is None:
            continue
        ext = extend_to_reals(res.bound, res.bound, config=PrecisionConfig(bits=config.precision))
        on_path = any(s.row == sel.row for s in best.get(sel.k, []))
        out.append(Table1Entry(sel.k, sel.j, sel.row, ext, on_path))
    return out


# ---------------------------------------------------------------------------
# diff report


def _printed_unit(text: str) -> Fraction:
    """One unit in the last printed digit of a decimal like '1.7552e7' or '162726'."""
    d = Decimal(text)
    return Fraction(Decimal(1).scaleb(d.as_tuple().exponent))


def _omega_status(computed: Fraction, printed: Fraction, one_sided: bool) -> str:
    if abs(computed - printed) <= OMEGA_TOL:
        return "match"
    if computed <= printed:
        return "one-sided" if one_sided else "below-printed"
    return "mismatch"


@dataclass
class DiffEntry:
    table: str
    key: str
    field: str
    printed: str
    computed: str
    status: str
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("match", "one-sided", "below-printed")


def diff_rows(results: Sequence[RowResult], reference: Dict) -> List[DiffEntry]:
    by_key = {}
    for r in results:
        p = r.spec.params
        by_key[(p.k, p.method.value, p.eps, p.eps1, p.a, p.x0.fraction())] = r
    out: List[DiffEntry] = []
    for ref in reference["rows"]:
        key = (int(ref["k"]), ref["method"], as_rational(ref["eps"]), as_rational(ref["eps1"]),
               as_rational(ref["a"]), BigPoint.parse(ref["x0"]).fraction())
        label = f"{ref['id']} (k={ref['k']}, {ref['method']}, eps={ref['eps']}, eps1={ref['eps1']})"
        res = by_key.get(key)
        if res is None:
            for f in ("omega", "x1", "gamma", "beta"):
                out.append(DiffEntry(ref["table"], label, f, ref[f], "", "missing", "row not configured"))
            continue
        if res.bound is None:
            for f in ("omega", "x1", "gamma", "beta"):
                out.append(DiffEntry(ref["table"], label, f, ref[f], "", "error", res.error or ""))
            continue
        b = res.bound
        st = _omega_status(b.omega.fraction(), as_rational(ref["omega"]), bool(ref.get("footnote")))
        out.append(DiffEntry(ref["table"], label, "omega", ref["omega"], b.omega.format(8), st,
                             f"footnote {ref['footnote']}" if ref.get("footnote") else ""))
        printed_x1 = BigPoint.parse(ref["x1"]).fraction()
        unit = _printed_unit(ref["x1"])
        diff = abs(b.threshold.fraction() - printed_x1)
        st = "match" if diff <= unit else "mismatch"
        note = "" if st == "match" else f"dominating constraint: {b.floor.active if b.floor else '?'}"
        out.append(DiffEntry(ref["table"], label, "x1", ref["x1"], b.threshold.format(), st, note))
        for f, val in (("gamma", b.gamma), ("beta", b.beta)):
            pv = as_rational(ref[f])
            out.append(DiffEntry(ref["table"], label, f, ref[f], rational_text(val),
                                 "match" if pv == val else "mismatch"))
    return out


def diff_table6(best: Dict[int, List[Segment]], reference: Dict) -> List[DiffEntry]:
    out = []
    for ref in reference["table6"]:
        k = int(ref["k"])
        label = f"k={k}, x >= {ref['x_lo']}"
        lo = BigPoint.parse(ref["x_lo"])
        seg = next((s for s in best.get(k, []) if abs(s.lo.fraction() - lo.fraction()) <= _printed_unit(ref["x_lo"])), None)
        if seg is None:
            out.append(DiffEntry("table6", label, "segment", ref["x_lo"], "", "missing", "no regenerated segment starts here"))
            continue
        hi_ok = (ref["x_hi"] is None and seg.hi is None) or (
            ref["x_hi"] is not None and seg.hi is not None
            and abs(seg.hi.fraction() - BigPoint.parse(ref["x_hi"]).fraction()) <= _printed_unit(ref["x_hi"]))
        out.append(DiffEntry("table6", label, "x_hi", str(ref["x_hi"]), "" if seg.hi is None else seg.hi.format(),
                             "match" if hi_ok else "mismatch"))
        st = _omega_status(seg.bound.omega.fraction(), as_rational(ref["omega"]), False)
        note = ""
        if st != "match":
            # printed constants sometimes drop a power-of-ten factor
            ratio = seg.bound.omega.fraction() / as_rational(ref["omega"])
            e = round(math.log10(float(ratio)))
            if e and _omega_status(seg.bound.omega.fraction(), as_rational(ref["omega"]) * Fraction(10) ** e, False) == "match":
                st, note = "scaled-match", f"matches the printed value times 10^{e}"
        out.append(DiffEntry("table6", label, "omega", ref["omega"], seg.bound.omega.format(8), st, note))
        for f, val in (("gamma", seg.bound.gamma), ("beta", seg.bound.beta)):
            out.append(DiffEntry("table6", label, f, ref[f], rational_text(val),
                                 "match" if as_rational(ref[f]) == val else "mismatch"))
    return out


def alpha_status(computed_published: str, printed: str) -> str:
    c, p = as_rational(computed_published.replace("e", "E")), as_rational(printed.replace("e", "E"))
    return "match" if abs(c - p) <= ALPHA_REL_TOL * p else "mismatch"


def diff_table1(entries: Sequence[Table1Entry], reference: Dict) -> List[DiffEntry]:
    by = {(e.k, e.j): e for e in entries}
    out = []
    for ref in reference["table1"]:
        k, j = int(ref["k"]), int(ref["j"])
        label = f"k={k}, j={j}"
        e = by.get((k, j))
        if e is None:
            out.append(DiffEntry("table1", label, "alpha", ref["alpha"], "", "missing"))
            continue
        out.append(DiffEntry("table1", label, "alpha", ref["alpha"], e.alpha_published,
                             alpha_status(e.alpha_published, ref["alpha"]), f"unrounded {e.bound.omega.format(6)}"))
        xp = e.x_published
        out.append(DiffEntry("table1", label, "x", ref["x"], xp,
                             "match" if BigPoint.parse(xp).fraction() == BigPoint.parse(ref["x"]).fraction() else "mismatch"))
        for f, val in (("beta", e.bound.beta), ("gamma", e.bound.gamma)):
            out.append(DiffEntry("table1", label, f, ref[f], rational_text(val),
                                 "match" if as_rational(ref[f]) == val else "mismatch"))
        if not e.on_best_path:
            out.append(DiffEntry("table1", label, "selection", e.row, "", "mismatch",
                                 "selected row is not on the regenerated best-of path"))
    return out


def render_diff(entries: Sequence[DiffEntry]) -> str:
    lines = ["# comparison of regenerated values with the bundled transcription", ""]
    bad = [e for e in entries if not e.ok]
    lines.append(f"cells compared: {len(entries)}; not matching: {len(bad)}")
    lines.append("")
    for e in entries:
        flag = "ok  " if e.ok else "DIFF"
        extra = f"  [{e.note}]" if e.note else ""
        lines.append(f"{flag} {e.table:7s} {e.key:60s} {e.field:9s} printed={e.printed:14s} computed={e.computed}"
                     f"  {e.status}{extra}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# literature comparison


@dataclass
class Source:
    name: str
    valid_from: Fraction
    bound: Optional[ExplicitBound] = None
    superseded_at: Optional[Fraction] = None


def literature_sources(lit: Dict, k: int) -> List[Source]:
    out = []
    for s in lit.get("sources", []):
        if int(s["k"]) != k:
            continue
        lo = BigPoint.parse(s["valid_from"]).fraction()
        b = None
        if s.get("form"):
            f = s["form"]
            b = ExplicitBound(k, DirectedReal(as_rational(f["omega"]), Up, 128), as_rational(f["gamma"]),
                              as_rational(f["beta"]), BigPoint.from_fraction(max(lo, Fraction(16))),
                              Domain.AllReals, s["source"])
        sup = BigPoint.parse(s["superseded_at"]).fraction() if s.get("superseded_at") else None
        out.append(Source(s["source"], lo, b, sup))
    return out


def compare_partition(k: int, ours: Sequence[ExplicitBound], lit: Sequence[Source],
                      label: str = "this work") -> List[Tuple[Fraction, Optional[Fraction], str]]:
    """Range partition over x >= the smallest start, naming the winning source.

    Sources with a closed form are compared numerically; sources without one
    win on [valid_from, superseded_at).
    """
    starts = sorted({b.threshold.fraction() for b in ours} | {s.valid_from for s in lit}
                    | {s.superseded_at for s in lit if s.superseded_at})
    if not starts:
        return []

    def winner(x: Fraction) -> Optional[str]:
        xp = BigPoint.from_fraction(x, 60)
        formless = [s for s in lit if s.bound is None and s.valid_from <= x
                    and (s.superseded_at is None or x < s.superseded_at)]
        if formless:
            return formless[0].name
        cands = [(label, b) for b in ours if b.threshold <= xp]
        cands += [(s.name, s.bound) for s in lit if s.bound is not None and s.valid_from <= x]
        if not cands:
            return None
        if len(cands) == 1:
            return cands[0][0]
        with working_precision(128):
            vals = [(upper(b.log_value(xp)), name) for name, b in cands]
        return min(vals)[1]

    cuts = list(starts)
    # crossovers between closed forms: bisection in log10 x
    for i, lo in enumerate(starts):
        hi = starts[i + 1] if i + 1 < len(starts) else lo * 10 ** 200
        a, z = math.log10(lo), math.log10(hi)
        wa = winner(lo)
        steps = 64
        prev = a
        for g in range(1, steps + 1):
            e = a + (z - a) * g / steps
            xe = Fraction(10) ** int(e) * Fraction(Decimal(10) ** Decimal(e - int(e)))
            if xe >= hi:
                break
            we = winner(xe)
            if we != wa:
                l, r = prev, e
                for _ in range(80):
                    m = (l + r) / 2
                    xm = Fraction(Decimal(10) ** Decimal(m))
                    if winner(xm) == wa:
                        l = m
                    else:
                        r = m
                cut = Fraction(fraction_to_decimal(Fraction(Decimal(10) ** Decimal(r)), 4, Up))
                cuts.append(cut)
                wa = we
            prev = e
    cuts = sorted(set(cuts))
    segs: List[list] = []
    for c in cuts:
        w = winner(c)
        if segs and segs[-1][2] == w:
            continue
        if segs:
            segs[-1][1] = c
        segs.append([c, None, w])
    parts = [tuple(p) for p in segs if p[2] is not None]
    return parts


def _short(f: Fraction) -> str:
    if f < 10 ** 6:
        return str(math.ceil(f))
    return BigPoint.parse(str(fraction_to_decimal(f, 4, Up))).format()


def compare_records(k: int, parts) -> List[Dict[str, str]]:
    return [{"k": str(k), "x_lo": _short(lo), "x_hi": "" if hi is None else _short(hi), "source": src}
            for lo, hi, src in parts]


def diff_table2(records: Sequence[Dict[str, str]], reference: Dict) -> List[DiffEntry]:
    out = []
    got = {(r["k"], r["x_lo"]): r for r in records}
    for ref in reference["table2"]:
        key = (str(ref["k"]), BigPoint.parse(ref["x_lo"]).fraction())
        match = next((r for (kk, lo), r in got.items()
                      if kk == key[0] and BigPoint.parse(lo).fraction() == key[1]), None)
        label = f"k={ref['k']}, x >= {ref['x_lo']}"
        if match is None:
            out.append(DiffEntry("table2", label, "range", ref["x_lo"], "", "missing"))
            continue
        hi_ok = (ref["x_hi"] is None and match["x_hi"] == "") or (
            ref["x_hi"] is not None and match["x_hi"] != ""
            and BigPoint.parse(match["x_hi"]).fraction() == BigPoint.parse(ref["x_hi"]).fraction())
        out.append(DiffEntry("table2", label, "x_hi", str(ref["x_hi"]), match["x_hi"], "match" if hi_ok else "mismatch"))
        out.append(DiffEntry("table2", label, "source", ref["source"], match["source"],
                             "match" if ref["source"] == match["source"] else "mismatch"))
    return out

"""Empirical checks of explicit bounds against exact divisor sums.

Every integer and half-integer x in [x_lo, x_hi] is screened in float64
with a generous error allowance; a point passes the screen only if

    |T - main| + err  <  bound * (1 - SCREEN_MARGIN),

where err over-covers the float error of the main term.  Points that do
not pass the screen are re-evaluated in interval arithmetic, and only an
interval failure counts as a violation.  The reported worst ratio is
recomputed in interval arithmetic (Up).
"""
from __future__ import annotations

import math
import multiprocessing as mp
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from mpmath import iv

from .divisor import DivisorSieve, build_sieve
from .engine import Domain, ExplicitBound
from .errors import RangeError
from .mainterm import MainTermPolynomial, mainterm_enclosure, mainterm_poly
from .numerics import DirectedReal, Direction, ival, upper, working_precision

Up = Direction.UP

CHUNK = 1 << 18  # fixed partition: results do not depend on the worker count
SCREEN_MARGIN = 1e-9
FLOAT_REL_ERR = 1e-12  # float64 Horner/log/exp error is ~1e-15 relative at these sizes
MAX_RECORDED = 20

SAMPLE_DEN = 1 << 20  # n + r/2^20 is exact in float64 for n < 2^33
SAMPLES_PER_CHUNK = CHUNK * 2 // 10

# 64-bit LCG, Knuth's MMIX constants
LCG_A = 6364136223846793005
LCG_C = 1442695040888963407
_M64 = (1 << 64) - 1


def lcg_seed(k: int, x_lo: int) -> int:
    return (k * 0x9E3779B97F4A7C15 + x_lo) & _M64


def _lcg_jump(n: int) -> Tuple[int, int]:
    """(A^n, C (A^{n-1} + ... + 1)) mod 2^64: the n-step affine map."""
    a, c = 1, 0
    pa, pc = LCG_A, LCG_C
    while n:
        if n & 1:
            a, c = (pa * a) & _M64, (pa * c + pc) & _M64
        pa, pc = (pa * pa) & _M64, (pa * pc + pc) & _M64
        n >>= 1
    return a, c


def lcg_block(seed: int, start: int, m: int) -> np.ndarray:
    """States start+1 .. start+m of the sequence s -> A s + C from ``seed``, top 53 bits."""
    ja, jc = _lcg_jump(start)
    s0 = np.uint64((ja * seed + jc) & _M64)
    pw = np.cumprod(np.full(m, LCG_A, dtype=np.uint64))  # wraps mod 2^64
    geo = np.cumsum(np.concatenate(([np.uint64(1)], pw[:-1]))) if m else pw
    return (pw * s0 + geo * np.uint64(LCG_C)) >> np.uint64(11)


def lcg_reference(seed: int, start: int, m: int) -> List[int]:
    s, out = seed, []
    for i in range(start + m):
        s = (LCG_A * s + LCG_C) & _M64
        if i >= start:
            out.append(s >> 11)
    return out


@dataclass
class VerificationReport:
    k: int
    x_lo: int
    x_hi: int
    bound: str
    count: int
    max_ratio: Optional[DirectedReal]
    worst_x: Optional[str]
    violations: List[str] = field(default_factory=list)
    samples: int = 0

    @property
    def passed(self) -> bool:
        if self.violations:
            return False
        return self.max_ratio is None or self.max_ratio.value < 1

    def to_record(self) -> dict:
        return {
            "k": self.k,
            "range": [self.x_lo, self.x_hi],
            "bound": self.bound,
            "count": self.count,
            "real_samples": self.samples,
            "max_ratio": None if self.max_ratio is None else self.max_ratio.format(8),
            "worst_x": self.worst_x,
            "violations": self.violations[:MAX_RECORDED],
            "result": "PASS" if self.passed else "FAIL",
        }


# shared with forked workers; immutable after startup
_STATE: dict = {}


def _float_coeffs(P: MainTermPolynomial) -> Tuple[np.ndarray, np.ndarray]:
    c = np.array(P.float_coefficients(), dtype=np.float64)
    return c, np.abs(c)


def _screen(xs: np.ndarray, T: np.ndarray, coeffs, abscoeffs, bound: ExplicitBound):
    L = np.log(xs)
    main = np.zeros_like(xs)
    amain = np.zeros_like(xs)
    for c, ac in zip(coeffs[::-1], abscoeffs[::-1]):
        main = main * L + c
        amain = amain * L + ac
    main *= xs
    amain *= xs
    om = float(bound.omega.value)
    g, b = float(bound.gamma), float(bound.beta)
    bnd = om * np.exp(g * L + b * np.log(L))
    delta = np.abs(T - main)
    err = FLOAT_REL_ERR * (amain + T) + 1.0
    hi = (delta + err) / bnd
    return hi < 1 - SCREEN_MARGIN, hi, (delta - err) / bnd


def _exact_ratio(sieve: DivisorSieve, P: MainTermPolynomial, bound: ExplicitBound, x: Fraction, bits: int = 128):
    with working_precision(bits):
        X = ival(x)
        d = iv.mpf(sieve.T(math.floor(x))) - mainterm_enclosure(P, X)
        return abs(d) / bound.value_at(X)


def _run_chunk(args):
    lo, hi, index, with_samples = args
    sieve: DivisorSieve = _STATE["sieve"]
    P: MainTermPolynomial = _STATE["P"]
    bnd: ExplicitBound = _STATE["bound"]
    real: Optional[ExplicitBound] = _STATE["real"]
    coeffs, abscoeffs = _STATE["coeffs"]
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    T = sieve.prefixSums[ns].astype(np.float64)
    # candidates for the maximum ratio: upper estimate reaches the best lower estimate
    best_lo = -np.inf
    cands: List[Tuple[float, Fraction]] = []
    violations: List[str] = []
    count = 0
    for off in (0.0, 0.5):
        xs = ns.astype(np.float64) + off
        keep = xs <= _STATE["x_hi"]
        xs_k, T_k = xs[keep], T[keep]
        if xs_k.size == 0:
            continue
        ok, rhi, rlo = _screen(xs_k, T_k, coeffs, abscoeffs, bnd)
        count += int(xs_k.size)
        nk = ns[keep]
        best_lo = max(best_lo, float(rlo.max()))
        for j in np.nonzero(rhi >= best_lo)[0]:
            cands.append((float(rhi[j]), Fraction(int(nk[j]) * 2 + int(off * 2), 2)))
        for j in np.nonzero(~ok)[0]:
            x = Fraction(int(nk[j]) * 2 + int(off * 2), 2)
            r = _exact_ratio(sieve, P, bnd, x)
            if not upper(r) < 1:
                violations.append(str(x))
    n_samples = 0
    if with_samples and real is not None:
        # one in ten points: a non-half-integer rational against the all-reals bound
        m = (hi - lo + 1) * 2 // 10
        u = lcg_block(_STATE["seed"], 2 * SAMPLES_PER_CHUNK * index, 2 * m)
        n = lo + (u[0::2] % np.uint64(hi - lo + 1)).astype(np.int64)
        r = 1 + (u[1::2] % np.uint64(SAMPLE_DEN - 1)).astype(np.int64)
        r[r == SAMPLE_DEN // 2] += 1
        xs = n.astype(np.float64) + r.astype(np.float64) / SAMPLE_DEN
        keep = (xs >= float(real.threshold.fraction())) & (xs <= _STATE["x_hi"])
        n, r, xs = n[keep], r[keep], xs[keep]
        if xs.size:
            ok, _, _ = _screen(xs, sieve.prefixSums[n].astype(np.float64), coeffs, abscoeffs, real)
            n_samples = int(xs.size)
            for j in np.nonzero(~ok)[0]:
                x = Fraction(int(n[j])) + Fraction(int(r[j]), SAMPLE_DEN)
                if x < real.threshold.fraction():
                    continue
                if not upper(_exact_ratio(sieve, P, real, x)) < 1:
                    violations.append(f"{x} (real sample)")
    cands = [c for c in cands if c[0] >= best_lo]
    return lo, count, (best_lo, cands), violations, n_samples


def verify_bound(k: int, x_lo: int, x_hi: int, bound: ExplicitBound, sieve: Optional[DivisorSieve] = None,
                 real_bound: Optional[ExplicitBound] = None, workers: int = 1, label: Optional[str] = None,
                 P: Optional[MainTermPolynomial] = None, samples: bool = True) -> VerificationReport:
    """Check |Delta_k(x)| < bound at every integer and half-integer x in [x_lo, x_hi]."""
    label = label or bound.provenance
    if x_lo > x_hi:
        return VerificationReport(k, x_lo, x_hi, label, 0, None, None)
    if bound.k != k:
        raise RangeError(f"bound is for k={bound.k}, not k={k}")
    if bound.threshold.fraction() > x_lo:
        raise RangeError(f"bound holds from {bound.threshold}, above x_lo = {x_lo}")
    if sieve is None:
        sieve = build_sieve(k, x_hi + 1)
    if x_hi > sieve.limit:
        raise RangeError(f"x_hi = {x_hi} beyond sieve limit {sieve.limit}")
    P = P or mainterm_poly(k)
    if real_bound is None and bound.domain is Domain.AllReals:
        real_bound = bound
    _STATE.update(sieve=sieve, P=P, bound=bound, real=real_bound, coeffs=_float_coeffs(P), x_hi=x_hi,
                  seed=lcg_seed(k, x_lo))
    chunks = [(a, min(a + CHUNK - 1, x_hi), i, samples) for i, a in enumerate(range(x_lo, x_hi + 1, CHUNK))]
    if workers > 1 and len(chunks) > 1 and "fork" in mp.get_all_start_methods():
        with mp.get_context("fork").Pool(workers) as pool:
            parts = pool.map(_run_chunk, chunks)
    else:
        parts = [_run_chunk(c) for c in chunks]
    parts.sort(key=lambda p: p[0])
    count = sum(p[1] for p in parts)
    n_samples = sum(p[4] for p in parts)
    violations = [v for p in parts for v in p[3]]
    best_lo = max(p[2][0] for p in parts)
    cands = sorted({x for p in parts for (h, x) in p[2][1] if h >= best_lo})
    max_ratio, wx = None, None
    for x in cands:
        r = upper(_exact_ratio(sieve, P, bound, x))
        if max_ratio is None or r > max_ratio:
            max_ratio, wx = r, x
    if max_ratio is not None:
        max_ratio = DirectedReal(max_ratio, Up, 128)
    return VerificationReport(k, x_lo, x_hi, label, count, max_ratio,
                              None if wx is None else str(wx), violations, n_samples)

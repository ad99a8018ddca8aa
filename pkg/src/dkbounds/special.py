"""Certified evaluators for zeta, Stieltjes constants, log-gamma, chi and Lambert W.

Every evaluator returns an ``iv.mpf`` enclosure internally; the public
wrappers convert to :class:`DirectedReal` or :class:`ComplexEnclosure`.
Truncation remainders are folded into the enclosure, never dropped.

The complex-valued evaluators are written over :class:`CJet` so the same
code serves pointwise evaluation (order 0) and the Taylor data the
quadrature needs.  For order > 0 the analytic remainders are expanded via
Cauchy estimates on a disk of radius ``rho`` in the jet variable; the caller
passes ``box``, a rectangle enclosing the argument over that disk.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Tuple

import mpmath
from mpmath import iv

from .errors import DomainError, PoleError, PrecisionExhausted, RangeError
from .jets import CJet, Jet, cauchy_radii
from .numerics import (
    DEFAULT_BITS,
    DirectedReal,
    Direction,
    PrecisionConfig,
    contains,
    hull,
    ival,
    lower,
    upper,
    width,
    working_precision,
)

Up, Down = Direction.UP, Direction.DOWN

ZETA_CRITICAL_TMAX = 10 ** 4


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    b = mpmath.bernfrac(n)
    return Fraction(int(b[0]), int(b[1]))


def _bern_iv(n: int):
    return ival(bernoulli(n))


def _sym(r):
    r = upper(abs(ival(r)))
    return iv.mpf([-r, r])


@dataclass
class EvalInfo:
    """Introspection record: truncation parameters and the folded remainder."""

    terms: int
    order: int
    remainder: object


# ---------------------------------------------------------------------------
# complex enclosure type


@dataclass(frozen=True)
class ComplexEnclosure:
    re: object
    im: object
    precision: int = DEFAULT_BITS

    @classmethod
    def of(cls, z, precision: int = DEFAULT_BITS) -> "ComplexEnclosure":
        if isinstance(z, ComplexEnclosure):
            return z
        if isinstance(z, tuple):
            return cls(ival(z[0]), ival(z[1]), precision)
        if isinstance(z, complex):
            return cls(ival(z.real), ival(z.imag), precision)
        if isinstance(z, mpmath.mpc):
            return cls(ival(z.real), ival(z.imag), precision)
        return cls(ival(z), iv.mpf(0), precision)

    @property
    def realPart(self) -> Tuple[DirectedReal, DirectedReal]:
        return (DirectedReal.from_interval(self.re, Down, self.precision),
                DirectedReal.from_interval(self.re, Up, self.precision))

    @property
    def imagPart(self) -> Tuple[DirectedReal, DirectedReal]:
        return (DirectedReal.from_interval(self.im, Down, self.precision),
                DirectedReal.from_interval(self.im, Up, self.precision))

    def abs2_interval(self):
        return _sq(self.re) + _sq(self.im)

    def modulus_interval(self):
        return iv.sqrt(self.abs2_interval())

    def modulus(self, direction: Direction) -> DirectedReal:
        return DirectedReal.from_interval(self.modulus_interval(), direction, self.precision)

    def conjugate(self) -> "ComplexEnclosure":
        return ComplexEnclosure(self.re, -self.im, self.precision)

    def __mul__(self, other: "ComplexEnclosure") -> "ComplexEnclosure":
        o = ComplexEnclosure.of(other)
        return ComplexEnclosure(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re, self.precision)

    def __sub__(self, other) -> "ComplexEnclosure":
        o = ComplexEnclosure.of(other)
        return ComplexEnclosure(self.re - o.re, self.im - o.im, self.precision)

    def __add__(self, other) -> "ComplexEnclosure":
        o = ComplexEnclosure.of(other)
        return ComplexEnclosure(self.re + o.re, self.im + o.im, self.precision)

    def contains(self, z) -> bool:
        z = complex(z)
        return contains(self.re, z.real) and contains(self.im, z.imag)

    def as_cjet(self) -> CJet:
        return CJet(Jet([self.re]), Jet([self.im]))

    def __repr__(self):
        return f"ComplexEnclosure(re={self.re}, im={self.im})"


def _sq(x):
    # x*x over an interval containing 0 must not go negative
    lo, hi = lower(x), upper(x)
    if lo <= 0 <= hi:
        return iv.mpf([0, upper(x * x)])
    return x * x


def _cjet_to_enclosure(z: CJet, precision: int) -> ComplexEnclosure:
    return ComplexEnclosure(z.re.c[0], z.im.c[0], precision)


# ---------------------------------------------------------------------------
# real zeta


def _zeta_real_em(s, n_terms: int, m: int):
    """Euler-Maclaurin enclosure of zeta(s) for real s > 1; returns (value, remainder)."""
    N = n_terms
    total = iv.mpf(0)
    for n in range(1, N):
        total += iv.exp(-s * iv.log(n))
    NN = iv.mpf(N)
    Ns = iv.exp(-s * iv.log(NN))
    total += NN * Ns / (s - 1) + Ns / 2
    poch = s
    npow = Ns / NN
    for j in range(1, m + 1):
        total += _bern_iv(2 * j) / math.factorial(2 * j) * poch * npow
        poch = poch * (s + 2 * j - 1) * (s + 2 * j)
        npow = npow / (NN * NN)
    # Backlund: |R_m| <= |s+2m+1|/(s+2m+1) * |next term| = |next term| for real s
    nxt = abs(_bern_iv(2 * m + 2)) / math.factorial(2 * m + 2) * poch * npow
    rem = iv.mpf([0, upper(nxt)])
    return total + _sym(rem), rem


def zeta_real_interval(s, config: Optional[PrecisionConfig] = None, info: bool = False):
    """Enclosure of zeta(s) for real s > 1 (s may itself be an interval)."""
    config = config or PrecisionConfig()
    with working_precision(config):
        s = ival(s)
        if not lower(s) > 1:
            raise DomainError(f"zeta_real requires s > 1, got {s}")
        target = iv.mpf(2) ** (-(config.bits - 8))
        n_terms = max(8, config.bits // 6)
        m = max(4, config.bits // 6)
        for _ in range(12):
            val, rem = _zeta_real_em(s, n_terms, m)
            # relative target: zeta(s) >= 1
            if upper(rem) < lower(target) or width(s) > 0 and upper(rem) < upper(width(val)):
                break
            n_terms *= 2
            m += 4
        else:
            raise PrecisionExhausted("zeta_real remainder target not reached")
        if info:
            return val, EvalInfo(n_terms, m, rem)
        return val


def zeta_real(s, direction: Direction = Up, config: Optional[PrecisionConfig] = None) -> DirectedReal:
    config = config or PrecisionConfig()
    return DirectedReal.from_interval(zeta_real_interval(s, config), direction, config.bits)


# ---------------------------------------------------------------------------
# complex zeta via Euler-Maclaurin in jets


def _box_abs_bounds(box):
    """(min |z|, max |z|) for a rectangle box = (re, im)."""
    re, im = box
    rl, rh = lower(re), upper(re)
    il, ih = lower(im), upper(im)
    mre = 0 if rl <= 0 <= rh else min(abs(rl), abs(rh))
    mim = 0 if il <= 0 <= ih else min(abs(il), abs(ih))
    Mre = max(abs(rl), abs(rh))
    Mim = max(abs(il), abs(ih))
    lo = iv.sqrt(iv.mpf(mre) ** 2 + iv.mpf(mim) ** 2)
    hi = iv.sqrt(iv.mpf(Mre) ** 2 + iv.mpf(Mim) ** 2)
    return lower(lo), upper(hi)


def _zeta_em_bound(box, N: int, m: int):
    """Backlund bound for the EM remainder of zeta(s), uniform over s in box."""
    re, im = box
    smin = lower(re)
    if not smin + 2 * m + 1 > 0:
        raise DomainError("EM order too small for this real part")
    # |s(s+1)...(s+2m)| and |s+2m+1|
    prod = iv.mpf(1)
    for j in range(2 * m + 1):
        prod *= iv.mpf(_box_abs_bounds((re + j, im))[1])
    lead = iv.mpf(_box_abs_bounds((re + 2 * m + 1, im))[1]) / (iv.mpf(smin) + 2 * m + 1)
    npow = iv.exp(-(iv.mpf(smin) + 2 * m + 1) * iv.log(N))
    term = abs(_bern_iv(2 * m + 2)) / math.factorial(2 * m + 2) * prod * npow
    return upper(lead * term)


def zeta_em_cjet(sigma, u: Jet, N: int, m: int, box=None, rho=None) -> CJet:
    """zeta(sigma + i u) as a complex jet in u.

    ``box`` bounds s = sigma + i u over the Cauchy disk; if None the jet must
    be order 0 and the box is the point enclosure itself.
    """
    n = u.order
    sigma = ival(sigma)
    s = CJet(Jet.const(sigma, n), u)
    total = CJet.const(0, 0, n)
    for k in range(1, N):
        L = iv.log(k)
        # k^{-s} = k^{-sigma} e^{-i u log k}
        mag = iv.exp(-sigma * L)
        sn, cs = (u * (-L)).sincos()
        total = total + CJet(cs * mag, sn * mag)
    LN = iv.log(N)
    magN = iv.exp(-sigma * LN)
    sn, cs = (u * (-LN)).sincos()
    Ns = CJet(cs * magN, sn * magN)
    total = total + (Ns * N) / (s - 1) + Ns * (iv.mpf(1) / 2)
    poch = s
    npow = Ns * (iv.mpf(1) / N)
    N2 = iv.mpf(N) ** 2
    for j in range(1, m + 1):
        coef = _bern_iv(2 * j) / math.factorial(2 * j)
        total = total + poch * npow * coef
        poch = poch * (s + (2 * j - 1)) * (s + 2 * j)
        npow = npow * (1 / N2)
    if box is None:
        if n != 0:
            raise ValueError("box required for jets of positive order")
        box = (sigma, u.c[0])
        rho = 1
    bound = _zeta_em_bound(box, N, m)
    return total.widen(cauchy_radii(bound, rho, n))


def _em_params_critical(tmax, bits: int):
    # N well past t/(2 pi) keeps the Bernoulli tail small; m tied to precision
    N = int(max(10, tmax / 2 + bits // 4))
    m = max(6, bits // 5)
    return N, m


def zeta_critical(t, config: Optional[PrecisionConfig] = None, info: bool = False):
    """Enclosure of zeta(1/2 + i t) for 0 <= t <= 10^4."""
    config = config or PrecisionConfig()
    with working_precision(config):
        t = ival(t)
        if upper(t) > ZETA_CRITICAL_TMAX:
            raise RangeError(f"zeta_critical supports t <= {ZETA_CRITICAL_TMAX}")
        if upper(t) <= 0 and lower(t) < 0:
            if info:
                out, inf = zeta_critical(-t, config, True)
                return out.conjugate(), inf
            return zeta_critical(-t, config).conjugate()
        N, m = _em_params_critical(upper(t), config.bits)
        z = zeta_em_cjet(iv.mpf(1) / 2, Jet([t]), N, m)
        out = _cjet_to_enclosure(z, config.bits)
        if info:
            return out, EvalInfo(N, m, _zeta_em_bound((iv.mpf(1) / 2, t), N, m))
        return out


def zeta_complex(s, config: Optional[PrecisionConfig] = None) -> ComplexEnclosure:
    """Enclosure of zeta(s) for Re s > -2m (general complex point, EM route)."""
    config = config or PrecisionConfig()
    s = ComplexEnclosure.of(s)
    with working_precision(config):
        if contains(s.re, 1) and contains(s.im, 0):
            raise PoleError("zeta has a pole at s = 1")
        tm = max(abs(lower(s.im)), abs(upper(s.im)))
        N, m = _em_params_critical(tm, config.bits)
        m = max(m, int(-lower(s.re)) + 4)
        z = zeta_em_cjet(s.re, Jet([s.im]), N, m)
        return _cjet_to_enclosure(z, config.bits)


# ---------------------------------------------------------------------------
# Stieltjes constants


@dataclass(frozen=True)
class StieltjesTable:
    values: Tuple
    precision: int

    def __len__(self):
        return len(self.values)

    def __getitem__(self, j):
        return self.values[j]

    def directed(self, j: int, direction: Direction) -> DirectedReal:
        return DirectedReal.from_interval(self.values[j], direction, self.precision)


def _deriv_polys(n: int, order: int) -> List[List[int]]:
    """P_p with f^(p)(x) = x^{-p-1} P_p(log x) for f = (log x)^n / x."""
    P = [0] * n + [1]
    out = [P]
    for p in range(order):
        Q = [-(p + 1) * c for c in P] + [0]
        for i in range(1, len(P)):
            Q[i - 1] += i * P[i]
        while len(Q) > 1 and Q[-1] == 0:
            Q.pop()
        P = Q
        out.append(P)
    return out


def _poly_eval(P, L):
    acc = iv.mpf(0)
    for c in reversed(P):
        acc = acc * L + c
    return acc


def _tail_log_integral(i: int, p: int, N: int, LN):
    # int_N^inf (log x)^i x^{-p-1} dx = N^{-p} sum_j i!/j! (log N)^j / p^{i-j+1}
    s = iv.mpf(0)
    for j in range(i + 1):
        s += iv.mpf(math.factorial(i) // math.factorial(j)) * LN ** j / iv.mpf(p) ** (i - j + 1)
    return s * iv.exp(-p * LN)


def _stieltjes_one(n: int, N: int, M: int):
    LN = iv.log(N)
    total = iv.mpf(0)
    for k in range(2, N):
        L = iv.log(k)
        total += L ** n / k
    total -= LN ** (n + 1) / (n + 1)
    total += LN ** n / N / 2
    polys = _deriv_polys(n, 2 * M)
    for j in range(1, M + 1):
        p = 2 * j - 1
        fp = _poly_eval(polys[p], LN) * iv.exp(-(p + 1) * LN)
        total -= _bern_iv(2 * j) / math.factorial(2 * j) * fp
    P2M = polys[2 * M]
    integ = iv.mpf(0)
    for i, c in enumerate(P2M):
        if c:
            integ += abs(c) * _tail_log_integral(i, 2 * M, N, LN)
    rem = abs(_bern_iv(2 * M)) / math.factorial(2 * M) * integ
    if n == 0:
        total += 1  # k = 1 term; (log 1)^n vanishes for n >= 1
    return total + _sym(rem)


@lru_cache(maxsize=8)
def _stieltjes_cached(count: int, bits: int) -> StieltjesTable:
    vals = []
    for n in range(count):
        # rounding, not truncation, dominates: escalate guard bits
        guard = 32 + 2 * n
        N, M = 40 + 2 * n, 24 + n
        for _ in range(6):
            with working_precision(bits + guard):
                v = _stieltjes_one(n, N, M)
            if upper(width(v)) < 2.0 ** (-(bits - 8)):
                break
            guard += 32
        else:
            raise PrecisionExhausted(f"gamma_{n} width target unreachable")
        vals.append(v)
    return StieltjesTable(tuple(vals), bits)


def stieltjes_constants(count: int, config: Optional[PrecisionConfig] = None) -> StieltjesTable:
    """Enclosures of gamma_0 ... gamma_{count-1}."""
    if count < 1:
        raise DomainError("need at least one constant")
    if count > 17:
        raise DomainError("at most gamma_0 ... gamma_16 are supported")
    config = config or PrecisionConfig()
    return _stieltjes_cached(count, config.bits)


def euler_gamma(config: Optional[PrecisionConfig] = None):
    return stieltjes_constants(1, config)[0]


# ---------------------------------------------------------------------------
# log-gamma and chi

STIRLING_SHIFT = 10


def _stirling_bound(box, M: int):
    re, im = box
    if not lower(re) > 0:
        raise DomainError("Stirling needs Re w > 0")
    rmin = iv.mpf(_box_abs_bounds(box)[0])
    imax = max(abs(lower(im)), abs(upper(im)))
    theta = iv.atan2(iv.mpf(imax), iv.mpf(lower(re)))
    sec = 1 / iv.cos(theta / 2)
    b = abs(_bern_iv(2 * M + 2)) / ((2 * M + 2) * (2 * M + 1)) / rmin ** (2 * M + 1)
    return upper(b * sec ** (2 * M + 2))


def loggamma_cjet(z: CJet, box=None, rho=None, M: Optional[int] = None) -> CJet:
    """Principal log Gamma(z) as a complex jet.

    Only the real part is reliable when z crosses the negative real axis
    (the principal argument jumps there); callers needing |Gamma| are fine.
    """
    n = z.order
    if box is None:
        box = (z.re.c[0], z.im.c[0])
        rho = 1
    re_lo = lower(box[0])
    shift = max(0, math.ceil(STIRLING_SHIFT - re_lo))
    acc = CJet.const(0, 0, n)
    for j in range(shift):
        acc = acc + (z + j).log()
    w = z + shift
    wbox = (box[0] + shift, box[1])
    bits = iv.prec
    M = M or max(8, bits // 6)
    half_log_2pi = iv.log(2 * iv.pi) / 2
    logw = w.log()
    out = (w - iv.mpf(1) / 2) * logw - w + half_log_2pi
    winv = w.reciprocal()
    winv2 = winv * winv
    pw = winv
    for j in range(1, M + 1):
        out = out + pw * (_bern_iv(2 * j) / (2 * j * (2 * j - 1)))
        pw = pw * winv2
    out = out.widen(cauchy_radii(_stirling_bound(wbox, M), rho, n))
    return out - acc


def log_gamma(z, config: Optional[PrecisionConfig] = None) -> ComplexEnclosure:
    """Enclosure of the principal log Gamma(z)."""
    config = config or PrecisionConfig()
    with working_precision(config):
        z = ComplexEnclosure.of(z, config.bits)
        if _pole_hit(z):
            raise PoleError(f"log_gamma: {z} meets a nonpositive integer")
        out = loggamma_cjet(z.as_cjet())
        return _cjet_to_enclosure(out, config.bits)


def _pole_hit(z: ComplexEnclosure) -> bool:
    if not contains(z.im, 0):
        return False
    lo, hi = lower(z.re), upper(z.re)
    if lo > 0:
        return False
    # any integer n <= 0 with lo <= n <= hi
    top = min(0, math.floor(hi))
    return top >= lo


def log_chi_cjet(s: CJet, box=None, rho=None) -> CJet:
    """log chi(s) = (s - 1/2) log pi + logGamma((1-s)/2) - logGamma(s/2)."""
    half = iv.mpf(1) / 2
    if box is None:
        box = (s.re.c[0], s.im.c[0])
        rho = 1
    b1 = ((1 - box[0]) * half, -box[1] * half)
    b2 = (box[0] * half, box[1] * half)
    g1 = loggamma_cjet((1 - s) * half, b1, rho)
    g2 = loggamma_cjet(s * half, b2, rho)
    return (s - half) * iv.log(iv.pi) + g1 - g2


def chi_factor(s, config: Optional[PrecisionConfig] = None) -> ComplexEnclosure:
    """Enclosure of chi(s) = pi^{s-1/2} Gamma((1-s)/2) / Gamma(s/2)."""
    config = config or PrecisionConfig()
    with working_precision(config):
        s = ComplexEnclosure.of(s, config.bits)
        half = iv.mpf(1) / 2
        if _pole_hit(ComplexEnclosure((1 - s.re) * half, -s.im * half)):
            raise PoleError("chi: Gamma((1-s)/2) has a pole here")
        zero_of_recip = _pole_hit(ComplexEnclosure(s.re * half, s.im * half))
        if zero_of_recip:
            raise PoleError("chi: Gamma(s/2) has a pole here")
        lc = log_chi_cjet(s.as_cjet())
        e = lc.exp()
        return _cjet_to_enclosure(e, config.bits)


def log_abs_chi(s, config: Optional[PrecisionConfig] = None):
    """Enclosure of log |chi(s)|, kept in log space for large powers."""
    config = config or PrecisionConfig()
    with working_precision(config):
        s = ComplexEnclosure.of(s, config.bits)
        return log_chi_cjet(s.as_cjet()).re.c[0]


def chi_lemma_modulus_bound(sigma, t, direction: Direction = Up):
    """Closed-form |chi(sigma+it)| bound for -1/2 <= sigma < 0, t >= 1 (E-term at its extreme)."""
    sigma, t = ival(sigma), ival(t)
    if not (lower(sigma) >= -0.5 and upper(sigma) < 0 and lower(t) >= 1):
        raise DomainError("closed-form chi bound needs -1/2 <= sigma < 0, t >= 1")
    four = iv.mpf(4)
    p1 = iv.exp(-sigma / 4 * iv.log(((1 - sigma) ** 2 + t * t) / four))
    p2 = iv.exp((1 - sigma) / 4 * iv.log((sigma * sigma + t * t) / four))
    base = p1 * p2 * iv.exp((sigma - iv.mpf(1) / 2) * iv.log(iv.pi)) * iv.exp(sigma - iv.mpf(1) / 2)
    e = iv.pi / 4 + (1 - 2 * sigma) / 2 + (18 * sigma * sigma - 18 * sigma + 19) / (12 * t)
    factor = iv.exp(e) if direction is Up else iv.exp(-e)
    return base * factor


# ---------------------------------------------------------------------------
# Lambert W


class Branch(enum.Enum):
    PRINCIPAL = "Principal"
    MINUS_ONE = "MinusOne"


Principal, MinusOne = Branch.PRINCIPAL, Branch.MINUS_ONE


def _lambert_float_seed(x: mpmath.mpf, branch: Branch) -> mpmath.mpf:
    return mpmath.lambertw(x, 0 if branch is Principal else -1).real


def _halley(x, w, steps: int = 60):
    for _ in range(steps):
        ew = mpmath.exp(w)
        f = w * ew - x
        if f == 0:
            break
        wp1 = w + 1
        if wp1 == 0:
            break
        dw = f / (ew * wp1 - (w + 2) * f / (2 * wp1))
        w -= dw
        if abs(dw) <= abs(w) * mpmath.mpf(2) ** (-mpmath.mp.prec + 4):
            break
    return w


BRANCH_POINT = "-1/e"


def lambert_w_interval(x, branch: Branch = Principal, config: Optional[PrecisionConfig] = None):
    """Enclosure of W(x) on the requested branch.

    -1/e is not a binary number; pass ``"-1/e"`` or any enclosure that
    contains it to hit the branch point.
    """
    config = config or PrecisionConfig()
    bits = max(config.bits, 128)
    with working_precision(bits):
        X = -iv.exp(iv.mpf(-1)) if isinstance(x, str) and x.replace(" ", "") == BRANCH_POINT else ival(x)
        inv_e = -iv.exp(iv.mpf(-1))
        if upper(X) < lower(inv_e):
            raise DomainError("Lambert W undefined below -1/e")
        if branch is MinusOne and not lower(X) < 0:
            raise DomainError("W_{-1} requires -1/e <= x < 0")
        if lower(X) <= upper(inv_e):
            # enclosure meets the branch point: W is -1 there and monotone away from it
            if upper(X) <= upper(inv_e):
                return iv.mpf(-1)
            far = lambert_w_interval(iv.mpf(upper(X)), branch, config)
            return iv.mpf([-1, upper(far)]) if branch is Principal else iv.mpf([lower(far), -1])
        if width(X) > 0:
            a = lambert_w_interval(iv.mpf(lower(X)), branch, config)
            b = lambert_w_interval(iv.mpf(upper(X)), branch, config)
            return hull(a, b)
        if lower(X) == 0:
            return iv.mpf(0)
        with mpmath.workprec(bits + 20):
            xm = mpmath.mpf(lower(X))
            w = _halley(xm, _lambert_float_seed(xm, branch))
        return _certify_lambert(X, w, branch)


def _certify_lambert(X, w, branch: Branch):
    """Interval Newton on f(w) = w e^w - x around a Halley approximant."""
    W = iv.mpf(w)
    r = abs(W) * iv.mpf(2) ** (-iv.prec + 16) + iv.mpf(2) ** (-iv.prec + 16)
    for grow in range(20):
        box = W + iv.mpf([-upper(r), upper(r)])
        deriv = iv.exp(box) * (box + 1)
        if lower(deriv) <= 0 <= upper(deriv):
            r = r / 16
            continue
        mid = iv.mpf(w)
        nb = mid - (mid * iv.exp(mid) - X) / deriv
        if lower(nb) >= lower(box) and upper(nb) <= upper(box):
            if branch is MinusOne and upper(nb) > -1:
                nb = iv.mpf([lower(nb), -1])
            return nb
        r = r * 16
    raise PrecisionExhausted("Lambert W certification failed")


def lambert_w(branch: Branch, x, direction: Direction = Up,
              config: Optional[PrecisionConfig] = None) -> DirectedReal:
    config = config or PrecisionConfig()
    if isinstance(branch, str):
        branch = Branch(branch)
    return DirectedReal.from_interval(lambert_w_interval(x, branch, config), direction, config.bits)

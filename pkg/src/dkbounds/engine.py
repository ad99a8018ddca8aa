"""Explicit bounds for Delta_k(x): remainder terms, kappa and threshold rules,
the five omega constants and the extension from (half-)integers to all reals.

All arithmetic is interval arithmetic (``iv.mpf``); public functions return
the Up endpoint as a :class:`DirectedReal`.  Printed literals such as
``"0.611"`` are ingested as decimal strings, never as binary floats.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from mpmath import iv

from .divisor import LambdaTable, h_k
from .errors import (
    ConstraintUnsatisfiable,
    DomainError,
    MismatchError,
    NoApplicableBound,
    PrecisionExhausted,
    UnsupportedCombination,
)
from .mainterm import MainTermPolynomial, mainterm_poly
from .numerics import (
    BigPoint,
    DirectedReal,
    Direction,
    Ordering,
    PrecisionConfig,
    certified_compare,
    fraction_to_decimal,
    imax,
    ipow,
    ival,
    lower,
    upper,
    upper_fraction,
    working_precision,
)
from . import special

Up = Direction.UP

Rational = Union[Fraction, int, str, Decimal]

T0_A3 = "8.97e17"  # validity floor of the 0.566 constant
UPSILON = "1271506.721"


def as_rational(v: Rational) -> Fraction:
    """Exact rational from '1/3', '0.611', '1e29', int, Decimal or Fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("bool is not a rational")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, Decimal):
        return Fraction(v)
    if isinstance(v, float):
        raise TypeError("floats are not accepted for exact parameters; pass a string")
    s = str(v).strip()
    if "/" in s:
        p, q = s.split("/", 1)
        return Fraction(int(p), int(q))
    return Fraction(Decimal(s))


def rational_text(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _up(x, bits=None) -> DirectedReal:
    return DirectedReal.from_interval(x, Up, bits or iv.prec)


def _pi():
    return +iv.pi


def _x_and_log(x):
    if isinstance(x, BigPoint):
        return x.interval(), x.log_interval()
    X = ival(x)
    return X, iv.log(X)


@functools.lru_cache(maxsize=None)
def _zeta_cached(s: Fraction, bits: int):
    return special.zeta_real_interval(s, PrecisionConfig(bits=bits + 16))


def _zeta(s: Fraction):
    return _zeta_cached(Fraction(s), iv.prec)


def _check(cond: bool, message: str):
    if not cond:
        raise DomainError(message)


# ---------------------------------------------------------------------------
# r1 .. r4: sums over d_k(n) near x


def _tail_hypotheses(X, a):
    A = ival(a)
    _check(lower(A) > 1, "a must exceed 1")
    _check(lower(X) > upper(3 * A), "tail sums need x > 3a")
    _check(lower(X * (1 - 1 / A)) >= 1.5, "tail sums need x(1 - 1/a) >= 3/2")
    return A


def r1_iv(x, k: int, eps, c, a):
    X, _ = _x_and_log(x)
    A = _tail_hypotheses(X, a)
    E, C = ival(eps), ival(c)
    ce = C - E
    _check(lower(ce) > 1, "r1 needs c - eps > 1")
    la = iv.log(A)
    t1 = (1 + C) * ipow(X / A, 1 - C) * (iv.log(X / A) + h_k(k)) ** (k - 1) / la
    ax = A * X
    t2 = (1 / (2 * ipow(ax, ce)) + ipow(ax, 1 - ce) / (ce - 1)
          + ce / (12 * ipow(ax, 1 + ce))
          + ce * (1 + ce) * (2 + ce) / (720 * ipow(ax, ce + 3))) / la
    return t1 + t2


def r2_iv(x, a):
    X, _ = _x_and_log(x)
    A = _tail_hypotheses(X, a)
    y = X * (1 - 1 / A)
    return iv.log(y - iv.mpf(1) / 2) + iv.euler + 1 / (2 * y - 1)


def r3_iv(x, a):
    X, L = _x_and_log(x)
    A = _tail_hypotheses(X, a)
    return L + iv.log(A - 1) + iv.euler + 1 / (2 * (A - 1) * X)


def r4_iv(x, a):
    X, L = _x_and_log(x)
    A = _tail_hypotheses(X, a)
    return L + iv.log(1 - 1 / A) + iv.euler - iv.mpf(1) / 2 + 1 / (2 * A) + 1 / (2 * X * (1 - 1 / A))


def tail_term(which: str, x, a, k: Optional[int] = None, eps=None, c=None,
              config: Optional[PrecisionConfig] = None) -> DirectedReal:
    """Up bound of r1 (needs k, eps, c), r2, r3 or r4."""
    config = config or PrecisionConfig()
    with working_precision(config):
        xx = BigPoint.parse(x) if isinstance(x, (str, int)) else x
        if which == "r1":
            if k is None or eps is None or c is None:
                raise DomainError("r1 needs k, eps and c")
            v = r1_iv(xx, k, as_rational(eps), as_rational(c), as_rational(a))
        elif which == "r2":
            v = r2_iv(xx, as_rational(a))
        elif which == "r3":
            v = r3_iv(xx, as_rational(a))
        elif which == "r4":
            v = r4_iv(xx, as_rational(a))
        else:
            raise DomainError(f"unknown tail term {which!r}")
        return _up(v, config.bits)


# ---------------------------------------------------------------------------
# bounds for zeta on vertical lines


def a1_iv(c, sigma, t0, base="0.611"):
    C, S, T0 = ival(c), ival(sigma), ival(t0)
    _check(lower(C) > 1, "a1 needs c > 1")
    _check(lower(S) >= 0.5 and upper(S) <= upper(C), "a1 needs sigma in [1/2, c]")
    _check(lower(T0) >= 3, "a1 needs t0 >= 3")
    half = iv.mpf(1) / 2
    lt = iv.log(T0)
    q = C + ival("1.31")
    zc = _zeta(c) if isinstance(c, Fraction) else special.zeta_real_interval(C)
    pi = _pi()
    return (ipow(ival(base), (C - S) / (C - half))
            * ipow(zc / lt, (S - half) / (C - half))
            * (1 + pi / (2 * lt) + pi * q ** 2 / (4 * T0 * lt ** 2) + q / (2 * T0 ** 2 * lt))
            * ipow((q + T0) / T0, (C - S) / (6 * (C - half))))


def a3_iv(c, sigma, t0):
    _check(lower(ival(t0)) >= upper(ival(T0_A3)), "a3 needs t0 >= 8.97e17")
    return a1_iv(c, sigma, t0, base="0.566")


def a2_iv(b, sigma, t0):
    B, S, T0 = ival(b), ival(sigma), ival(t0)
    _check(lower(B) > -0.31 and upper(B) < 0, "a2 needs -0.31 < b < 0")
    _check(lower(S) >= lower(B) and upper(S) <= 0.5, "a2 needs sigma in [b, 1/2]")
    _check(lower(T0) >= 3, "a2 needs t0 >= 3")
    half = iv.mpf(1) / 2
    pi = _pi()
    zb = _zeta(1 - b) if isinstance(b, Fraction) else special.zeta_real_interval(1 - B)
    lead = (1 - B) * zb / ((1 + B) * ipow(2 * pi, (1 - 2 * B) / 2) * iv.log(T0))
    q = ival("1.81") + T0
    expo = (4 * (3 * B * S - S - 5 * B) + 9) / (6 * (1 - 2 * B))
    return (ipow(ival("0.611"), (S - B) / (half - B))
            * ipow(lead, (half - S) / (half - B))
            * ipow(q / 3, expo)
            * iv.log(q / T0) / iv.log(T0))


def zeta_line_bound(kind: str, c_or_b, sigma, t0, config: Optional[PrecisionConfig] = None) -> DirectedReal:
    config = config or PrecisionConfig()
    with working_precision(config):
        p = as_rational(c_or_b)
        s = as_rational(sigma)
        t = as_rational(t0) if not isinstance(t0, BigPoint) else t0.fraction()
        if kind == "a1":
            v = a1_iv(p, s, t)
        elif kind == "a2":
            v = a2_iv(p, s, t)
        elif kind == "a3":
            v = a3_iv(p, s, t)
        else:
            raise DomainError(f"unknown line bound {kind!r}")
        return _up(v, config.bits)


# ---------------------------------------------------------------------------
# horizontal segments


def r5_iv(x, b, c, T, T0, T1, k: int, base="0.611"):
    X, _ = _x_and_log(x)
    T, T0, T1 = ival(T), ival(T0), ival(T1)
    _check(lower(T0) >= 3, "horizontal bound needs T0 >= 3")
    _check(lower(T) >= upper(T0), "horizontal bound needs T >= T0")
    _check(lower(T1) >= upper(T) or (lower(T1) == lower(T) and upper(T1) == upper(T)),
           "horizontal bound needs T1 >= T")
    half = iv.mpf(1) / 2
    B = ival(b)
    C = ival(c)
    pi = _pi()
    pre = iv.log(T1) ** k / (T * pi)
    sixth = ipow(T, iv.mpf(k) / 6)
    line = a1_iv if base == "0.611" else a3_iv
    second = pre * (C - half) * imax(line(c, half, T0) ** k * sixth * iv.sqrt(X),
                                     line(c, c, T0) ** k * ipow(X, C))
    if isinstance(b, Fraction) and b == Fraction(1, 2):
        return second
    first = pre * (half - B) * imax(a2_iv(b, b, T0) ** k * ipow(T, (1 - 2 * B) * k / 2) * ipow(X, B),
                                    a2_iv(b, half, T0) ** k * sixth * iv.sqrt(X))
    return first + second


def r10_iv(x, T, T0, T1, k: int, c):
    return r5_iv(x, Fraction(1, 2), c, T, T0, T1, k)


def r6_iv(x, T, T0, T1, k: int, c):
    _check(lower(ival(T0)) >= upper(ival(T0_A3)), "r6 needs T0 >= 8.97e17")
    return r5_iv(x, Fraction(1, 2), c, T, T0, T1, k, base="0.566")


def horizontal_bound(which: str, x, b, c, T, T0, T1, k: int,
                     config: Optional[PrecisionConfig] = None) -> DirectedReal:
    config = config or PrecisionConfig()
    with working_precision(config):
        xx = BigPoint.parse(x) if isinstance(x, (str, int)) else x
        bb, cc = as_rational(b), as_rational(c)
        if which == "r5":
            v = r5_iv(xx, bb, cc, ival(T), ival(T0), ival(T1), k)
        elif which == "r6":
            if bb != Fraction(1, 2):
                raise DomainError("r6 is defined for b = 1/2 only")
            v = r6_iv(xx, ival(T), ival(T0), ival(T1), k, cc)
        else:
            raise DomainError(f"unknown horizontal bound {which!r}")
        return _up(v, config.bits)


# ---------------------------------------------------------------------------
# moment envelopes


MOMENT_FLOORS = {"S": "3000", "H": "5.5e7", "V": "4", "G": "1.1e30"}
_KMIN = {"S": 4, "H": 4, "V": 2, "G": 2}


def _d(s):
    return ival(s)


def _prefactor(base: str, T, power: int):
    return (_d(base) * ipow(T, iv.mpf(1) / 6) * iv.log(T)) ** power


def _moment_pre(kind, k, T):
    if kind not in MOMENT_FLOORS:
        raise DomainError(f"unknown moment kind {kind!r}")
    if k < _KMIN[kind]:
        raise DomainError(f"{kind} envelope needs k >= {_KMIN[kind]}")
    T = ival(T)
    _check(lower(T) >= upper(_d(MOMENT_FLOORS[kind])), f"{kind} envelope needs T >= {MOMENT_FLOORS[kind]}")
    return T


def envelope_iv(kind: str, variant: str, k: int, T):
    T = _moment_pre(kind, k, T)
    pi = _pi()
    if kind in ("S", "H"):
        l = iv.log(T / 2)
        pre = _prefactor("0.611", T, k - 4)
        if kind == "S":
            core = (l ** 5 / (5 * pi ** 3) + _d("1.466") * ipow(l, _d("4.5")) + l ** 4 / pi ** 3
                    + _d("6.597") * ipow(l, _d("3.5")))
            if variant == "paper":
                return pre * (core - _d("11266.536"))
            return pre * core
        core = l ** 5 / (10 * pi ** 3) + _d("3.177") * l ** 4 + _d("12.644") * l ** 3
        if variant == "paper":
            return pre * (core - _d("243234.568"))
        return pre * core + _d("205.760") ** k * _d("1.910") / k - _d("445579.419")
    L = iv.log(T)
    if kind == "V":
        pre = _prefactor("0.611", T, k - 2)
        core = L ** 2 / (2 * pi) + _d("0.425") * ipow(L, _d("1.5")) + _d("7.658") * L + _d("0.637") * iv.sqrt(L)
        if variant == "paper":
            return pre * (core - _d("0.458"))
        return pre * core + moment_constant_iv("u", "new", k)
    pre = _prefactor("0.566", T, k - 2)
    v = _d(UPSILON)
    l53 = ipow(L, iv.mpf(5) / 3)
    core = L ** 2 / (2 * pi) + 3 * v * l53 / (2 * ipow(_d("1.1e30"), iv.mpf(2) / 3) * pi)
    if variant == "paper":
        return pre * (core - _d("0.217") * L - v * l53 / (2 * pi * ipow(T, iv.mpf(2) / 3)) - _d("741.434"))
    return pre * core + moment_constant_iv("b", "new", k)


def moment_constant_iv(kind: str, variant: str, k: int):
    if variant not in ("paper", "new"):
        raise DomainError(f"unknown variant {variant!r}")
    if kind == "c":
        _check(k >= 4, "c_k needs k >= 4")
        if variant == "new":
            raise UnsupportedCombination("c_k is folded into H_k,new")
        return (_d("1.039") * _d("1.461") ** (k - 4) + _d("28.553") * _d("7.624") ** (k - 4)
                + _d("1.910") / k * (_d("205.760") ** k - _d("25.515") ** k))
    if kind == "l":
        _check(k >= 4, "l_k needs k >= 4")
        if variant == "new":
            raise UnsupportedCombination("l_k is dropped from S_k,new")
        return (_d("1.039") * _d("1.461") ** (k - 4) + _d("28.553") * _d("7.624") ** (k - 4)
                + _d("194.306") * _d("18.001") ** (k - 4))
    if kind == "u":
        _check(k >= 2, "u_k needs k >= 2")
        u = _d("0.748") * _d("1.461") ** (k - 2) + _d("0.030") * _d("1.040") ** (k - 2)
        return u if variant == "paper" else u - _d("0.458") * _d("1.067") ** (k - 2)
    if kind == "b":
        _check(k >= 2, "b_k needs k >= 2")
        b = (_d("1.910") / k * (_d("3.978e6") ** k + _d("24803.958") ** k + _d("205.760") ** k
                                - _d("38448.929") ** k - _d("492.548") ** k - _d("25.515") ** k)
             + _d("0.748") * _d("1.461") ** (k - 2) + _d("3.329") * _d("7.624") ** (k - 2))
        return b if variant == "paper" else b - _d("756.444") * _d("3.977e6") ** (k - 2)
    raise DomainError(f"unknown moment constant {kind!r}")


def moment_envelope(kind: str, variant: str, k: int, T, config: Optional[PrecisionConfig] = None) -> DirectedReal:
    config = config or PrecisionConfig()
    with working_precision(config):
        return _up(envelope_iv(kind, variant, k, T), config.bits)


def moment_constant(kind: str, variant: str, k: int, config: Optional[PrecisionConfig] = None) -> DirectedReal:
    config = config or PrecisionConfig()
    with working_precision(config):
        return _up(moment_constant_iv(kind, variant, k), config.bits)


# ---------------------------------------------------------------------------
# the line Re s = b < 0 via the functional equation


def ck1_iv(b, k: int):
    B = ival(b)
    pi = _pi()
    return ipow(pi * iv.e, k * (B - iv.mpf(1) / 2)) * iv.exp(k * pi / 4 + k * (1 - 2 * B) / 2)


def ck2_iv(b, k: int):
    B = ival(b)
    _check(lower(B) > -0.31 and upper(B) < 0, "C_k,2 needs -0.31 < b < 0")
    pi = _pi()
    zb = _zeta(1 - b) if isinstance(b, Fraction) else special.zeta_real_interval(1 - B)
    return (8 * zb ** k / (pi * iv.sqrt(iv.mpf(k)))
            * ipow(((1 - B) ** 2 + 9) / 36, -k * B / 4)
            * ipow((B ** 2 + 9) / 36, k * (1 - B) / 4)
            * iv.exp(k * (18 * B ** 2 - 18 * B + 19) / 36)
            * ck1_iv(b, k))


def B_iv(b, T, k: int):
    B = ival(b)
    T = ival(T)
    _check(lower(T) >= 3, "B(b, T) needs T >= 3")
    return ck2_iv(b, k) * ipow(T, k * (iv.mpf(1) / 2 - B) - iv.mpf(1) / 2) * (1 + abs(B) / T)


@functools.lru_cache(maxsize=None)
def _gk_cached(b: Fraction, k: int, tol: str):
    return special_gk(b, k, tol)


def special_gk(b: Fraction, k: int, tol: str):
    from .quadrature import g_k as _g

    return _g(ival(b), k, tol=tol)


def A_iv(b, k: int, tol: str = "1e-12"):
    """g_k(b) zeta^k(1-b) / pi with the quadrature remainder already inside g_k."""
    res = _gk_cached(Fraction(b), k, tol)
    g = iv.mpf([lower(res.value), upper(res.value)])
    return g * _zeta(1 - Fraction(b)) ** k / _pi()


@dataclass(frozen=True)
class FunctionalEqComponents:
    Ck1: DirectedReal
    Ck2: DirectedReal
    gk: DirectedReal
    A: DirectedReal
    B: DirectedReal
    quadrature_error: DirectedReal


def functional_eq_bound(b, T, k: int, tol: str = "1e-12",
                        config: Optional[PrecisionConfig] = None) -> FunctionalEqComponents:
    config = config or PrecisionConfig()
    bb = as_rational(b)
    if not (Fraction(-31, 100) < bb < 0):
        raise DomainError("functional-equation bound needs -0.31 < b < 0")
    if k < 2:
        raise DomainError("functional-equation bound needs k >= 2")
    with working_precision(config):
        Tn = ival(T) if not isinstance(T, BigPoint) else T.interval()
        _check(lower(Tn) >= 3, "functional-equation bound needs T >= 3")
        res = _gk_cached(bb, k, tol)
        bits = config.bits
        return FunctionalEqComponents(
            Ck1=_up(ck1_iv(bb, k), bits),
            Ck2=_up(ck2_iv(bb, k), bits),
            gk=_up(res.value, bits),
            A=_up(A_iv(bb, k, tol), bits),
            B=_up(B_iv(bb, Tn, k), bits),
            quadrature_error=_up(res.error, bits),
        )


# ---------------------------------------------------------------------------
# truncated Perron remainders


def r9_iv(x, T, k: int, eps, eps1, a):
    X, _ = _x_and_log(x)
    E, E1, A = ival(eps), ival(eps1), ival(a)
    half = iv.mpf(1) / 2
    pi = _pi()
    inner = (r1_iv(x, k, eps, 1 + eps1, a)
             + 4 * X * ipow(X - half, E - 1 - E1)
             + 2 * X * ipow(X / A, E - 1 - E1) * r2_iv(x, a)
             + (A + 1) * ipow(X + half, E - E1) * r3_iv(x, a))
    return (1 + pi) * ipow(X, 1 + E1) / (pi * ival(T)) * inner


def r12_iv(x, T, T0, k: int, eps, eps1, a, lam):
    X, L = _x_and_log(x)
    E, E1, A = ival(eps), ival(eps1), ival(a)
    T0 = ival(T0)
    c = 1 + E1
    _check(lower(T0) > upper(c), "the Perron pole term needs T0 > 1 + eps1")
    pi = _pi()
    inner = (r1_iv(x, k, eps, 1 + eps1, a)
             + X * ipow(X / A, E - 1 - E1) * (r4_iv(x, a) + ival("0.6"))
             + (1 + 1 / (2 * X)) * ipow(X + 1, E - E1) * (r3_iv(x, a) + iv.mpf(1) / 2))
    lead = (1 + pi) * ipow(X, c) / (pi * ival(T)) * inner
    pole = iv.exp(ival(lam) * L / iv.log(L)) / (2 * pi) * (pi + 2 * T0 * c / (T0 ** 2 - c ** 2))
    return lead + pole


def perron_tail(case: str, x, T, T0, k: int, eps, eps1, a, lam=None,
                config: Optional[PrecisionConfig] = None) -> DirectedReal:
    """r9 (``NonIntegerX``, half-integers) or r12 (``IntegerX``)."""
    config = config or PrecisionConfig()
    with working_precision(config):
        xx = BigPoint.parse(x) if isinstance(x, (str, int)) else x
        e, e1, aa = as_rational(eps), as_rational(eps1), as_rational(a)
        Tn = T.interval() if isinstance(T, BigPoint) else ival(T)
        if case == "NonIntegerX":
            v = r9_iv(xx, Tn, k, e, e1, aa)
        elif case == "IntegerX":
            lam = LambdaTable.load()[k] if lam is None else as_rational(lam)
            v = r12_iv(xx, Tn, ival(T0), k, e, e1, aa, lam)
        else:
            raise DomainError(f"unknown case {case!r}")
        return _up(v, config.bits)


# ---------------------------------------------------------------------------
# method parameters


class Method(enum.Enum):
    FourthSmallT = "FourthSmallT"
    FourthLargeT = "FourthLargeT"
    SecondSmallT = "SecondSmallT"
    SecondLargeT = "SecondLargeT"
    FunctionalEq = "FunctionalEq"

    @property
    def omega_index(self) -> int:
        return list(Method).index(self) + 1

    @property
    def T0(self) -> str:
        return _METHOD_T0[self]

    @property
    def is_fourth(self) -> bool:
        return self in (Method.FourthSmallT, Method.FourthLargeT)

    @property
    def is_second(self) -> bool:
        return self in (Method.SecondSmallT, Method.SecondLargeT)


_METHOD_T0 = {
    Method.FourthSmallT: "3000",
    Method.FourthLargeT: "5.5e7",
    Method.SecondSmallT: "4",
    Method.SecondLargeT: "1.1e30",
    Method.FunctionalEq: "3",
}


class T1Rule(enum.Enum):
    KappaTimesPow = "KappaTimesPow"
    PowOnly = "PowOnly"
    SameAsT = "SameAsT"


def _lambda_default(k: int) -> Fraction:
    return LambdaTable.load()[k]


@functools.lru_cache(maxsize=None)
def _loglog3_interval(bits: int):
    with working_precision(bits):
        return iv.log(iv.log(iv.mpf(3)))


@dataclass(frozen=True)
class MethodParams:
    k: int
    eps: Fraction
    eps1: Fraction
    a: Fraction
    x0: BigPoint
    method: Method
    smallKappaVariant: Optional[bool] = None  # None: decide by the numeric check
    lam: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "eps", as_rational(self.eps))
        object.__setattr__(self, "eps1", as_rational(self.eps1))
        object.__setattr__(self, "a", as_rational(self.a))
        object.__setattr__(self, "x0", BigPoint.parse(self.x0))
        if isinstance(self.method, str):
            object.__setattr__(self, "method", Method(self.method))
        if self.lam is None:
            object.__setattr__(self, "lam", _lambda_default(self.k))
        else:
            object.__setattr__(self, "lam", as_rational(self.lam))
        self.validate()

    @property
    def c(self) -> Fraction:
        return 1 + self.eps1

    def validate(self) -> None:
        k, e, e1, m = self.k, self.eps, self.eps1, self.method
        if k < 2:
            raise DomainError("k must be at least 2")
        if m.is_fourth and k < 4:
            raise DomainError("fourth-moment methods need k >= 4")
        if not e > 0:
            raise DomainError("eps must be positive")
        if not e1 > e:
            raise DomainError(f"eps1 = {e1} must exceed eps = {e}")
        # eps1 < lambda(k) / log log 3 - 1
        cap = ival(self.lam) / _loglog3_interval(64) - 1
        if not upper(ival(e1)) < lower(cap):
            raise DomainError(f"eps1 = {e1} must be below lambda(k)/log log 3 - 1")
        if m.is_fourth and self.smallKappaVariant is False and e1 > Fraction(1, 5):
            raise DomainError("eps1 <= 0.2 is required outside the small-kappa variant")
        if m is Method.SecondSmallT and e1 > Fraction(13, 10):
            raise DomainError("eps1 <= 1.3 is required for the second-moment method")
        if m is Method.FunctionalEq and not e < Fraction(31, 100):
            raise DomainError("eps < 0.31 is required for the functional-equation method")
        if self.a < Fraction(8, 5):
            raise DomainError("a must be at least 1.6")
        with working_precision(64):
            cap_a = iv.exp(h_k(k))
            if not upper(ival(self.a)) <= lower(cap_a):
                raise DomainError(f"a = {self.a} must be at most e^h_k ~ {float(lower(cap_a)):.4f}")
        if self.x0 < BigPoint.parse(4):
            raise DomainError("x0 must be at least 4")

    @property
    def gamma(self) -> Fraction:
        k, e, e1 = self.k, self.eps, self.eps1
        if self.method.is_fourth:
            return (k - 1 + e1 * (k - 4)) / Fraction(k + 2)
        if self.method.is_second:
            return (k + 1 + e1 * (k - 2)) / Fraction(k + 4)
        D = k * (1 + 2 * e) + 1
        return ((1 + 2 * e) * (k - 1) + e1 * (k * (1 + 2 * e) - 1)) / D

    @property
    def beta(self) -> Fraction:
        k, e = self.k, self.eps
        if self.method.is_fourth:
            return Fraction(k * k + 2 * k + 6, k + 2)
        if self.method.is_second:
            return Fraction(k)
        D = k * (1 + 2 * e) + 1
        return k * (k * (1 + 2 * e) - 1) / D

    def key(self) -> Tuple:
        return (self.k, self.method.value, self.eps, self.eps1, self.a, self.x0.fraction())

    def to_record(self) -> dict:
        rec = {
            "k": self.k,
            "method": self.method.value,
            "eps": rational_text(self.eps),
            "eps1": rational_text(self.eps1),
            "a": rational_text(self.a),
            "x0": self.x0.format(),
            "lambda": rational_text(self.lam),
        }
        if self.smallKappaVariant is not None:
            rec["smallKappaVariant"] = self.smallKappaVariant
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "MethodParams":
        return cls(
            k=int(rec["k"]),
            eps=as_rational(str(rec["eps"])),
            eps1=as_rational(str(rec["eps1"])),
            a=as_rational(str(rec.get("a", "1.6"))),
            x0=BigPoint.parse(str(rec["x0"])),
            method=Method(rec["method"]),
            smallKappaVariant=rec.get("smallKappaVariant"),
            lam=as_rational(str(rec["lambda"])) if rec.get("lambda") is not None else None,
        )


def default_x0(k: int, eps, lam=None) -> BigPoint:
    """max{4, ceil(exp(exp(lambda(k)/eps)))}, reported to 5 significant digits (Up) when huge."""
    lam = _lambda_default(k) if lam is None else as_rational(lam)
    with working_precision(128):
        v = iv.exp(iv.exp(ival(lam) / ival(as_rational(eps))))
        hi = upper_fraction(v)
        if hi < 10 ** 6:
            return BigPoint.parse(max(4, math.ceil(hi)))
        return BigPoint.from_interval_up(v, 5)


# ---------------------------------------------------------------------------
# kappa selection


@dataclass(frozen=True)
class KappaTriple:
    kappa1: DirectedReal
    kappa2: Fraction
    kappa3: Fraction
    T0: str
    T1rule: T1Rule
    kappa1_enclosure: object = field(default=None, compare=False, repr=False)

    def k1(self):
        return self.kappa1_enclosure if self.kappa1_enclosure is not None else ival(self.kappa1.value)


def _kappa1_iv(params: MethodParams):
    k, e1 = params.k, params.eps1
    c = params.c
    m = params.method
    pi = _pi()
    if m.is_fourth:
        T0 = ival(m.T0)
        fac = 6 if m is Method.FourthSmallT else 3
        return ipow(5 * pi ** 2 * (k + 2) * a1_iv(c, c, T0) ** k / (fac * _d("0.611") ** (k - 4)),
                    iv.mpf(6) / (k + 2))
    if m is Method.SecondSmallT:
        return ipow(_d("0.611") ** 2 * (1 + 2 * ival(e1)) * (a1_iv(c, c, 4) / _d("0.611")) ** k,
                    iv.mpf(6) / (k + 4))
    if m is Method.SecondLargeT:
        return ipow((1 + 2 * ival(e1)) * a3_iv(c, c, ival(m.T0)) ** k / _d("0.566") ** (k - 2),
                    iv.mpf(6) / (k + 4))
    # functional equation, b = -eps
    e = params.eps
    D = k * (1 + 2 * e) + 1
    k3 = 2 * (1 + e1 + e) / D
    return ipow((iv.mpf(1) / 2 + ival(e1)) * (a1_iv(c, c, 3) * ival(k3)) ** k / (ck2_iv(-e, k) * pi),
                ival(Fraction(2) / D))


def _kappa23(params: MethodParams) -> Tuple[Fraction, Fraction]:
    k, e, e1 = params.k, params.eps, params.eps1
    if params.method.is_fourth:
        return Fraction(-6, k + 2), 3 * (1 + 2 * e1) / Fraction(k + 2)
    if params.method.is_second:
        return Fraction(0), 3 * (1 + 2 * e1) / Fraction(k + 4)
    D = k * (1 + 2 * e) + 1
    return Fraction(2 * k) / D, 2 * (1 + e1 + e) / D


def _small_kappa_factor(kap1, kappa2: Fraction, x1: BigPoint):
    return kap1 * ipow(x1.log_interval(), ival(kappa2))


def kappa_select(params: MethodParams, x1: Optional[BigPoint] = None,
                 config: Optional[PrecisionConfig] = None) -> KappaTriple:
    """kappa_1 (Up), exact kappa_2, kappa_3, T0 and the T1 rule.

    For the fourth-moment methods the small-kappa variant needs x1: it is
    admitted when kappa_1 (log x1)^kappa_2 < 1 certifies.
    """
    config = config or PrecisionConfig()
    with working_precision(config):
        k1 = _kappa1_iv(params)
        k2, k3 = _kappa23(params)
        m = params.method
        flag = params.smallKappaVariant
        if m.is_fourth:
            rule = T1Rule.KappaTimesPow
            if x1 is None:
                # provisional: the x1 constraints do not depend on the rule
                rule = T1Rule.KappaTimesPow if flag is False else T1Rule.PowOnly
            elif flag is not False:
                ok = upper(_small_kappa_factor(k1, k2, BigPoint.parse(x1))) < 1
                if ok:
                    rule = T1Rule.PowOnly
                elif flag:
                    raise UnsupportedCombination(
                        f"kappa1 (log x1)^kappa2 < 1 does not certify for k={params.k}, eps1={params.eps1}")
                elif params.eps1 > Fraction(1, 5):
                    raise UnsupportedCombination("eps1 > 0.2 is only admitted in the small-kappa variant")
        elif m is Method.SecondLargeT:
            small = upper(k1) < 1
            if not small and not lower(k1) >= 1:
                raise PrecisionExhausted("cannot decide kappa1 < 1")
            if flag is not None and flag != small:
                raise UnsupportedCombination(f"T1 rule is fixed by kappa1 {'<' if small else '>='} 1")
            rule = T1Rule.PowOnly if small else T1Rule.KappaTimesPow
        else:
            if flag:
                raise UnsupportedCombination(f"{m.value} has no small-kappa variant")
            rule = T1Rule.SameAsT
        return KappaTriple(_up(k1, config.bits), k2, k3, m.T0, rule, k1)


# ---------------------------------------------------------------------------
# thresholds


def round_threshold(frac: Fraction) -> BigPoint:
    """Printed-threshold convention: integer ceiling below 10^6, else 5 significant digits Up."""
    if frac < 10 ** 6:
        return BigPoint.parse(max(1, math.ceil(frac)))
    return BigPoint.parse(str(fraction_to_decimal(frac, 5, Up)))


@dataclass
class ThresholdReport:
    value: BigPoint  # rounded threshold used for evaluation
    exact: Fraction  # Up bound of the maximum of all constraints
    constraints: Dict[str, Fraction]  # Up bounds; exact where the constraint is rational
    active: str

    def to_record(self) -> dict:
        return {
            "x1": self.value.format(),
            "active": self.active,
            "constraints": {k: str(fraction_to_decimal(v, 8, Up)) for k, v in self.constraints.items()},
        }


def _exp_exp_constraint(lam: Fraction, num: Fraction, denom_scale, g: Fraction):
    """exp(exp(denom_scale (lam + sqrt(lam^2 - lam num)) / (2 g)))."""
    L = ival(lam)
    disc = L ** 2 - L * ival(num)
    if upper(disc) < 0:
        raise ConstraintUnsatisfiable("negative discriminant in the lambda constraint")
    disc = iv.mpf([max(0, lower(disc)), upper(disc)])
    return iv.exp(iv.exp(ival(denom_scale) * (L + iv.sqrt(disc)) / (2 * ival(g))))


def x1_floor(params: MethodParams, kappa: Optional[KappaTriple] = None,
             config: Optional[PrecisionConfig] = None) -> ThresholdReport:
    config = config or PrecisionConfig()
    with working_precision(config):
        kappa = kappa or kappa_select(params, config=config)
        k, e, e1, lam = params.k, params.eps, params.eps1, params.lam
        m = params.method
        cons: Dict[str, object] = {
            "a*x0": params.a * params.x0.fraction(),
            "e^e+1/2": iv.exp(iv.e) + iv.mpf(1) / 2,
            "4a": 4 * params.a,
        }
        k1 = kappa.k1()
        if m.is_fourth:
            T0 = ival(m.T0)
            C = ipow(k1 / T0, iv.mpf(k + 2) / 6)
            lw_cap = 2 / ((1 + 2 * ival(e1)) * iv.e)
            if not lower(C) > upper(lw_cap):
                arg = -(1 + 2 * ival(e1)) / 2 * C
                arg = iv.mpf([max(lower(arg), lower(-iv.exp(iv.mpf(-1)))), upper(arg)])
                W = special.lambert_w_interval(arg, special.MinusOne,
                                               PrecisionConfig(bits=max(config.bits, 128)))
                cons["LW-1"] = iv.exp(-2 / (1 + 2 * ival(e1)) * W)
            g = k - 1 + e1 * (k - 4)
            if lam >= 4 * g / Fraction(k + 2):
                cons["lambda"] = _exp_exp_constraint(lam, 4 * g / Fraction(k + 2), k + 2, g)
        elif m.is_second:
            G = k + 1 + e1 * (k - 2)
            if lam >= 4 * G / Fraction(k + 4):
                cons["lambda"] = _exp_exp_constraint(lam, 4 * G / Fraction(k + 4), k + 4, G)
            if m is Method.SecondLargeT:
                T0 = ival(m.T0)
                cons["T0"] = ipow(T0, ival(Fraction(k + 4) / (3 * (1 + e1)))) * ipow(k1, ival(-2 / (1 + e)))
        else:
            k2, k3 = kappa.kappa2, kappa.kappa3
            s = (1 + e1 + e) / Fraction(k)
            arg = ival(s) * ipow(3 / k1, ival(1 / k2))
            W = special.lambert_w_interval(arg, special.Principal, PrecisionConfig(bits=max(config.bits, 128)))
            cons["LW0"] = iv.exp(W / ival(s))
            cons["kappa1"] = iv.exp(ipow(k1, ival(-1 / k2)))
            D = k * (1 + 2 * e) + 1
            g5 = (1 + 2 * e) * (k * (1 + e1) - 1) - e1
            if lam >= 4 * g5 / D:
                cons["lambda"] = _exp_exp_constraint(lam, 4 * g5 / D, D, g5)
        ups = {name: v if isinstance(v, Fraction) else upper_fraction(v) for name, v in cons.items()}
        active = max(ups, key=lambda n: ups[n])
        top = ups[active]
        value = round_threshold(top)
        # x > 4a is strict
        if value.fraction() <= ups["4a"]:
            value = round_threshold(ups["4a"] + 1)
        return ThresholdReport(value, top, ups, active)


# ---------------------------------------------------------------------------
# omega


class Domain(enum.Enum):
    IntegersAndHalfIntegers = "IntegersAndHalfIntegers"
    AllReals = "AllReals"


@dataclass
class ExplicitBound:
    """|Delta_k(x)| < omega x^gamma (log x)^beta for x >= threshold in ``domain``."""

    k: int
    omega: DirectedReal
    gamma: Fraction
    beta: Fraction
    threshold: BigPoint
    domain: Domain
    provenance: str
    params: Optional[MethodParams] = None
    components: Dict[str, DirectedReal] = field(default_factory=dict)
    floor: Optional[ThresholdReport] = None

    def __post_init__(self):
        if not self.omega.value > 0:
            raise DomainError("omega must be positive")
        if not (Fraction(1, 2) <= self.gamma < 1):
            raise DomainError(f"x exponent {self.gamma} outside [1/2, 1)")
        if self.beta < 0:
            raise DomainError("log exponent must be nonnegative")

    def log_value(self, x):
        """Enclosure of log(omega x^gamma (log x)^beta)."""
        X, L = _x_and_log(BigPoint.parse(x) if isinstance(x, (str, int)) else x)
        return iv.log(ival(self.omega.value)) + ival(self.gamma) * L + ival(self.beta) * iv.log(L)

    def value_at(self, x):
        X, L = _x_and_log(BigPoint.parse(x) if isinstance(x, (str, int)) else x)
        return ival(self.omega.value) * ipow(X, ival(self.gamma)) * ipow(L, ival(self.beta))

    def to_record(self, digits: int = 12) -> dict:
        rec = {
            "k": self.k,
            "omega": self.omega.format(digits),
            "gamma": rational_text(self.gamma),
            "beta": rational_text(self.beta),
            "x1": self.threshold.format(),
            "domain": self.domain.value,
            "provenance": self.provenance,
        }
        if self.params is not None:
            rec["params"] = self.params.to_record()
        if self.components:
            rec["components"] = {k: v.format(digits) for k, v in self.components.items()}
        return rec


def _t_values(params: MethodParams, kappa: KappaTriple, x: BigPoint):
    X, L = x.interval(), x.log_interval()
    k1 = kappa.k1()
    powx = ipow(X, ival(kappa.kappa3))
    T = k1 * powx if kappa.kappa2 == 0 else k1 * ipow(L, ival(kappa.kappa2)) * powx
    if kappa.T1rule is T1Rule.PowOnly:
        T1 = powx
    elif kappa.T1rule is T1Rule.KappaTimesPow:
        T1 = k1 * powx
    else:
        T1 = T
    return T, T1


def remainder_pair(params: MethodParams, x, kappa: Optional[KappaTriple] = None,
                   gk_tol: str = "1e-12"):
    """(half-integer, integer) normalized remainders at x, with T = T(x).

    At x = x1 these are r11/r13 (fourth), r14/r15 (second) or r16/r17.
    """
    x = BigPoint.parse(x)
    kappa = kappa or kappa_select(params, x)
    k, e, e1, a, lam = params.k, params.eps, params.eps1, params.a, params.lam
    c = params.c
    m = params.method
    T, T1 = _t_values(params, kappa, x)
    T0 = ival(m.T0)
    if not lower(T) >= upper(T0):
        raise DomainError(f"T = {T} is below T0 = {m.T0} at x = {x}; raise x1")
    X, L = x.interval(), x.log_interval()
    den = ipow(X, ival(params.gamma)) * ipow(L, ival(params.beta))
    if m.is_fourth:
        f = envelope_iv("S" if m is Method.FourthSmallT else "H", "new", k, T1)
        common = r10_iv(x, T, T0, T1, k, c) + iv.sqrt(X) * f
    elif m is Method.SecondSmallT:
        common = r10_iv(x, T, T0, T1, k, c) + iv.sqrt(X) * envelope_iv("V", "new", k, T1)
    elif m is Method.SecondLargeT:
        common = r6_iv(x, T, T0, T1, k, c) + iv.sqrt(X) * envelope_iv("G", "new", k, T1)
    else:
        b = -e
        common = (r5_iv(x, b, c, T, 3, T, k) + iv.mpf(2) ** k
                  + ipow(X, ival(b)) * (B_iv(b, T, k) + A_iv(b, k, gk_tol)))
    half = (r9_iv(x, T, k, e, e1, a) + common) / den
    integer = (r12_iv(x, T, T0, k, e, e1, a, lam) + common) / den
    return half, integer


_COMPONENT_NAMES = {
    "fourth": ("r11", "r13"),
    "second": ("r14", "r15"),
    "fe": ("r16", "r17"),
}


def _names(m: Method):
    return _COMPONENT_NAMES["fourth" if m.is_fourth else "second" if m.is_second else "fe"]


def omega_bound(params: MethodParams, x1=None, config: Optional[PrecisionConfig] = None,
                gk_tol: str = "1e-12") -> ExplicitBound:
    """omega_i at x1 (default: the rounded floor) for integers and half-integers."""
    config = config or PrecisionConfig()
    with working_precision(config):
        kappa0 = kappa_select(params, config=config)
        floor = x1_floor(params, kappa0, config)
        x = floor.value if x1 is None else BigPoint.parse(x1)
        if x.fraction() < floor.exact:
            raise DomainError(f"x1 = {x} is below the floor {floor.exact} ({floor.active})")
        # the small-kappa check needs x1; the constraints on x1 do not depend on it
        kappa = kappa_select(params, x, config)
        half, integer = remainder_pair(params, x, kappa, gk_tol)
        omega = imax(half, integer)
        n_half, n_int = _names(params.method)
        bits = config.bits
        return ExplicitBound(
            k=params.k,
            omega=_up(omega, bits),
            gamma=params.gamma,
            beta=params.beta,
            threshold=x,
            domain=Domain.IntegersAndHalfIntegers,
            provenance=f"omega{params.method.omega_index}:{params.method.value}",
            params=params,
            components={n_half: _up(half, bits), n_int: _up(integer, bits), "kappa1": kappa.kappa1},
            floor=floor,
        )


# ---------------------------------------------------------------------------
# extension to all reals


def r7_iv(tau, upsilon, j: int, x):
    X, _ = _x_and_log(x)
    y = X + iv.mpf(1) / 2
    ly = iv.log(y)
    if j == 0:
        s = iv.mpf(1) / 2
    else:
        s = iv.mpf(0)
        for m in range(1, j + 1):
            s += math.comb(j, m) * y / ((2 * X) ** m * ly ** (m - 1))
    return ipow(y, -ival(tau)) * ipow(ly, -ival(upsilon)) * s


def r8_iv(tau, upsilon, j: int, x):
    if j == 0:
        return iv.mpf(0)
    X, _ = _x_and_log(x)
    y = X + iv.mpf(1) / 2
    ly = iv.log(y)
    t, u = ival(tau), ival(upsilon)
    small = ly ** j / (2 * ipow(y, t) * ipow(ly, u))
    big = None
    if upper(ival(j) - u) > 0:
        q = (j - u) / t
        big = ipow(q, j - u) * iv.exp(u - j) / 2 if lower(q) > 0 else None
    split = t * ly + u
    if upper(split) <= j:
        if big is None:
            raise PrecisionExhausted("r8 case split undecided")
        return big
    if lower(split) > j or big is None:
        return small
    return imax(small, big)


def extension_correction(P: MainTermPolynomial, gamma: Fraction, beta: Fraction, x1: BigPoint):
    total = iv.mpf(0)
    x = x1.interval()
    for j in range(P.k):
        aj = abs(P.enclosure(j))
        total += aj * (r7_iv(gamma, beta, j, x) + r8_iv(gamma, beta, j, x))
    return total


def extend_to_reals(boundInt: ExplicitBound, boundHalf: Optional[ExplicitBound] = None,
                    P: Optional[MainTermPolynomial] = None,
                    config: Optional[PrecisionConfig] = None) -> ExplicitBound:
    """Integers-and-half-integers bound(s) -> bound for every real x >= x1 + 1/2."""
    config = config or PrecisionConfig()
    boundHalf = boundHalf or boundInt
    if (boundInt.k, boundInt.gamma, boundInt.beta) != (boundHalf.k, boundHalf.gamma, boundHalf.beta):
        raise MismatchError("integer and half-integer bounds must share k and exponents")
    for b in (boundInt, boundHalf):
        if b.domain is not Domain.IntegersAndHalfIntegers:
            raise MismatchError("extension expects integer/half-integer bounds")
    P = P or mainterm_poly(boundInt.k, config)
    if P.k != boundInt.k:
        raise MismatchError(f"main term for k={P.k} does not match k={boundInt.k}")
    x1 = max(boundInt.threshold, boundHalf.threshold, key=lambda b: b.fraction())
    with working_precision(config):
        base = imax(ival(boundInt.omega.value), ival(boundHalf.omega.value))
        corr = extension_correction(P, boundInt.gamma, boundInt.beta, x1)
        alpha = base + corr
        return ExplicitBound(
            k=boundInt.k,
            omega=_up(alpha, config.bits),
            gamma=boundInt.gamma,
            beta=boundInt.beta,
            threshold=BigPoint.from_fraction(x1.fraction() + Fraction(1, 2), sig=60),
            domain=Domain.AllReals,
            provenance=f"extended:{boundInt.provenance}",
            params=boundInt.params,
            components={"base": _up(base, config.bits), "correction": _up(corr, config.bits)},
        )


def publication_alpha(omega) -> str:
    """Ceiling to 3 decimals; below 10^-4 the ceiling to 4 significant digits in e-notation."""
    f = omega.fraction() if isinstance(omega, DirectedReal) else Fraction(omega)
    if f >= Fraction(1, 10000):
        n = math.ceil(f * 1000)
        return f"{n // 1000}.{n % 1000:03d}"
    d = fraction_to_decimal(f, 4, Up)
    return f"{d:.3e}"


def publication_threshold(x: BigPoint) -> str:
    """Threshold as printed in the summary table: integer below 10^6, else 4 digits Up."""
    f = x.fraction()
    if f < 10 ** 6:
        return str(math.ceil(f))
    return BigPoint.parse(str(fraction_to_decimal(f, 4, Up))).format()


# ---------------------------------------------------------------------------
# selection


def best_bound(candidates: Sequence[ExplicitBound], x, config: Optional[PrecisionConfig] = None) -> ExplicitBound:
    """The applicable candidate with the smallest bound value at x."""
    if not candidates:
        raise NoApplicableBound("no candidate bounds")
    ks = {c.k for c in candidates}
    if len(ks) != 1:
        raise MismatchError("candidates must share k")
    x = BigPoint.parse(x)
    live = [c for c in candidates if c.threshold <= x]
    if not live:
        nearest = min(candidates, key=lambda c: c.threshold.fraction()).threshold
        raise NoApplicableBound(f"no bound applies at x = {x}; smallest threshold {nearest}", nearest)
    if len(live) == 1:
        return live[0]
    config = config or PrecisionConfig()
    with working_precision(config):
        best = live[0]
        best_log = best.log_value(x)
        for cand in live[1:]:
            v = cand.log_value(x)
            order = certified_compare(v, best_log)
            # Unknown: both are valid upper bounds; keep the smaller Up end
            if order is Ordering.LESS or (order is Ordering.UNKNOWN and upper(v) < upper(best_log)):
                best, best_log = cand, v
        return best

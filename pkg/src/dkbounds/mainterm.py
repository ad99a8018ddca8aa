"""The main term x P_k(log x) from the residue of zeta^k(w) x^w / w at w = 1.

Series coefficients are exact ``Fraction`` values where they are known
exactly (the pole parts) and ``iv.mpf`` enclosures otherwise, so the
leading coefficient 1/(k-1)! survives with zero width.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Union

from mpmath import iv

from .errors import DomainError, TruncationError
from .numerics import (
    BigPoint,
    DirectedReal,
    Direction,
    PrecisionConfig,
    as_fraction_mpf,
    decimal_round,
    ival,
    lower,
    upper,
    width,
    working_precision,
)
from .special import StieltjesTable, stieltjes_constants

Up, Down = Direction.UP, Direction.DOWN
Coef = Union[Fraction, object]

MAX_LAURENT_ORDER = 14


def _mul(a: Coef, b: Coef) -> Coef:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    if isinstance(a, Fraction) and a == 0 or isinstance(b, Fraction) and b == 0:
        return Fraction(0)
    return ival(a) * ival(b)


def _add(a: Coef, b: Coef) -> Coef:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    if isinstance(a, Fraction) and a == 0:
        return b
    if isinstance(b, Fraction) and b == 0:
        return a
    return ival(a) + ival(b)


def _neg(a: Coef) -> Coef:
    return -a


@dataclass(frozen=True)
class LaurentSeries:
    """sum_{j = lowestOrder}^{truncationOrder} c_j (w - 1)^j, center 1."""

    lowestOrder: int
    coefficients: tuple
    truncationOrder: int

    def __post_init__(self):
        if len(self.coefficients) != self.truncationOrder - self.lowestOrder + 1:
            raise ValueError("coefficient count does not match orders")

    def coeff(self, j: int) -> Coef:
        if j < self.lowestOrder:
            return Fraction(0)
        if j > self.truncationOrder:
            raise TruncationError(f"order {j} beyond truncation order {self.truncationOrder}")
        return self.coefficients[j - self.lowestOrder]

    def enclosure(self, j: int):
        return ival(self.coeff(j))

    def directed(self, j: int, direction: Direction) -> DirectedReal:
        return DirectedReal.from_interval(self.enclosure(j), direction)

    def truncate(self, order: int) -> "LaurentSeries":
        if order > self.truncationOrder:
            raise TruncationError(f"cannot extend to order {order}")
        n = order - self.lowestOrder + 1
        return LaurentSeries(self.lowestOrder, self.coefficients[:n], order)

    def evaluate(self, w):
        """Enclosure of the truncated sum at w (no tail bound)."""
        h = ival(w) - 1
        acc = iv.mpf(0)
        for j in range(self.lowestOrder, self.truncationOrder + 1):
            acc += ival(self.coeff(j)) * h ** j
        return acc


def series_mul(a: LaurentSeries, b: LaurentSeries, order: Optional[int] = None) -> LaurentSeries:
    low = a.lowestOrder + b.lowestOrder
    feasible = min(a.truncationOrder + b.lowestOrder, b.truncationOrder + a.lowestOrder)
    if order is None:
        order = feasible
    elif order > feasible:
        raise TruncationError(f"product supports order <= {feasible}, asked {order}")
    out = []
    for j in range(low, order + 1):
        acc: Coef = Fraction(0)
        for i in range(a.lowestOrder, j - b.lowestOrder + 1):
            acc = _add(acc, _mul(a.coeff(i), b.coeff(j - i)))
        out.append(acc)
    return LaurentSeries(low, tuple(out), order)


def series_one(order: int) -> LaurentSeries:
    return LaurentSeries(0, tuple([Fraction(1)] + [Fraction(0)] * order), order)


def series_pow(s: LaurentSeries, k: int, order: Optional[int] = None) -> LaurentSeries:
    if k < 0:
        raise DomainError("negative powers are not supported")
    if k == 0:
        return series_one(s.truncationOrder - s.lowestOrder if order is None else order)
    out = s
    for _ in range(k - 1):
        out = series_mul(out, s)
    if order is not None:
        out = out.truncate(order)
    return out


def zeta_laurent(order: int, table: Optional[StieltjesTable] = None,
                 config: Optional[PrecisionConfig] = None) -> LaurentSeries:
    """zeta(w) = 1/(w-1) + sum_{j=0}^{order} (-1)^j gamma_j / j! (w-1)^j."""
    if not 0 <= order <= MAX_LAURENT_ORDER:
        raise DomainError(f"order must be in 0..{MAX_LAURENT_ORDER}")
    table = table or stieltjes_constants(order + 1, config)
    if len(table) < order + 1:
        raise TruncationError("Stieltjes table too short")
    with working_precision(config or PrecisionConfig(bits=table.precision)):
        coeffs: list = [Fraction(1)]
        for j in range(order + 1):
            c = table[j] / math.factorial(j)
            coeffs.append(c if j % 2 == 0 else -c)
    return LaurentSeries(-1, tuple(coeffs), order)


def zeta_laurent_tail_bound(order: int, w):
    """Bound on the omitted part of the zeta series at w.

    Berndt: |gamma_n| <= (3 + (-1)^n) (n-1)! / pi^n for n >= 1, so with
    q = |w - 1| / pi the tail beyond ``order`` is at most
    4 q^{J+1} / ((J+1)(1 - q)), J = order.
    """
    q = abs(ival(w) - 1) / iv.pi
    if not upper(q) < 1:
        raise DomainError("tail bound needs |w - 1| < pi")
    J = order
    return 4 * q ** (J + 1) / ((J + 1) * (1 - q))


# ---------------------------------------------------------------------------
# main term polynomial


@dataclass(frozen=True)
class MainTermPolynomial:
    k: int
    coefficients: tuple  # a_0 ... a_{k-1}; Fraction or iv.mpf

    def enclosure(self, j: int):
        return ival(self.coefficients[j])

    def directed(self, j: int, direction: Direction) -> DirectedReal:
        return DirectedReal.from_interval(self.enclosure(j), direction)

    def is_exact(self, j: int) -> bool:
        return isinstance(self.coefficients[j], Fraction)

    def float_coefficients(self) -> List[float]:
        out = []
        for c in self.coefficients:
            if isinstance(c, Fraction):
                out.append(float(c))
            else:
                out.append(float((lower(c) + upper(c)) / 2))
        return out

    def negated(self) -> "MainTermPolynomial":
        return MainTermPolynomial(self.k, tuple(-c for c in self.coefficients))


def mainterm_poly(k: int, config: Optional[PrecisionConfig] = None) -> MainTermPolynomial:
    """P_k with x P_k(log x) = Res_{w=1} zeta^k(w) x^w / w."""
    if not 1 <= k <= 12:
        raise DomainError("k must be in 1..12")
    config = config or PrecisionConfig()
    # ζ known to order k+2: two orders beyond the k-2 the residue needs
    order = k + 2
    z = zeta_laurent(order, config=config)
    with working_precision(config):
        zk = series_pow(z, k)
        # x^w / w = x sum_m L^m/m! (w-1)^m * sum_n (-1)^n (w-1)^n ; collect total order -1
        coeffs: List[Coef] = [Fraction(0)] * k
        for i in range(-k, 0):
            p = zk.coeff(i)
            tot = -1 - i
            for m in range(tot + 1):
                n = tot - m
                sign = -1 if n % 2 else 1
                coeffs[m] = _add(coeffs[m], _mul(p, Fraction(sign, math.factorial(m))))
    return MainTermPolynomial(k, tuple(coeffs))


def mainterm_enclosure(P: MainTermPolynomial, x):
    """Enclosure of x P_k(log x) for x >= 1 (x an interval or BigPoint)."""
    if isinstance(x, BigPoint):
        if x < BigPoint.parse(1):
            raise DomainError("main term needs x >= 1")
        X, L = x.interval(), x.log_interval()
    else:
        X = ival(x)
        if lower(X) < 1:
            raise DomainError("main term needs x >= 1")
        L = iv.log(X)
    acc = iv.mpf(0)
    for c in reversed(P.coefficients):
        acc = acc * L + ival(c)
    return X * acc


def eval_mainterm(P: MainTermPolynomial, x, direction: Direction = Up,
                  config: Optional[PrecisionConfig] = None) -> DirectedReal:
    config = config or PrecisionConfig()
    with working_precision(config):
        xp = x if isinstance(x, BigPoint) else BigPoint.parse(x) if isinstance(x, (str, int)) else x
        return DirectedReal.from_interval(mainterm_enclosure(P, xp), direction, config.bits)


def abs_coeff_profile(P: MainTermPolynomial) -> List[DirectedReal]:
    out = []
    for c in P.coefficients:
        if isinstance(c, Fraction):
            out.append(DirectedReal.from_interval(ival(abs(c)), Up))
        else:
            out.append(DirectedReal.from_interval(abs(c), Up))
    return out


def mainterm_record(P: MainTermPolynomial, digits: int = 30) -> dict:
    """Structured record: decimal centre and enclosure radius per coefficient."""
    items = []
    for j, c in enumerate(P.coefficients):
        if isinstance(c, Fraction):
            items.append({"j": j, "value": decimal_round(c, digits, Up) if c.denominator != 1 else str(c),
                          "exact": f"{c.numerator}/{c.denominator}", "radius": "0"})
        else:
            mid = (lower(c) + upper(c)) / 2
            rad = width(c) / 2
            items.append({"j": j, "value": decimal_round(as_fraction_mpf(mid), digits, Up),
                          "radius": decimal_round(as_fraction_mpf(rad), 3, Up)})
    return {"k": P.k, "coefficients": items}


def mainterm_json(P: MainTermPolynomial, digits: int = 30) -> str:
    return json.dumps(mainterm_record(P, digits), indent=2)

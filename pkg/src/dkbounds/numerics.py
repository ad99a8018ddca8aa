"""Directed-rounding real arithmetic and the huge-abscissa representation.

Enclosures are mpmath ``iv.mpf`` intervals; a :class:`DirectedReal` is one
endpoint of such an enclosure tagged with the side it bounds.  Every other
module computes with enclosures and exposes Up (or Down) endpoints.
"""
from __future__ import annotations

import contextlib
import enum
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

import mpmath
from mpmath import iv, libmp, mp

from .errors import DomainError, PrecisionExhausted

DEFAULT_BITS = 128
MAX_BITS = 1024


class Direction(enum.Enum):
    UP = "up"
    DOWN = "down"

    def flip(self) -> "Direction":
        return Direction.DOWN if self is Direction.UP else Direction.UP


Up = Direction.UP
Down = Direction.DOWN


class Ordering(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision record passed explicitly through the pipeline."""

    bits: int = DEFAULT_BITS
    cap: int = MAX_BITS

    def __post_init__(self):
        if self.bits < 53 or self.cap < self.bits:
            raise ValueError(f"invalid precision config {self.bits}/{self.cap}")

    def doubled(self) -> "PrecisionConfig":
        return PrecisionConfig(min(2 * self.bits, self.cap), self.cap)

    def ladder(self):
        bits = self.bits
        while True:
            yield bits
            if bits >= self.cap:
                return
            bits = min(2 * bits, self.cap)


@contextlib.contextmanager
def working_precision(config: PrecisionConfig | int | None = None):
    bits = DEFAULT_BITS if config is None else (config if isinstance(config, int) else config.bits)
    # iv has no workprec context; never lower an enclosing precision
    saved = iv.prec
    iv.prec = max(bits, saved) if _NESTED[0] else bits
    _NESTED[0] += 1
    try:
        yield bits
    finally:
        _NESTED[0] -= 1
        iv.prec = saved


_NESTED = [0]


# ---------------------------------------------------------------- conversion

Number = Union[int, str, Fraction, Decimal, float, "DirectedReal"]


def _endpoint(x, side: int):
    # exact endpoint, no rounding to mp.prec
    mpi = getattr(x, "_mpi_", None)
    if mpi is None:
        mpi = ival(x)._mpi_
    return mp.make_mpf(mpi[side])


def lower(x) -> mpmath.mpf:
    return _endpoint(x, 0)


def upper(x) -> mpmath.mpf:
    return _endpoint(x, 1)


def lower_fraction(x) -> Fraction:
    p, q = libmp.to_rational(x._mpi_[0])
    return Fraction(int(p), int(q))


def upper_fraction(x) -> Fraction:
    p, q = libmp.to_rational(x._mpi_[1])
    return Fraction(int(p), int(q))


def ival(x):
    """Outward-rounded enclosure of an exact value at the current precision.

    Decimal strings are read exactly (``"0.611"`` is the decimal, not the
    nearest double).  Floats are taken at their exact binary value.
    """
    if isinstance(x, iv.mpf):
        return x
    if isinstance(x, DirectedReal):
        return iv.mpf(x.value)
    if isinstance(x, BigPoint):
        return x.interval()
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, int):
        return iv.mpf(x)
    if isinstance(x, Fraction):
        return _ratio(x.numerator, x.denominator)
    if isinstance(x, Decimal):
        return iv.mpf(str(x))
    if isinstance(x, str):
        return iv.mpf(x.strip())
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite literal {x!r}")
        return iv.mpf(x)
    if isinstance(x, mpmath.mpf):
        return iv.mpf(x)
    if hasattr(x, "_mpf_"):
        # mpmath constants (pi, e, euler, ...) have interval twins
        for name in ("pi", "e", "euler", "ln2", "ln10", "catalan", "phi"):
            if x is getattr(mpmath, name):
                return +getattr(iv, name)
        return iv.mpf(+x)
    raise TypeError(f"cannot enclose {type(x).__name__}")


def _ratio(p: int, q: int):
    return iv.mpf(p) / iv.mpf(q)


def as_fraction_mpf(v) -> Fraction:
    """Exact rational value of a finite mpf."""
    # mpmath.mpf(v) would round to mp.prec; read the raw value when present
    raw = getattr(v, "_mpf_", None)
    p, q = libmp.to_rational(raw if raw is not None else mpmath.mpf(v)._mpf_)
    return Fraction(int(p), int(q))


def hull(*xs):
    lo = min(lower(ival(x)) for x in xs)
    hi = max(upper(ival(x)) for x in xs)
    return iv.mpf([lo, hi])


def width(x) -> mpmath.mpf:
    x = ival(x)
    with mp.workprec(max(iv.prec, 53) + 16):
        return upper(x) - lower(x)


def is_finite(x) -> bool:
    return mpmath.isfinite(lower(x)) and mpmath.isfinite(upper(x))


def _exact(value):
    # exact rational for point values, None for enclosures
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, (Decimal, str)):
        try:
            return Fraction(Decimal(str(value).strip()))
        except Exception:
            return None
    if isinstance(value, mpmath.mpf) and mpmath.isfinite(value):
        p, q = libmp.to_rational(value._mpf_)
        return Fraction(int(p), int(q))
    return None


def contains(x, value) -> bool:
    x = ival(x)
    e = _exact(value)
    if e is not None:
        lo, hi = lower(x), upper(x)
        ok_lo = lo == mpmath.ninf or (mpmath.isfinite(lo) and lower_fraction(x) <= e)
        ok_hi = hi == mpmath.inf or (mpmath.isfinite(hi) and e <= upper_fraction(x))
        return ok_lo and ok_hi
    v = ival(value)
    return lower(x) <= lower(v) and upper(v) <= upper(x)


def require_positive(x, what="argument"):
    if not lower(x) > 0:
        raise DomainError(f"{what} enclosure {x} is not certified positive")
    return x


# ------------------------------------------------------------ DirectedReal


@dataclass(frozen=True)
class DirectedReal:
    """A one-sided certified bound: ``value >= exact`` for Up, ``<=`` for Down."""

    value: mpmath.mpf
    direction: Direction
    precision: int = DEFAULT_BITS

    @classmethod
    def from_interval(cls, x, direction: Direction, precision: int | None = None):
        x = ival(x)
        if not is_finite(x):
            raise PrecisionExhausted(f"enclosure {x} is not finite")
        v = upper(x) if direction is Up else lower(x)
        return cls(v, direction, precision or iv.prec)

    @classmethod
    def parse(cls, text: str, direction: Direction = Up, precision: int = DEFAULT_BITS):
        with working_precision(precision):
            return cls.from_interval(iv.mpf(text.strip()), direction, precision)

    def interval(self):
        return iv.mpf(self.value)

    def fraction(self) -> Fraction:
        # exact rational literals (published constants) are stored as Fraction
        if isinstance(self.value, Fraction):
            return self.value
        p, q = libmp.to_rational(self.value._mpf_)
        return Fraction(int(p), int(q))

    def __float__(self):
        # float() of an Up bound is rounded up as well
        f = float(self.value)
        if self.direction is Up and mpmath.mpf(f) < self.value:
            f = math.nextafter(f, math.inf)
        elif self.direction is Down and mpmath.mpf(f) > self.value:
            f = math.nextafter(f, -math.inf)
        return f

    def format(self, digits: int = 12) -> str:
        return format_directed(self.value, self.direction, digits)

    def __str__(self):
        return self.format()


def format_directed(value, direction: Direction, digits: int = 12) -> str:
    """Decimal string rounded in ``direction`` (so an Up string stays an upper bound)."""
    if value == 0:
        return "0"
    p, q = libmp.to_rational(mpmath.mpf(value)._mpf_) if not isinstance(value, Fraction) else (value.numerator, value.denominator)
    frac = Fraction(int(p), int(q))
    return decimal_round(frac, digits, direction)


def decimal_round(frac: Fraction, sig: int, direction: Direction) -> str:
    d = fraction_to_decimal(frac, sig, direction)
    s = f"{d:.{sig - 1}e}"
    mant, _, exp = s.partition("e")
    e = int(exp)
    return f"{mant}e{e}" if e != 0 else mant


def fraction_to_decimal(frac: Fraction, sig: int, direction: Direction) -> Decimal:
    """``sig``-significant-digit decimal rounded toward ``direction``, exactly."""
    if frac == 0:
        return Decimal(0)
    if frac < 0:
        return -fraction_to_decimal(-frac, sig, direction.flip())
    e = len(str(frac.numerator)) - len(str(frac.denominator))
    if Fraction(10) ** e > frac:
        e -= 1
    if Fraction(10) ** (e + 1) <= frac:
        e += 1
    shift = e - sig + 1
    scaled = frac / (Fraction(10) ** shift)
    n = math.floor(scaled)
    if direction is Up and n != scaled:
        n += 1
    # scaleb would round to the context precision
    return Decimal(f"{n}E{shift}")


# ----------------------------------------------------------- directed_eval

_UNARY = {
    "exp": lambda a: iv.exp(a),
    "log": lambda a: iv.log(require_positive(a, "log argument")),
    "sqrt": lambda a: iv.sqrt(_nonneg(a)),
    "neg": lambda a: -a,
}


def _nonneg(a):
    if lower(a) < 0:
        raise DomainError(f"sqrt argument {a} not certified nonnegative")
    return a


def _div(a, b):
    if lower(b) <= 0 <= upper(b):
        raise DomainError(f"divisor enclosure {b} straddles 0")
    return a / b


def ipow(a, b):
    """a**b on enclosures; real result only."""
    if isinstance(b, int):
        return a ** b
    b = ival(b)
    if lower(b) == upper(b):
        fb = lower_fraction(b)
        if fb.denominator == 1:
            return a ** int(fb)
    if lower(a) < 0:
        raise DomainError(f"pow base {a} not certified nonnegative for real exponent")
    if lower(a) == 0:
        if lower(b) <= 0:
            raise DomainError("0 raised to a nonpositive exponent")
        hi = iv.exp(b * iv.log(iv.mpf(upper(a)))) if upper(a) > 0 else iv.mpf(0)
        return iv.mpf([0, upper(hi)])
    return iv.exp(b * iv.log(a))


_BINARY = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": _div,
    "pow": ipow,
    "max": lambda a, b: imax(a, b),
    "min": lambda a, b: imin(a, b),
}


def imax(*xs):
    xs = [ival(x) for x in xs]
    return iv.mpf([max(lower(x) for x in xs), max(upper(x) for x in xs)])


def imin(*xs):
    xs = [ival(x) for x in xs]
    return iv.mpf([min(lower(x) for x in xs), min(upper(x) for x in xs)])


def enclose_op(op: str, args: Sequence):
    args = [ival(a) for a in args]
    if op in _UNARY:
        if len(args) != 1:
            raise TypeError(f"{op} takes one argument")
        return _UNARY[op](args[0])
    if op in ("max", "min") and len(args) >= 1:
        return imax(*args) if op == "max" else imin(*args)
    if op in _BINARY:
        if len(args) != 2:
            raise TypeError(f"{op} takes two arguments")
        return _BINARY[op](*args)
    raise ValueError(f"unknown op {op!r}")


def directed_eval(op: str, args: Sequence[Number], direction: Direction,
                  config: PrecisionConfig | None = None) -> DirectedReal:
    """Certified one-sided bound of ``op(*args)``.

    Arguments are exact numbers (a DirectedReal contributes its value).
    ``sub`` and ``div`` handle operand directions through interval
    endpoints, so the caller never flips anything by hand.
    """
    config = config or PrecisionConfig()
    with working_precision(config):
        for a in args:
            if isinstance(a, float) and not math.isfinite(a):
                raise DomainError("non-finite argument")
        x = enclose_op(op, args)
        if not is_finite(x):
            raise PrecisionExhausted(f"{op} produced unbounded enclosure")
        return DirectedReal.from_interval(x, direction, config.bits)


def evaluate(expr, direction: Direction, config: PrecisionConfig | None = None) -> DirectedReal:
    """Evaluate a nested ``(op, arg, ...)`` tuple tree in ``direction``."""
    config = config or PrecisionConfig()
    with working_precision(config):
        return DirectedReal.from_interval(enclose_tree(expr), direction, config.bits)


def enclose_tree(expr):
    if isinstance(expr, tuple):
        op, *rest = expr
        return enclose_op(op, [enclose_tree(r) for r in rest])
    return ival(expr)


def certified_compare(a, b) -> Ordering:
    """LESS only if a.hi < b.lo, GREATER only if a.lo > b.hi."""
    a = _as_enclosure(a)
    b = _as_enclosure(b)
    if upper(a) < lower(b):
        return Ordering.LESS
    if lower(a) > upper(b):
        return Ordering.GREATER
    return Ordering.UNKNOWN


def _as_enclosure(x):
    if isinstance(x, tuple) and len(x) == 2:
        lo, hi = x
        lo = lo.value if isinstance(lo, DirectedReal) else lo
        hi = hi.value if isinstance(hi, DirectedReal) else hi
        return iv.mpf([lower(ival(lo)), upper(ival(hi))])
    return ival(x)


def decide(fn: Callable[[], Ordering], config: PrecisionConfig | None = None) -> Ordering:
    """Re-run a comparison with doubled precision until it is decided."""
    config = config or PrecisionConfig()
    for bits in config.ladder():
        with working_precision(bits):
            result = fn()
        if result is not Ordering.UNKNOWN:
            return result
    raise PrecisionExhausted(f"comparison undecided at {config.cap} bits")


# ---------------------------------------------------------------- BigPoint

LN10_CACHE: dict[int, object] = {}


def ln10():
    p = iv.prec
    if p not in LN10_CACHE:
        LN10_CACHE[p] = iv.log(iv.mpf(10))
    return LN10_CACHE[p]


@dataclass(frozen=True)
class BigPoint:
    """x = mantissa * 10**exponent10 with mantissa a decimal in [1, 10)."""

    mantissa: Decimal
    exponent10: int
    precision: int = field(default=DEFAULT_BITS, compare=False)

    def __post_init__(self):
        m = Decimal(self.mantissa)
        if not (Decimal(1) <= m < Decimal(10)):
            raise DomainError(f"mantissa {m} outside [1, 10)")
        object.__setattr__(self, "mantissa", m)

    # construction
    @classmethod
    def parse(cls, text: Union[str, int, "BigPoint"], precision: int = DEFAULT_BITS) -> "BigPoint":
        if isinstance(text, BigPoint):
            return text
        if isinstance(text, int):
            text = str(text)
        s = str(text).strip().replace("·10^", "e").replace("*10^", "e").replace("E", "e")
        try:
            d = Decimal(s)
        except Exception as exc:  # decimal.InvalidOperation
            raise DomainError(f"not a decimal: {text!r}") from exc
        if not d.is_finite() or d <= 0:
            raise DomainError(f"BigPoint needs a positive finite value, got {text!r}")
        sign, digits, exp = d.as_tuple()
        e10 = len(digits) + exp - 1
        mant = Decimal((0, digits, -(len(digits) - 1)))
        return cls(mant, e10, precision)

    @classmethod
    def from_fraction(cls, frac: Fraction, sig: int = 40, direction: Direction = Up) -> "BigPoint":
        return cls.parse(str(fraction_to_decimal(frac, sig, direction)))

    @classmethod
    def from_interval_up(cls, x, sig: int) -> "BigPoint":
        """Smallest ``sig``-digit decimal >= the enclosure's upper end."""
        return cls.parse(str(fraction_to_decimal(upper_fraction(ival(x)), sig, Up)))

    # views
    def fraction(self) -> Fraction:
        return Fraction(self.mantissa) * (Fraction(10) ** self.exponent10)

    def interval(self):
        m = iv.mpf(str(self.mantissa))
        if self.exponent10 >= 0:
            return m * iv.mpf(10) ** self.exponent10
        return m / iv.mpf(10) ** (-self.exponent10)

    def log_interval(self):
        return iv.log(iv.mpf(str(self.mantissa))) + self.exponent10 * ln10()

    @property
    def logValue(self):
        with working_precision(self.precision):
            x = self.log_interval()
            return (DirectedReal.from_interval(x, Down), DirectedReal.from_interval(x, Up))

    def is_integer(self) -> bool:
        return self.fraction().denominator == 1

    def __float__(self):
        return float(self.fraction()) if self.exponent10 < 300 else math.inf

    def __lt__(self, other):
        return self.fraction() < BigPoint.parse(other).fraction()

    def __le__(self, other):
        return self.fraction() <= BigPoint.parse(other).fraction()

    def __gt__(self, other):
        return self.fraction() > BigPoint.parse(other).fraction()

    def __ge__(self, other):
        return self.fraction() >= BigPoint.parse(other).fraction()

    def format(self) -> str:
        m = format(self.mantissa, "f")
        if self.exponent10 == 0:
            return m
        return f"{m}e{self.exponent10}"

    def short(self, sig: int = 5) -> str:
        if self.exponent10 < 6 and self.is_integer():
            return str(int(self.fraction()))
        return f"{float(self.mantissa):.{sig - 1}f}e{self.exponent10}"

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"BigPoint('{self.format()}')"


def big_log(x: BigPoint, direction: Direction, config: PrecisionConfig | None = None) -> DirectedReal:
    config = config or PrecisionConfig()
    with working_precision(config):
        return DirectedReal.from_interval(BigPoint.parse(x).log_interval(), direction, config.bits)


def big_pow10(exponent: int, direction: Direction = Up) -> BigPoint:
    return BigPoint(Decimal(1), int(exponent))


def as_enclosure(x):
    """Enclosure for any numeric input including BigPoint."""
    if isinstance(x, BigPoint):
        return x.interval()
    return ival(x)


def log_of(x):
    if isinstance(x, BigPoint):
        return x.log_interval()
    return iv.log(require_positive(ival(x), "log argument"))


def mid(x) -> mpmath.mpf:
    x = ival(x)
    with mp.workprec(iv.prec + 8):
        return (lower(x) + upper(x)) / 2


def point(x):
    """Degenerate enclosure at the midpoint (for non-rigorous seeds)."""
    return iv.mpf(mid(x))


def to_mpf(x, prec: int | None = None) -> mpmath.mpf:
    with mp.workprec(prec or iv.prec):
        return +mid(x)


def sum_enclosures(xs: Iterable):
    total = iv.mpf(0)
    for x in xs:
        total += x
    return total

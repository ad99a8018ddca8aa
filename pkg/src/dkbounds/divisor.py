"""Exact d_k(n), T_k(x) and the empirical error term.

The sieve runs k - 1 in-place Dirichlet convolutions with the constant
function 1.  Walking d downward means a[d] is still the previous layer's
value when it is pushed to its multiples.
"""
from __future__ import annotations

import math
import os
import random
import struct
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

import numpy as np
from mpmath import iv

from .errors import CapacityError, ConfigError, DomainError, FactorizationTimeout, RangeError
from .numerics import (
    BigPoint,
    DirectedReal,
    Direction,
    PrecisionConfig,
    big_log,
    ival,
    lower,
    upper,
    working_precision,
)

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

Up, Down = Direction.UP, Direction.DOWN

MAX_K = 12
MAX_N = 10 ** 8
DEFAULT_MEMORY_BUDGET = 4 * 1024 ** 3
INT64_MAX = np.iinfo(np.int64).max


def _convolve_py(a):  # pragma: no cover - fallback path
    n = len(a) - 1
    over = False
    for d in range(n // 2, 0, -1):
        v = a[d]
        for m in range(2 * d, n + 1, d):
            a[m] += v
    return over


if numba is not None:

    @numba.njit(cache=True)
    def _convolve(a):
        n = a.shape[0] - 1
        over = False
        lim = INT64_MAX
        for d in range(n // 2, 0, -1):
            v = a[d]
            for m in range(2 * d, n + 1, d):
                if a[m] > lim - v:
                    over = True
                a[m] += v
        return over

    @numba.njit(cache=True)
    def _prefix(a, out):
        s = 0
        lim = INT64_MAX
        over = False
        for i in range(1, a.shape[0]):
            if s > lim - a[i]:
                over = True
            s += a[i]
            out[i] = s
        return over

else:  # pragma: no cover
    _convolve = _convolve_py
    _prefix = None


@dataclass
class DivisorSieve:
    k: int
    limit: int
    dkValues: np.ndarray
    prefixSums: Union[np.ndarray, list]

    def dk(self, n: int) -> int:
        if not 1 <= n <= self.limit:
            raise RangeError(f"n = {n} outside sieve range [1, {self.limit}]")
        return int(self.dkValues[n])

    def T(self, x) -> int:
        """T_k(floor(x)); x below 1 gives 0."""
        n = math.floor(x) if not isinstance(x, int) else x
        if n > self.limit:
            raise RangeError(f"x = {x} beyond sieve limit {self.limit}")
        if n < 1:
            return 0
        return int(self.prefixSums[n])


def sieve_bytes(N: int) -> int:
    # value array plus prefix array, int64 each
    return 16 * (N + 1)


def build_sieve(k: int, N: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> DivisorSieve:
    if not 1 <= k <= MAX_K:
        raise DomainError(f"k must be in 1..{MAX_K}")
    if not 1 <= N <= MAX_N:
        raise CapacityError(f"N must be in 1..{MAX_N}")
    if sieve_bytes(N) > memory_budget:
        raise CapacityError(f"sieve of size {N} needs {sieve_bytes(N)} bytes > budget {memory_budget}")
    a = np.ones(N + 1, dtype=np.int64)
    a[0] = 0
    for _ in range(k - 1):
        if _convolve(a):
            raise CapacityError("d_k values overflow 64-bit storage")
    return DivisorSieve(k, N, a, _prefix_sums(a))


def _prefix_sums(a: np.ndarray):
    out = np.zeros_like(a)
    if _prefix is not None:
        over = _prefix(a, out)
    else:  # pragma: no cover
        np.cumsum(a, out=out)
        over = False
    if over:
        # numpy has no int128; fall back to exact Python integers
        acc, lst = 0, [0] * len(a)
        for i in range(1, len(a)):
            acc += int(a[i])
            lst[i] = acc
        return lst
    return out


# ---------------------------------------------------------------------------
# pointwise d_k


def factorize(n: int, budget_seconds: float = 5.0) -> Dict[int, int]:
    if n < 1:
        raise DomainError("n must be positive")
    out: Dict[int, int] = {}
    deadline = time.monotonic() + budget_seconds
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p, step = 7, [4, 2, 4, 2, 4, 6, 2, 6]
    i = 0
    checks = 0
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += step[i]
        i = (i + 1) % 8
        checks += 1
        if checks & 0xFFFF == 0 and time.monotonic() > deadline:
            raise FactorizationTimeout(f"factorization exceeded {budget_seconds}s")
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def dk_from_factorization(k: int, fac: Dict[int, int]) -> int:
    r = 1
    for e in fac.values():
        r *= math.comb(e + k - 1, k - 1)
    return r


def dk_point(k: int, n: Union[int, Dict[int, int]], budget_seconds: float = 5.0) -> int:
    """d_k(n) from the prime factorization (given as a dict, or found by trial division)."""
    if k < 1:
        raise DomainError("k must be >= 1")
    fac = n if isinstance(n, dict) else factorize(int(n), budget_seconds)
    return dk_from_factorization(k, fac)


def dk_convolution_oracle(k: int, N: int) -> list:
    """Independent d_k by d_k(n) = sum_{d | n} d_{k-1}(d), plain Python."""
    prev = [0] + [1] * N
    for _ in range(k - 1):
        cur = [0] * (N + 1)
        for d in range(1, N + 1):
            v = prev[d]
            for m in range(d, N + 1, d):
                cur[m] += v
        prev = cur
    return prev


# ---------------------------------------------------------------------------
# empirical error term


def delta_empirical(sieve: DivisorSieve, P, x, config: Optional[PrecisionConfig] = None):
    """Enclosure of T_k(floor x) - x P_k(log x)."""
    from .mainterm import mainterm_enclosure

    if P.k != sieve.k:
        raise DomainError("sieve and polynomial have different k")
    X = ival(x) if not isinstance(x, BigPoint) else x.interval()
    if lower(X) < 1:
        raise DomainError("delta_empirical needs x >= 1")
    if upper(X) > sieve.limit:
        raise RangeError(f"x beyond sieve limit {sieve.limit}")
    config = config or PrecisionConfig()
    with working_precision(config):
        n = _floor_exact(x)
        main = mainterm_enclosure(P, ival(x) if not isinstance(x, BigPoint) else x.interval())
        return iv.mpf(sieve.T(n)) - main


def _floor_exact(x) -> int:
    if isinstance(x, int):
        return x
    if isinstance(x, BigPoint):
        return math.floor(x.fraction())
    if isinstance(x, (str,)):
        from decimal import Decimal

        return math.floor(Fraction(Decimal(x)))
    if isinstance(x, (float, Fraction)):
        return math.floor(x)
    X = ival(x)
    lo, hi = math.floor(lower(X)), math.floor(upper(X))
    if lo != hi:
        raise DomainError("floor of x is not determined by its enclosure")
    return int(lo)


# ---------------------------------------------------------------------------
# lambda(k)


@dataclass(frozen=True)
class LambdaTable:
    entries: Dict[int, Fraction]
    source: str = "<memory>"

    def __post_init__(self):
        llog3 = math.log(math.log(3))
        for k, v in self.entries.items():
            if v <= 0:
                raise ConfigError(f"lambda({k}) must be positive")
            if k >= 3 and float(v) <= llog3:
                raise ConfigError(f"lambda({k}) = {v} must exceed log log 3")

    def __getitem__(self, k: int) -> Fraction:
        try:
            return self.entries[k]
        except KeyError:
            raise ConfigError(f"no lambda({k}) in {self.source}") from None

    def __contains__(self, k):
        return k in self.entries

    def text(self, k: int) -> str:
        return _fraction_text(self.entries[k])

    @classmethod
    def parse(cls, text: str, source: str = "<text>") -> "LambdaTable":
        from decimal import Decimal, InvalidOperation

        entries: Dict[int, Fraction] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) != 2:
                raise ConfigError(f"{source}:{lineno}: expected 'k<TAB>decimal'")
            try:
                k = int(parts[0])
                v = Fraction(Decimal(parts[1]))
            except (ValueError, InvalidOperation):
                raise ConfigError(f"{source}:{lineno}: cannot parse {raw!r}") from None
            entries[k] = v
        return cls(entries, source)

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None) -> "LambdaTable":
        if path is None:
            text = resources.files("dkbounds.data").joinpath("lambda.tsv").read_text()
            return cls.parse(text, "lambda.tsv")
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"lambda table {p} not found")
        return cls.parse(p.read_text(), str(p))


def _fraction_text(f: Fraction) -> str:
    from decimal import Decimal

    d = Decimal(f.numerator) / Decimal(f.denominator)
    return format(d.normalize(), "f")


@dataclass
class LambdaReport:
    k: int
    lam: Fraction
    limit: int
    passed: bool
    violation: Optional[int] = None
    worst_n: Optional[int] = None
    worst_ratio: float = 0.0
    note: str = "necessary condition only: checked for 3 <= n <= limit"
    log_k_factor: bool = False

    def __str__(self):
        status = "PASS" if self.passed else f"FAIL at n = {self.violation}"
        return f"lambda({self.k}) = {_fraction_text(self.lam)} up to {self.limit}: {status} ({self.note})"


def validate_lambda(table: Union[LambdaTable, Fraction, float, str], k: int, sieve: DivisorSieve,
                    log_k_factor: bool = False) -> LambdaReport:
    """Check log d_k(n) <= lambda log n / log log n for 3 <= n <= sieve.limit.

    With ``log_k_factor`` the right side carries an extra factor log k,
    the normalization under which the bundled values for k >= 3 hold.
    Fast float screen, then any near-miss is decided in interval arithmetic.
    """
    if sieve.k != k:
        raise DomainError("sieve built for a different k")
    if isinstance(table, LambdaTable):
        lam = table[k]
    else:
        from decimal import Decimal

        lam = Fraction(Decimal(str(table))) if not isinstance(table, Fraction) else table
    N = sieve.limit
    if N < 3:
        return LambdaReport(k, lam, N, True, log_k_factor=log_k_factor)
    n = np.arange(3, N + 1, dtype=np.float64)
    d = sieve.dkValues[3:].astype(np.float64)
    ln = np.log(n)
    scale = math.log(k) if log_k_factor else 1.0
    rhs = float(lam) * scale * ln / np.log(ln)
    lhs = np.log(d)
    ratio = lhs / rhs
    worst = int(np.argmax(ratio))
    suspects = np.nonzero(lhs > rhs * (1 - 1e-12))[0]
    with working_precision(128):
        L = ival(lam) * (iv.log(k) if log_k_factor else 1)
        for idx in suspects:
            m = int(idx) + 3
            lhs_iv = iv.log(iv.mpf(int(sieve.dkValues[m])))
            lm = iv.log(iv.mpf(m))
            rhs_iv = L * lm / iv.log(lm)
            if lower(lhs_iv) > upper(rhs_iv):
                return LambdaReport(k, lam, N, False, violation=m, worst_n=m, worst_ratio=float(ratio[idx]),
                                    log_k_factor=log_k_factor)
            if upper(lhs_iv) > lower(rhs_iv):
                # undecided at 128 bits; be conservative
                return LambdaReport(k, lam, N, False, violation=m, worst_n=m, worst_ratio=float(ratio[idx]),
                                    note="enclosures overlap; treated as a violation", log_k_factor=log_k_factor)
    return LambdaReport(k, lam, N, True, worst_n=worst + 3, worst_ratio=float(ratio[worst]),
                        log_k_factor=log_k_factor)


# ---------------------------------------------------------------------------
# classical upper bound for T_k


def h_k(k: int):
    """The h_k policy: k-1 for k = 2, k-2 for 3 <= k <= 10, min(k-2, k(3/2 - log 2)) beyond."""
    if k < 2:
        raise DomainError("h_k needs k >= 2")
    if k == 2:
        return iv.mpf(1)
    if k <= 10:
        return iv.mpf(k - 2)
    alt = k * (iv.mpf(3) / 2 - iv.log(2))
    return alt if upper(alt) < k - 2 else iv.mpf(k - 2)


def tk_upper_classical(k: int, x, direction: Direction = Up,
                       config: Optional[PrecisionConfig] = None) -> DirectedReal:
    """Upper bound x/(k-1)! (log x + h_k)^{k-1} for T_k(x)."""
    config = config or PrecisionConfig()
    xp = BigPoint.parse(x) if not isinstance(x, BigPoint) else x
    if k >= 3 and xp < BigPoint.parse(13):
        raise DomainError("the k - 2 variant of h_k is valid for x >= 13")
    if xp < BigPoint.parse(1):
        raise DomainError("x must be at least 1")
    with working_precision(config):
        L = xp.log_interval()
        val = xp.interval() * (L + h_k(k)) ** (k - 1) / math.factorial(k - 1)
        return DirectedReal.from_interval(val, direction, config.bits)


# ---------------------------------------------------------------------------
# persistence

MAGIC = b"DKSIEVE1"
_HEADER = struct.Struct("<8sIQI")


def save_sieve(sieve: DivisorSieve, path: Union[str, Path]) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, sieve.k, sieve.limit, 64))
        fh.write(sieve.dkValues.astype("<i8").tobytes())


def load_sieve(path: Union[str, Path], samples: int = 64, seed: int = 0) -> DivisorSieve:
    p = Path(path)
    with open(p, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ConfigError(f"{p}: truncated header")
        magic, k, N, bits = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ConfigError(f"{p}: bad magic {magic!r}")
        if bits != 64:
            raise ConfigError(f"{p}: unsupported integer width {bits}")
        data = np.frombuffer(fh.read(), dtype="<i8").astype(np.int64)
    if len(data) != N + 1:
        raise ConfigError(f"{p}: expected {N + 1} values, found {len(data)}")
    rng = random.Random(seed)
    for _ in range(min(samples, N)):
        n = rng.randint(1, N)
        if int(data[n]) != dk_point(k, n):
            raise ConfigError(f"{p}: entry {n} fails validation")
    data = np.array(data)
    return DivisorSieve(int(k), int(N), data, _prefix_sums(data))

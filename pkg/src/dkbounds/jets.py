"""Truncated Taylor series ("jets") with interval coefficients.

A jet of order n carries f(t0), f'(t0)/1!, ..., f^(n)(t0)/n! as ``iv.mpf``
enclosures.  When t0 is itself an interval the coefficients enclose the
normalized derivatives over the whole interval, which yields the
remainder bounds for the certified quadrature rule.

Only what the special functions need is implemented.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

from mpmath import iv

from .errors import DomainError
from .numerics import ival, lower, upper


def _z(n):
    return [iv.mpf(0) for _ in range(n + 1)]


@dataclass
class Jet:
    c: List

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @classmethod
    def const(cls, v, order: int) -> "Jet":
        c = _z(order)
        c[0] = ival(v)
        return cls(c)

    @classmethod
    def variable(cls, t0, order: int) -> "Jet":
        c = _z(order)
        c[0] = ival(t0)
        if order >= 1:
            c[1] = iv.mpf(1)
        return cls(c)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.const(other, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        return Jet([a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Jet([a - b for a, b in zip(self.c, o.c)])

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return Jet([-a for a in self.c])

    def __mul__(self, other):
        if not isinstance(other, Jet):
            v = ival(other)
            return Jet([a * v for a in self.c])
        n = self.order
        out = _z(n)
        for i in range(n + 1):
            ai = self.c[i]
            for j in range(n + 1 - i):
                out[i + j] += ai * other.c[j]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            v = ival(other)
            return Jet([a / v for a in self.c])
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def reciprocal(self) -> "Jet":
        b0 = self.c[0]
        if lower(b0) <= 0 <= upper(b0):
            raise DomainError("reciprocal of a jet whose value straddles 0")
        n = self.order
        q = _z(n)
        q[0] = 1 / b0
        for k in range(1, n + 1):
            s = iv.mpf(0)
            for j in range(1, k + 1):
                s += self.c[j] * q[k - j]
            q[k] = -s / b0
        return Jet(q)

    def exp(self) -> "Jet":
        n = self.order
        g = _z(n)
        g[0] = iv.exp(self.c[0])
        for k in range(1, n + 1):
            s = iv.mpf(0)
            for j in range(1, k + 1):
                s += j * self.c[j] * g[k - j]
            g[k] = s / k
        return Jet(g)

    def log(self) -> "Jet":
        f0 = self.c[0]
        if not lower(f0) > 0:
            raise DomainError("log of a jet not certified positive")
        n = self.order
        g = _z(n)
        g[0] = iv.log(f0)
        for k in range(1, n + 1):
            s = iv.mpf(0)
            for j in range(1, k):
                s += j * g[j] * self.c[k - j]
            g[k] = (self.c[k] - s / k) / f0
        return Jet(g)

    def pow(self, alpha) -> "Jet":
        f0 = self.c[0]
        if not lower(f0) > 0:
            raise DomainError("real power of a jet not certified positive")
        alpha = ival(alpha)
        n = self.order
        g = _z(n)
        g[0] = iv.exp(alpha * iv.log(f0))
        for k in range(1, n + 1):
            s = iv.mpf(0)
            for j in range(1, k + 1):
                s += ((alpha + 1) * j - k) * self.c[j] * g[k - j]
            g[k] = s / (k * f0)
        return Jet(g)

    def sqrt(self) -> "Jet":
        return self.pow(iv.mpf(1) / 2)

    def sincos(self):
        n = self.order
        s = _z(n)
        c = _z(n)
        s[0] = iv.sin(self.c[0])
        c[0] = iv.cos(self.c[0])
        for k in range(1, n + 1):
            ss = iv.mpf(0)
            cc = iv.mpf(0)
            for j in range(1, k + 1):
                jf = j * self.c[j]
                ss += jf * c[k - j]
                cc += jf * s[k - j]
            s[k] = ss / k
            c[k] = -cc / k
        return Jet(s), Jet(c)

    def widen(self, radii) -> "Jet":
        """Add [-r_j, r_j] to coefficient j (remainder folding)."""
        out = []
        for a, r in zip(self.c, radii):
            r = ival(r)
            out.append(a + iv.mpf([-upper(r), upper(r)]))
        return Jet(out)


@dataclass
class CJet:
    """Complex jet as a pair of real jets (real part, imaginary part)."""

    re: Jet
    im: Jet

    @property
    def order(self) -> int:
        return self.re.order

    @classmethod
    def const(cls, re, im, order: int) -> "CJet":
        return cls(Jet.const(re, order), Jet.const(im, order))

    def _coerce(self, other) -> "CJet":
        if isinstance(other, CJet):
            return other
        if isinstance(other, Jet):
            return CJet(other, Jet.const(0, self.order))
        if isinstance(other, tuple):
            return CJet.const(other[0], other[1], self.order)
        return CJet.const(other, 0, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        return CJet(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return CJet(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return CJet(-self.re, -self.im)

    def __mul__(self, other):
        if not isinstance(other, (CJet, Jet, tuple)):
            v = ival(other)
            return CJet(self.re * v, self.im * v)
        o = self._coerce(other)
        return CJet(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def abs2(self) -> Jet:
        return self.re * self.re + self.im * self.im

    def conj(self) -> "CJet":
        return CJet(self.re, -self.im)

    def reciprocal(self) -> "CJet":
        d = self.abs2().reciprocal()
        return CJet(self.re * d, -self.im * d)

    def __truediv__(self, other):
        if not isinstance(other, (CJet, Jet, tuple)):
            v = ival(other)
            return CJet(self.re / v, self.im / v)
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def exp(self) -> "CJet":
        m = self.re.exp()
        s, c = self.im.sincos()
        return CJet(m * c, m * s)

    def log(self, arg0=None) -> "CJet":
        """Principal log; ``arg0`` overrides the constant term of the argument."""
        a2 = self.abs2()
        re = a2.log() * (iv.mpf(1) / 2)
        # d(arg)/dt = (x y' - y x') / (x^2 + y^2)
        n = self.order
        x, y = self.re, self.im
        if arg0 is None:
            arg0 = iv.atan2(y.c[0], x.c[0])
        if n == 0:
            return CJet(re, Jet([arg0]))
        dx = Jet([(k + 1) * x.c[k + 1] for k in range(n)])
        dy = Jet([(k + 1) * y.c[k + 1] for k in range(n)])
        xl = Jet(x.c[:n])
        yl = Jet(y.c[:n])
        darg = (xl * dy - yl * dx) * Jet(a2.c[:n]).reciprocal()
        arg = [arg0] + [darg.c[k - 1] / k for k in range(1, n + 1)]
        return CJet(re, Jet(arg))

    def widen(self, radii) -> "CJet":
        return CJet(self.re.widen(radii), self.im.widen(radii))


def cauchy_radii(bound, rho, order: int):
    """|f^(j)/j!| <= M / rho^j for f analytic with |f| <= M on a disk of radius rho."""
    m = ival(bound)
    rho = ival(rho)
    return [m / rho ** j for j in range(order + 1)]

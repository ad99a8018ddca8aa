"""Certified quadrature for real-analytic integrands given as jets.

On a piece [m - h/2, m + h/2] the rule integrates the Taylor polynomial of
even order 2p - 2 at the midpoint exactly (odd terms vanish) and bounds the
rest by sup_I |f^(2p)/(2p)!| * 2 (h/2)^(2p+1) / (2p+1), the sup taken from a
jet evaluated over the whole piece.

An integrand is a callable ``f(u, tbox, rho) -> Jet`` where ``u`` is the jet
variable (point or interval centre), ``tbox = (re, im)`` encloses the
complex t-disk of radius ``rho`` around ``u`` and is used only for Cauchy
estimates of analytic remainders.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

from mpmath import iv

from .errors import QuadratureError
from .jets import Jet
from .numerics import PrecisionConfig, ival, lower, upper, width, working_precision
from . import special


@dataclass
class QuadratureResult:
    value: object  # iv.mpf enclosure
    pieces: int
    error: object  # total certified remainder radius

    @property
    def lo(self):
        return lower(self.value)

    @property
    def hi(self):
        return upper(self.value)


def _piece(f: Callable, a, b, p: int, rho):
    h = b - a
    m = (a + b) / 2
    half = h / 2
    zero = iv.mpf(0)
    rr = iv.mpf([-upper(rho), upper(rho)])
    # midpoint jet (order 2p - 2)
    jm = f(Jet.variable(m, 2 * p - 2), (m + rr, zero + rr), rho)
    core = iv.mpf(0)
    for i in range(p):
        core += jm.c[2 * i] * 2 * half ** (2 * i + 1) / (2 * i + 1)
    interval = iv.mpf([lower(a), upper(b)])
    ji = f(Jet.variable(interval, 2 * p), (interval + rr, zero + rr), rho)
    c2p = ji.c[2 * p]
    sup = max(abs(lower(c2p)), abs(upper(c2p)))
    err = iv.mpf(sup) * 2 * half ** (2 * p + 1) / (2 * p + 1)
    return core, upper(err)


def integrate(f: Callable, a, b, tol, p: int = 3, rho="0.5",
              config: Optional[PrecisionConfig] = None, max_pieces: int = 20000) -> QuadratureResult:
    """Certified enclosure of the integral of f over [a, b] with remainder <= tol (total)."""
    config = config or PrecisionConfig(bits=96)
    with working_precision(config):
        a, b, rho = ival(a), ival(b), ival(rho)
        tol = ival(tol)
        total_len = b - a
        stack: List = [(a, b)]
        acc = iv.mpf(0)
        err_total = iv.mpf(0)
        pieces = 0
        while stack:
            lo, hi = stack.pop()
            core, err = _piece(f, lo, hi, p, rho)
            budget = tol * (hi - lo) / total_len
            if err <= lower(budget) or pieces + len(stack) >= max_pieces:
                if err > lower(budget):
                    raise QuadratureError(f"remainder target not met after {max_pieces} pieces")
                acc += core
                err_total += err
                pieces += 1
                continue
            mid = (lo + hi) / 2
            # keep endpoints as exact points
            mid = iv.mpf(lower(mid)) if width(mid) == 0 else iv.mpf(upper(mid))
            stack.append((mid, hi))
            stack.append((lo, mid))
        e = upper(err_total)
        return QuadratureResult(acc + iv.mpf([-e, e]), pieces, err_total)


def simpson(g: Callable, a: float, b: float, nodes: int = 100001) -> float:
    """Plain composite Simpson rule (float oracle, not certified)."""
    import numpy as np

    if nodes % 2 == 0:
        nodes += 1
    t = np.linspace(a, b, nodes)
    y = np.array([g(x) for x in t])
    h = (b - a) / (nodes - 1)
    return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


# ---------------------------------------------------------------------------
# integrands


def _s_box(sigma, tbox):
    # s = sigma + i t with complex t = tr + i ti  =>  s = (sigma - ti) + i tr
    tr, ti = tbox
    return (ival(sigma) - ti, tr)


def zeta_critical_jet(u: Jet, tbox, rho) -> "special.CJet":
    tmax = upper(tbox[0])
    N, m = special._em_params_critical(tmax, iv.prec)
    return special.zeta_em_cjet(iv.mpf(1) / 2, u, N, m, _s_box(iv.mpf(1) / 2, tbox), rho)


def moment_integrand(power: int):
    """t -> (2/pi) |zeta(1/2+it)|^{2 power} / sqrt(4t^2+1) as a jet callable."""

    def f(u: Jet, tbox, rho):
        z = zeta_critical_jet(u, tbox, rho)
        a2 = z.abs2()
        acc = a2
        for _ in range(power - 1):
            acc = acc * a2
        w = (u * u * 4 + 1).pow(iv.mpf(-1) / 2)
        return acc * w * (2 / iv.pi)

    return f


MOMENT_CONSTANTS = {
    # name: (power of |zeta|^2, a, b, printed upper bound)
    "c_I1": (2, 0, 3, "1.039"),
    "u_S1": (1, 0, 3, "0.748"),
    "u_S2": (1, 3, 4, "0.030"),
}


def moment_constant_certified(name: str, tol="1e-5", config: Optional[PrecisionConfig] = None) -> QuadratureResult:
    power, a, b, _ = MOMENT_CONSTANTS[name]
    return integrate(moment_integrand(power), a, b, tol, config=config)


def chi_power_integrand(b, k: int):
    """t -> |chi(b+it)|^k / sqrt(b^2+t^2), routed through log |chi|."""
    bb = ival(b)

    def f(u: Jet, tbox, rho):
        n = u.order
        s = special.CJet(Jet.const(bb, n), u)
        lc = special.log_chi_cjet(s, _s_box(bb, tbox), rho)
        mag = (lc.re * k).exp()
        w = (u * u + bb * bb).pow(iv.mpf(-1) / 2)
        return mag * w

    return f


def g_k(b, k: int, tol="1e-12", config: Optional[PrecisionConfig] = None) -> QuadratureResult:
    """Certified enclosure of the integral of |chi(b+it)|^k / sqrt(b^2+t^2) over [0, 3]."""
    return integrate(chi_power_integrand(b, k), 0, 3, tol, config=config)

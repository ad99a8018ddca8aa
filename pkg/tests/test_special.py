import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import iv

from dkbounds.errors import DomainError, PoleError, RangeError
from dkbounds.numerics import Down, PrecisionConfig, Up, contains, lower, upper, width, working_precision
from dkbounds.special import (
    MinusOne,
    Principal,
    _zeta_real_em,
    chi_factor,
    chi_lemma_modulus_bound,
    lambert_w,
    lambert_w_interval,
    log_gamma,
    stieltjes_constants,
    zeta_complex,
    zeta_critical,
    zeta_real,
    zeta_real_interval,
)

P128 = PrecisionConfig(bits=128)


def _contains_mp(x, ref):
    return lower(x) <= ref <= upper(x)


def em_oracle_zeta(s, dps=50):
    """Plain Euler-Maclaurin at 50 digits: sum to N plus tail, B2..B20 corrections."""
    with mpmath.workdps(dps):
        s = mpmath.mpf(s)
        N = 60
        tot = mpmath.fsum(mpmath.mpf(n) ** -s for n in range(1, N))
        tot += mpmath.mpf(N) ** (1 - s) / (s - 1) + mpmath.mpf(N) ** -s / 2
        poch = s
        for j in range(1, 11):
            tot += mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * poch * mpmath.mpf(N) ** (-s - 2 * j + 1)
            poch *= (s + 2 * j - 1) * (s + 2 * j)
        return tot


# --- zeta_real -------------------------------------------------------------

def test_zeta2_contains_pi2_over_6():
    with working_precision(P128):
        z = zeta_real_interval(2, P128)
        assert contains(z, iv.pi ** 2 / 6)


@pytest.mark.parametrize("s, approx", [("1.2", 5.591), ("1.3", 3.931)])
def test_zeta_real_values(s, approx):
    z = zeta_real_interval(mpmath.mpf(s) if False else iv.mpf(s), P128)
    ref = em_oracle_zeta(s)
    with mpmath.workdps(40):
        assert lower(z) - mpmath.mpf("1e-25") <= ref <= upper(z) + mpmath.mpf("1e-25")
    assert abs(float(ref) - approx) < 1e-3


def test_zeta_real_rejects_one():
    with pytest.raises(DomainError):
        zeta_real(1)


@pytest.mark.parametrize("s", ["1.1", "1.5", "2", "3"])
def test_zeta_em_consistency(s):
    with working_precision(P128):
        S = iv.mpf(s)
        z, info = zeta_real_interval(S, P128, info=True)
        finer, rem = _zeta_real_em(S, 2 * info.terms, 2 * info.order)
        # the finer evaluation is an enclosure too; both must overlap
        assert lower(finer) <= upper(z) and lower(z) <= upper(finer)
        assert width(finer) <= width(z) * 2 + mpmath.mpf(2) ** -100


def test_zeta_real_directions():
    assert zeta_real(3, Down).value <= zeta_real(3, Up).value


# --- zeta_critical ---------------------------------------------------------

def test_zeta_half():
    with working_precision(P128):
        z = zeta_critical(0, P128)
        with mpmath.workdps(40):
            ref = mpmath.zeta(mpmath.mpf(1) / 2)
        assert _contains_mp(z.re, ref)
        assert abs(float(ref) + 1.4603545) < 1e-7


def test_first_zero_proximity():
    with working_precision(P128):
        z = zeta_critical(iv.mpf("14.134725"), P128)
        assert z.modulus(Up).value < 0.01
        # sign change of the real part around the zero
        a = zeta_critical(iv.mpf("14.13"), P128)
        b = zeta_critical(iv.mpf("14.14"), P128)
        assert (upper(a.re) < 0 < lower(b.re)) or (upper(b.re) < 0 < lower(a.re)) or \
            (upper(a.im) < 0 < lower(b.im)) or (upper(b.im) < 0 < lower(a.im))


def test_conjugate_symmetry():
    with working_precision(P128):
        a = zeta_critical(5, P128)
        b = zeta_critical(-5, P128)
        assert contains(a.re - b.re, 0) and contains(a.im + b.im, 0)


def test_zeta_critical_range():
    with pytest.raises(RangeError):
        zeta_critical(20000)


@pytest.mark.parametrize("t", [2, 5, 9])
def test_functional_equation_residual(t):
    with working_precision(P128):
        s = (iv.mpf(1) / 2, iv.mpf(t))
        z = zeta_critical(t, P128)
        chi = chi_factor(s, P128)
        r = chi * z.conjugate() - z
        assert contains(r.re, 0) and contains(r.im, 0)


def test_zeta_complex_matches_critical():
    with working_precision(P128):
        a = zeta_complex((iv.mpf(1) / 2, iv.mpf(7)), P128)
        b = zeta_critical(7, P128)
        assert lower(a.re) <= upper(b.re) and lower(b.re) <= upper(a.re)


# --- Stieltjes -------------------------------------------------------------

def gamma0_oracle():
    # H_N - ln N with Euler-Maclaurin correction terms
    with mpmath.workdps(60):
        N = 10 ** 4
        H = mpmath.fsum(mpmath.mpf(1) / n for n in range(1, N + 1))
        n = mpmath.mpf(N)
        return H - mpmath.log(n) - 1 / (2 * n) + 1 / (12 * n ** 2) - 1 / (120 * n ** 4) + 1 / (252 * n ** 6)


def test_stieltjes_gamma0_gamma1():
    t = stieltjes_constants(3, P128)
    assert len(t) == 3
    g0 = gamma0_oracle()
    with mpmath.workdps(60):
        assert abs(mpmath.mpf(lower(t[0])) - g0) < mpmath.mpf("1e-28")
        g1 = mpmath.stieltjes(1)
        assert lower(t[1]) - mpmath.mpf("1e-35") <= g1 <= upper(t[1]) + mpmath.mpf("1e-35")
    for j in range(3):
        assert width(t[j]) < mpmath.mpf("1e-30")
    assert abs(float(lower(t[0])) - 0.57721566490) < 1e-11
    assert abs(float(lower(t[1])) + 0.07281584548) < 1e-11


def test_stieltjes_count_validation():
    with pytest.raises(DomainError):
        stieltjes_constants(0)


# --- log Gamma and chi -----------------------------------------------------

def test_log_gamma_values():
    with working_precision(P128):
        assert contains(log_gamma(1, P128).re, 0)
        assert contains(log_gamma(5, P128).re, iv.log(24))
        with mpmath.workdps(40):
            ref = mpmath.log(mpmath.sqrt(mpmath.pi))
        assert _contains_mp(log_gamma(iv.mpf(1) / 2, P128).re, ref)


def test_log_gamma_pole():
    with pytest.raises(PoleError):
        log_gamma(-2)
    with pytest.raises(PoleError):
        log_gamma(0)


def test_log_gamma_recurrence():
    rng = random.Random(20240611)
    with working_precision(P128):
        for _ in range(20):
            re = iv.mpf(rng.randint(1000, 10000)) / 1000
            im = iv.mpf(rng.randint(-20000, 20000)) / 1000
            z = (re, im)
            a = log_gamma((re + 1, im), P128)
            b = log_gamma(z, P128)
            logz_re = iv.log(re * re + im * im) / 2
            d = a.re - b.re - logz_re
            assert contains(d, 0)


def test_chi_unit_modulus_on_critical_line():
    with working_precision(P128):
        m = chi_factor((iv.mpf(1) / 2, iv.mpf(10)), P128).modulus_interval()
        assert contains(m, 1)


def test_chi_reflection():
    with working_precision(P128):
        s = (iv.mpf("-0.2"), iv.mpf(3))
        a = chi_factor(s, P128)
        b = chi_factor((1 - s[0], -s[1]), P128)
        p = a * b
        assert contains(p.re, 1) and contains(p.im, 0)


def test_chi_lemma_bound_dominates():
    with working_precision(P128):
        direct = chi_factor((iv.mpf("-0.2"), iv.mpf(5)), P128).modulus(Up).value
        closed = chi_lemma_modulus_bound(iv.mpf("-0.2"), 5, Up)
        assert direct <= lower(closed)


# --- Lambert W -------------------------------------------------------------

def test_lambert_examples():
    assert lambert_w(Principal, 0).value == 0
    assert lambert_w_interval("-1/e", MinusOne) == iv.mpf(-1)
    with working_precision(P128):
        w = lambert_w_interval(+iv.e, Principal, P128)
        assert contains(w, 1)


def test_lambert_domains():
    with pytest.raises(DomainError):
        lambert_w(Principal, -1)
    with pytest.raises(DomainError):
        lambert_w(MinusOne, "0.5")


def _residual_ok(x, branch):
    with working_precision(P128):
        X = iv.mpf(x)
        w = lambert_w_interval(X, branch, P128)
        assert width(w) < mpmath.mpf("1e-30") * max(1, abs(lower(w)))
        r = w * iv.exp(w) - X
        assert upper(abs(r)) < mpmath.mpf("1e-25") * max(1, abs(float(x)))
        if branch is MinusOne:
            assert upper(w) <= -1


def test_lambert_residuals_principal():
    for i in range(100):
        _residual_ok(mpmath.mpf(10) ** (-8 + 16 * mpmath.mpf(i) / 99), Principal)


def test_lambert_residuals_minus_one():
    with mpmath.workprec(200):
        for i in range(100):
            u = 1 + mpmath.mpf(60) * i / 99 + mpmath.mpf("1e-6")
            _residual_ok(-mpmath.exp(-u), MinusOne)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-0.36, max_value=-1e-12))
def test_lambert_branches_order(x):
    with working_precision(P128):
        w0 = lambert_w_interval(iv.mpf(x), Principal, P128)
        wm = lambert_w_interval(iv.mpf(x), MinusOne, P128)
        assert upper(wm) <= -1 <= lower(w0)

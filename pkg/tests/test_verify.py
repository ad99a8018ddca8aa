"""Empirical verification sweep: screening, determinism, mutation, sampling stream."""
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dkbounds.divisor import build_sieve
from dkbounds.engine import Domain, ExplicitBound
from dkbounds.errors import RangeError
from dkbounds.numerics import BigPoint, DirectedReal, Up
from dkbounds.verify import CHUNK, lcg_block, lcg_reference, lcg_seed, verify_bound


def pair_bound(k, omega, gamma, beta, x1, domain=Domain.AllReals):
    return ExplicitBound(k, DirectedReal(Fraction(omega), Up, 128), Fraction(gamma), Fraction(beta),
                         BigPoint.parse(x1), domain, f"pair:{omega}")


@pytest.fixture(scope="module")
def sieve2():
    return build_sieve(2, 600_001)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 5000), st.integers(0, 300))
def test_lcg_block_matches_scalar_reference(seed, start, m):
    assert [int(v) for v in lcg_block(seed, start, m)] == lcg_reference(seed, start, m)


def test_lcg_seed_depends_on_k_and_start():
    assert lcg_seed(5, 1667) != lcg_seed(6, 1667) != lcg_seed(5, 1668)


def test_k2_pair_passes(sieve2):
    rep = verify_bound(2, 2, 600_000, pair_bound(2, "0.961", "1/2", "0", "2"), sieve=sieve2)
    assert rep.passed and not rep.violations
    assert rep.count == 599_999 + 599_998  # integers 2..6e5, half-integers 2.5..599999.5
    assert rep.samples > 0
    assert rep.max_ratio.value < 1


def test_max_ratio_is_certified_against_direct_scan(sieve2):
    # the small-x maximum can be recomputed by brute force in floats
    rep = verify_bound(2, 2, 2000, pair_bound(2, "0.961", "1/2", "0", "2"), sieve=sieve2, samples=False)
    g = 0.5772156649015329
    best, arg = 0.0, None
    for twice in range(4, 4001):
        x = twice / 2
        d = abs(sieve2.T(math.floor(x)) - x * (math.log(x) + 2 * g - 1))
        r = d / (0.961 * math.sqrt(x))
        if r > best:
            best, arg = r, x
    assert float(rep.max_ratio.value) == pytest.approx(best, rel=1e-9)
    assert Fraction(rep.worst_x) == Fraction(arg)
    assert float(rep.max_ratio.value) >= best * (1 - 1e-12)


def test_mutation_halved_omega_fails(sieve2):
    rep = verify_bound(2, 2, 100_000, pair_bound(2, "0.4805", "1/2", "0", "2"), sieve=sieve2)
    assert not rep.passed
    assert rep.violations
    assert rep.to_record()["result"] == "FAIL"


def test_single_injected_violation_is_found():
    # a bound that fails at exactly one half-integer point: shrink omega just below that point's ratio
    s = build_sieve(3, 5000)
    base = verify_bound(3, 100, 5000, pair_bound(3, "50", "2/3", "0", "100"), sieve=s, samples=False)
    worst = Fraction(base.worst_x)
    r = base.max_ratio.fraction()
    tight = pair_bound(3, 50 * r * (1 - Fraction(1, 10 ** 9)), "2/3", "0", "100")
    rep = verify_bound(3, 100, 5000, tight, sieve=s, samples=False)
    assert not rep.passed
    assert str(worst) in rep.violations


def test_empty_range_is_vacuous():
    rep = verify_bound(5, 10, 9, pair_bound(5, "1", "1/2", "0", "2"))
    assert rep.count == 0 and rep.passed and rep.max_ratio is None


def test_range_errors(sieve2):
    b = pair_bound(2, "0.961", "1/2", "0", "10")
    with pytest.raises(RangeError):
        verify_bound(2, 5, 100, b, sieve=sieve2)  # below the threshold
    with pytest.raises(RangeError):
        verify_bound(3, 10, 100, b, sieve=sieve2)  # wrong k
    with pytest.raises(RangeError):
        verify_bound(2, 10, 700_000, b, sieve=sieve2)  # beyond the sieve


def test_integer_domain_bound_skips_real_samples(sieve2):
    b = pair_bound(2, "0.961", "1/2", "0", "2", domain=Domain.IntegersAndHalfIntegers)
    rep = verify_bound(2, 2, 10_000, b, sieve=sieve2)
    assert rep.samples == 0 and rep.passed


def test_worker_count_does_not_change_the_report(sieve2):
    lo, hi = 2, 3 * CHUNK + 1234
    s = build_sieve(2, hi + 1)
    b = pair_bound(2, "0.961", "1/2", "0", "2")
    one = verify_bound(2, lo, hi, b, sieve=s, workers=1).to_record()
    four = verify_bound(2, lo, hi, b, sieve=s, workers=4).to_record()
    assert one == four

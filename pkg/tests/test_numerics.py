"""Directed arithmetic, BigPoint, certified comparison."""
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import iv

from dkbounds.errors import DomainError
from dkbounds.numerics import (
    BigPoint,
    DirectedReal,
    Down,
    Ordering,
    PrecisionConfig,
    Up,
    big_log,
    big_pow10,
    certified_compare,
    decimal_round,
    directed_eval,
    enclose_tree,
    evaluate,
    imax,
    lower,
    upper,
    width,
    working_precision,
)
from dkbounds.special import zeta_real_interval


def test_add_exact():
    assert directed_eval("add", [1, 1], Up).value == 2
    assert directed_eval("add", [1, 1], Down).value == 2


def test_log_e_brackets_one():
    e_up = directed_eval("exp", [1], Up)
    e_dn = directed_eval("exp", [1], Down)
    assert directed_eval("log", [e_up.value], Up).value >= 1
    assert directed_eval("log", [e_dn.value], Down).value <= 1


def test_pow10_98():
    p = big_pow10(98)
    assert p.exponent10 == 98 and p.mantissa == 1
    assert p.fraction() == 10 ** 98


def test_big_log_ten():
    with mpmath.workdps(50):
        ref = mpmath.log(10)
    lo, hi = big_log(BigPoint.parse("10"), Down).value, big_log(BigPoint.parse("10"), Up).value
    assert lo <= ref <= hi


def test_big_log_one_is_zero():
    assert big_log(BigPoint.parse("1"), Up).value == 0
    assert big_log(BigPoint.parse("1"), Down).value == 0


def test_big_log_huge_tight():
    x = BigPoint.parse("1.601e98")
    with mpmath.workdps(60):
        ref = 98 * mpmath.log(10) + mpmath.log(mpmath.mpf("1.601"))
    lo, hi = big_log(x, Down).value, big_log(x, Up).value
    assert lo <= ref <= hi
    assert hi - lo < mpmath.mpf("1e-30")
    assert abs(float(ref) - 226.124) < 1e-3


def test_compare_examples():
    assert certified_compare(iv.mpf(1), iv.mpf(2)) is Ordering.LESS
    assert certified_compare(iv.mpf([1, 3]), iv.mpf([2, 4])) is Ordering.UNKNOWN
    assert certified_compare(zeta_real_interval(Fraction(6, 5)), iv.mpf(5)) is Ordering.GREATER


def test_log_straddling_zero_rejected():
    with working_precision(128):
        with pytest.raises(DomainError):
            enclose_tree(("log", iv.mpf([-1, 1])))


def test_max_up_takes_both_arms():
    with working_precision(128):
        m = imax(iv.mpf([1, 3]), iv.mpf([2, 2.5]))
    assert upper(m) == 3 and lower(m) == 2


def test_bigpoint_large_exponent():
    p = BigPoint.parse("7.25e1234")
    assert p.exponent10 == 1234
    lo, hi = p.logValue
    with mpmath.workdps(40):
        ref = mpmath.log(mpmath.mpf("7.25")) + 1234 * mpmath.log(10)
    assert lo.value <= ref <= hi.value


def test_decimal_round_directions():
    assert Fraction(decimal_round(Fraction(1, 3), 3, Up)) == Fraction(334, 1000)
    assert Fraction(decimal_round(Fraction(1, 3), 3, Down)) == Fraction(333, 1000)


# --- properties -------------------------------------------------------------

_OPS = ["add", "sub", "mul", "div"]


_LEAVES = st.builds(Fraction, st.integers(-1000, 1000), st.integers(1, 1000))


def rational_trees(max_leaves=40):
    # depth is bounded by the leaf budget; ten levels of nesting are reachable
    return st.recursive(
        _LEAVES,
        lambda kids: st.tuples(st.sampled_from(_OPS), kids, kids),
        max_leaves=max_leaves,
    )


def exact(tree):
    if isinstance(tree, Fraction):
        return tree
    op, a, b = tree
    a, b = exact(a), exact(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if b == 0:
        raise ZeroDivisionError
    return a / b


@settings(max_examples=300, deadline=None)
@given(rational_trees())
def test_monotone_enclosure(tree):
    try:
        ref = exact(tree)
    except ZeroDivisionError:
        return
    try:
        up = evaluate(tree, Up)
        dn = evaluate(tree, Down)
    except DomainError:
        return  # a divisor enclosure straddled 0; the exact value may still exist
    assert dn.fraction() <= ref <= up.fraction()
    assert dn.value <= up.value


@settings(max_examples=100, deadline=None)
@given(rational_trees(max_leaves=12))
def test_precision_refinement(tree):
    try:
        with working_precision(64):
            a = enclose_tree(tree)
        with working_precision(128):
            b = enclose_tree(tree)
    except DomainError:
        return
    assert lower(a) <= lower(b) and upper(b) <= upper(a)


@settings(max_examples=500, deadline=None)
@given(st.integers(1, 99999), st.integers(0, 4), st.integers(-300, 300))
def test_bigpoint_round_trip(digits, shift, exp):
    s = str(digits)
    mant = s[0] + ("." + s[1:] if len(s) > 1 else "")
    mant = mant.rstrip("0").rstrip(".") if "." in mant else mant
    text = f"{mant}e{exp}"
    p = BigPoint.parse(text)
    q = BigPoint.parse(p.format())
    assert (q.mantissa, q.exponent10) == (p.mantissa, p.exponent10)
    assert p.fraction() == Fraction(p.mantissa) * Fraction(10) ** exp


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=Fraction(1, 1000), max_value=1000))
def test_directed_exp_log_ordering(q):
    for op in ("exp", "log", "sqrt"):
        up = directed_eval(op, [q], Up)
        dn = directed_eval(op, [q], Down)
        with mpmath.workprec(200):
            ref = getattr(mpmath, op)(mpmath.mpf(q.numerator) / q.denominator)
        assert dn.value <= ref <= up.value


def test_as_fraction_mpf_keeps_full_precision():
    from dkbounds.numerics import as_fraction_mpf

    with working_precision(128):
        v = lower(iv.mpf(1) / 3)
    # outside the block mp.prec is 53; the conversion must not round
    f = as_fraction_mpf(v)
    assert f < Fraction(1, 3) and Fraction(1, 3) - f < Fraction(1, 2 ** 120)

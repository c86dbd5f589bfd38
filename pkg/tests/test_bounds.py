import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from babaipoint.bounds import (
    BoundInputs,
    an_condition_check,
    chebyshev_bound,
    chi2_cdf,
    combined_bound,
    exclusion_bound,
    gaussian_threshold,
)
from babaipoint.catalog import catalog_lookup
from babaipoint.errors import ConditionFailed, HypothesisFailed

BW16_SIZES = [Fraction(4)] + [Fraction(2)] * 10 + [Fraction(1)] * 5
LEECH_SIZES = [Fraction(8)] + [Fraction(4)] * 11 + [Fraction(2)] * 11 + [Fraction(1)]


def _chebyshev_exact(sizes, r2):
    n = len(sizes)
    delta = (sum(a * a for a in sizes) / 12 - r2) / n
    return sum(a**4 for a in sizes) / (180 * n * n * delta * delta)


def test_chebyshev_hand_values():
    bw = chebyshev_bound(BoundInputs.from_catalog(catalog_lookup("BW16")))
    assert bw.extra["P_c_bound"] == pytest.approx(float(_chebyshev_exact(BW16_SIZES, 3)), rel=1e-12)
    assert _chebyshev_exact(BW16_SIZES, 3) == Fraction(60624, 112500)
    le = chebyshev_bound(BoundInputs.from_catalog(catalog_lookup("Leech")))
    assert le.extra["P_c_bound"] == pytest.approx(float(_chebyshev_exact(LEECH_SIZES, 2)), rel=1e-12)


def test_exclusion_hand_values():
    bw = exclusion_bound(BoundInputs.from_catalog(catalog_lookup("BW16")))
    assert bw.extra["m"] == 1
    assert bw.extra["P_c_bound"] == pytest.approx(math.sqrt(3) / 2, rel=1e-12)
    le = exclusion_bound(BoundInputs.from_catalog(catalog_lookup("Leech")))
    # 2 r_cov = 2 sqrt 2 < 4: the sides 8 and 4 (twelve of them) are excluded
    assert le.extra["m"] == 12
    assert le.extra["P_c_bound"] == pytest.approx((2 * math.sqrt(2)) ** 12 / (8 * 4**11), rel=1e-12)


def test_combined_hand_value_bw16():
    # m = 1, delta_1 = 45/12 - 3 * 2/3 = 7/4; (2 r)^4 = 144
    cheb = (144 + Fraction(165)) / (180 * Fraction(7, 4) ** 2)
    want = math.sqrt(3) / 2 * float(cheb)
    got = combined_bound(BoundInputs.from_catalog(catalog_lookup("BW16")))
    assert got.extra["P_c_bound"] == pytest.approx(want, rel=1e-12)


def test_combined_reduces_to_chebyshev_when_nothing_excluded():
    inp = BoundInputs((1.0,) * 8 + (0.9,) * 8, 0.5)
    assert inp.m == 0
    # with m = 0 the combined bound carries delta_1 = n * delta
    assert combined_bound(inp).extra["raw_bound"] == pytest.approx(
        chebyshev_bound(inp).extra["raw_bound"], rel=1e-12
    )


def test_e8_condition_fails():
    with pytest.raises(ConditionFailed) as e:
        chebyshev_bound(BoundInputs.from_catalog(catalog_lookup("E8")))
    assert e.value.condition == "sum(a_i^2)/12 > r_cov^2"


def test_an_condition_exact():
    rep = an_condition_check(3)
    assert rep.lhs == (Fraction(2) + Fraction(3, 2) + Fraction(4, 3)) / 12
    assert rep.r_cov2 == Fraction(1)
    assert not rep.holds
    assert not any(an_condition_check(n).holds for n in range(1, 101))


def test_bounds_clip_and_order():
    inp = BoundInputs.from_catalog(catalog_lookup("Leech"))
    for f in (chebyshev_bound, exclusion_bound, combined_bound):
        rep = f(inp)
        assert 0 <= rep.extra["P_c_bound"] <= 1
        assert rep.is_bound
        assert rep.to_json()["bounds"] == "P_c"


def _chi2_quad(x, n):
    pdf = lambda t: t ** (n / 2 - 1) * math.exp(-t / 2 - math.lgamma(n / 2)) / 2 ** (n / 2)
    return quad(pdf, 0, x, limit=200)[0]


@pytest.mark.parametrize("n", [1, 2, 5, 10, 30])
def test_chi2_cdf_vs_quadrature(n):
    for x in [0.1, 1.0, n / 2, n, 2 * n + 3]:
        assert chi2_cdf(x, n) == pytest.approx(_chi2_quad(x, n), abs=1e-9)


def test_chi2_asymptotics_n100():
    assert chi2_cdf(1.5 * 100, 100) >= 0.99
    assert chi2_cdf(0.6 * 100, 100) <= 0.01


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 200), st.floats(0.01, 500), st.floats(0.01, 500))
def test_chi2_monotone(n, x, y):
    lo, hi = sorted((x, y))
    assert chi2_cdf(lo, n) <= chi2_cdf(hi, n) + 1e-15


@pytest.mark.parametrize("n", [1, 2, 3, 8, 24, 100])
def test_gaussian_threshold_zn(n):
    rep = gaussian_threshold(sizes=[1.0] * n, r_pack=0.5, volume=1.0)
    assert rep.sharp == pytest.approx(0.25 / n)
    assert rep.relaxed == pytest.approx(0.25)


def test_gaussian_threshold_from_basis_and_failure():
    rep = gaussian_threshold(catalog_lookup("Z^3").basis, sigma=0.1)
    assert rep.r_pack == pytest.approx(0.5)
    assert 0.0 <= rep.chi2 <= 1.0
    with pytest.raises(HypothesisFailed) as e:
        gaussian_threshold(sizes=[2.0, 1.0, 0.5], r_pack=0.4, volume=1.0)
    assert e.value.offending == [3]


def test_bound_inputs_sorted():
    inp = BoundInputs((1.0, 3.0, 2.0), 0.5)
    assert inp.sizes == (3.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        BoundInputs((1.0, 0.0), 0.5)
    assert np.isclose(inp.delta, (14 / 12 - 0.25) / 3)

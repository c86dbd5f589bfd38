import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from babaipoint.babai import babai_coefficients, babai_nearest_plane
from babaipoint.basis import LatticeBasis
from babaipoint.catalog import catalog_lookup
from babaipoint.entropy import conditional_entropy_estimate, entropy_estimate, entropy_from_probs
from babaipoint.errors import MissingMessage, NoRationalWithinTolerance, UnsupportedForExact
from babaipoint.protocol import (
    DbpMessage,
    GaussianSource,
    ReachableSet,
    UniformSource,
    decode,
    decode_batch,
    encode,
    encode_batch,
    fig3_basis,
    parse_source,
    rate_exact_uniform,
    rate_monte_carlo,
    ratio_rows,
    reachable_set,
    reachable_sets,
    simulate,
)
from babaipoint.reports import fig3_reachable, run_fig3

from conftest import random_rational_basis


def test_ratio_rows_bcc():
    rows = ratio_rows(catalog_lookup("BCC").basis)
    assert [r.q for r in rows] == [3, 2, 1]
    assert rows[0].ratios == {1: Fraction(-1, 3), 2: Fraction(-1, 3)}
    assert rows[1].ratios == {2: Fraction(-1, 2)}
    assert rows[0].scaled() == {1: -1, 2: -1}


def test_ratio_rows_example3():
    rows = ratio_rows(catalog_lookup("example3").basis)
    assert [r.q for r in rows] == [1000, 1]
    assert rows[0].ratios == {1: Fraction(311, 1000)}


def test_ratio_rows_irrational():
    B = LatticeBasis.from_vectors([[1, 0], ["sqrt(2)", 1]])
    with pytest.raises(NoRationalWithinTolerance):
        ratio_rows(B, max_den=1000, tol=1e-12)


def test_parse_source():
    assert parse_source("uniform") == UniformSource(5.0)
    assert parse_source("uniform:A=3") == UniformSource(3.0)
    assert parse_source("gauss:sigma=0.3,K=1") == GaussianSource(0.3, 1)
    for bad in ["uniform:A=-1", "gauss", "laplace", "uniform:B=2"]:
        with pytest.raises(ValueError):
            parse_source(bad)


def test_reachable_bcc_and_hex():
    sets = reachable_sets(catalog_lookup("BCC").basis, UniformSource(5))
    assert [s.values for s in sets] == [(0, 1, 2), (0, 1), (0,)]
    assert all(s.provenance == "exact-enumeration" for s in sets)
    assert reachable_set(catalog_lookup("hexagonal").basis, 0, UniformSource(5)).values == (0, 1)


def test_reachable_full_for_gaussian_and_none():
    B = catalog_lookup("example3").basis
    for src in (None, GaussianSource(0.2)):
        S = reachable_sets(B, src)[0]
        assert S.values == tuple(range(1000))


def test_reachable_991():
    assert fig3_reachable(991).values == (0, 1, 2, 3, 988, 989, 990)


def test_reachable_small_a_subset_of_large():
    B = catalog_lookup("example3").basis
    small = set(reachable_sets(B, UniformSource(1))[0].values)
    large = set(reachable_sets(B, UniformSource(8))[0].values)
    assert small <= large


def test_reachable_sampled_fallback_is_subset():
    B = catalog_lookup("example3").basis
    exact = set(reachable_sets(B, UniformSource(5))[0].values)
    with pytest.warns(RuntimeWarning):
        sampled = reachable_sets(B, UniformSource(5), budget=3, fallback_samples=20000)
    assert sampled[0].provenance == "sampled"
    assert set(sampled[0].values) <= exact


def test_reachable_set_validation():
    assert 0 in ReachableSet((2,), 3, "x")
    with pytest.raises(ValueError):
        ReachableSet((3,), 3, "x")


def test_example3_encode_at_one_one():
    B = catalog_lookup("example3").basis
    full = reachable_sets(B, None)
    msg = encode(0, 1.0, B, full[0])
    assert msg.s == 500
    m2 = encode(1, 1.0, B, full[1])
    u = decode([m2, msg], B)
    assert list(u) == [1, 1]
    assert list(u) == list(babai_nearest_plane(B.R, [1.0, 1.0]).u)


def test_decode_missing_message():
    B = catalog_lookup("BCC").basis
    with pytest.raises(MissingMessage):
        decode([DbpMessage(0, 0, 0)], B)


def test_encoder_s_is_monotone_in_phase():
    S = ReachableSet((0, 311, 378, 622, 689), 1000, "exact-enumeration")
    x = np.linspace(-0.4999, 0.4999, 2001)
    ut, s = encode_batch(x, 1.0, S)
    assert np.all(ut == 0)
    assert np.all(np.diff(s) >= 0)
    assert set(np.unique(s)) <= set(S.values)


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(0.1, 3.0))
def test_encoder_inverse_bracket(x, r):
    """The phase recovered from (Ũ, s) brackets the observation."""
    S = ReachableSet(range(7), 7, "full")
    ut, s = encode_batch([x], r, S)
    y = x / r
    lo = ut[0] - 0.5 + s[0] / 7
    assert lo - 1e-9 <= y < lo + 1 / 7 + 1e-9


def test_decode_batch_matches_babai_random(rng):
    for _ in range(10):
        n = int(rng.integers(2, 5))
        B = random_rational_basis(rng, n)
        rows = ratio_rows(B)
        reach = reachable_sets(B, UniformSource(5), rows=rows)
        R = B.triangular().R
        X = UniformSource(5).sample(rng, 5000, R)
        UT, S = [], []
        for m in range(n):
            ut, s = encode_batch(X[:, m], float(R[m, m]), reach[m])
            UT.append(ut)
            S.append(s)
        U = decode_batch(np.column_stack(UT), np.column_stack(S), rows)
        assert np.array_equal(U.astype(np.int64), babai_coefficients(R, X))


def test_simulate_bcc_gaussian_and_transcript():
    B = catalog_lookup("BCC").basis
    rep = simulate(B, GaussianSource(0.3), 20000, seed=3, batch_size=3000)
    assert rep.mismatches == 0 and rep.agreement == 1.0
    assert rep.q == [3, 2, 1]
    assert len(rep.transcript) == 20
    assert rep.transcript[0]["messages"][0]["m"] == 3
    assert rep.to_json()["trials"] == 20000


def test_simulate_deterministic():
    B = catalog_lookup("hexagonal").basis
    a = simulate(B, UniformSource(5), 1000, seed=9).to_json()
    b = simulate(B, UniformSource(5), 1000, seed=9).to_json()
    assert a == b


def test_rate_exact_bcc_frozen():
    rep = rate_exact_uniform(catalog_lookup("BCC").basis, 5.0)
    assert rep.H_U[0] == pytest.approx(math.log2(5), abs=1e-12)
    assert rep.H_S_given_U[0] == pytest.approx(math.log2(3), abs=1e-12)
    assert rep.sum_log2_q == pytest.approx(math.log2(6), abs=1e-12)
    assert rep.sum_rate == pytest.approx(10.179248345178461, abs=1e-9)


def test_rate_exact_vs_monte_carlo():
    B = catalog_lookup("BCC").basis
    ex = rate_exact_uniform(B, 5.0)
    mc = rate_monte_carlo(B, UniformSource(5), 200000, seed=1)
    assert abs(ex.sum_rate - mc.sum_rate) <= 4 * mc.sum_rate_se + 5e-3
    for h_ex, h_mc, se in zip(ex.H_US, mc.H_US, mc.se_US):
        assert abs(h_ex - h_mc) <= 4 * se + 5e-3


def test_rate_exact_needs_exact_sets():
    B = catalog_lookup("BCC").basis
    with pytest.raises(UnsupportedForExact):
        rate_exact_uniform(B, 5.0, reach=reachable_sets(B, None))


def _fig3_extra_rate_oracle(m):
    """H(S_1 | Ũ_1) for fig3_basis(m), A = 5, derived independently.

    For m >= 7 the reachable set is {0,1,2,3,m-3,m-2,m-1}; with a1 = 1 and
    A = 5 the phase is uniform over whole periods, so the split of [0, 1)
    into 6 cells of width 1/m and one of width (m-6)/m gives the entropy.
    For m <= 7 every residue is reachable and the entropy is log2 m.
    """
    if m <= 7:
        return math.log2(m)
    return 6 / m * math.log2(m) + (m - 6) / m * math.log2(m / (m - 6))


def test_fig3_closed_form_oracle():
    rows = run_fig3(m_max=40)
    for r in rows:
        assert r["H_S1gU1"] == pytest.approx(_fig3_extra_rate_oracle(r["m"]), abs=1e-9)


def test_fig3_sets_small_m_are_full():
    for m in range(2, 8):
        S = fig3_reachable(m)
        assert S.values == tuple(range(m))


def test_entropy_helpers(rng):
    assert entropy_from_probs([0.5, 0.5]) == pytest.approx(1.0)
    assert entropy_from_probs([1.0, 0.0]) == 0.0
    x = rng.integers(0, 4, size=100000)
    h, se = entropy_estimate(x)
    assert h == pytest.approx(2.0, abs=3 * se + 1e-3)
    assert 0 < se < 0.01
    y = (x + rng.integers(0, 2, size=x.size)) % 4
    hc, se_c = conditional_entropy_estimate(y, x)
    assert hc == pytest.approx(1.0, abs=3 * se_c + 1e-3)


def test_fig3_basis_is_exact():
    B = fig3_basis(7)
    assert ratio_rows(B)[0].q == 7
    assert np.allclose(np.linalg.norm(B.matrix, axis=0), 1.0)

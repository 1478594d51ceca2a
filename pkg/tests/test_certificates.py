import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import frozen as F
from wflift.certificates import (
    CURVE_HEADER,
    certificate_chain,
    curve,
    delta_hat,
    delta_star,
    effective_delta_noisy,
    epsilon_from_delta,
    estimate_delta,
    fourth_moment_gap,
    snr_feasibility,
    snr_min_db,
)
from wflift.errors import CertificateError
from wflift.lifted_model import generate_gaussian_ensemble, projective_design

deltas = st.floats(0.0, 0.49)


def test_epsilon_values():
    assert epsilon_from_delta(0.0) == 0.0
    assert abs(epsilon_from_delta(0.184) - F.EPS_0184) < 1e-13
    assert abs(epsilon_from_delta(0.184) - 0.6478) < 5e-5
    e49 = epsilon_from_delta(0.49)
    assert math.isfinite(e49) and e49 < 1.42 and e49 > epsilon_from_delta(0.184)
    assert abs(e49 - F.EPS_049) < 1e-12


@pytest.mark.parametrize("bad", [-1e-9, 0.5, 0.7])
def test_epsilon_domain(bad):
    with pytest.raises(CertificateError):
        epsilon_from_delta(bad)


def test_zero_delta_chain():
    r = certificate_chain(0.0)
    assert (r.epsilon, r.delta_hat, r.h2, r.h, r.c, r.r, r.mu, r.alpha_prime, r.beta_prime) == (
        0.0, 0.0, 2.0, 2.0, 4.0, 0.25, 0.125, 1.0, 16.0
    )
    assert r.h1 == math.sqrt(2)
    assert abs(r.snr_min_db - 20.72) < 0.01
    assert r.valid


@pytest.mark.parametrize("d", sorted(F.CHAIN))
def test_chain_matches_high_precision(d):
    r, ref = certificate_chain(d), F.CHAIN[d]
    for field, key in [("epsilon", "eps"), ("delta_hat", "dhat"), ("h", "h"), ("c", "c"),
                       ("r", "r"), ("mu", "mu"), ("alpha_prime", "alpha")]:
        assert getattr(r, field) == pytest.approx(ref[key], rel=1e-12), field
    assert r.valid


def test_boundary_and_beyond():
    r = certificate_chain(0.184)
    assert abs(r.delta_hat - 1.0) < 5e-3
    assert abs(r.delta_hat - F.DHAT_0184) < 1e-12
    assert r.valid  # 0.184 < delta_star
    r3 = certificate_chain(0.3)
    assert r3.delta_hat > 1 and not r3.valid
    assert abs(r3.delta_hat - F.DHAT_03) < 1e-11


def test_large_delta_has_no_certificate():
    r = certificate_chain(0.45)
    assert r.epsilon > 1 and not r.valid
    assert math.isnan(r.h) and math.isnan(r.mu)


def test_delta_star():
    s = delta_star()
    assert 0.183 <= s <= 0.185
    assert abs(s - F.DELTA_STAR) < 2e-9
    assert delta_hat(s - 1e-6, epsilon_from_delta(s - 1e-6)) < 1
    assert delta_hat(s + 1e-6, epsilon_from_delta(s + 1e-6)) > 1


def test_snr_min():
    assert abs(snr_min_db(0.0) - F.SNR_MIN_DB_0) < 1e-7
    assert snr_min_db(0.19) == math.inf


def test_effective_delta():
    assert effective_delta_noisy(0.1, math.inf) == 0.1
    assert abs(effective_delta_noisy(0.0, 118.1) - 0.184) < 1e-3
    assert effective_delta_noisy(0.05, 10_000) == pytest.approx(0.0705, abs=1e-15)
    with pytest.raises(CertificateError):
        effective_delta_noisy(0.1, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.49), st.floats(1.0, 1e8), st.floats(1.0, 1e8))
def test_effective_delta_decreasing(d, s1, s2):
    lo, hi = sorted((s1, s2))
    assert effective_delta_noisy(d, hi) <= effective_delta_noisy(d, lo)


@settings(max_examples=200, deadline=None)
@given(deltas)
def test_report_identities(d):
    r = certificate_chain(d)
    e = r.epsilon
    root = math.sqrt(1 + d / 2)
    assert e * e == pytest.approx(1 + root - 2 * math.sqrt((1 - 2 * d) * root), rel=1e-12, abs=1e-15)
    if e >= 1:
        assert not r.valid
        return
    assert r.delta_hat == pytest.approx(math.sqrt(2) * (2 + e) / math.sqrt((1 - e) * (2 - e)) * d, rel=1e-12)
    assert r.h1 == pytest.approx(math.sqrt((1 - e) * (2 - e)), rel=1e-12)
    assert r.h2 == 2 + e
    assert r.h == pytest.approx((1 - r.delta_hat) * r.h1**2, rel=1e-12, abs=1e-15)
    assert r.c == pytest.approx((1 + e) * (2 + e) * (2 + d), rel=1e-12)
    assert r.r == pytest.approx((r.h / r.c) ** 2, rel=1e-12)
    assert r.mu == pytest.approx(2 / r.beta_prime, rel=1e-12)
    assert r.r == pytest.approx(2 * r.mu / r.alpha_prime, rel=1e-12)
    assert r.valid == (d <= delta_star() and e < 1 and r.delta_hat < 1)


def test_monotone_on_grid():
    grid = np.linspace(0, 0.49, 1000)
    eps = [epsilon_from_delta(d) for d in grid]
    assert np.all(np.diff(eps) >= 0)
    finite = [certificate_chain(d) for d in grid if epsilon_from_delta(d) < 1]
    assert np.all(np.diff([r.delta_hat for r in finite]) >= 0)
    inside = [certificate_chain(d) for d in grid if d <= delta_star()]
    for field in ("r", "mu", "h"):
        assert np.all(np.diff([getattr(r, field) for r in inside]) <= 0), field
    rates = np.array([r.rate for r in inside])
    assert np.all((rates > 0) & (rates < 1))


def test_curve_grid():
    rows = curve(0, 0.184, 185)
    assert len(rows) == 185 and rows[0] == certificate_chain(0.0)
    assert len(rows[0].curve_row()) == len(CURVE_HEADER)
    with pytest.raises(CertificateError):
        curve(0.2, 0.1, 5)
    with pytest.raises(CertificateError):
        curve(0, 0.6, 5)


# --- noisy feasibility -----------------------------------------------------------


def test_feasibility_flip_near_20_7_db():
    flips = []
    prev = None
    for db in np.arange(19.0, 23.0, 0.01):
        f = snr_feasibility(0.0, 10 ** (db / 10)).feasible
        if prev is not None and f != prev:
            flips.append(db)
        prev = f
    assert len(flips) == 1
    assert abs(flips[0] - 20.72) <= 0.5
    assert abs(flips[0] - F.FEASIBILITY_FLIP_DB) <= 0.011


def test_feasibility_limits():
    f = snr_feasibility(0.1, math.inf)
    assert f.feasible and f.alpha_upper == math.inf
    assert not snr_feasibility(0.15, 10.0).feasible
    with pytest.raises(CertificateError):
        snr_feasibility(0.19, 1e6)


def test_alpha_upper_formula():
    snr = 1e4
    f = snr_feasibility(0.05, snr)
    e = epsilon_from_delta(effective_delta_noisy(0.05, snr))
    assert f.alpha_upper == pytest.approx(e * 100 / ((1 + e) * 2.05), rel=1e-14)


def test_noisy_report_convention():
    r = certificate_chain(0.0, 1e4)
    assert r.epsilon == pytest.approx(F.NOISY40_EPS, rel=1e-13)
    assert r.alpha_prime == pytest.approx(F.NOISY40_ALPHA, rel=1e-13)
    assert r.delta_hat == 0.0
    assert r.delta_effective == pytest.approx(0.02)


# --- empirical delta ---------------------------------------------------------------


def test_estimate_on_exact_design():
    est = estimate_delta(projective_design(5), restarts=8, iterations=50)
    assert est.delta_estimate <= 1e-8


def test_witness_consistency():
    ens = generate_gaussian_ensemble(4, 64, 3)
    est = estimate_delta(ens, restarts=8, iterations=100, seed=1)
    assert abs(np.linalg.norm(est.witness) - 1) < 1e-12
    assert abs(fourth_moment_gap(ens, est.witness) - est.delta_estimate) <= 1e-10


def test_estimate_matches_grid_oracle_n2():
    ens = generate_gaussian_ensemble(2, 4096, 13)
    est = estimate_delta(ens)
    assert abs(est.delta_estimate - F.GRID_DELTA_N2) <= 2e-3


def test_estimate_monotone_in_restarts():
    ens = generate_gaussian_ensemble(3, 40, 4)
    vals = [estimate_delta(ens, restarts=r, iterations=30, seed=2).delta_estimate for r in (1, 2, 4, 8, 16)]
    assert vals == sorted(vals)


def test_estimate_deterministic():
    ens = generate_gaussian_ensemble(3, 40, 4)
    a = estimate_delta(ens, restarts=4, iterations=20, seed=9)
    b = estimate_delta(ens, restarts=4, iterations=20, seed=9)
    assert a.delta_estimate == b.delta_estimate and np.array_equal(a.witness, b.witness)


def test_estimate_argument_checks():
    ens = generate_gaussian_ensemble(2, 4, 0)
    with pytest.raises(ValueError):
        estimate_delta(ens, restarts=0)
    with pytest.raises(ValueError):
        estimate_delta(ens, iterations=0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from motag.analytic import (
    CltParams,
    ModelParams,
    clt_mean_approx,
    conditional_mean_given_T,
    expected_y_after_k,
    k_pmf_deterministic,
    k_pmf_poisson,
    mean_known_deterministic,
    mean_known_poisson,
    mean_known_selective,
    prob_fraction_not_found,
    stationary_pmf_poisson,
)
from motag.errors import PrecisionError, ValidityError
from motag.stirling import distinct_type_pmf

from .oracles import geometric_mixture


def P(m, rho, r=1.0, delta=1.0):
    return ModelParams.from_rho(m, rho, delta=delta, r=r)


def test_model_params_validation():
    p = ModelParams(25, 50 / 30, 1 / 30)
    assert p.rho == (50 / 30) / (1 / 30)
    for bad in [dict(m=0), dict(beta=0), dict(delta=-1), dict(r=1.5), dict(m=2.5)]:
        kw = dict(m=3, beta=1.0, delta=1.0, r=1.0) | bad
        with pytest.raises(ValueError):
            ModelParams(**kw)


@pytest.mark.parametrize("rho,pct", [(5, 16.67), (25, 50.00), (50, 66.67)])
def test_table1_analytic_row(rho, pct):
    assert round(100 * mean_known_poisson(P(25, rho)) / 25, 2) == pct


def test_mean_poisson_examples():
    assert mean_known_poisson(P(25, 5)) == pytest.approx(25 * 5 / 30)
    assert mean_known_poisson(P(25, 25)) == 12.5
    assert mean_known_poisson(ModelParams(25, math.inf, 1.0)) == 25
    assert mean_known_poisson(P(25, 1e12)) == pytest.approx(25, rel=1e-10)
    # m >> rho: roughly rho regardless of m
    assert mean_known_poisson(P(10**6, 10)) == pytest.approx(9.9999, abs=1e-4)


def test_mean_deterministic_examples():
    # 1/(e^{0.02} - 0.96), worked by hand: 16.6109...
    v = mean_known_deterministic(P(25, 50))
    assert v == pytest.approx(1 / (math.exp(0.02) - 0.96), rel=1e-13)
    assert 100 * v / 25 == pytest.approx(66.44, abs=0.005)
    for rho in (0.5, 2, 30):
        assert mean_known_deterministic(P(1, rho)) == pytest.approx(math.exp(-1 / rho), rel=1e-14)
    ratios = [mean_known_deterministic(P(25, rho)) / mean_known_poisson(P(25, rho)) for rho in (1e2, 1e4, 1e6)]
    assert abs(ratios[-1] - 1) < 1e-4
    assert abs(ratios[0] - 1) > abs(ratios[1] - 1) > abs(ratios[2] - 1)


@settings(max_examples=200, deadline=None)
@given(m=st.integers(2, 10**5), rho=st.floats(1e-3, 1e6))
def test_deterministic_never_exceeds_poisson(m, rho):
    assert mean_known_deterministic(P(m, rho)) <= mean_known_poisson(P(m, rho)) * (1 + 1e-12)


def test_mean_selective_examples():
    for m, rho in [(3, 0.7), (25, 50), (1000, 3)]:
        assert mean_known_selective(P(m, rho, r=1)) == mean_known_poisson(P(m, rho))
    assert mean_known_selective(P(25, 50, r=0)) == 25
    assert mean_known_selective(P(25, 50, r=0.5)) == pytest.approx(20.0)


def test_mean_selective_monotone():
    rs = np.linspace(0, 1, 21)
    rhos = np.geomspace(0.1, 1e4, 30)
    for rho in rhos:
        vals = [mean_known_selective(P(25, rho, r=r)) for r in rs]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
    for r in rs:
        vals = [mean_known_selective(P(25, rho, r=r)) for rho in rhos]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_k_pmf_deterministic():
    rho = 7.0
    assert k_pmf_deterministic(rho, 0) == pytest.approx(1 - math.exp(-1 / rho))
    assert k_pmf_deterministic(1.0, 1) == pytest.approx(math.exp(-1) * (1 - math.exp(-1)), rel=1e-14)
    assert k_pmf_deterministic(1.0, 1) == pytest.approx(0.23254, abs=1e-5)
    assert abs(math.fsum(k_pmf_deterministic(50, k) for k in range(10**4)) - 1) < 1e-12


def test_k_pmf_poisson():
    for rho in (0.3, 1, 50):
        assert k_pmf_poisson(rho, 0) == pytest.approx(1 / (rho + 1), rel=1e-14)
        ks = range(5000)
        mean = math.fsum(k * k_pmf_poisson(rho, k) for k in ks)
        assert mean == pytest.approx(rho, rel=1e-9)
    assert k_pmf_poisson(1, 2) == pytest.approx(0.125, rel=1e-14)


def test_k_pmf_poisson_matches_quadrature():
    # P(K=k) = int delta e^{-delta t} Pois(k; beta t) dt
    beta, delta = 2.0, 0.5
    for k in (0, 1, 4, 9):
        f = lambda t: delta * math.exp(-delta * t) * math.exp(k * math.log(beta * t) - beta * t - math.lgamma(k + 1)) if t > 0 else (delta if k == 0 else 0.0)  # noqa: E731
        val, _ = integrate.quad(f, 0, 60 / delta, limit=200)
        assert val == pytest.approx(k_pmf_poisson(beta / delta, k), rel=1e-8)


def test_conditional_mean_given_T():
    assert conditional_mean_given_T(25, 1.0, 0.0) == 0.0
    assert conditional_mean_given_T(25, 1.0, math.inf) == 25
    assert conditional_mean_given_T(25, 1.0, 1e6) == pytest.approx(25)


@pytest.mark.parametrize("m,beta,delta", [(25, 50 / 30, 1 / 30), (2, 1.0, 1.0), (1000, 3.0, 0.01)])
def test_conditional_mean_averages_to_poisson_mean(m, beta, delta):
    upper = 40 / delta
    val, _ = integrate.quad(lambda t: conditional_mean_given_T(m, beta, t) * delta * math.exp(-delta * t),
                            0, upper, epsabs=1e-11, epsrel=1e-11, limit=200)
    tail = m * math.exp(-delta * upper)  # integrand is bounded by m * density
    assert tail < 1e-9 * max(1, m)
    assert abs(val - mean_known_poisson(ModelParams(m, beta, delta))) < 1e-6


def test_stationary_pmf_mass_at_zero():
    for m, rho in [(2, 1), (25, 50), (1000, 0.01), (1000, 5000)]:
        assert stationary_pmf_poisson(P(m, rho))[0] == pytest.approx(1 / (rho + 1), rel=1e-12)


@pytest.mark.parametrize("m", [2, 25, 100, 1000])
@pytest.mark.parametrize("rho", [1, 5, 50, 500])
def test_stationary_pmf_mean_and_sum(m, rho):
    pmf = stationary_pmf_poisson(P(m, rho))
    assert abs(pmf.mass.sum() - 1) < 1e-10
    assert abs(pmf.mean() - m * rho / (m + rho)) < 1e-8


@pytest.mark.parametrize("m,rho", [(2, 1), (3, 2), (5, 5), (4, 0.5)])
def test_stationary_pmf_matches_geometric_mixture(m, rho):
    mix = geometric_mixture(m, rho, 200, distinct_type_pmf)
    np.testing.assert_allclose(stationary_pmf_poisson(P(m, rho)).mass, mix, atol=1e-8)


def test_stationary_pmf_printed_product_form():
    # P(Y=l) = (1/rho) (m/(m-l)) prod_{j=0}^{l} (m-j)/(m(rho+1)/rho - j) for 1 <= l < m
    m, rho = 25, 50.0
    a = m * (rho + 1) / rho
    pmf = stationary_pmf_poisson(P(m, rho))
    for ell in range(1, m):
        printed = (1 / rho) * (m / (m - ell)) * math.prod((m - j) / (a - j) for j in range(ell + 1))
        assert pmf[ell] == pytest.approx(printed, rel=1e-11)


def test_stationary_pmf_precision_flag(monkeypatch):
    import motag.analytic as an

    monkeypatch.setattr(an, "RENORM_TOL", -1.0)
    with pytest.raises(PrecisionError):
        an.stationary_pmf_poisson(P(5, 5))


def test_prob_fraction_not_found_limits():
    # any positive fraction excludes Y = m, so the small-fraction limit is P(Y < m)
    pmf = stationary_pmf_poisson(P(25, 50))
    assert prob_fraction_not_found(P(25, 50), 1e-9) == pytest.approx(1 - pmf[25], rel=1e-14)
    assert prob_fraction_not_found(P(25, 1e-4), 1e-9) == pytest.approx(1.0, abs=1e-6)
    assert prob_fraction_not_found(P(1000, 1e-6), 0.2) > 1 - 1e-6
    with pytest.raises(ValueError):
        prob_fraction_not_found(P(10, 1), 1.0)


def test_prob_fraction_not_found_threshold_is_800_of_1000():
    params = P(1000, 4000)
    pmf = stationary_pmf_poisson(params)
    assert prob_fraction_not_found(params, 0.2) == pytest.approx(pmf.mass[:801].sum(), rel=1e-14)


def test_prob_fraction_not_found_monotone_sweep():
    vals = [prob_fraction_not_found(P(1000, rho), 0.2) for rho in (100, 500, 1000, 4000, 16000)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_prob_fraction_not_found_lower_bound():
    # Y = 0 alone has probability 1/(rho+1)
    for rho in (1e3, 1e5, 1e7):
        assert prob_fraction_not_found(P(1000, rho), 0.2) >= 1 / (rho + 1)


def test_expected_y_after_k():
    assert expected_y_after_k(25, 0, 7.0) == 7.0
    assert expected_y_after_k(25, 10**6, 0.0) == pytest.approx(25)
    assert expected_y_after_k(25, 25, 0.0) == pytest.approx(25 * (1 - 0.96**25))
    assert expected_y_after_k(25, 25, 0.0) == pytest.approx(16.00, abs=0.01)


def test_expected_y_after_k_monte_carlo():
    rng = np.random.default_rng(12345)
    m, k, y0, n = 25, 25, 6, 100_000
    draws = rng.integers(m, size=(n, k))
    hit = np.zeros((n, m), dtype=bool)
    hit[:, :y0] = True
    np.put_along_axis(hit, draws, True, axis=1)
    y = hit.sum(axis=1)
    se = y.std() / math.sqrt(n)
    assert abs(y.mean() - expected_y_after_k(m, k, y0)) < 4 * se


def test_clt_sigma_zero_closed_form():
    for m, rho, delta in [(25, 50, 1 / 30), (1000, 1000, 1.0), (3, 2, 0.2)]:
        p = ModelParams.from_rho(m, rho, delta=delta)
        v = -math.log(1 - 1 / m)
        want = m * (1 - p.delta / (p.delta + p.beta * v))
        assert clt_mean_approx(CltParams(p, 0.0)) == pytest.approx(want, rel=1e-14)


def test_clt_matches_deterministic_for_large_m_rho():
    p = P(1000, 1000)
    clt = clt_mean_approx(CltParams(p, 0.0))
    det = mean_known_deterministic(p)
    assert abs(clt - det) / det < 0.005


def test_clt_decreasing_in_sigma():
    p = ModelParams(25, 50 / 30, 1 / 30)
    v = -math.log(1 - 1 / 25)
    smax = (1 / p.beta) / math.sqrt(v / 2)
    vals = [clt_mean_approx(CltParams(p, s)) for s in np.linspace(0, 0.999 * smax, 25)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_clt_validity_error():
    p = ModelParams(25, 50 / 30, 1 / 30)
    v = -math.log(1 - 1 / 25)
    boundary = (1 / p.beta) / math.sqrt(v / 2)
    with pytest.raises(ValidityError):
        clt_mean_approx(CltParams(p, boundary * 1.0001))
    with pytest.raises(ValidityError):
        clt_mean_approx(CltParams(p, 15.0))
    with pytest.raises(ValueError):
        CltParams(P(1, 2), 0.0)

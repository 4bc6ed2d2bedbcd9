"""Distances, exact OU laws, invariant-measure estimation, and rate fits."""

import warnings

import numpy as np
import pytest
from scipy.special import erf

import oracles
from stablekern.drift import drift_catalog
from stablekern.errors import ConfigError, DomainError
from stablekern.fits import RateFit, rate_fit
from stablekern.grids import tabulate, uniform_grid
from stablekern.metrics import (
    estimate_invariant,
    moment_sweep,
    ou_char_lower_bound,
    ou_exact_stationary,
    ou_exact_transition,
    quantile_transport_cost,
    transport_cost,
    var_distance,
    weighted_var_distance,
)
from stablekern.sampling import RngStream

SCHEME = (10.0, 200.0, 40, 64)


def normal_density(grid, mean=0.0, var=1.0):
    return np.exp(-((grid - mean) ** 2) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)


# ---------------------------------------------------------------------------
# var / weighted-var distances


def test_var_distance_zero_and_gaussian_shift():
    grid = uniform_grid(-12.0, 12.0, 4001)
    f = tabulate(grid, normal_density(grid))
    assert var_distance(f, f) == 0.0
    g = tabulate(grid, normal_density(grid, mean=0.1))
    # int |N(0,1) - N(0.1,1)| = 2 (2 Phi(0.05) - 1) = 0.079744...
    want = 2.0 * erf(0.05 / np.sqrt(2.0))
    assert var_distance(f, g) == pytest.approx(want, abs=1e-4)


def test_var_distance_disjoint_supports():
    grid = uniform_grid(-20.0, 20.0, 8001)
    f = tabulate(grid, normal_density(grid, mean=-8.0, var=0.25))
    g = tabulate(grid, normal_density(grid, mean=8.0, var=0.25))
    # no 1/2 factor: total separation gives mass(f) + mass(g) = 2
    assert var_distance(f, g) == pytest.approx(2.0, abs=1e-6)


def test_var_distance_is_a_metric():
    grid = uniform_grid(-10.0, 10.0, 1001)
    rng = np.random.default_rng(137)
    for _ in range(20):
        m1, m2, m3 = rng.uniform(-2.0, 2.0, 3)
        f = tabulate(grid, normal_density(grid, mean=m1))
        g = tabulate(grid, normal_density(grid, mean=m2))
        h = tabulate(grid, normal_density(grid, mean=m3))
        assert var_distance(f, g) == pytest.approx(var_distance(g, f), abs=1e-12)
        assert var_distance(f, g) <= var_distance(f, h) + var_distance(h, g) + 1e-12


def test_weighted_var_dominates_and_matches_quadrature():
    grid = uniform_grid(-15.0, 15.0, 6001)
    f = tabulate(grid, normal_density(grid))
    g = tabulate(grid, normal_density(grid, mean=0.5))
    for p in (0.5, 1.0):
        wv = weighted_var_distance(f, g, p)
        assert wv >= var_distance(f, g)
        want = np.trapezoid((1.0 + np.abs(grid) ** p) * np.abs(f.values - g.values), grid)
        assert wv == pytest.approx(want, rel=1e-10)
    with pytest.raises(DomainError):
        weighted_var_distance(f, g, -0.5)


def test_var_distance_grid_mismatch():
    f = tabulate(uniform_grid(-5.0, 5.0, 101), np.ones(101))
    g = tabulate(uniform_grid(-5.0, 5.0, 102), np.ones(102))
    with pytest.raises(ConfigError):
        var_distance(f, g)


# ---------------------------------------------------------------------------
# transport costs


def test_transport_point_masses_and_identity():
    mu = np.zeros(64)
    nu = np.ones(64)
    assert transport_cost(mu, nu, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert transport_cost(mu, mu, 1.0) == 0.0
    assert transport_cost(mu, mu, 0.5) == pytest.approx(0.0, abs=1e-9)


def test_transport_concave_matches_enumeration():
    # 3-atom measures, p = 0.5: exact optimum over all 3x3 couplings with
    # uniform weights reduces to the best of the 6 permutations
    from itertools import permutations

    mu = np.array([-1.0, 0.0, 2.0])
    nu = np.array([-0.5, 0.7, 1.4])
    best = min(
        sum(abs(mu[i] - nu[p[i]]) ** 0.5 for i in range(3)) / 3.0
        for p in permutations(range(3))
    )
    assert transport_cost(mu, nu, 0.5) == pytest.approx(best, abs=1e-9)
    # quantile coupling is reported as an upper bound for concave costs
    assert quantile_transport_cost(mu, nu, 0.5) >= transport_cost(mu, nu, 0.5) - 1e-12


def test_transport_shift_invariance_and_quantile_agreement():
    rng = np.random.default_rng(139)
    mu = rng.standard_normal(256)
    nu = rng.standard_normal(256) + 0.3
    c0 = transport_cost(mu, nu, 1.5)
    c1 = transport_cost(mu + 7.0, nu + 7.0, 1.5)
    assert c1 == pytest.approx(c0, abs=1e-12)
    # p >= 1: quantile coupling is optimal, both paths agree
    assert transport_cost(mu, nu, 1.5) == pytest.approx(
        quantile_transport_cost(mu, nu, 1.5), abs=1e-12
    )


def test_transport_concave_atom_limit():
    rng = np.random.default_rng(141)
    with pytest.raises(ConfigError):
        transport_cost(rng.standard_normal(600), rng.standard_normal(600), 0.5)


# ---------------------------------------------------------------------------
# exact OU laws and the characteristic-function bound


def test_ou_exact_stationary_gaussian_and_cauchy():
    grid = uniform_grid(-8.0, 8.0, 1601)
    g2 = ou_exact_stationary(2.0, grid)
    assert np.max(np.abs(g2.values - normal_density(grid))) < 1e-9
    g1 = ou_exact_stationary(1.0, grid)
    cauchy = 1.0 / (np.pi * (1.0 + grid**2))
    assert np.max(np.abs(g1.values - cauchy)) < 1e-9


def test_ou_exact_stationary_mass():
    # window-clipped mass deficit matches the one-term tail asymptote
    # 2/pi * Gamma(alpha) sin(pi alpha / 2) * t * L^{-alpha}, t = 1/alpha
    from math import gamma, pi, sin

    length = 200.0
    grid = uniform_grid(-length, length, 40001)
    for alpha in (1.5, 1.8):
        deficit = 1.0 - ou_exact_stationary(alpha, grid).mass()
        want = (
            (2.0 / pi) * gamma(alpha) * sin(pi * alpha / 2.0) / alpha * length**-alpha
        )
        assert 0.5 * want < deficit < 2.0 * want
    assert ou_exact_stationary(2.0, grid).mass() == pytest.approx(1.0, abs=1e-9)


def test_ou_exact_transition_reduces_to_stationary():
    # as t grows the transition law forgets x0 and approaches stationarity
    grid = uniform_grid(-30.0, 30.0, 3001)
    trans = ou_exact_transition(1.7, 16.0, 2.5, grid)
    stat = ou_exact_stationary(1.7, grid)
    assert np.max(np.abs(trans.values - stat.values)) < 1e-6


def test_ou_char_lower_bound_values():
    assert ou_char_lower_bound(2.0) == 0.0
    want = abs(np.exp(-1.0 / 1.9) - np.exp(-0.5))
    assert ou_char_lower_bound(1.9) == pytest.approx(want, rel=1e-12)
    assert ou_char_lower_bound(1.9) == pytest.approx(0.015753, abs=1e-5)
    # first-order expansion: bound / (2 - alpha) -> e^{-1/2}/4
    ratio = ou_char_lower_bound(1.999) / (2.0 - 1.999)
    assert ratio == pytest.approx(np.exp(-0.5) / 4.0, rel=1e-3)
    assert np.exp(-0.5) / 4.0 == pytest.approx(0.15163, abs=5e-6)


_WIDE_GRID = uniform_grid(-400.0, 400.0, 80001)
_WIDE_CACHE = {}


def _wide_stationary(alpha):
    if alpha not in _WIDE_CACHE:
        _WIDE_CACHE[alpha] = ou_exact_stationary(alpha, _WIDE_GRID)
    return _WIDE_CACHE[alpha]


def test_sandwich_bound_below_var_distance():
    ref = _wide_stationary(2.0)
    for alpha in (1.9, 1.95, 1.99):
        d = var_distance(_wide_stationary(alpha), ref)
        assert ou_char_lower_bound(alpha) <= d


# ---------------------------------------------------------------------------
# invariant-measure estimation


def test_estimate_invariant_ou_gaussian():
    grid = uniform_grid(-6.0, 6.0, 241)
    est = estimate_invariant(drift_catalog("ou"), 2.0, SCHEME, grid, RngStream(151))
    # Euler step bias (h = 1/40 inflates the variance by ~1.3%) plus the
    # KDE bandwidth bias dominate; both shrink with the step and bandwidth
    l1 = np.trapezoid(np.abs(est.values - normal_density(grid)), grid)
    assert l1 <= 0.03
    assert est.stderr is not None and np.all(est.stderr >= 0.0)


def test_estimate_invariant_ou_stable():
    grid = uniform_grid(-12.0, 12.0, 481)
    est = estimate_invariant(drift_catalog("ou"), 1.5, SCHEME, grid, RngStream(153))
    exact = ou_exact_stationary(1.5, grid)
    l1 = np.trapezoid(np.abs(est.values - exact.values), grid)
    assert l1 <= 0.03


def test_estimate_invariant_seed_agreement():
    grid = uniform_grid(-10.0, 10.0, 201)
    pert = drift_catalog("perturbed", a=0.5, beta=0.5)
    e1 = estimate_invariant(pert, 1.8, SCHEME, grid, RngStream(157))
    e2 = estimate_invariant(pert, 1.8, SCHEME, grid, RngStream(158))
    diff = np.trapezoid(np.abs(e1.values - e2.values), grid)
    pooled = np.trapezoid(np.sqrt(e1.stderr**2 + e2.stderr**2), grid)
    assert diff <= 2.0 * pooled


def test_estimate_invariant_requires_certificate():
    grid = uniform_grid(-5.0, 5.0, 101)
    with pytest.raises(ConfigError):
        estimate_invariant(drift_catalog("zero"), 1.5, SCHEME, grid, RngStream(1))
    with pytest.raises(ConfigError):
        estimate_invariant(drift_catalog("ou"), 1.5, (10.0, 200.0, 40, 1), grid, RngStream(1))
    with pytest.raises(DomainError):
        estimate_invariant(drift_catalog("ou"), 2.5, SCHEME, grid, RngStream(1))


# ---------------------------------------------------------------------------
# rate fitting


def test_rate_fit_exact_line():
    alphas = np.array([1.90, 1.95, 1.98, 1.99])
    fit = rate_fit(alphas, 2.0 - alphas)
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    c = 0.37
    fit = rate_fit(alphas, c * (2.0 - alphas))
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(c), abs=1e-12)
    assert len(fit.points) == 4


def test_rate_fit_exclusion_and_errors():
    alphas = np.array([1.90, 1.95, 1.98, 1.99, 1.995])
    d = 2.0 - alphas
    d[2] = 0.0
    with pytest.warns(RuntimeWarning):
        fit = rate_fit(alphas, d)
    assert len(fit.points) == 4
    with pytest.raises(DomainError):
        rate_fit(alphas[:3], d[:3])
    with pytest.raises(DomainError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rate_fit(alphas, np.zeros(5))
    with pytest.raises(DomainError):
        rate_fit(alphas[::-1], d)


def test_rate_fit_on_exact_ou_distances():
    ref = _wide_stationary(2.0)
    alphas = np.array([1.90, 1.95, 1.98, 1.99, 1.995])
    dists = [var_distance(_wide_stationary(a), ref) for a in alphas]
    fit = rate_fit(alphas, dists)
    assert fit.slope == pytest.approx(1.0, abs=0.05)


# ---------------------------------------------------------------------------
# moment sweep


def test_moment_sweep_matches_exact_and_uniform():
    grid = uniform_grid(-12.0, 12.0, 481)
    out = moment_sweep(
        drift_catalog("ou"), 0.5, [1.25, 1.5, 1.9, 2.0], SCHEME, grid, RngStream(163)
    )
    vals = list(out.values())
    assert max(vals) / min(vals) <= 4.0
    for alpha, got in out.items():
        exact = ou_exact_stationary(alpha, grid).moment(0.5)
        assert got == pytest.approx(exact, abs=0.05)


def test_moment_sweep_gaussian_first_moment():
    grid = uniform_grid(-8.0, 8.0, 321)
    out = moment_sweep(drift_catalog("ou"), 1.0, [2.0], SCHEME, grid, RngStream(167))
    assert out[2.0] == pytest.approx(np.sqrt(2.0 / np.pi), abs=0.02)


def test_moment_sweep_domain_floor():
    grid = uniform_grid(-8.0, 8.0, 321)
    with pytest.raises(DomainError):
        moment_sweep(drift_catalog("ou"), 1.0, [1.4], SCHEME, grid, RngStream(1))
    with pytest.raises(DomainError):
        moment_sweep(drift_catalog("ou"), 2.5, [2.0], SCHEME, grid, RngStream(1))

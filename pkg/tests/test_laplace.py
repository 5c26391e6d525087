import math
from itertools import islice

import numpy as np
import pytest
from scipy import integrate, stats

from errors import PreconditionError
from kernels import InitialLaw, Observable
from laplace import (
    IidGenerating, MatrixGenerating, generating_function, iter_finite, iter_riccati, laplace_mc,
    laplace_mc_series, laplace_oracle_iid, laplace_oracle_riccati, laplace_series, marginal_laplace,
    oracle_source, STATUS_DIVERGENT, STATUS_FINITE
)


def test_gamma_zero_gives_one(ar1_quadratic):
    estimate = laplace_mc(ar1_quadratic, InitialLaw.stationary(), 0.0, 5, trials=1000, seed=1)
    assert estimate.value == 1.0
    assert estimate.std_error == 0.0


def test_constant_observable_is_exact(birth_death):
    model = birth_death.with_observable(Observable.constant(1.0))
    estimate = laplace_mc(model, InitialLaw.point(0.0), 0.5, 4, trials=200, seed=0)
    assert estimate.value == pytest.approx(math.exp(-2.5), rel=1e-12)


def test_mc_series_is_monotone_and_bounded(ar1_quadratic):
    series = laplace_mc_series(ar1_quadratic, InitialLaw.stationary(), 0.3, 15, trials=5000, seed=4)
    values = np.array([item.value for item in series])
    assert np.all((values >= 0.0) & (values <= 1.0))
    assert np.all(np.diff(values) <= 0.0)


def test_mc_is_seed_deterministic(ar1_quadratic):
    a = laplace_mc_series(ar1_quadratic, InitialLaw.point(0.5), 0.7, 6, trials=3000, seed=9)
    b = laplace_mc_series(ar1_quadratic, InitialLaw.point(0.5), 0.7, 6, trials=3000, seed=9)
    assert [x.value for x in a] == [y.value for y in b]


def test_mc_does_not_depend_on_thread_count(ar1_quadratic, monkeypatch):
    monkeypatch.setenv('MERG_SHARD_SIZE', '1000')
    monkeypatch.setenv('MERG_THREADS', '1')
    single = laplace_mc_series(ar1_quadratic, InitialLaw.stationary(), 0.5, 5, trials=4500, seed=2)
    monkeypatch.setenv('MERG_THREADS', '4')
    pooled = laplace_mc_series(ar1_quadratic, InitialLaw.stationary(), 0.5, 5, trials=4500, seed=2)
    assert [x.value for x in single] == [y.value for y in pooled]


def test_iid_oracle_on_resampling(resampling_exp):
    marginal = marginal_laplace(resampling_exp, 1.0)
    assert marginal == pytest.approx(0.5, abs=1e-10)
    assert laplace_oracle_iid(marginal, 3, 1.0, resampling_exp).value == pytest.approx(0.5 ** 4, abs=1e-10)
    assert oracle_source(resampling_exp, InitialLaw.stationary()) == 'oracle_iid'


def test_iid_oracle_refuses_markov_models(ar1_quadratic):
    with pytest.raises(PreconditionError):
        laplace_oracle_iid(0.5, 2, 1.0, ar1_quadratic)


def test_riccati_first_term_is_gaussian_transform():
    # X_0 ~ N(0, 4/3): E[exp(-γ X²)] = (1 + 2γ·4/3)^(-1/2)
    value = laplace_oracle_riccati(0.5, 1.0, 0.25, 0, InitialLaw.stationary()).value
    assert value == pytest.approx((1.0 + 2.0 * 0.25 * 4.0 / 3.0) ** -0.5, rel=1e-14)


def test_riccati_point_start():
    # δ_x com n = 0: exp(-γ x²)
    value = laplace_oracle_riccati(0.5, 1.0, 0.4, 0, InitialLaw.point(1.5)).value
    assert value == pytest.approx(math.exp(-0.4 * 2.25), rel=1e-14)


def test_riccati_matches_double_quadrature():
    # n = 2 a partir de δ_x: exp(-γx²) ∫∫ p(x, y1) e^{-γ y1²} p(y1, y2) e^{-γ y2²} dy2 dy1
    alpha, sigma, gamma, x = 0.5, 1.0, 0.5, 0.7

    def integrand(y2, y1):
        first = stats.norm.pdf(y1 - alpha * x, scale=sigma) * math.exp(-gamma * y1 * y1)
        return first * stats.norm.pdf(y2 - alpha * y1, scale=sigma) * math.exp(-gamma * y2 * y2)

    inner, _ = integrate.dblquad(integrand, -10.0, 10.0, -10.0, 10.0, epsabs=1e-13, epsrel=1e-12)
    expected = math.exp(-gamma * x * x) * inner
    value = laplace_oracle_riccati(alpha, sigma, gamma, 2, InitialLaw.point(x)).value
    assert value == pytest.approx(expected, abs=1e-8)


def test_exact_oracles_are_monotone(birth_death):
    gammas = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
    horizon = 15
    for table in (
        [list(islice(iter_finite(birth_death, g, InitialLaw.point(1.0)), horizon)) for g in gammas],
        [list(islice(iter_riccati(0.5, 1.0, g, InitialLaw.stationary()), horizon)) for g in gammas]
    ):
        values = np.array(table)
        assert np.all(np.diff(values, axis=1) <= 1e-15)
        assert np.all(np.diff(values, axis=0) <= 1e-15)


def test_finite_oracle_matches_brute_force(birth_death):
    gamma, n = 0.6, 3
    values = list(islice(iter_finite(birth_death, gamma, InitialLaw.point(1.0)), n + 1))
    # enumeração de todas as trajetórias de comprimento n
    matrix = birth_death.transition_matrix
    xi = np.array([0.0, 1.0, 2.0])
    total = 0.0
    for path in np.ndindex(*(3,) * n):
        states = (1,) + path
        prob = np.prod([matrix[a, b] for a, b in zip(states[:-1], states[1:])])
        total += prob * math.exp(-gamma * xi[list(states)].sum())
    assert values[n] == pytest.approx(total, rel=1e-12)


def test_series_prefers_oracle(birth_death):
    series = laplace_series(birth_death, InitialLaw.stationary(), 1.0, 10)
    assert {item.source for item in series} == {'oracle_finite'}
    assert len(series) == 11


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.9])
def test_generating_function_at_gamma_zero(lam):
    result = generating_function(iter(lambda: 1.0, None), 0.0, lam)
    assert result.status == STATUS_FINITE
    assert result.value == pytest.approx(1.0 / (1.0 - lam), rel=1e-6)


def test_generating_function_divergence():
    result = generating_function(iter(lambda: 1.0, None), 0.0, 2.0)
    assert result.status == STATUS_DIVERGENT
    assert math.isinf(result.value)


def test_generating_function_iid_closed_form(resampling_exp):
    # L^(n)(γ) = (1/(1+γ))^(n+1): g(γ, 2) = L/(1 - 2L) = 1/(γ - 1) para γ > 1
    gamma = 3.0
    series = (1.0 / (1.0 + gamma)) ** (np.arange(2001) + 1)
    result = generating_function(iter(series), gamma, 2.0)
    assert result.value == pytest.approx(1.0 / (gamma - 1.0), rel=1e-6)


def test_generating_function_zero_term():
    result = generating_function(iter([0.5, 0.25, 0.0, 0.0]), math.inf, 2.0)
    assert result.status == STATUS_FINITE
    assert result.value == pytest.approx(1.0)


def test_iid_supplier():
    supplier = IidGenerating(lambda gamma: 1.0 / (1.0 + gamma))
    assert supplier(1.0, 1.0) == pytest.approx(1.0)
    assert math.isinf(supplier(0.0, 1.0))


def test_matrix_supplier_matches_series(birth_death):
    xi = np.array([0.0, 1.0, 2.0])
    supplier = MatrixGenerating(birth_death.transition_matrix, birth_death.stationary, xi)
    gamma, x = 0.8, 0.9
    series = list(islice(iter_finite(birth_death, gamma, InitialLaw.stationary()), 400))
    expected = sum(x ** n * value for n, value in enumerate(series))
    assert supplier(gamma, x) == pytest.approx(expected, rel=1e-10)
    assert supplier.zero_mass() == pytest.approx(0.25)

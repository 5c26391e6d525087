import math
from itertools import islice

import numpy as np
import pytest

from errors import ErgodicityViolation, PreconditionError
from kernels import FiniteStateModel, InitialLaw, Observable
from laplace import iter_finite, iter_riccati
from spectral import TiltFamily, perron
from ergodicity.report import MIN_HORIZONS
from ergodicity import (
    BRACKET_INVALID, NU_FOUND, NU_INFINITE, amplitude, c_nu, counterexample_demo, fit_mult_ergodicity,
    generating_supplier, knudsen_lambda, knudsen_nu_criterion, solve_nu
)

from conftest import BIRTH_DEATH


def _triple(model, gamma, family=None):
    family = family or TiltFamily(model)
    op = family.tilt(gamma)
    return op, perron(op)


# --- amplitude ---

def test_amplitude_constant_observable(birth_death):
    model = birth_death.with_observable(Observable.constant(2.0))
    op, triple = _triple(model, 0.5)
    assert amplitude(model, 0.5, triple, InitialLaw.stationary(), op) == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_amplitude_point_mass_matches_riccati(ar1_quadratic):
    gamma, x, n = 0.5, 1.0, 30
    op, triple = _triple(ar1_quadratic, gamma)
    A = amplitude(ar1_quadratic, gamma, triple, InitialLaw.point(x), op)
    exact = next(islice(iter_riccati(0.5, 1.0, gamma, InitialLaw.point(x)), n, None))
    assert A == pytest.approx(exact / triple.r ** n, rel=1e-5)


def test_amplitude_finite_matches_dense_limit(birth_death):
    gamma, n = 0.8, 60
    op, triple = _triple(birth_death, gamma)
    mu = InitialLaw.point(2.0)
    A = amplitude(birth_death, gamma, triple, mu, op)
    value = next(islice(iter_finite(birth_death, gamma, mu), n, None))
    assert A == pytest.approx(value / triple.r ** n, rel=1e-7)


def test_amplitude_resampling_closed_form(resampling_exp):
    # L^(n) = (1+γ)^-(n+1) sob π: A(γ) = r(γ) = 1/(1+γ)
    family = TiltFamily(resampling_exp)
    for gamma in (0.5, 1.0, 2.0):
        op, triple = _triple(resampling_exp, gamma, family)
        A = amplitude(resampling_exp, gamma, triple, InitialLaw.stationary(), op)
        assert A == pytest.approx(1.0 / (1.0 + gamma), abs=1e-5)


# --- ajuste (M, θ) ---

def test_fit_recovers_spectral_gap(birth_death):
    gamma = 0.5
    op, triple = _triple(birth_death, gamma)
    mu = InitialLaw.point(0.0)
    A = amplitude(birth_death, gamma, triple, mu, op)
    series = list(islice(iter_finite(birth_death, gamma, mu), 41))
    eigenvalues = np.sort(np.abs(np.linalg.eigvals(op.matrix)))[::-1]

    fit = fit_mult_ergodicity({gamma: series}, {gamma: A}, {gamma: triple.r}, {gamma: triple.sub_modulus})
    assert fit.source == 'fit'
    assert fit.theta == pytest.approx(eigenvalues[1] / eigenvalues[0], rel=0.2)
    assert fit.M > 0
    assert fit.points >= MIN_HORIZONS


def test_fit_recovers_synthetic_theta():
    n = np.arange(41)
    series = 0.7 * 0.8 ** n + 0.1 * (0.8 * 0.3) ** n
    fit = fit_mult_ergodicity({1.0: list(series)}, {1.0: 0.7}, {1.0: 0.8})
    assert 0.25 <= fit.theta <= 0.35
    assert fit.M == pytest.approx(0.1, rel=1e-3)


def test_fit_rejects_growing_residuals():
    n = np.arange(21)
    series = 0.5 ** n * (1.0 + 0.01 * 1.05 ** n)
    with pytest.raises(ErgodicityViolation):
        fit_mult_ergodicity({1.0: list(series)}, {1.0: 1.0}, {1.0: 0.5})


def test_fit_falls_back_to_spectral_ratio():
    n = np.arange(12)
    fit = fit_mult_ergodicity({1.0: list(0.8 * 0.5 ** n)}, {1.0: 0.8}, {1.0: 0.5}, {1.0: 0.1})
    assert fit.source == 'spectral'
    assert fit.theta == pytest.approx(0.2)


def test_fit_follows_envelope_of_complex_pair():
    n = np.arange(41)
    series = 0.8 * 0.9 ** n + 0.3 * 0.6 ** n * np.cos(2.0 * n)
    fit = fit_mult_ergodicity({1.0: list(series)}, {1.0: 0.8}, {1.0: 0.9}, noise_floor=1e-12)
    assert fit.source == 'fit'
    assert fit.theta == pytest.approx(0.6 / 0.9, rel=0.05)
    # M cobre todos os resíduos
    residual = np.abs(series - 0.8 * 0.9 ** n)
    assert np.all(residual <= fit.M * (0.9 * fit.theta) ** n * (1.0 + 1e-9))


def test_fit_uses_tail_of_horizons():
    n = np.arange(41)
    series = 1.0 + 0.2 ** n + 1e-3 * 0.5 ** n
    fit = fit_mult_ergodicity({1.0: list(series)}, {1.0: 1.0}, {1.0: 1.0}, noise_floor=1e-12)
    assert fit.theta == pytest.approx(0.5, rel=0.05)


def test_fit_takes_slowest_tilt():
    n = np.arange(31)
    fast = 0.5 ** n * (1.0 + 0.3 ** n)
    slow = 0.5 ** n * (1.0 + 0.8 ** n)
    fit = fit_mult_ergodicity({1.0: list(fast), 2.0: list(slow)}, {1.0: 1.0, 2.0: 1.0}, {1.0: 0.5, 2.0: 0.5},
                              noise_floor=1e-12)
    assert fit.theta == pytest.approx(0.8, rel=0.01)


def test_fit_needs_enough_horizons():
    with pytest.raises(PreconditionError):
        fit_mult_ergodicity({1.0: [1.0, 0.5]}, {1.0: 1.0}, {1.0: 0.5})


# --- ν e C_ν ---

def test_nu_resampling(resampling_exp):
    result = solve_nu(resampling_exp, InitialLaw.stationary())
    assert result.status == NU_FOUND
    assert result.nu == pytest.approx(1.0, abs=1e-6)


def test_c_nu_resampling_both_routes(resampling_exp):
    result = c_nu(resampling_exp, InitialLaw.stationary(), 1.0)
    assert result.formula == pytest.approx(1.0, abs=1e-3)
    assert result.direct == pytest.approx(1.0, abs=1e-3)
    assert result.status == 'ok'


def test_nu_and_c_nu_constant_observable(birth_death):
    c = 1.3
    model = birth_death.with_observable(Observable.constant(c))
    nu = solve_nu(model, InitialLaw.stationary()).nu
    assert nu == pytest.approx(math.log(2.0) / c, abs=1e-8)
    result = c_nu(model, InitialLaw.stationary(), math.log(2.0) / c)
    assert result.formula == pytest.approx(1.0 / (2.0 * math.log(2.0)), abs=1e-6)


def test_nu_infinite_when_zero_set_traps_mass():
    model = FiniteStateModel.from_matrix(BIRTH_DEATH, Observable.table([0.0, 0.0, 1.0]))
    result = solve_nu(model, InitialLaw.stationary())
    assert result.status == NU_INFINITE
    assert result.nu is None
    assert result.r_infinity == pytest.approx(0.5 + math.sqrt(0.125), abs=1e-9)


def test_bracket_not_containing_root(resampling_exp):
    result = solve_nu(resampling_exp, InitialLaw.stationary(), bracket=(2.0, 3.0))
    assert result.status == BRACKET_INVALID


def test_c_nu_requires_finite_nu(resampling_exp):
    with pytest.raises(PreconditionError):
        c_nu(resampling_exp, InitialLaw.stationary(), math.inf)


# --- gás de Knudsen ---

@pytest.mark.parametrize("gamma", [0.2, 1.0, 3.0])
def test_knudsen_fixed_point_is_perron_root(knudsen_finite, gamma):
    family = TiltFamily(knudsen_finite)
    fixed = knudsen_lambda(gamma, knudsen_finite.alpha, generating_supplier(knudsen_finite, family))
    assert fixed.status in ('converged', 'converged_bisection')
    assert fixed.lam == pytest.approx(perron(family.tilt(gamma)).r, abs=1e-8)


def test_knudsen_fixed_point_resampling(resampling_exp):
    supplier = generating_supplier(resampling_exp)
    fixed = knudsen_lambda(1.0, resampling_exp.alpha, supplier)
    assert fixed.lam == pytest.approx(0.5, abs=1e-9)


def test_knudsen_criterion(knudsen_finite):
    criterion = knudsen_nu_criterion(knudsen_finite.alpha, generating_supplier(knudsen_finite))
    # g_Z(∞, x) = π_0 / (1 - x U_00) com x = 0.6
    assert criterion.threshold_value == pytest.approx(0.5, abs=1e-12)
    assert criterion.nu_finite


def test_knudsen_criterion_without_zero_set(resampling_exp):
    criterion = knudsen_nu_criterion(0.75, generating_supplier(resampling_exp))
    assert criterion.nu_finite
    assert criterion.threshold_value == 0.0


def test_knudsen_criterion_alpha_range(knudsen_finite):
    with pytest.raises(PreconditionError):
        knudsen_nu_criterion(0.4, generating_supplier(knudsen_finite))


# --- contraexemplo ---

def test_counterexample_shows_no_decay():
    rows = counterexample_demo(1.0, gammas=[0.0, 1.0, 4.0], ns=[1, 2, 5, 10], trials=500, seed=3)
    assert len(rows) == 3 * 4 * 3
    for row in rows:
        assert row.estimate >= row.lower_bound * (1.0 - 1e-12)
        assert row.estimate <= 1.0
        if row.gamma == 0.0:
            assert row.estimate == 1.0


def test_counterexample_validates_inputs():
    with pytest.raises(PreconditionError):
        counterexample_demo(0.0, [1.0], [1])


def test_counterexample_uses_given_observable():
    default = counterexample_demo(1.0, [1.0], [2], [0.1], trials=300, seed=4)
    explicit = counterexample_demo(1.0, [1.0], [2], [0.1], trials=300, seed=4, xi=Observable.exp_decay())
    assert [row.estimate for row in default] == [row.estimate for row in explicit]
    assert default[0].x == pytest.approx(math.log(10.0) + 2.0 + 1.0)


def test_counterexample_rejects_non_decaying_observable():
    with pytest.raises(PreconditionError):
        counterexample_demo(1.0, [1.0], [1], xi=Observable.quadratic())

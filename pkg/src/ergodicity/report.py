#!/usr/bin/env python3
"""
Grandezas de ergodicidade multiplicativa: amplitude A(γ), ajuste (M, θ),
tilt crítico ν, constante C_ν e o relatório que reúne rota espectral e rota independente
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.linear_model import LinearRegression

import settings
from errors import ErgodicityViolation, MergError, PreconditionError
from kernels import InitialLaw, KnudsenModel, MarkovModel
from laplace import (
    DEFAULT_N_MAX, DEFAULT_SERIES_TOL, LaplaceEstimate, generating_function, iter_oracle, laplace_series,
    oracle_source
)
from spectral import (
    DEFAULT_MAX_ITER, DEFAULT_TOL, GridSpec, SpectralTriple, TiltedOperator, TiltFamily, perron, r_derivative
)
from .knudsen import generating_supplier, knudsen_lambda

logger = logging.getLogger(__name__)

MIN_HORIZONS = 8
NU_TOL = 1e-8
NU_MAX_ITER = 60
DEFAULT_BRACKET = (0.0, 64.0)
CNU_OFFSETS = (0.1, 0.05, 0.025)
CNU_WARNING = 0.05
DEFAULT_HORIZON = 40
NOISE_FLOOR = 1e-8    # piso relativo dos resíduos (precisão da tripla de Perron)

NU_FOUND = 'found'
NU_INFINITE = 'nu_infinite'
BRACKET_INVALID = 'bracket_invalid'


# --- amplitude ---

def amplitude(model: MarkovModel, gamma: float, triple: SpectralTriple, mu: InitialLaw,
              op: TiltedOperator) -> float:
    """A(γ) = μ(h_γ Π_γ 1) = [π_γ(1)/π_γ(φ)]·μ(h_γ φ), com π_γ(1) = π_γ(φ) = 1"""
    if triple.nodes.size != op.size:
        raise PreconditionError("tripla e operador em grades diferentes")
    if not triple.r > 0:
        raise PreconditionError("A(γ) exige r(γ) > 0", gamma=gamma)
    scale = 1.0 / triple.pair(triple.phi)

    if mu.kind == 'point' and not model.is_finite:
        phi_x = float(op.interpolation_row(mu.x) @ triple.phi) / triple.r
        value = scale * _point_tilt(model, mu.x, gamma) * phi_x
    else:
        weights = op.family.measure_weights(mu)
        if weights is None:
            weights = perron(op.family.tilt(0.0)).pi_gamma
        value = scale * float(weights @ (op.h * triple.phi))

    if not value > 0:
        raise PreconditionError("μ(h_γ Π_γ 1) deve ser > 0", gamma=gamma, value=value)
    return value


def _point_tilt(model: MarkovModel, x: float, gamma: float) -> float:
    xi = float(model.observable(np.array([x]))[0])
    if math.isinf(gamma):
        return float(xi == 0)
    return math.exp(-gamma * xi)


# --- ajuste (M, θ) ---

@dataclass(frozen=True)
class FitResult:
    M: float
    theta: float
    source: str  # 'fit' | 'spectral'
    points: int


def _values(series) -> Tuple[np.ndarray, np.ndarray]:
    values = np.array([float(getattr(item, 'value', item)) for item in series])
    errors = np.array([float(getattr(item, 'std_error', 0.0)) for item in series])
    return values, errors


def _upper_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Índices dos vértices da envoltória côncava superior de (x, y), x crescente"""
    hull: List[int] = []
    for i in range(x.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross < 0:
                break
            hull.pop()
        hull.append(i)
    return np.array(hull, dtype=int)


def fit_mult_ergodicity(series_by_gamma: Dict[float, Sequence], A: Dict[float, float], rho: Dict[float, float],
                        sub_modulus: Optional[Dict[float, float]] = None,
                        noise_floor: float = NOISE_FLOOR) -> FitResult:
    """
    Ajuste de log|L^(n) - A ρ^n| - n log ρ = log M + n log θ sobre o compacto K.

    Para cada γ usa a metade final dos horizontes úteis (resíduo acima do piso numérico) e
    regride sobre a envoltória côncava superior desses pontos, o que acompanha o envelope
    quando λ2 é complexo. θ é o maior exp(inclinação) entre os γ e M o menor valor que cobre
    todos os resíduos úteis. Sem pontos ajustáveis, θ = sub_modulus/ρ dos dados espectrais
    """
    slopes: List[float] = []
    all_points = []
    usable_count = 0
    for gamma, series in series_by_gamma.items():
        values, errors = _values(series)
        if values.size < MIN_HORIZONS:
            raise PreconditionError(f"ajuste exige ao menos {MIN_HORIZONS} horizontes", gamma=gamma,
                                    horizons=int(values.size))
        if not rho[gamma] > 0:
            raise PreconditionError("ajuste exige ρ(γ) > 0 no compacto", gamma=gamma)
        n = np.arange(values.size)
        model_values = A[gamma] * rho[gamma] ** n
        residual = np.abs(values - model_values)
        floor = np.maximum(3.0 * errors, noise_floor * np.maximum(values, model_values))
        usable = residual > floor
        all_points.append((n[usable], residual[usable], rho[gamma]))
        usable_count += int(np.sum(usable))

        tail_n = n[usable]
        tail_n = tail_n[tail_n.size // 2:]
        if tail_n.size < 2:
            continue
        y = np.log(residual[tail_n]) - tail_n * math.log(rho[gamma])
        hull = _upper_hull(tail_n.astype(float), y)
        if hull.size < 2:
            continue
        regression = LinearRegression().fit(tail_n[hull].astype(float).reshape(-1, 1), y[hull])
        slopes.append(float(regression.coef_[0]))

    if slopes:
        slope = max(slopes)
        if slope >= 0:
            raise ErgodicityViolation("resíduos não decrescem com n", slope=slope)
        theta, source = math.exp(slope), 'fit'
    else:
        if not sub_modulus:
            raise PreconditionError("resíduos no piso numérico e sem dados espectrais para θ")
        theta = max(sub_modulus[g] / rho[g] for g in series_by_gamma)
        source = 'spectral'
        logger.info(f"📊 Resíduos no piso numérico, usando θ espectral = {theta:.6g}")

    M = 0.0
    for n, residual, r in all_points:
        if n.size == 0:
            continue
        growth = (r * theta) ** n.astype(float)
        with np.errstate(divide='ignore', invalid='ignore'):
            ratio = np.where(growth > 0, residual / growth, 0.0)
        M = max(M, float(np.max(ratio)))
    return FitResult(M, theta, source, usable_count)


# --- tilt crítico ν ---

@dataclass(frozen=True)
class NuResult:
    nu: Optional[float]
    status: str
    r_lo: float
    r_hi: float
    r_infinity: Optional[float] = None
    iterations: int = 0


def solve_nu(model: MarkovModel, mu: InitialLaw, bracket: Tuple[float, float] = DEFAULT_BRACKET,
             tol: float = NU_TOL, family: Optional[TiltFamily] = None,
             max_iter: int = NU_MAX_ITER, lam: float = 2.0, perron_tol: float = DEFAULT_TOL,
             perron_max_iter: int = DEFAULT_MAX_ITER) -> NuResult:
    """Bisseção de γ -> r(γ) - 1/λ (r é não crescente, a raiz é única); λ = 2 dá o ν usual"""
    if not lam > 1:
        raise PreconditionError("λ deve ser > 1", lam=lam)
    target = 1.0 / lam
    family = family or TiltFamily(model)
    lo, hi = bracket
    radius = lambda g: perron(family.tilt(g), perron_tol, perron_max_iter).r
    r_lo, r_hi = radius(lo), radius(hi)

    if not r_lo > target:
        logger.warning(f"⚠️ r({lo}) = {r_lo:.6g} <= 1/λ: colchete inválido")
        return NuResult(None, BRACKET_INVALID, r_lo, r_hi)
    if not r_hi < target:
        r_inf = radius(math.inf)
        status = NU_INFINITE if r_inf >= target else BRACKET_INVALID
        logger.warning(f"⚠️ r({hi}) = {r_hi:.6g} >= 1/λ, r(∞) = {r_inf:.6g}: {status}")
        return NuResult(None, status, r_lo, r_hi, r_inf)

    iterations = 0
    while hi - lo > tol and iterations < max_iter:
        mid = 0.5 * (lo + hi)
        if radius(mid) > target:
            lo = mid
        else:
            hi = mid
        iterations += 1
    nu = 0.5 * (lo + hi)
    logger.info(f"✅ ν = {nu!r} ({iterations} bisseções, μ = {mu.describe()})")
    return NuResult(nu, NU_FOUND, r_lo, r_hi, None, iterations)


# --- C_ν ---

@dataclass(frozen=True)
class CNuResult:
    formula: float
    direct: Optional[float]
    discrepancy: Optional[float]
    status: str  # 'ok' | 'warning' | 'direct_unavailable'
    A_nu: float
    r_prime_nu: float


def oracle_series_supplier(model: MarkovModel, mu: InitialLaw) -> Optional[Callable[[float], Iterable]]:
    """γ -> sequência exata L^(n)(γ), quando há oráculo"""
    if oracle_source(model, mu) is None:
        return None
    return lambda gamma: iter_oracle(model, mu, gamma)


def _richardson(values: Sequence[float]) -> float:
    """Extrapolação em h -> 0 com h, h/2, h/4 (erro O(h³))"""
    f1, f2, f3 = values
    r1_h = 2.0 * f2 - f1
    r1_half = 2.0 * f3 - f2
    return (4.0 * r1_half - r1_h) / 3.0


def c_nu(model: MarkovModel, mu: InitialLaw, nu: float, tol: float = DEFAULT_SERIES_TOL,
         family: Optional[TiltFamily] = None, series_supplier: Optional[Callable[[float], Iterable]] = None,
         lam: float = 2.0, perron_tol: float = DEFAULT_TOL, perron_max_iter: int = DEFAULT_MAX_ITER,
         n_max: int = DEFAULT_N_MAX) -> CNuResult:
    """C_ν = -A(ν)/(2ν r'(ν)) e o limite direto (γ-ν)/γ·g_Y(γ, 2) com γ = ν(1 + h)"""
    if nu is None or not math.isfinite(nu) or not nu > 0:
        raise PreconditionError("C_ν exige ν finito e positivo", nu=nu)
    family = family or TiltFamily(model)
    op = family.tilt(nu)
    triple = perron(op, perron_tol, perron_max_iter)
    slope = r_derivative(model, nu, triple)
    if not slope < 0:
        raise PreconditionError("C_ν exige r'(ν) < 0", r_prime=slope)
    A_nu = amplitude(model, nu, triple, mu, op)
    formula = -A_nu / (lam * nu * slope)

    supplier = series_supplier or oracle_series_supplier(model, mu)
    direct = None
    if supplier is not None:
        limits = []
        for offset in CNU_OFFSETS:
            gamma = nu * (1.0 + offset)
            value = generating_function(supplier(gamma), gamma, lam, tol, n_max)
            if not value.finite:
                limits = []
                break
            limits.append((gamma - nu) / gamma * value.value)
        if limits:
            direct = _richardson(limits)

    if direct is None:
        logger.warning("⚠️ C_ν: rota direta indisponível (série sem oráculo ou não convergente)")
        return CNuResult(formula, None, None, 'direct_unavailable', A_nu, slope)
    discrepancy = abs(formula - direct) / abs(formula)
    status = 'ok' if discrepancy <= CNU_WARNING else 'warning'
    if status == 'warning':
        logger.warning(f"⚠️ C_ν: discrepância {discrepancy:.2%} entre fórmula e limite direto")
    return CNuResult(formula, direct, discrepancy, status, A_nu, slope)


# --- relatório ---

@dataclass(frozen=True)
class GammaPoint:
    """Resultados imutáveis de um γ"""
    gamma: float
    rho: float
    A: float
    r_prime: float
    sub_modulus: float
    residual: float
    series: Tuple[LaplaceEstimate, ...]
    ratio_rho: float
    ratio_error: float


@dataclass
class ErgodicityReport:
    gammas: List[float]
    rho: List[float]
    A: List[float]
    r_prime: List[float]
    sub_modulus: List[float]
    initial_law: str
    positive_ae: Optional[bool] = None
    fit_M: Optional[float] = None
    fit_theta: Optional[float] = None
    fit_status: str = 'not_run'
    nu: Optional[float] = None
    nu_status: str = 'not_run'
    C_nu: Optional[float] = None
    C_nu_direct: Optional[float] = None
    C_nu_discrepancy: Optional[float] = None
    C_nu_status: str = 'not_run'
    checks: Dict[str, object] = field(default_factory=dict)

    def rows(self) -> List[Dict]:
        return [
            {'gamma': g, 'rho': r, 'A': a, 'r_prime': d, 'sub_modulus': s}
            for g, r, a, d, s in zip(self.gammas, self.rho, self.A, self.r_prime, self.sub_modulus)
        ]

    def summary(self) -> Dict:
        return {
            'nu': self.nu,
            'nu_status': self.nu_status,
            'C_nu_formula': self.C_nu,
            'C_nu_direct': self.C_nu_direct,
            'C_nu_discrepancy': self.C_nu_discrepancy,
            'C_nu_status': self.C_nu_status,
            'fit_M': self.fit_M,
            'fit_theta': self.fit_theta,
            'fit_status': self.fit_status,
            'initial_law': self.initial_law,
            'positive_ae': self.positive_ae
        }


def _gamma_point(model: MarkovModel, mu: InitialLaw, family: TiltFamily, gamma: float,
                 horizon: int, trials: int, seed: int, perron_tol: float = DEFAULT_TOL,
                 perron_max_iter: int = DEFAULT_MAX_ITER) -> GammaPoint:
    op = family.tilt(gamma)
    triple = perron(op, perron_tol, perron_max_iter)
    A = amplitude(model, gamma, triple, mu, op)
    slope = r_derivative(model, gamma, triple)
    series = tuple(laplace_series(model, mu, gamma, horizon, trials, seed))
    last, before = series[-1], series[-2]
    if before.value > 0:
        ratio = last.value / before.value
        ratio_error = ratio * math.hypot(last.std_error / max(last.value, 1e-300),
                                         before.std_error / before.value)
    else:
        ratio, ratio_error = math.nan, math.inf
    return GammaPoint(gamma, triple.r, A, slope, triple.sub_modulus, triple.residual,
                      series, ratio, ratio_error)


def build_report(model: MarkovModel, mu: InitialLaw, gammas: Sequence[float], grid: Optional[GridSpec] = None,
                 horizon: int = DEFAULT_HORIZON, trials: int = 100_000, seed: int = 0,
                 bracket: Tuple[float, float] = DEFAULT_BRACKET, nu_tol: float = NU_TOL,
                 series_tol: float = DEFAULT_SERIES_TOL, lam: float = 2.0,
                 family: Optional[TiltFamily] = None, perron_tol: float = DEFAULT_TOL,
                 perron_max_iter: int = DEFAULT_MAX_ITER, n_max: int = DEFAULT_N_MAX) -> ErgodicityReport:
    """
    Relatório completo: rota espectral por γ (concorrente), rota independente (oráculo ou
    Monte Carlo), ajuste (M, θ), ν, C_ν e verificações cruzadas.
    Uma family já montada tem precedência sobre grid
    """
    gammas = sorted(float(g) for g in gammas)
    logger.info(f"🚀 Relatório de ergodicidade: {model.variant}, ξ = {model.observable.describe()}, "
                f"{len(gammas)} tilts")
    family = family or TiltFamily(model, grid)

    with ThreadPoolExecutor(max_workers=settings.max_workers()) as executor:
        points = list(executor.map(
            lambda g: _gamma_point(model, mu, family, g, horizon, trials, seed, perron_tol, perron_max_iter),
            gammas
        ))

    report = ErgodicityReport(
        gammas=gammas,
        rho=[p.rho for p in points],
        A=[p.A for p in points],
        r_prime=[p.r_prime for p in points],
        sub_modulus=[p.sub_modulus for p in points],
        initial_law=mu.describe(),
        positive_ae=model.observable.positive_ae
    )

    # ρ ≡ r: razão L^(n+1)/L^(n) da rota independente contra o raio de Perron
    deviations = [abs(p.ratio_rho - p.rho) for p in points]
    allowed = [max(1e-4, 3.0 * p.ratio_error) for p in points]
    report.checks['rho_ratio_deviation'] = max(deviations) if deviations else 0.0
    report.checks['rho_ratio_status'] = 'ok' if all(d <= a for d, a in zip(deviations, allowed)) else 'warning'

    compact = [p for p in points if p.gamma > 0 and p.rho > 0]
    if compact:
        try:
            fit = fit_mult_ergodicity(
                {p.gamma: p.series for p in compact},
                {p.gamma: p.A for p in compact},
                {p.gamma: p.rho for p in compact},
                {p.gamma: p.sub_modulus for p in compact}
            )
            report.fit_M, report.fit_theta, report.fit_status = fit.M, fit.theta, fit.source
        except MergError as error:
            report.fit_status = error.code
            logger.warning(f"⚠️ Ajuste (M, θ): {error.message}")

    nu_result = solve_nu(model, mu, bracket, nu_tol, family, lam=lam, perron_tol=perron_tol,
                         perron_max_iter=perron_max_iter)
    report.nu, report.nu_status = nu_result.nu, nu_result.status
    if nu_result.nu is not None:
        _nu_consistency(report, model, mu, nu_result.nu, nu_tol, series_tol, lam, n_max)
        try:
            cn = c_nu(model, mu, nu_result.nu, series_tol, family, lam=lam, perron_tol=perron_tol,
                      perron_max_iter=perron_max_iter, n_max=n_max)
            report.C_nu, report.C_nu_direct = cn.formula, cn.direct
            report.C_nu_discrepancy, report.C_nu_status = cn.discrepancy, cn.status
        except MergError as error:
            report.C_nu_status = error.code
            logger.warning(f"⚠️ C_ν: {error.message}")

    if isinstance(model, KnudsenModel) and model.alpha < 1:
        supplier = generating_supplier(model, family)
        worst = 0.0
        for p in points:
            fixed = knudsen_lambda(p.gamma, model.alpha, supplier)
            if fixed.lam is not None:
                worst = max(worst, abs(fixed.lam - p.rho))
        report.checks['knudsen_fixed_point_deviation'] = worst

    logger.info(f"✅ Relatório concluído: ν = {report.nu}, C_ν = {report.C_nu}, θ = {report.fit_theta}")
    return report


def _nu_consistency(report: ErgodicityReport, model: MarkovModel, mu: InitialLaw, nu: float,
                    nu_tol: float, series_tol: float, lam: float = 2.0, n_max: int = DEFAULT_N_MAX) -> None:
    """g_Y(ν - ε, λ) divergente e g_Y(ν + ε, λ) finita, ε = 5·tolerância da raiz"""
    supplier = oracle_series_supplier(model, mu)
    if supplier is None:
        report.checks['nu_consistency'] = 'no_oracle'
        return
    eps = 5.0 * nu_tol
    below = generating_function(supplier(nu - eps), nu - eps, lam, series_tol, n_max)
    above = generating_function(supplier(nu + eps), nu + eps, lam, series_tol, n_max)
    report.checks['nu_minus_eps'] = below.status
    report.checks['nu_plus_eps'] = above.status
    report.checks['nu_consistency'] = 'ok' if (below.divergent and above.finite) else 'warning'

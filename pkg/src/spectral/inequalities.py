#!/usr/bin/env python3
"""
Verificações numéricas das desigualdades usadas na teoria:
- drift P_γ V <= exp(-γβ) δ V + L_β 1 do AR(1) (e a cota de P_∞)
- continuidade ‖P_γ - P_γ'‖_{V^a -> V^(a+b)} <= (c|γ - γ'|)^b ‖P‖_{V^(a+b)}
- Doeblin-Fortet ‖P_γ f‖_a <= (1-α)‖f‖_a + α‖f‖_1 no gás de Knudsen finito
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from errors import ModelError, ObservableError, PreconditionError
from kernels import AR1Model, KnudsenModel, MarkovModel, WeightFunction
from .discretization import GridSpec, TiltFamily, tilt_vector

logger = logging.getLogger(__name__)

SUP_GRID_POINTS = 20001


@dataclass(frozen=True)
class DriftReport:
    holds: bool
    L_constant: float
    leading_coefficient: float
    target_coefficient: float
    L_delta: float
    lemma_bound: float
    p_inf_bound: float

    @property
    def within_lemma_bound(self) -> bool:
        return self.L_constant <= self.lemma_bound


def _tilted_drift(model: AR1Model, weight: WeightFunction, nodes: np.ndarray, gamma: float) -> np.ndarray:
    """(P_γ V)(x_i) = ∫ exp(-γ ξ(y)) V(y) p(y - α x_i) dy para todos os nós de uma vez"""
    centers = model.alpha * nodes
    obs = model.observable

    def integrand(y):
        point = np.array([y])
        tilt = 1.0 if gamma == 0 else float(np.exp(-gamma * obs(point))[0])
        return tilt * float(weight(point)[0]) * model.noise.pdf(y - centers)

    edge = float(np.max(np.abs(centers))) + 10.0 * model.noise.scale
    total = np.zeros(nodes.size)
    for lo, hi in ((-np.inf, -edge), (-edge, edge), (edge, np.inf)):
        part, _ = integrate.quad_vec(integrand, lo, hi, epsabs=1e-10, epsrel=1e-10, limit=2000)
        total += part
    return total


def drift_check(model: AR1Model, gamma: float, beta: float, delta: float,
                grid: Optional[GridSpec] = None) -> DriftReport:
    """
    Menor L_β com P_γ V(x_i) <= exp(-γβ) δ V(x_i) + L_β nos nós da grade,
    mais a cota construtiva L(δ) + sup_{ξ<=β} V e a cota sup_{ξ=0} V de P_∞
    """
    if not isinstance(model, AR1Model):
        raise PreconditionError("drift_check exige o modelo AR(1)", variant=model.variant)
    if math.isinf(gamma) or gamma < 0:
        raise PreconditionError("drift_check exige 0 <= gamma < inf", gamma=gamma)
    floor = abs(model.alpha) ** model.r0
    if not delta > floor:
        raise PreconditionError(f"delta deve ser > |alpha|^r0 = {floor:.6g}", delta=delta, floor=floor)

    family = TiltFamily(model, grid)
    weight = WeightFunction(model.r0, 1.0)
    nodes = family.nodes
    v = weight(nodes)
    pv0 = _tilted_drift(model, weight, nodes, 0.0)
    pv = pv0 if gamma == 0 else _tilted_drift(model, weight, nodes, gamma)

    target = math.exp(-gamma * beta) * delta
    L_beta = float(np.max(np.clip(pv - target * v, 0.0, None)))
    L_delta = float(np.max(np.clip(pv0 - delta * v, 0.0, None)))

    lo, hi = family.domain
    points = np.union1d(np.linspace(lo, hi, SUP_GRID_POINTS), [0.0])
    xi_grid = model.observable(points)
    v_grid = weight(points)
    sup_small = float(np.max(v_grid[xi_grid <= beta])) if np.any(xi_grid <= beta) else 0.0
    p_inf_bound = float(np.max(v_grid[xi_grid == 0])) if np.any(xi_grid == 0) else 0.0

    outer = np.abs(nodes) >= 0.9 * np.max(np.abs(nodes))
    leading = float(np.max(pv[outer] / v[outer]))

    report = DriftReport(
        holds=bool(math.isfinite(L_beta)),
        L_constant=L_beta,
        leading_coefficient=leading,
        target_coefficient=target,
        L_delta=L_delta,
        lemma_bound=L_delta + sup_small,
        p_inf_bound=p_inf_bound
    )
    logger.info(f"📊 drift γ={gamma}, β={beta}, δ={delta}: L_β={L_beta:.6g}, "
                f"coeficiente assintótico {leading:.3e} (alvo {target:.3e})")
    return report


@dataclass(frozen=True)
class ContinuityReport:
    norm: float
    bound: float
    k0_norm: float
    c: float

    @property
    def holds(self) -> bool:
        return self.norm <= self.bound * (1.0 + 1e-12) + 1e-15


def _xi_constant(model: MarkovModel) -> float:
    r0 = model.r0 if isinstance(model, AR1Model) else 0.0
    c = model.observable.sup_xi_over_v(r0)
    if c is None:
        raise ObservableError("observável sem cota sup ξ/V finita", observable=model.observable.describe(),
                              r0=r0)
    return c


def continuity_modulus(model: MarkovModel, gamma: float, gamma_prime: float, a: float, b: float,
                       grid: Optional[GridSpec] = None, family: Optional[TiltFamily] = None) -> ContinuityReport:
    """
    Norma discreta ‖K(γ) - K(γ')‖ de C_{V^a} em C_{V^(a+b)}:
    max_i Σ_j |ΔK_ij| V^a(x_j) / V^(a+b)(x_i), com a cota (c|γ - γ'|)^b ‖K(0)‖_{V^(a+b)}
    """
    if not (0 <= a < a + b <= 1):
        raise PreconditionError("exige 0 <= a < a+b <= 1", a=a, b=b)
    c = _xi_constant(model)
    family = family or TiltFamily(model, grid)
    v_a = family.weight_values(a) if a > 0 else np.ones(family.nodes.size)
    v_ab = family.weight_values(a + b)

    delta = np.abs(family.base_matrix * (tilt_vector(family.xi, gamma) - tilt_vector(family.xi, gamma_prime))[None, :])
    norm = float(np.max((delta @ v_a) / v_ab))
    k0_norm = float(np.max((family.base_matrix @ v_ab) / v_ab))
    bound = (c * abs(gamma - gamma_prime)) ** b * k0_norm
    return ContinuityReport(norm, bound, k0_norm, c)


@dataclass(frozen=True)
class DoeblinFortetReport:
    worst_ratio: float
    exponent: float
    samples: int

    @property
    def holds(self) -> bool:
        return self.worst_ratio <= 1.0 + 1e-12


def doeblin_fortet_check(model: KnudsenModel, gamma: float, exponent: float = 2.0,
                         samples: int = 200, seed: int = 0) -> DoeblinFortetReport:
    """Maior razão ‖K f‖_a / ((1-α)‖f‖_a + α‖f‖_1) em L^a(π) sobre f aleatórias"""
    if not (isinstance(model, KnudsenModel) and model.is_finite):
        raise ModelError("Doeblin-Fortet verificado apenas no gás de Knudsen finito", variant=model.variant)
    if exponent < 1:
        raise PreconditionError("expoente da norma L^a deve ser >= 1", exponent=exponent)
    family = TiltFamily(model)
    matrix = family.tilt(gamma).matrix
    pi = model.stationary

    def norm(f, p):
        return float(np.sum(pi * np.abs(f) ** p) ** (1.0 / p))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        f = rng.standard_normal(pi.size) * rng.exponential(1.0, pi.size)
        rhs = (1.0 - model.alpha) * norm(f, exponent) + model.alpha * norm(f, 1.0)
        if rhs > 0:
            worst = max(worst, norm(matrix @ f, exponent) / rhs)
    return DoeblinFortetReport(worst, exponent, samples)

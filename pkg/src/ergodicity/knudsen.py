#!/usr/bin/env python3
"""
Equação de ponto fixo do gás de Knudsen λ = α g_Z(γ, (1-α)/λ) e critério de finitude de ν
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional

from errors import PreconditionError
from kernels import KnudsenModel
from laplace import IidGenerating, LaplaceGeneratingSupplier, MatrixGenerating
from spectral import GridSpec, TiltFamily

logger = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 10_000
BISECTION_MAX_ITER = 200


def generating_supplier(model: KnudsenModel, family: Optional[TiltFamily] = None,
                        grid: Optional[GridSpec] = None) -> LaplaceGeneratingSupplier:
    """g_Z da cadeia base: forma fechada (reamostragem), matriz finita ou Nyström do U tipo AR(1)"""
    kind = model.base_kernel.kind
    if kind == 'resampling':
        return IidGenerating(lambda gamma: model.pi.laplace_transform(model.observable, gamma))
    family = family or TiltFamily(model, grid)
    return MatrixGenerating(family.u_matrix(), family.stationary_weights(), family.xi)


@dataclass(frozen=True)
class KnudsenFixedPoint:
    lam: Optional[float]
    status: str  # 'converged' | 'converged_bisection' | 'subcritical'
    iterations: int
    lower_bound: float


def knudsen_lambda(gamma: float, alpha: float, g_z: LaplaceGeneratingSupplier,
                   tol: float = FIXED_POINT_TOL, max_iter: int = FIXED_POINT_MAX_ITER) -> KnudsenFixedPoint:
    """
    Iteração λ_{k+1} = α g_Z(γ, (1-α)/λ_k) a partir de λ_0 = α L_Z(γ) + (1-α), restrita à
    região λ > (1-α) ρ(Ũ_γ). Se a iteração sai da região ou não contrai, a raiz de
    λ - α g_Z(γ, (1-α)/λ) (crescente em λ) é isolada por bisseção em ((1-α)ρ(Ũ_γ), 1]
    """
    if not 0 < alpha < 1:
        raise PreconditionError("alpha deve estar em (0, 1)", alpha=alpha)
    lower = (1.0 - alpha) * g_z.tilted_radius(gamma)

    def image(lam: float) -> float:
        if not lam > lower:
            return math.inf
        return alpha * g_z(gamma, (1.0 - alpha) / lam)

    lam = alpha * g_z.marginal(gamma) + (1.0 - alpha)
    step = math.inf
    for iteration in range(1, max_iter + 1):
        nxt = image(lam)
        if not (math.isfinite(nxt) and nxt > lower):
            break
        if abs(nxt - lam) < tol:
            return KnudsenFixedPoint(nxt, 'converged', iteration, lower)
        if abs(nxt - lam) >= step:
            # passos que não encolhem: a iteração não contrai
            break
        step = abs(nxt - lam)
        lam = nxt

    lo = lower + max(1e-15, 1e-13 * lower)
    hi = 1.0 + 1e-9
    phi = lambda x: x - image(x)
    if phi(lo) >= 0:
        logger.info(f"📊 Knudsen γ={gamma}: sem raiz acima de (1-α)ρ(Ũ_γ) = {lower:.6g} (subcrítico)")
        return KnudsenFixedPoint(None, 'subcritical', 0, lower)
    if phi(hi) < 0:
        raise PreconditionError("g_Z inconsistente: λ - α g_Z < 0 em λ = 1", gamma=gamma)
    iterations = 0
    while hi - lo > tol and iterations < BISECTION_MAX_ITER:
        mid = 0.5 * (lo + hi)
        if phi(mid) < 0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return KnudsenFixedPoint(0.5 * (lo + hi), 'converged_bisection', iterations, lower)


@dataclass(frozen=True)
class KnudsenCriterion:
    nu_finite: bool
    threshold_value: float


def knudsen_nu_criterion(alpha: float, g_z: LaplaceGeneratingSupplier) -> KnudsenCriterion:
    """ν < inf ⇔ 2α g_Z(∞, 2(1-α)) < 1, com g_Z(∞, x) = Σ x^n P_π(Σ_{k<=n} ξ(Z_k) = 0)"""
    if not 0.5 < alpha < 1:
        raise PreconditionError("o critério exige alpha em (1/2, 1)", alpha=alpha)
    if g_z.zero_mass() == 0:
        return KnudsenCriterion(True, 0.0)
    threshold = 2.0 * alpha * g_z(math.inf, 2.0 * (1.0 - alpha))
    logger.info(f"📊 Critério de Knudsen: 2α g_Z(∞, 2(1-α)) = {threshold:.6g}")
    return KnudsenCriterion(bool(threshold < 1.0), threshold)

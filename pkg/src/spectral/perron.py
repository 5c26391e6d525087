#!/usr/bin/env python3
"""
Tripla de Perron (r(γ), φ_γ, π_γ) por iteração de potência, projetor Π_γ e derivada r'(γ)
"""

import math
import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from errors import PerronPositivityError, PreconditionError, SpectralConvergenceError
from kernels import MarkovModel
from .discretization import TiltedOperator

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
DEFLATION_STEPS = 120
POSITIVITY_SLACK = 1e-14


@dataclass(frozen=True, eq=False)
class SpectralTriple:
    """Dados de Perron de um tilt: π_γ com massa 1 e φ_γ normalizado por π_γ(φ_γ) = 1"""
    gamma: float
    r: float
    phi: np.ndarray
    pi_gamma: np.ndarray
    sub_modulus: float
    residual: float
    left_residual: float
    iterations: int
    nodes: np.ndarray

    def pair(self, f) -> float:
        """π_γ(f)"""
        return float(self.pi_gamma @ np.asarray(f, dtype=float))

    @property
    def gap_ratio(self) -> float:
        """θ espectral = sub_modulus / r"""
        return self.sub_modulus / self.r if self.r > 0 else math.nan


def _weighted_norm(f: np.ndarray, v: np.ndarray) -> float:
    return float(np.max(np.abs(f) / v))


def _power(matrix: np.ndarray, start: np.ndarray, norm, tol: float, max_iter: int):
    """Iteração de potência normalizada; para quando a razão e o resíduo ficam abaixo de tol"""
    vector = start / norm(start)
    ratio = math.nan
    history: List[float] = []
    for iteration in range(1, max_iter + 1):
        image = matrix @ vector
        new_ratio = norm(image)
        if new_ratio == 0.0:
            return 0.0, vector, 0.0, iteration
        residual = norm(image - new_ratio * vector)
        history.append(new_ratio)
        converged = abs(new_ratio - ratio) <= tol * new_ratio and residual <= tol
        ratio = new_ratio
        vector = image / new_ratio
        if converged:
            return ratio, vector, residual, iteration
    raise SpectralConvergenceError(
        f"iteração de potência sem convergência em {max_iter} iterações",
        last_ratios=[float(x) for x in history[-6:]], max_iter=max_iter
    )


def _sub_modulus(matrix: np.ndarray, phi: np.ndarray, pi: np.ndarray, steps: int = DEFLATION_STEPS) -> float:
    """Módulo do segundo autovalor pelo crescimento do iterado deflacionado u <- K(u - φ π(u))"""
    rng = np.random.default_rng(12345)
    u = rng.standard_normal(phi.size)
    u -= phi * (pi @ u)
    u /= np.linalg.norm(u)
    log_growth = []
    for _ in range(steps):
        u = matrix @ u
        u -= phi * (pi @ u)
        size = np.linalg.norm(u)
        if size == 0.0 or not np.isfinite(size):
            return 0.0
        log_growth.append(math.log(size))
        u /= size
    tail = log_growth[steps // 2:]
    return math.exp(sum(tail) / len(tail))


def perron(op: TiltedOperator, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SpectralTriple:
    """
    Autovalor dominante r, autovetor à direita φ (iterando a partir de V^(-a)) e
    medida à esquerda π_γ (iterando em K^T); r = 0 quando K = 0
    """
    matrix = op.matrix
    size = op.size
    v = op.weight_values()

    if not np.any(matrix > 0):
        phi = np.ones(size)
        pi = np.full(size, 1.0 / size)
        return SpectralTriple(op.gamma, 0.0, phi, pi, 0.0, 0.0, 0.0, 0, op.grid)

    r, phi, residual, iterations = _power(matrix, 1.0 / v, lambda f: _weighted_norm(f, v), tol, max_iter)
    l1 = lambda f: float(np.sum(np.abs(f)))
    _, pi, _, left_iterations = _power(matrix.T, np.full(size, 1.0 / size), l1, tol, max_iter)

    if r == 0.0:
        return SpectralTriple(op.gamma, 0.0, np.ones(size), np.full(size, 1.0 / size), 0.0, 0.0, 0.0,
                              iterations, op.grid)

    pi = pi / pi.sum()
    phi = phi / float(pi @ phi)
    left_residual = l1(pi @ matrix - r * pi)

    _assert_positivity(op, phi, pi)
    phi = np.clip(phi, 0.0, None)
    pi = np.clip(pi, 0.0, None)

    sub = _sub_modulus(matrix, phi, pi)
    if not sub < r:
        raise SpectralConvergenceError("autovalor dominante não é simples (|λ2| >= r)",
                                       r=r, sub_modulus=sub, gamma=op.gamma)

    logger.debug(f"📊 perron γ={op.gamma}: r={r!r}, |λ2|={sub:.3e}, "
                 f"{iterations}+{left_iterations} iterações")
    return SpectralTriple(op.gamma, r, phi, pi, sub, residual, left_residual, iterations, op.grid)


def _assert_positivity(op: TiltedOperator, phi: np.ndarray, pi: np.ndarray) -> None:
    scale = float(np.max(np.abs(phi)))
    if np.min(pi) < -POSITIVITY_SLACK:
        raise PerronPositivityError("medida π_γ com entradas negativas", min_pi=float(np.min(pi)))
    if math.isinf(op.gamma):
        if np.min(phi) < -POSITIVITY_SLACK * scale:
            raise PerronPositivityError("autovetor φ_∞ com entradas negativas", min_phi=float(np.min(phi)))
    elif not np.min(phi) > 0:
        raise PerronPositivityError("autovetor φ_γ não é estritamente positivo",
                                    min_phi=float(np.min(phi)), gamma=op.gamma)


def projector_apply(triple: SpectralTriple, f) -> np.ndarray:
    """Π_γ f = π_γ(f) φ_γ (projeção de posto um no autoespaço dominante)"""
    return triple.pair(f) * triple.phi


def r_derivative(model: MarkovModel, gamma: float, triple: SpectralTriple) -> float:
    """r'(γ) = -r π_γ(ξ φ_γ) / π_γ(φ_γ)"""
    if not triple.r > 0:
        raise PreconditionError("r'(γ) exige r > 0", gamma=gamma, r=triple.r)
    xi = model.observable(triple.nodes)
    return -triple.r * triple.pair(xi * triple.phi) / triple.pair(triple.phi)

#!/usr/bin/env python3
"""
Função geradora de Laplace g_Y(γ, λ) = Σ_n λ^n L^(n)(γ)
e fornecedores g_Z da cadeia base Z (transição U) do gás de Knudsen
"""

import math
import logging
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from itertools import islice
from typing import Iterable

import numpy as np

from errors import PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_SERIES_TOL = 1e-6
DEFAULT_N_MAX = 2000
RATIO_WINDOW = 20

STATUS_FINITE = 'finite'
STATUS_DIVERGENT = 'divergent'
STATUS_INCONCLUSIVE = 'inconclusive'


@dataclass(frozen=True)
class GeneratingValue:
    """Soma (ou extrapolação geométrica) de g_Y com o status da decisão de convergência"""
    gamma: float
    lam: float
    value: float
    status: str
    truncation_n: int
    truncation_bound: float
    ratio: float = math.nan

    @property
    def finite(self) -> bool:
        return self.status == STATUS_FINITE

    @property
    def divergent(self) -> bool:
        return self.status == STATUS_DIVERGENT


def _as_value(item) -> float:
    return float(getattr(item, 'value', item))


def generating_function(series: Iterable, gamma: float, lam: float, tol: float = DEFAULT_SERIES_TOL,
                        n_max: int = DEFAULT_N_MAX, window: int = RATIO_WINDOW) -> GeneratingValue:
    """
    Soma λ^n L^(n) até que a cauda geométrica estimada fique abaixo de tol

    A razão q_n = λ L^(n+1)/L^(n) converge para λρ(γ). Quando as últimas `window` razões
    variam menos que sua distância a 1, a série é declarada divergente (q > 1) ou finita
    (q < 1, cauda t_n q/(1-q) somada ao total). Razões instáveis até n_max dão 'inconclusive'.
    """
    if not lam >= 0:
        raise PreconditionError("lambda deve ser >= 0", lam=lam)

    total = 0.0
    previous = None
    ratios = deque(maxlen=window)
    n = -1
    term = 0.0
    for n, item in enumerate(islice(series, n_max + 1)):
        term = (lam ** n) * _as_value(item)
        total += term
        if term == 0.0:
            # L^(n) é não crescente: todos os termos seguintes são nulos
            return GeneratingValue(gamma, lam, total, STATUS_FINITE, n, 0.0, 0.0)
        if not math.isfinite(total):
            return GeneratingValue(gamma, lam, math.inf, STATUS_DIVERGENT, n, math.inf, math.inf)
        if previous is not None:
            ratios.append(term / previous)
        previous = term

        if len(ratios) < window:
            continue
        q = ratios[-1]
        spread = max(ratios) - min(ratios) + 4.0 * np.finfo(float).eps * q
        if q - spread > 1.0:
            logger.debug(f"📊 g({gamma}, {lam}) divergente em n={n}, razão {q!r}")
            return GeneratingValue(gamma, lam, math.inf, STATUS_DIVERGENT, n, math.inf, q)
        if q + spread < 1.0:
            tail = term * q / (1.0 - q)
            q_hi = q + spread
            bound = abs(term * q_hi / (1.0 - q_hi) - tail)
            value = total + tail
            if bound <= tol * max(1.0, abs(value)):
                return GeneratingValue(gamma, lam, value, STATUS_FINITE, n, bound, q)

    q = ratios[-1] if ratios else math.nan
    logger.warning(f"⚠️ g({gamma}, {lam}) inconclusiva após {n + 1} termos (razão {q!r})")
    return GeneratingValue(gamma, lam, total, STATUS_INCONCLUSIVE, n, abs(term), q)


# --- fornecedores g_Z(γ, x) da cadeia base do gás de Knudsen ---

class LaplaceGeneratingSupplier(ABC):
    """g_Z(γ, x) = Σ x^n π(Ũ_γ^n h_γ), com Ũ_γ f = U(h_γ f)"""

    @abstractmethod
    def marginal(self, gamma: float) -> float:
        """L_Z^(0)(γ) = π(h_γ)"""
        pass

    @abstractmethod
    def tilted_radius(self, gamma: float) -> float:
        """ρ(Ũ_γ); g_Z(γ, x) < inf exige x ρ(Ũ_γ) < 1"""
        pass

    @abstractmethod
    def __call__(self, gamma: float, x: float) -> float:
        pass

    def zero_mass(self) -> float:
        """π(ξ = 0)"""
        return self.marginal(math.inf)


class IidGenerating(LaplaceGeneratingSupplier):
    """U = π (reamostragem): g_Z(γ, x) = L/(1 - xL) com L = π(h_γ)"""

    def __init__(self, laplace_marginal):
        self._laplace = laplace_marginal
        self._cache = {}

    def marginal(self, gamma):
        if gamma not in self._cache:
            self._cache[gamma] = float(self._laplace(gamma))
        return self._cache[gamma]

    def tilted_radius(self, gamma):
        return self.marginal(gamma)

    def __call__(self, gamma, x):
        L = self.marginal(gamma)
        if x * L >= 1.0:
            return math.inf
        return L / (1.0 - x * L)


class MatrixGenerating(LaplaceGeneratingSupplier):
    """
    U dado por matriz (cadeia finita ou Nyström de um U contínuo):
    g_Z(γ, x) = μ D (I - x U D)^(-1) 1, μ = pesos de π nos nós, D = diag(h_γ)
    """

    def __init__(self, u_matrix, pi_weights, xi_values):
        self.u_matrix = np.asarray(u_matrix, dtype=float)
        self.pi_weights = np.asarray(pi_weights, dtype=float)
        self.xi_values = np.asarray(xi_values, dtype=float)

    def _h(self, gamma: float) -> np.ndarray:
        if math.isinf(gamma):
            return (self.xi_values == 0).astype(float)
        return np.exp(-gamma * self.xi_values)

    def marginal(self, gamma):
        return float(self.pi_weights @ self._h(gamma))

    def tilted_radius(self, gamma):
        tilted = self.u_matrix * self._h(gamma)[None, :]
        return float(np.max(np.abs(np.linalg.eigvals(tilted))))

    def __call__(self, gamma, x):
        h = self._h(gamma)
        if x * self.tilted_radius(gamma) >= 1.0:
            return math.inf
        system = np.eye(h.size) - x * self.u_matrix * h[None, :]
        resolvent = np.linalg.solve(system, np.ones(h.size))
        return float(self.pi_weights @ (h * resolvent))

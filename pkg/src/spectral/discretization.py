#!/usr/bin/env python3
"""
Discretização do kernel inclinado P_γ(x, dy) = exp(-γ ξ(y)) P(x, dy)

- AR(1) e gás de Knudsen contínuo: Nyström com nós de Gauss-Legendre em [x_min, x_max]
- cadeias finitas: K = P D_γ
- γ = inf: o fator exp(-γ ξ) vira a indicadora de {ξ = 0} (P_∞)

As linhas da matriz não inclinada são renormalizadas para somar 1 (P continua markoviano
na grade). A inclinação multiplica colunas, então K(γ') <= K(γ) entrada a entrada para γ' > γ.
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

import settings
from errors import GridError, ModelError
from kernels import (
    AR1Model, DistributionSpec, InitialLaw, KnudsenModel, MarkovModel, WeightFunction
)
from kernels.models import DEFAULT_TAIL_MASS

logger = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 400
GRID_MASS_TOLERANCE = 1e-6
QUADRATURE_RULES = ('gauss_legendre',)
ROW_BLOCK = 64


@dataclass(frozen=True)
class GridSpec:
    """Grade de Nyström: N nós num intervalo truncado (padrão: cauda estacionária tail_mass)"""
    size: int = DEFAULT_GRID_SIZE
    xmax: Optional[float] = None
    xmin: Optional[float] = None
    tail_mass: float = DEFAULT_TAIL_MASS
    rule: str = 'gauss_legendre'

    def __post_init__(self):
        if self.size < 2:
            raise ModelError("a grade precisa de ao menos 2 nós", size=self.size)
        if self.rule not in QUADRATURE_RULES:
            raise ModelError(f"regra de quadratura desconhecida: {self.rule}", rule=self.rule)
        if self.xmax is not None and not self.xmax > (self.xmin if self.xmin is not None else -self.xmax):
            raise ModelError("domínio da grade vazio", xmin=self.xmin, xmax=self.xmax)

    def domain(self, model: MarkovModel) -> Tuple[float, float]:
        lo, hi = model.default_domain(self.tail_mass)
        if self.xmax is not None:
            hi = float(self.xmax)
            lo = float(self.xmin) if self.xmin is not None else (-hi if lo < 0 else lo)
        elif self.xmin is not None:
            lo = float(self.xmin)
        return lo, hi


def gauss_legendre(lo: float, hi: float, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nós e pesos de Gauss-Legendre transportados de [-1, 1] para [lo, hi]"""
    xi, w = np.polynomial.legendre.leggauss(size)
    half = (hi - lo) / 2.0
    return half * xi + (hi + lo) / 2.0, half * w


def model_weight(model: MarkovModel, a: float) -> Optional[WeightFunction]:
    """V^a do AR(1); os demais modelos usam o peso constante 1"""
    if isinstance(model, AR1Model):
        return WeightFunction(model.r0, a)
    return None


def tilt_vector(xi_values: np.ndarray, gamma: float) -> np.ndarray:
    if math.isinf(gamma):
        return (xi_values == 0).astype(float)
    return np.exp(-gamma * xi_values)


@dataclass(frozen=True, eq=False)
class TiltedOperator:
    """Matriz K[i, j] de P_γ entre os nós x_i e x_j, com pesos de quadratura e tilt h_γ"""
    gamma: float
    grid: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    weight_exponent: float
    xi: np.ndarray
    h: np.ndarray
    family: 'TiltFamily'

    @property
    def size(self) -> int:
        return self.grid.size

    @property
    def xmax(self) -> float:
        return float(np.max(np.abs(self.family.domain)))

    def weight_values(self, exponent: Optional[float] = None) -> np.ndarray:
        """V^a nos nós (1 para modelos sem peso)"""
        return self.family.weight_values(self.weight_exponent if exponent is None else exponent)

    def interpolation_row(self, x: float) -> np.ndarray:
        """Linha K(x, ·) de P_γ num ponto arbitrário (interpolação de Nyström)"""
        return self.family.untilted_row(x) * self.h


class TiltFamily:
    """
    Grade, pesos e matriz não inclinada compartilhados por todos os γ de um modelo
    tilt(γ) apenas multiplica as colunas por h_γ
    """

    def __init__(self, model: MarkovModel, grid: Optional[GridSpec] = None, weight_exponent: float = 1.0):
        if not 0 < weight_exponent <= 1:
            raise ModelError("expoente de peso deve estar em (0, 1]", a=weight_exponent)
        self.model = model
        self.grid_spec = grid or GridSpec()
        self.weight_exponent = weight_exponent
        self._weight = model_weight(model, 1.0)

        if model.is_finite:
            self.nodes = np.arange(model.n_states, dtype=float)
            self.weights = np.ones(model.n_states)
            self.domain = (0.0, float(model.n_states - 1))
            self.base_matrix = model.transition_matrix.copy()
            self.leak = np.zeros(model.n_states)
        else:
            self.domain = self.grid_spec.domain(model)
            self.nodes, self.weights = gauss_legendre(*self.domain, self.grid_spec.size)
            self.base_matrix, self.leak = self._build_continuous()
            self._check_mass()

        self.xi = model.observable(self.nodes)
        logger.debug(f"📐 Grade {self.model.variant}: N={self.nodes.size}, domínio={self.domain}")

    # --- construção ---

    def _raw_rows(self, rows: np.ndarray) -> np.ndarray:
        """Densidades p(x_i, x_j)·w_j sem normalização, linhas = pontos de partida"""
        model = self.model
        y = self.nodes[None, :]
        x = rows[:, None]
        if isinstance(model, AR1Model):
            return model.noise.pdf(y - model.alpha * x) * self.weights[None, :]
        if isinstance(model, KnudsenModel):
            pi_part = np.broadcast_to(self.pi_row, (rows.size, self.nodes.size))
            kind = model.base_kernel.kind
            if kind == 'resampling':
                u_part = pi_part
            elif kind == 'ar1':
                u = model.base_kernel
                raw = u.noise.pdf(y - u.alpha * x) * self.weights[None, :]
                u_part = raw / raw.sum(axis=1, keepdims=True)
            else:
                raise ModelError("U finito exige π discreta", variant=model.variant)
            return model.alpha * pi_part + (1.0 - model.alpha) * u_part
        raise ModelError(f"modelo sem densidade de transição: {model.variant}", variant=model.variant)

    @property
    def pi_row(self) -> np.ndarray:
        """Pesos π(x_j) w_j normalizados (Knudsen contínuo)"""
        if not hasattr(self, '_pi_row'):
            raw = self.model.pi.pdf(self.nodes) * self.weights
            self._pi_row = raw / raw.sum()
        return self._pi_row

    def _build_continuous(self) -> Tuple[np.ndarray, np.ndarray]:
        blocks = [self.nodes[i:i + ROW_BLOCK] for i in range(0, self.nodes.size, ROW_BLOCK)]
        with ThreadPoolExecutor(max_workers=min(settings.max_workers(), len(blocks))) as executor:
            raw = np.vstack(list(executor.map(self._raw_rows, blocks)))
        totals = raw.sum(axis=1)
        if np.any(totals <= 0):
            raise GridError("linha da matriz sem massa na grade", required_xmax=self._required_xmax())
        leak = np.clip(1.0 - totals, 0.0, None)
        return raw / totals[:, None], leak

    def _required_xmax(self) -> float:
        lo, hi = self.model.default_domain(GRID_MASS_TOLERANCE / 10.0)
        return float(max(abs(lo), abs(hi)))

    def _check_mass(self) -> None:
        lo, hi = self.domain
        mass = self.model.stationary_mass(lo, hi)
        if mass is None:
            # lei estacionária sem forma fechada: massa que vaza da grade sob π discretizada
            pi = np.full(self.nodes.size, 1.0 / self.nodes.size)
            for _ in range(200):
                pi = pi @ self.base_matrix
            mass = 1.0 - float(pi @ self.leak)
        if mass < 1.0 - GRID_MASS_TOLERANCE:
            raise GridError(
                f"grade [{lo:.4g}, {hi:.4g}] contém apenas {mass:.8f} da massa estacionária",
                mass=mass, required_xmax=self._required_xmax()
            )

    # --- acesso ---

    def weight_values(self, exponent: float) -> np.ndarray:
        if self._weight is None:
            return np.ones(self.nodes.size)
        return self._weight.with_exponent(exponent)(self.nodes)

    def untilted_row(self, x: float) -> np.ndarray:
        """P(x, ·) sobre os nós, normalizado como as linhas da matriz"""
        if self.model.is_finite:
            return self.base_matrix[int(x)].copy()
        raw = self._raw_rows(np.array([float(x)]))[0]
        return raw / raw.sum()

    def u_matrix(self) -> np.ndarray:
        """Parte U (não inclinada) do gás de Knudsen na grade"""
        model = self.model
        if not isinstance(model, KnudsenModel):
            raise ModelError("u_matrix só existe para o gás de Knudsen", variant=model.variant)
        if model.base_kernel.kind == 'resampling':
            return np.tile(self.stationary_weights(), (self.nodes.size, 1))
        if model.base_kernel.kind == 'finite':
            return model.base_kernel.array
        u = model.base_kernel
        raw = u.noise.pdf(self.nodes[None, :] - u.alpha * self.nodes[:, None]) * self.weights[None, :]
        return raw / raw.sum(axis=1, keepdims=True)

    def stationary_weights(self) -> Optional[np.ndarray]:
        """π nos nós (massa 1) quando a lei estacionária tem forma fechada"""
        law = self.model.stationary_law()
        if law is None:
            return None
        if law.is_discrete:
            return law.probabilities.copy()
        raw = law.pdf(self.nodes) * self.weights
        return raw / raw.sum()

    def measure_weights(self, initial: InitialLaw) -> Optional[np.ndarray]:
        """
        Lei inicial μ como pesos nos nós; None quando μ = π sem forma fechada
        (o chamador usa o autovetor à esquerda de K(0))
        """
        if initial.kind == 'stationary':
            return self.stationary_weights()
        if initial.kind == 'distribution':
            law: DistributionSpec = initial.distribution
            if law.is_discrete != self.model.is_finite:
                raise ModelError("lei inicial não representável na grade", initial=initial.describe())
            if law.is_discrete:
                return law.probabilities.copy()
            raw = law.pdf(self.nodes) * self.weights
            if raw.sum() <= 0:
                raise ModelError("lei inicial sem massa na grade", initial=initial.describe())
            return raw / raw.sum()
        if self.model.is_finite:
            self.model._check_state(initial.x)
            mu = np.zeros(self.nodes.size)
            mu[int(initial.x)] = 1.0
            return mu
        raise ModelError("massa pontual exige interpolação de Nyström", initial=initial.describe())

    def tilt(self, gamma: float) -> TiltedOperator:
        if not gamma >= 0:
            raise ModelError("gamma deve estar em [0, inf]", gamma=gamma)
        h = tilt_vector(self.xi, gamma)
        matrix = self.base_matrix * h[None, :]
        return TiltedOperator(gamma, self.nodes, self.weights, matrix, self.weight_exponent,
                              self.xi, h, self)


def discretize(model: MarkovModel, gamma: float, grid: Optional[GridSpec] = None,
               weight_exponent: float = 1.0) -> TiltedOperator:
    """Discretização de P_γ para um único γ (para varreduras use TiltFamily)"""
    return TiltFamily(model, grid, weight_exponent).tilt(gamma)

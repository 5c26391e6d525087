#!/usr/bin/env python3
"""
Modelos de Markov (P, π, ξ): AR(1), gás de Knudsen e cadeia de estados finitos
Todos os objetos são imutáveis; os amostradores recebem o gerador como argumento
"""

import math
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from errors import ModelError
from .laws import DistributionSpec, InitialLaw, NoiseSpec
from .observables import Observable

logger = logging.getLogger(__name__)

DEFAULT_TAIL_MASS = 1e-12     # massa estacionária fora do domínio truncado (abaixo de 1e-8)
ROW_SUM_TOLERANCE = 1e-12
STATIONARITY_TOLERANCE = 1e-10
MODEL_VARIANTS = ('ar1', 'knudsen', 'finite')
U_KERNELS = ('resampling', 'finite', 'ar1')


class MarkovModel(ABC):
    """Classe abstrata base: kernel de Markov com amostragem, densidade, lei estacionária e ξ"""

    variant: str = ''
    observable: Observable

    @property
    @abstractmethod
    def is_finite(self) -> bool:
        pass

    @abstractmethod
    def step(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Um passo da cadeia para um vetor de estados"""
        pass

    @abstractmethod
    def transition_density(self, x: float, y) -> np.ndarray:
        pass

    @abstractmethod
    def sample_stationary(self, size: int, rng: np.random.Generator) -> np.ndarray:
        pass

    def stationary_law(self) -> Optional[DistributionSpec]:
        """Lei estacionária em forma fechada, quando conhecida"""
        return None

    def is_iid_under_stationary(self) -> bool:
        """True quando P(x, ·) = π para todo x"""
        return False

    def with_observable(self, observable: Observable) -> 'MarkovModel':
        return replace(self, observable=observable)

    def sample_initial(self, initial: InitialLaw, size: int, rng: np.random.Generator) -> np.ndarray:
        if initial.kind == 'point':
            self._check_state(initial.x)
            return np.full(size, float(initial.x))
        if initial.kind == 'stationary':
            return self.sample_stationary(size, rng)
        if initial.kind == 'distribution':
            if initial.distribution.is_discrete != self.is_finite:
                raise ModelError("lei inicial incompatível com o espaço de estados do modelo",
                                 variant=self.variant, law=initial.describe())
            if self.is_finite and initial.distribution.probabilities.size != self.n_states:
                raise ModelError("lei inicial discreta com tamanho diferente do número de estados",
                                 states=self.n_states)
            return initial.distribution.sample(size, rng)
        raise ModelError(f"lei inicial não suportada: {initial.kind}", variant=self.variant)

    def _check_state(self, x: float) -> None:
        if self.is_finite and (x != int(x) or not 0 <= x < self.n_states):
            raise ModelError(f"estado {x} fora de 0..{self.n_states - 1}", state=x)

    def sample_paths(self, initial: InitialLaw, n: int, trials: int, rng: np.random.Generator) -> np.ndarray:
        """Matriz (trials, n+1) de trajetórias independentes"""
        if n < 0:
            raise ModelError("comprimento de trajetória deve ser >= 0", n=n)
        paths = np.empty((trials, n + 1))
        paths[:, 0] = self.sample_initial(initial, trials, rng)
        for k in range(n):
            paths[:, k + 1] = self.step(paths[:, k], rng)
        return paths


# --- AR(1) ---

@dataclass(frozen=True)
class AR1Model(MarkovModel):
    """X_n = α X_{n-1} + ϑ_n com ruído de densidade p > 0 e momento de ordem r0"""
    alpha: float
    noise: NoiseSpec
    r0: float
    observable: Observable
    variant: str = field(default='ar1', init=False)

    def __post_init__(self):
        if not abs(self.alpha) < 1:
            raise ModelError("alpha must satisfy |alpha| < 1", alpha=self.alpha)
        if not self.r0 > 0:
            raise ModelError("r0 deve ser > 0", r0=self.r0)
        if not self.noise.has_moment(self.r0):
            raise ModelError("o ruído não tem momento finito de ordem r0", r0=self.r0, df=self.noise.df)
        self.noise.check_density()

    @property
    def is_finite(self) -> bool:
        return False

    def step(self, states, rng):
        return self.alpha * states + self.noise.sample(states.shape, rng)

    def transition_density(self, x, y):
        return self.noise.pdf(np.asarray(y, dtype=float) - self.alpha * x)

    @property
    def stationary_sd(self) -> Optional[float]:
        if self.noise.family != 'gaussian':
            return None
        return self.noise.sigma / math.sqrt(1.0 - self.alpha ** 2)

    def stationary_law(self):
        sd = self.stationary_sd
        return None if sd is None else DistributionSpec.gaussian(0.0, sd)

    def burn_in(self) -> int:
        if self.alpha == 0:
            return 1
        return min(5000, int(math.ceil(math.log(1e-12) / math.log(abs(self.alpha)))))

    def sample_stationary(self, size, rng):
        law = self.stationary_law()
        if law is not None:
            return law.sample(size, rng)
        states = np.zeros(size)
        for _ in range(self.burn_in()):
            states = self.step(states, rng)
        return states

    def default_domain(self, tail_mass: float = DEFAULT_TAIL_MASS) -> Tuple[float, float]:
        """[-X_max, X_max] com massa estacionária de cauda abaixo de tail_mass"""
        sd = self.stationary_sd
        if sd is not None:
            half = sd * stats.norm.isf(tail_mass / 2.0)
        else:
            half = self.noise.half_width(tail_mass) / (1.0 - abs(self.alpha))
        return -float(half), float(half)

    def stationary_mass(self, lo: float, hi: float) -> Optional[float]:
        law = self.stationary_law()
        return None if law is None else law.mass(lo, hi)


# --- Gás de Knudsen ---

@dataclass(frozen=True)
class UKernel:
    """Kernel U do gás de Knudsen: reamostragem, matriz finita ou tipo AR(1)"""
    kind: str
    matrix: Optional[Tuple[Tuple[float, ...], ...]] = None
    alpha: Optional[float] = None
    noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        if self.kind not in U_KERNELS:
            raise ModelError(f"kernel U desconhecido: {self.kind}", kind=self.kind)
        if self.kind == 'finite':
            _check_stochastic(np.asarray(self.matrix, dtype=float))
        if self.kind == 'ar1':
            if self.alpha is None or not abs(self.alpha) < 1 or self.noise is None:
                raise ModelError("U tipo AR(1) exige |alpha| < 1 e ruído", alpha=self.alpha)
            self.noise.check_density()

    @classmethod
    def resampling(cls) -> 'UKernel':
        return cls('resampling')

    @classmethod
    def finite(cls, matrix) -> 'UKernel':
        return cls('finite', matrix=tuple(tuple(float(v) for v in row) for row in matrix))

    @classmethod
    def ar1(cls, alpha: float, noise: NoiseSpec) -> 'UKernel':
        return cls('ar1', alpha=float(alpha), noise=noise)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)


@dataclass(frozen=True)
class KnudsenModel(MarkovModel):
    """P = α π + (1-α) U, com π estacionária para U"""
    alpha: float
    base_kernel: UKernel
    pi: DistributionSpec
    observable: Observable
    variant: str = field(default='knudsen', init=False)

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ModelError("alpha do gás de Knudsen deve estar em (0, 1]", alpha=self.alpha)
        kind = self.base_kernel.kind
        if kind == 'finite':
            if not self.pi.is_discrete:
                raise ModelError("U finito exige π discreta")
            matrix = self.base_kernel.array
            probs = self.pi.probabilities
            if probs.size != matrix.shape[0]:
                raise ModelError("π e U com números de estados diferentes",
                                 states=matrix.shape[0], pi_size=probs.size)
            if np.max(np.abs(probs @ matrix - probs)) > STATIONARITY_TOLERANCE:
                raise ModelError("π não é estacionária para U")
        if kind == 'ar1':
            if self.pi.is_discrete:
                raise ModelError("U tipo AR(1) não tem densidade compatível com π discreta")
            expected = ar1_stationary_law(self.base_kernel.alpha, self.base_kernel.noise)
            if expected is None or expected != self.pi:
                raise ModelError("π deve ser a lei estacionária gaussiana do U tipo AR(1)",
                                 expected=None if expected is None else dict(expected.params))

    @property
    def is_finite(self) -> bool:
        return self.pi.is_discrete

    @property
    def n_states(self) -> int:
        return int(self.pi.probabilities.size)

    def _u_step(self, states, rng):
        kind = self.base_kernel.kind
        if kind == 'resampling':
            return self.pi.sample(states.shape, rng)
        if kind == 'finite':
            return _finite_step(self.base_kernel.array, states, rng)
        return self.base_kernel.alpha * states + self.base_kernel.noise.sample(states.shape, rng)

    def step(self, states, rng):
        # mistura: moeda de Bernoulli(α) escolhe entre π e U(x, ·)
        coin = rng.random(states.shape) < self.alpha
        fresh = self.pi.sample(states.shape, rng)
        moved = self._u_step(states, rng)
        return np.where(coin, fresh, moved)

    def u_density(self, x: float, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        kind = self.base_kernel.kind
        if kind == 'resampling':
            return self.pi.probabilities[y.astype(int)] if self.is_finite else self.pi.pdf(y)
        if kind == 'finite':
            return self.base_kernel.array[int(x)][y.astype(int)]
        return self.base_kernel.noise.pdf(y - self.base_kernel.alpha * x)

    def pi_density(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.pi.probabilities[y.astype(int)] if self.is_finite else self.pi.pdf(y)

    def transition_density(self, x, y):
        return self.alpha * self.pi_density(y) + (1.0 - self.alpha) * self.u_density(x, y)

    @property
    def transition_matrix(self) -> np.ndarray:
        if not self.is_finite:
            raise ModelError("matriz de transição só existe para π discreta")
        probs = self.pi.probabilities
        if self.base_kernel.kind == 'finite':
            u = self.base_kernel.array
        else:
            u = np.tile(probs, (probs.size, 1))
        return self.alpha * np.tile(probs, (probs.size, 1)) + (1.0 - self.alpha) * u

    @property
    def stationary(self) -> np.ndarray:
        return self.pi.probabilities

    def sample_stationary(self, size, rng):
        return self.pi.sample(size, rng)

    def stationary_law(self):
        return self.pi

    def is_iid_under_stationary(self) -> bool:
        return self.alpha == 1 or self.base_kernel.kind == 'resampling'

    def default_domain(self, tail_mass: float = DEFAULT_TAIL_MASS) -> Tuple[float, float]:
        return self.pi.truncation(tail_mass)

    def stationary_mass(self, lo: float, hi: float) -> Optional[float]:
        return self.pi.mass(lo, hi)


# --- Estados finitos ---

@dataclass(frozen=True)
class FiniteStateModel(MarkovModel):
    """Cadeia em {0..n-1} com matriz estocástica por linhas e vetor estacionário"""
    matrix: Tuple[Tuple[float, ...], ...]
    stationary_probs: Tuple[float, ...]
    observable: Observable
    variant: str = field(default='finite', init=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        _check_stochastic(matrix)
        probs = np.asarray(self.stationary_probs, dtype=float)
        if probs.size != matrix.shape[0] or np.any(probs < 0) or abs(probs.sum() - 1) > ROW_SUM_TOLERANCE:
            raise ModelError("vetor estacionário inválido", size=probs.size)
        if np.max(np.abs(probs @ matrix - probs)) > STATIONARITY_TOLERANCE:
            raise ModelError("o vetor não satisfaz πP = π", residual=float(np.max(np.abs(probs @ matrix - probs))))

    @classmethod
    def from_matrix(cls, matrix, observable: Observable, stationary=None) -> 'FiniteStateModel':
        """Calcula π resolvendo π(P - I) = 0, Σπ = 1 quando não informado"""
        matrix = np.asarray(matrix, dtype=float)
        if stationary is None:
            stationary = stationary_vector(matrix)
        return cls(tuple(tuple(row) for row in matrix), tuple(float(p) for p in stationary), observable)

    @property
    def is_finite(self) -> bool:
        return True

    @property
    def n_states(self) -> int:
        return len(self.matrix)

    @property
    def transition_matrix(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    @property
    def stationary(self) -> np.ndarray:
        return np.asarray(self.stationary_probs, dtype=float)

    def step(self, states, rng):
        return _finite_step(self.transition_matrix, states, rng)

    def transition_density(self, x, y):
        return self.transition_matrix[int(x)][np.asarray(y).astype(int)]

    def sample_stationary(self, size, rng):
        return rng.choice(self.n_states, size=size, p=self.stationary).astype(float)

    def stationary_law(self):
        return DistributionSpec.discrete(self.stationary)


# --- funções auxiliares ---

def _check_stochastic(matrix: np.ndarray) -> None:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise ModelError("matriz de transição deve ser quadrada e não vazia", shape=list(matrix.shape))
    if np.any(matrix < 0):
        raise ModelError("matriz de transição com entradas negativas")
    deviation = float(np.max(np.abs(matrix.sum(axis=1) - 1.0)))
    if deviation > ROW_SUM_TOLERANCE:
        raise ModelError("linhas da matriz de transição devem somar 1", deviation=deviation)


def _finite_step(matrix: np.ndarray, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cumulative = np.cumsum(matrix, axis=1)
    u = rng.random(states.shape)
    rows = cumulative[states.astype(int)]
    nxt = np.sum(u[..., None] >= rows, axis=-1)
    return np.minimum(nxt, matrix.shape[0] - 1).astype(float)


def stationary_vector(matrix: np.ndarray) -> np.ndarray:
    """Vetor estacionário por mínimos quadrados do sistema π(P - I) = 0, Σπ = 1"""
    n = matrix.shape[0]
    system = np.vstack([(matrix - np.eye(n)).T, np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    probs, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def ar1_stationary_law(alpha: float, noise: NoiseSpec) -> Optional[DistributionSpec]:
    if noise.family != 'gaussian':
        return None
    return DistributionSpec.gaussian(0.0, noise.sigma / math.sqrt(1.0 - alpha ** 2))


def sample_path(model: MarkovModel, initial: InitialLaw, n: int, seed: int) -> np.ndarray:
    """Trajetória x_0..x_n; (model, initial, n, seed) idênticos dão trajetórias idênticas bit a bit"""
    rng = np.random.default_rng(seed)
    return model.sample_paths(initial, n, 1, rng)[0]


def transition_density(model: MarkovModel, x: float, y) -> np.ndarray:
    """Densidade de transição p(x, y) (entradas da matriz no caso finito)"""
    return model.transition_density(x, y)

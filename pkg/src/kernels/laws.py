#!/usr/bin/env python3
"""
Leis de probabilidade usadas pelos modelos: ruído do AR(1), distribuições
(π do gás de Knudsen, leis iniciais explícitas), lei inicial e função peso V^a
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from errors import ModelError

NOISE_FAMILIES = ('gaussian', 'laplace', 'student')
DISTRIBUTION_FAMILIES = ('exponential', 'gaussian', 'uniform', 'discrete')
NORMALIZATION_TOLERANCE = 1e-8
DENSITY_CHECK_TAIL = 1e-6


@dataclass(frozen=True)
class NoiseSpec:
    """
    Densidade p do ruído ϑ_n do AR(1); todas as famílias satisfazem por construção
    a condição de densidade localmente dominada
    """
    family: str
    scale: float = 1.0
    df: Optional[float] = None

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise ModelError(f"família de ruído desconhecida: {self.family}", family=self.family)
        if not self.scale > 0:
            raise ModelError("escala do ruído deve ser > 0", scale=self.scale)
        if self.family == 'student' and not (self.df is not None and self.df > 2):
            raise ModelError("ruído student exige df > 2", df=self.df)

    @classmethod
    def gaussian(cls, sigma: float) -> 'NoiseSpec':
        return cls('gaussian', sigma)

    @classmethod
    def laplace(cls, scale: float) -> 'NoiseSpec':
        return cls('laplace', scale)

    @classmethod
    def student(cls, df: float, scale: float = 1.0) -> 'NoiseSpec':
        return cls('student', scale, df)

    @property
    def sigma(self) -> float:
        return self.scale

    @property
    def dist(self):
        if self.family == 'gaussian':
            return stats.norm(0.0, self.scale)
        if self.family == 'laplace':
            return stats.laplace(0.0, self.scale)
        return stats.t(self.df, 0.0, self.scale)

    def pdf(self, y) -> np.ndarray:
        return self.dist.pdf(y)

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        return self.dist.rvs(size=size, random_state=rng)

    def has_moment(self, order: float) -> bool:
        if self.family == 'student':
            return order < self.df
        return True

    def half_width(self, tail_mass: float) -> float:
        """Meia-largura q com P(|ϑ| > q) = tail_mass"""
        return float(self.dist.isf(tail_mass / 2.0))

    def normalization_error(self, tail_mass: float = 1e-10) -> float:
        """|∫p - 1| no domínio truncado, descontada a massa de cauda"""
        q = self.half_width(tail_mass)
        total, _ = integrate.quad(self.pdf, -q, q, points=[0.0], limit=200, epsabs=1e-13)
        return abs(total - (1.0 - tail_mass))

    def check_density(self) -> None:
        """p integra 1 (até NORMALIZATION_TOLERANCE) e é positiva no centro e nas bordas do domínio"""
        error = self.normalization_error(DENSITY_CHECK_TAIL)
        if not error <= NORMALIZATION_TOLERANCE:
            raise ModelError("densidade do ruído não integra 1", family=self.family, error=error)
        q = self.half_width(DENSITY_CHECK_TAIL)
        if np.any(self.pdf(np.array([-q, 0.0, q])) <= 0):
            raise ModelError("densidade do ruído deve ser > 0", family=self.family)


@dataclass(frozen=True)
class DistributionSpec:
    """Distribuição em R ou em {0..n-1} (família discreta)"""
    family: str
    params: Tuple[Tuple[str, Any], ...] = ()

    def __post_init__(self):
        if self.family not in DISTRIBUTION_FAMILIES:
            raise ModelError(f"família de distribuição desconhecida: {self.family}", family=self.family)
        p = dict(self.params)
        if self.family == 'exponential' and not p.get('rate', 0) > 0:
            raise ModelError("exponential exige rate > 0", params=p)
        if self.family == 'gaussian' and not p.get('sigma', 0) > 0:
            raise ModelError("gaussian exige sigma > 0", params=p)
        if self.family == 'uniform' and not p.get('low', 0) < p.get('high', 0):
            raise ModelError("uniform exige low < high", params=p)
        if self.family == 'discrete':
            probs = np.asarray(p.get('probabilities', ()), dtype=float)
            if probs.size == 0 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise ModelError("discrete exige vetor de probabilidade", params=p)

    @classmethod
    def exponential(cls, rate: float = 1.0) -> 'DistributionSpec':
        return cls('exponential', (('rate', float(rate)),))

    @classmethod
    def gaussian(cls, mean: float = 0.0, sigma: float = 1.0) -> 'DistributionSpec':
        return cls('gaussian', (('mean', float(mean)), ('sigma', float(sigma))))

    @classmethod
    def uniform(cls, low: float, high: float) -> 'DistributionSpec':
        return cls('uniform', (('low', float(low)), ('high', float(high))))

    @classmethod
    def discrete(cls, probabilities: Sequence[float]) -> 'DistributionSpec':
        return cls('discrete', (('probabilities', tuple(float(p) for p in probabilities)),))

    @classmethod
    def from_config(cls, family: str, params: Dict[str, Any]) -> 'DistributionSpec':
        if family == 'discrete':
            return cls.discrete(params['probabilities'])
        return cls(family, tuple(sorted((k, float(v)) for k, v in (params or {}).items())))

    def param(self, name: str) -> Any:
        return dict(self.params)[name]

    @property
    def is_discrete(self) -> bool:
        return self.family == 'discrete'

    @property
    def probabilities(self) -> np.ndarray:
        return np.asarray(self.param('probabilities'), dtype=float)

    @property
    def dist(self):
        if self.family == 'exponential':
            return stats.expon(0.0, 1.0 / self.param('rate'))
        if self.family == 'gaussian':
            return stats.norm(self.param('mean'), self.param('sigma'))
        if self.family == 'uniform':
            low, high = self.param('low'), self.param('high')
            return stats.uniform(low, high - low)
        raise ModelError("distribuição discreta não tem lei contínua")

    def pdf(self, x) -> np.ndarray:
        return self.dist.pdf(x)

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        if self.is_discrete:
            probs = self.probabilities
            return rng.choice(probs.size, size=size, p=probs).astype(float)
        return self.dist.rvs(size=size, random_state=rng)

    def truncation(self, tail_mass: float) -> Tuple[float, float]:
        """Intervalo [lo, hi] fora do qual a massa é menor que tail_mass"""
        if self.is_discrete:
            return 0.0, float(self.probabilities.size - 1)
        if self.family == 'uniform':
            return self.param('low'), self.param('high')
        if self.family == 'exponential':
            return 0.0, float(self.dist.isf(tail_mass))
        return float(self.dist.ppf(tail_mass / 2.0)), float(self.dist.isf(tail_mass / 2.0))

    def mass(self, lo: float, hi: float) -> float:
        if self.is_discrete:
            return 1.0
        return float(self.dist.cdf(hi) - self.dist.cdf(lo))

    def laplace_transform(self, xi, gamma: float) -> float:
        """E[exp(-γ ξ(X))] por quadratura (ou soma, no caso discreto); γ = inf dá P(ξ(X) = 0)"""
        if self.is_discrete:
            values = xi(np.arange(self.probabilities.size, dtype=float))
            weights = (values == 0).astype(float) if math.isinf(gamma) else np.exp(-gamma * values)
            return float(self.probabilities @ weights)

        def integrand(x):
            value = float(xi(np.array([x]))[0])
            if math.isinf(gamma):
                return float(value == 0) * float(self.pdf(x))
            return math.exp(-gamma * value) * float(self.pdf(x))

        lo, hi = self.dist.support()
        result, _ = integrate.quad(integrand, lo, hi, limit=400, epsabs=1e-14, epsrel=1e-12)
        return float(result)


@dataclass(frozen=True)
class InitialLaw:
    """Lei inicial μ: massa pontual δ_x, lei estacionária π ou distribuição explícita"""
    kind: str  # 'point' | 'stationary' | 'distribution'
    x: Optional[float] = None
    distribution: Optional[DistributionSpec] = None

    @classmethod
    def point(cls, x: float) -> 'InitialLaw':
        return cls('point', x=float(x))

    @classmethod
    def stationary(cls) -> 'InitialLaw':
        return cls('stationary')

    @classmethod
    def explicit(cls, distribution: DistributionSpec) -> 'InitialLaw':
        return cls('distribution', distribution=distribution)

    def describe(self) -> str:
        if self.kind == 'point':
            return f"delta({self.x!r})"
        if self.kind == 'stationary':
            return "stationary"
        return f"{self.distribution.family}{dict(self.distribution.params)}"


@dataclass(frozen=True)
class WeightFunction:
    """V^a(x) = (1+|x|)^(r0·a), par e não decrescente em |x|, sempre >= 1"""
    r0: float
    a: float = 1.0

    def __post_init__(self):
        if not self.r0 > 0:
            raise ModelError("r0 deve ser > 0", r0=self.r0)
        if not 0 <= self.a <= 1:
            raise ModelError("expoente a deve estar em [0, 1]", a=self.a)

    def __call__(self, x) -> np.ndarray:
        return (1.0 + np.abs(np.asarray(x, dtype=float))) ** (self.r0 * self.a)

    def with_exponent(self, a: float) -> 'WeightFunction':
        return WeightFunction(self.r0, a)

"""
Fixtures compartilhadas: modelos padrão usados em vários arquivos de teste
"""

import os
import sys

import numpy as np
import pytest

# Os pacotes vivem em src/ e são importados como nomes de topo (from kernels import ...)
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'src')))

from kernels import (  # noqa: E402
    AR1Model, DistributionSpec, FiniteStateModel, KnudsenModel, NoiseSpec, Observable, UKernel
)

# Cadeia reversível com π = (1/4, 1/2, 1/4)
BIRTH_DEATH = [
    [0.5, 0.5, 0.0],
    [0.25, 0.5, 0.25],
    [0.0, 0.5, 0.5],
]


@pytest.fixture
def ar1_quadratic():
    """AR(1) gaussiano α = 0.5, σ = 1, ξ = x²"""
    return AR1Model(0.5, NoiseSpec.gaussian(1.0), 2.0, Observable.quadratic())


@pytest.fixture
def resampling_exp():
    """Gás de Knudsen com U = π = Exp(1) e ξ(x) = x"""
    return KnudsenModel(0.5, UKernel.resampling(), DistributionSpec.exponential(1.0), Observable.power(1.0))


@pytest.fixture
def birth_death():
    return FiniteStateModel.from_matrix(BIRTH_DEATH, Observable.table([0.0, 1.0, 2.0]))


@pytest.fixture
def knudsen_finite():
    """Gás de Knudsen finito α = 0.7 sobre a cadeia BIRTH_DEATH"""
    return KnudsenModel(0.7, UKernel.finite(BIRTH_DEATH), DistributionSpec.discrete([0.25, 0.5, 0.25]),
                        Observable.table([0.0, 1.0, 2.0]))


def random_chain(rng: np.random.Generator, size: int, reversible: bool = False) -> FiniteStateModel:
    """Cadeia aleatória com entradas positivas e ξ aleatória não negativa; reversible simetriza os pesos"""
    weights = rng.uniform(0.1, 1.0, (size, size))
    if reversible:
        weights = weights + weights.T
    matrix = weights / weights.sum(axis=1, keepdims=True)
    xi = rng.uniform(0.0, 2.0, size)
    return FiniteStateModel.from_matrix(matrix, Observable.table(xi))

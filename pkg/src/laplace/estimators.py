#!/usr/bin/env python3
"""
Transformadas de Laplace L^(n)(γ) = E_μ[exp(-γ S_n)], S_n = Σ_{k=0}^n ξ(X_k)

Fontes disponíveis:
- monte_carlo: trajetórias em shards com sementes derivadas, reaproveitadas para todo n
- oracle_iid: produto L(γ)^(n+1) para cadeias i.i.d. sob π
- oracle_riccati: recursão escalar exata para AR(1) gaussiano com ξ = x²
- oracle_finite: μ D (P D)^n 1 por multiplicações sucessivas
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from itertools import islice
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

import settings
from errors import ModelError, PreconditionError
from kernels import AR1Model, InitialLaw, MarkovModel

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 100_000
SOURCES = ('monte_carlo', 'oracle_iid', 'oracle_riccati', 'oracle_finite')


@dataclass(frozen=True)
class LaplaceEstimate:
    """Valor de L^(n)(γ) com erro padrão (0 para oráculos) e metadados"""
    gamma: float
    n: int
    value: float
    std_error: float
    trials: int
    source: str

    def to_row(self) -> Dict:
        return asdict(self)


def _tilt(xi_values: np.ndarray, gamma: float) -> np.ndarray:
    """h_γ = exp(-γ ξ); para γ = inf, indicadora de {ξ = 0}"""
    if math.isinf(gamma):
        return (xi_values == 0).astype(float)
    return np.exp(-gamma * xi_values)


# --- Monte Carlo ---

def _shard_sizes(trials: int) -> List[int]:
    size = settings.shard_size()
    sizes = [size] * (trials // size)
    if trials % size:
        sizes.append(trials % size)
    return sizes


def _run_shard(model: MarkovModel, initial: InitialLaw, gamma: float, n: int,
               size: int, seed_seq: np.random.SeedSequence) -> Tuple[int, np.ndarray, np.ndarray]:
    """Média e soma de quadrados centrados de exp(-γ S_k), k = 0..n, em um shard"""
    rng = np.random.default_rng(seed_seq)
    paths = model.sample_paths(initial, n, size, rng)
    partial_sums = np.cumsum(model.observable(paths), axis=1)
    if math.isinf(gamma):
        values = (partial_sums == 0).astype(float)
    else:
        values = np.exp(-gamma * partial_sums)
    mean = values.mean(axis=0)
    m2 = ((values - mean) ** 2).sum(axis=0)
    return size, mean, m2


def _pool(a: Tuple[int, np.ndarray, np.ndarray], b: Tuple[int, np.ndarray, np.ndarray]):
    """Combinação exata de médias e variâncias (Chan et al.)"""
    na, mean_a, m2_a = a
    nb, mean_b, m2_b = b
    total = na + nb
    delta = mean_b - mean_a
    mean = mean_a + delta * (nb / total)
    m2 = m2_a + m2_b + delta ** 2 * (na * nb / total)
    return total, mean, m2


def laplace_mc_series(model: MarkovModel, initial: InitialLaw, gamma: float, n_max: int,
                      trials: int = DEFAULT_TRIALS, seed: int = 0) -> List[LaplaceEstimate]:
    """
    Estimativas de L^(0..n_max)(γ) a partir das mesmas trajetórias (somas prefixas)
    O resultado depende apenas de (entradas, seed, MERG_SHARD_SIZE), não do número de threads
    """
    if trials < 1:
        raise PreconditionError("trials deve ser >= 1", trials=trials)
    if not gamma >= 0:
        raise PreconditionError("gamma deve ser >= 0", gamma=gamma)

    sizes = _shard_sizes(trials)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    logger.debug(f"🎲 Monte Carlo: {trials} trajetórias em {len(sizes)} shard(s), n_max={n_max}")

    with ThreadPoolExecutor(max_workers=min(settings.max_workers(), len(sizes))) as executor:
        shards = list(executor.map(
            lambda job: _run_shard(model, initial, gamma, n_max, job[0], job[1]),
            zip(sizes, seeds)
        ))

    merged = shards[0]
    for shard in shards[1:]:
        merged = _pool(merged, shard)
    count, mean, m2 = merged

    if count > 1:
        std_error = np.sqrt(m2 / (count - 1)) / math.sqrt(count)
    else:
        std_error = np.zeros_like(mean)

    return [
        LaplaceEstimate(gamma, k, float(np.clip(mean[k], 0.0, 1.0)), float(std_error[k]), count, 'monte_carlo')
        for k in range(n_max + 1)
    ]


def laplace_mc(model: MarkovModel, initial: InitialLaw, gamma: float, n: int,
               trials: int = DEFAULT_TRIALS, seed: int = 0) -> LaplaceEstimate:
    """Média empírica de exp(-γ Σ_{k=0}^n ξ(x_k)) sobre trajetórias independentes"""
    return laplace_mc_series(model, initial, gamma, n, trials, seed)[n]


# --- oráculo i.i.d. ---

def marginal_laplace(model: MarkovModel, gamma: float, law=None) -> float:
    """E[exp(-γ ξ(X))] para X com a lei indicada (π por padrão)"""
    obs = model.observable
    if obs.is_constant():
        c = obs.param('c')
        if math.isinf(gamma):
            return 1.0 if c == 0 else 0.0
        return math.exp(-gamma * c)
    law = law if law is not None else model.stationary_law()
    if law is None:
        raise PreconditionError("lei estacionária sem forma fechada", variant=model.variant)
    return law.laplace_transform(obs, gamma)


def iter_iid(marginal: float, first: Optional[float] = None) -> Iterator[float]:
    """first·L^n para n = 0, 1, ...; first = L quando a cadeia parte de π"""
    value = marginal if first is None else first
    while True:
        yield value
        value *= marginal


def laplace_oracle_iid(marginal: float, n: int, gamma: float = math.nan,
                       model: Optional[MarkovModel] = None) -> LaplaceEstimate:
    """L(γ)^(n+1) para cadeias i.i.d. sob a lei estacionária"""
    if model is not None and not (model.is_iid_under_stationary() or model.observable.is_constant()):
        raise PreconditionError("oráculo i.i.d. chamado em modelo não i.i.d.", variant=model.variant)
    if not 0 <= marginal <= 1:
        raise PreconditionError("transformada marginal fora de [0, 1]", marginal=marginal)
    return LaplaceEstimate(gamma, n, marginal ** (n + 1), 0.0, 0, 'oracle_iid')


# --- oráculo de Riccati (AR(1) gaussiano, ξ = x²) ---

def _initial_gaussian(initial: InitialLaw, alpha: float, sigma: float) -> Tuple[float, float]:
    """(média, variância) da lei inicial; variância 0 para δ_x"""
    if initial.kind == 'point':
        return initial.x, 0.0
    if initial.kind == 'stationary':
        return 0.0, sigma ** 2 / (1.0 - alpha ** 2)
    if initial.kind == 'distribution' and initial.distribution.family == 'gaussian':
        return initial.distribution.param('mean'), initial.distribution.param('sigma') ** 2
    raise PreconditionError("oráculo de Riccati exige lei inicial δ_x, estacionária ou gaussiana",
                            initial=initial.describe())


def iter_riccati(alpha: float, sigma: float, gamma: float, initial: InitialLaw) -> Iterator[float]:
    """
    E_x[exp(-γ Σ_{k=0}^m X_k²)] = c_m exp(-a_m x²) com
    a_0 = γ, c_0 = 1, c_{m+1} = c_m (1 + 2 a_m σ²)^(-1/2), a_{m+1} = γ + a_m α² / (1 + 2 a_m σ²)
    integrado contra a lei inicial gaussiana N(m0, s²)
    """
    if math.isinf(gamma) or gamma < 0:
        raise PreconditionError("oráculo de Riccati exige 0 <= gamma < inf", gamma=gamma)
    mean, var = _initial_gaussian(initial, alpha, sigma)
    a, log_c = gamma, 0.0
    while True:
        denom = 1.0 + 2.0 * a * var
        yield math.exp(log_c - 0.5 * math.log(denom) - a * mean ** 2 / denom)
        growth = 1.0 + 2.0 * a * sigma ** 2
        log_c -= 0.5 * math.log(growth)
        a = gamma + a * alpha ** 2 / growth


def _riccati_pair(model: MarkovModel) -> Tuple[float, float]:
    if not (isinstance(model, AR1Model) and model.noise.family == 'gaussian'
            and model.observable.kind == 'quadratic'):
        raise PreconditionError("oráculo de Riccati exige AR(1) gaussiano com ξ quadrático",
                                variant=model.variant, observable=model.observable.describe())
    return model.alpha, model.noise.sigma


def laplace_oracle_riccati(alpha: float, sigma: float, gamma: float, n: int,
                           initial: InitialLaw) -> LaplaceEstimate:
    value = next(islice(iter_riccati(alpha, sigma, gamma, initial), n, None))
    return LaplaceEstimate(gamma, n, value, 0.0, 0, 'oracle_riccati')


# --- oráculo de estados finitos ---

def _initial_vector(model: MarkovModel, initial: InitialLaw) -> np.ndarray:
    size = model.n_states
    if initial.kind == 'point':
        model._check_state(initial.x)
        mu = np.zeros(size)
        mu[int(initial.x)] = 1.0
        return mu
    if initial.kind == 'stationary':
        return model.stationary
    if initial.kind == 'distribution' and initial.distribution.is_discrete \
            and initial.distribution.probabilities.size == size:
        return initial.distribution.probabilities
    raise ModelError("lei inicial não suportada para cadeia finita", initial=initial.describe())


def iter_finite(model: MarkovModel, gamma: float, initial: InitialLaw) -> Iterator[float]:
    """μ·(d f_n) com f_0 = 1, f_{k+1} = P (d f_k), d = h_γ nos estados"""
    if not model.is_finite:
        raise PreconditionError("oráculo finito exige modelo de estados finitos", variant=model.variant)
    matrix = model.transition_matrix
    mu = _initial_vector(model, initial)
    d = _tilt(model.observable(np.arange(model.n_states, dtype=float)), gamma)
    f = np.ones(model.n_states)
    while True:
        weighted = d * f
        yield float(mu @ weighted)
        f = matrix @ weighted


def laplace_oracle_finite(model: MarkovModel, gamma: float, n: int, initial: InitialLaw) -> LaplaceEstimate:
    value = next(islice(iter_finite(model, gamma, initial), n, None))
    return LaplaceEstimate(gamma, n, float(np.clip(value, 0.0, 1.0)), 0.0, 0, 'oracle_finite')


# --- seleção da melhor fonte independente ---

def _first_factor(model: MarkovModel, initial: InitialLaw, gamma: float) -> Optional[float]:
    """E_μ[exp(-γ ξ(X_0))] quando μ tem forma fechada; None se μ = π"""
    if initial.kind == 'stationary':
        return None
    if initial.kind == 'point':
        return float(_tilt(model.observable(np.array([initial.x])), gamma)[0])
    return initial.distribution.laplace_transform(model.observable, gamma)


def oracle_source(model: MarkovModel, initial: InitialLaw) -> Optional[str]:
    """Nome do oráculo exato aplicável, ou None (Monte Carlo)"""
    if model.observable.is_constant() or model.is_iid_under_stationary():
        return 'oracle_iid'
    if model.is_finite:
        return 'oracle_finite'
    if isinstance(model, AR1Model) and model.noise.family == 'gaussian' \
            and model.observable.kind == 'quadratic':
        try:
            _initial_gaussian(initial, model.alpha, model.noise.sigma)
            return 'oracle_riccati'
        except PreconditionError:
            return None
    return None


def iter_oracle(model: MarkovModel, initial: InitialLaw, gamma: float) -> Iterator[float]:
    """Sequência exata L^(0), L^(1), ... da fonte oráculo aplicável"""
    source = oracle_source(model, initial)
    if source == 'oracle_iid':
        return iter_iid(marginal_laplace(model, gamma), _first_factor(model, initial, gamma))
    if source == 'oracle_finite':
        return iter_finite(model, gamma, initial)
    if source == 'oracle_riccati':
        alpha, sigma = _riccati_pair(model)
        return iter_riccati(alpha, sigma, gamma, initial)
    raise PreconditionError("nenhum oráculo exato para este modelo", variant=model.variant,
                            observable=model.observable.describe())


def laplace_series(model: MarkovModel, initial: InitialLaw, gamma: float, n_max: int,
                   trials: int = DEFAULT_TRIALS, seed: int = 0) -> List[LaplaceEstimate]:
    """L^(0..n_max)(γ) pela melhor fonte independente do espectro: oráculo exato ou Monte Carlo"""
    source = oracle_source(model, initial)
    if source is None:
        logger.info(f"🎲 Sem oráculo para {model.variant}/{model.observable.describe()}, usando Monte Carlo")
        return laplace_mc_series(model, initial, gamma, n_max, trials, seed)
    values = islice(iter_oracle(model, initial, gamma), n_max + 1)
    return [LaplaceEstimate(gamma, k, float(np.clip(v, 0.0, 1.0)), 0.0, 0, source)
            for k, v in enumerate(values)]

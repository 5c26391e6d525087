#!/usr/bin/env python3
"""
Configuração de execução em YAML, validada com pydantic em modo estrito (chaves desconhecidas
são rejeitadas). Cada problema é reportado com a chave e a linha do documento.
"""

import hashlib
import logging
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

from errors import ConfigError, ConfigIssue, ExpressionError, GridError, MergError, ObservableError
from kernels import (
    AR1Model, DistributionSpec, FiniteStateModel, InitialLaw, KnudsenModel, MarkovModel,
    NoiseSpec, Observable, UKernel, ar1_stationary_law
)
from spectral import GridSpec, TiltFamily

logger = logging.getLogger(__name__)


class StrictSection(BaseModel):
    model_config = ConfigDict(extra='forbid', allow_inf_nan=False)


# --- modelo ---

class NoiseSection(StrictSection):
    family: Literal['gaussian', 'laplace', 'student'] = 'gaussian'
    sigma: Optional[float] = Field(None, gt=0)
    scale: Optional[float] = Field(None, gt=0)
    df: Optional[float] = Field(None, gt=2)

    @model_validator(mode='after')
    def _one_scale(self):
        if self.sigma is not None and self.scale is not None:
            raise ValueError("use sigma ou scale, não ambos")
        if self.family == 'student' and self.df is None:
            raise ValueError("ruído student exige df")
        return self

    def build(self) -> NoiseSpec:
        scale = self.sigma if self.sigma is not None else (self.scale if self.scale is not None else 1.0)
        return NoiseSpec(self.family, scale, self.df)


class DistributionSection(StrictSection):
    family: Literal['exponential', 'gaussian', 'uniform', 'discrete']
    rate: Optional[float] = Field(None, gt=0)
    mean: Optional[float] = None
    sigma: Optional[float] = Field(None, gt=0)
    low: Optional[float] = None
    high: Optional[float] = None
    probabilities: Optional[List[float]] = None

    def build(self) -> DistributionSpec:
        if self.family == 'exponential':
            return DistributionSpec.exponential(self.rate if self.rate is not None else 1.0)
        if self.family == 'gaussian':
            return DistributionSpec.gaussian(self.mean or 0.0, self.sigma if self.sigma is not None else 1.0)
        if self.family == 'uniform':
            return DistributionSpec.uniform(self.low if self.low is not None else 0.0,
                                            self.high if self.high is not None else 1.0)
        return DistributionSpec.discrete(self.probabilities or ())


class AR1Section(StrictSection):
    variant: Literal['ar1']
    alpha: float
    noise: NoiseSection = NoiseSection()
    r0: float = Field(2.0, gt=0)

    @field_validator('alpha')
    @classmethod
    def _stable(cls, value: float) -> float:
        if not abs(value) < 1:
            raise ValueError("alpha must satisfy |alpha| < 1")
        return value


class UKernelSection(StrictSection):
    type: Literal['resampling', 'finite', 'ar1']
    matrix: Optional[List[List[float]]] = None
    alpha: Optional[float] = None
    noise: Optional[NoiseSection] = None

    @model_validator(mode='after')
    def _fields(self):
        if self.type == 'finite' and self.matrix is None:
            raise ValueError("U finito exige matrix")
        if self.type == 'ar1':
            if self.alpha is None or not abs(self.alpha) < 1:
                raise ValueError("U tipo ar1 exige alpha com |alpha| < 1")
        return self

    def build(self) -> UKernel:
        if self.type == 'resampling':
            return UKernel.resampling()
        if self.type == 'finite':
            return UKernel.finite(self.matrix)
        return UKernel.ar1(self.alpha, (self.noise or NoiseSection()).build())


class KnudsenSection(StrictSection):
    variant: Literal['knudsen']
    alpha: float = Field(gt=0, le=1)
    base_kernel: UKernelSection = UKernelSection(type='resampling')
    pi: Optional[DistributionSection] = None


class FiniteSection(StrictSection):
    variant: Literal['finite']
    matrix: List[List[float]]
    stationary: Optional[List[float]] = None


ModelSection = Union[AR1Section, KnudsenSection, FiniteSection]


class ObservableParams(StrictSection):
    q: Optional[float] = Field(None, ge=0)
    scale: Optional[float] = Field(None, gt=0)
    c: Optional[float] = Field(None, ge=0)
    text: Optional[str] = None
    values: Optional[List[float]] = None
    positive_ae: Optional[bool] = None


class ObservableSection(StrictSection):
    kind: Literal['power', 'quadratic', 'constant', 'exp_decay', 'expression', 'table']
    params: ObservableParams = ObservableParams()
    allow_unbounded: bool = False

    def build_params(self) -> Dict[str, Any]:
        return self.params.model_dump(exclude_none=True)


class InitialSection(StrictSection):
    kind: Literal['point', 'stationary', 'distribution'] = 'stationary'
    x: Optional[float] = None
    distribution: Optional[DistributionSection] = None

    @model_validator(mode='after')
    def _fields(self):
        if self.kind == 'point' and self.x is None:
            raise ValueError("lei inicial point exige x")
        if self.kind == 'distribution' and self.distribution is None:
            raise ValueError("lei inicial distribution exige distribution")
        return self

    def build(self) -> InitialLaw:
        if self.kind == 'point':
            return InitialLaw.point(self.x)
        if self.kind == 'stationary':
            return InitialLaw.stationary()
        return InitialLaw.explicit(self.distribution.build())


# --- numérica ---

class DomainSection(StrictSection):
    xmax: Optional[float] = Field(None, gt=0)
    xmin: Optional[float] = None
    n: int = Field(400, ge=2, le=20_000)
    rule: Literal['gauss_legendre'] = 'gauss_legendre'
    tail_mass: float = Field(1e-12, gt=0, le=1e-8)
    weight_exponent: float = Field(1.0, gt=0, le=1)


class McSection(StrictSection):
    trials: int = Field(100_000, ge=1, le=100_000_000)
    horizon: int = Field(40, ge=1, le=100_000)
    seed: int = Field(0, ge=0)


class TiltSection(StrictSection):
    gammas: Optional[List[float]] = None
    start: Optional[float] = Field(None, ge=0)
    stop: Optional[float] = Field(None, ge=0)
    step: Optional[float] = Field(None, gt=0)

    @model_validator(mode='after')
    def _grid(self):
        ranged = (self.start, self.stop, self.step)
        if self.gammas is not None and any(v is not None for v in ranged):
            raise ValueError("use gammas ou start/stop/step, não ambos")
        if any(v is not None for v in ranged) and any(v is None for v in ranged):
            raise ValueError("start, stop e step devem vir juntos")
        if self.gammas is not None and any(not g >= 0 for g in self.gammas):
            raise ValueError("gammas devem ser >= 0")
        if self.start is not None and self.stop < self.start:
            raise ValueError("stop deve ser >= start")
        return self

    def values(self) -> List[float]:
        if self.gammas is not None:
            return [float(g) for g in self.gammas]
        if self.start is None:
            return [0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [float(self.start + k * self.step) for k in range(count)]


class SolveSection(StrictSection):
    nu_bracket: Tuple[float, float] = (0.0, 64.0)
    nu_tol: float = Field(1e-8, gt=0, le=1e-2)
    perron_tol: float = Field(1e-10, gt=0, le=1e-4)
    max_iter: int = Field(100_000, ge=10)
    series_tol: float = Field(1e-6, gt=0, le=1e-2)
    lam: float = Field(2.0, gt=1, alias='lambda')
    n_max: int = Field(2000, ge=20)

    model_config = ConfigDict(extra='forbid', allow_inf_nan=False, populate_by_name=True)

    @field_validator('nu_bracket')
    @classmethod
    def _bracket(cls, value):
        lo, hi = value
        if not 0 <= lo < hi:
            raise ValueError("nu_bracket exige 0 <= lo < hi")
        return value


class CounterexampleSection(StrictSection):
    step_bound: float = Field(1.0, gt=0)
    gammas: List[float] = [0.0, 1.0, 4.0]
    ns: List[int] = [1, 2, 5, 10]
    betas: List[float] = [1.0, 0.1, 0.01]
    trials: int = Field(2000, ge=1)

    @model_validator(mode='after')
    def _ranges(self):
        if any(not g >= 0 for g in self.gammas):
            raise ValueError("gammas devem ser >= 0")
        if any(n < 0 for n in self.ns):
            raise ValueError("ns devem ser >= 0")
        if any(not b > 0 for b in self.betas):
            raise ValueError("betas devem ser > 0")
        return self


class OutputSection(StrictSection):
    directory: str = 'out'
    precision: int = Field(17, ge=1, le=17)


class RunConfig(StrictSection):
    """Configuração completa de uma execução"""
    model: ModelSection = Field(discriminator='variant')
    observable: ObservableSection
    initial: InitialSection = InitialSection()
    domain: DomainSection = DomainSection()
    mc: McSection = McSection()
    tilt: TiltSection = TiltSection()
    solve: SolveSection = SolveSection()
    counterexample: CounterexampleSection = CounterexampleSection()
    output: OutputSection = OutputSection()

    _markov: Optional[MarkovModel] = PrivateAttr(default=None)
    _initial: Optional[InitialLaw] = PrivateAttr(default=None)
    _family: Optional[TiltFamily] = PrivateAttr(default=None)
    _digest: str = PrivateAttr(default='')

    @property
    def markov_model(self) -> MarkovModel:
        return self._markov

    @property
    def initial_law(self) -> InitialLaw:
        return self._initial

    @property
    def tilt_family(self) -> TiltFamily:
        """Grade compartilhada por todos os γ da execução (montada e verificada em parse_config)"""
        return self._family

    @property
    def digest(self) -> str:
        """sha256 do texto da configuração"""
        return self._digest

    def grid_spec(self) -> GridSpec:
        d = self.domain
        return GridSpec(size=d.n, xmax=d.xmax, xmin=d.xmin, tail_mass=d.tail_mass, rule=d.rule)


# --- construção dos objetos de domínio ---

class BuildIssue(Exception):
    """Problema de montagem dos objetos de domínio, já associado a uma chave"""

    def __init__(self, key: str, message: str):
        super().__init__(message)
        self.key = key
        self.message = message


def _build_model(config: RunConfig, observable: Observable) -> MarkovModel:
    section = config.model
    try:
        if isinstance(section, AR1Section):
            return AR1Model(section.alpha, section.noise.build(), section.r0, observable)
        if isinstance(section, KnudsenSection):
            u = section.base_kernel.build()
            if section.pi is not None:
                pi = section.pi.build()
            elif u.kind == 'ar1' and ar1_stationary_law(u.alpha, u.noise) is not None:
                pi = ar1_stationary_law(u.alpha, u.noise)
            else:
                raise BuildIssue("model.pi", "gás de Knudsen exige pi (exceto U tipo ar1 gaussiano)")
            return KnudsenModel(section.alpha, u, pi, observable)
        return FiniteStateModel.from_matrix(section.matrix, observable, section.stationary)
    except MergError as error:
        raise BuildIssue("model", error.message)


def _build_observable(section: ObservableSection) -> Observable:
    try:
        return Observable.from_config(section.kind, section.build_params())
    except ExpressionError as error:
        raise BuildIssue("observable.params.text", f"{error.message}\n{error.caret()}")
    except ObservableError as error:
        raise BuildIssue("observable", error.message)
    except KeyError as missing:
        raise BuildIssue(f"observable.params.{missing.args[0]}",
                         f"observável {section.kind} exige params.{missing.args[0]}")


def _check_growth(config: RunConfig, model: MarkovModel) -> None:
    """AR(1): ξ precisa de sup ξ/V < inf para V = (1+|x|)^r0, salvo allow_unbounded"""
    if not isinstance(model, AR1Model) or config.observable.allow_unbounded:
        return
    obs = model.observable
    if obs.degree > model.r0 or obs.sup_xi_over_v(model.r0) is None:
        raise BuildIssue(
            "observable",
            f"sup ξ/V ilimitado: grau de crescimento {obs.degree} > r0 = {model.r0} "
            f"(use allow_unbounded: true para aceitar)"
        )


def _build_initial(config: RunConfig, model: MarkovModel) -> InitialLaw:
    try:
        initial = config.initial.build()
        model.sample_initial(initial, 1, np.random.default_rng(0))
        return initial
    except MergError as error:
        raise BuildIssue("initial", error.message)


def _domain_key(config: RunConfig) -> str:
    d = config.domain
    return "domain.xmin" if d.xmin is not None and d.xmax is None else "domain.xmax"


def _build_family(config: RunConfig, model: MarkovModel) -> TiltFamily:
    """Grade e matriz não inclinada; a verificação de massa estacionária roda aqui"""
    try:
        grid = config.grid_spec()
    except MergError as error:
        raise BuildIssue(_domain_key(config), error.message)
    try:
        return TiltFamily(model, grid, config.domain.weight_exponent)
    except GridError as error:
        required = error.details.get('required_xmax')
        hint = f" (use domain.xmax >= {required:.4g})" if required is not None else ""
        raise BuildIssue(_domain_key(config), error.message + hint)
    except ObservableError as error:
        raise BuildIssue("observable", error.message)
    except MergError as error:
        raise BuildIssue("model", error.message)


# --- linhas do YAML ---

def _locate(root, loc) -> Tuple[str, Optional[int]]:
    """
    Caminho pontuado e linha (1-based) de loc no documento. Elementos que não existem
    no YAML (rótulos da união de modelos) são descartados, exceto o último
    """
    node = root
    parts: List[str] = []
    line = None
    for index, part in enumerate(loc):
        if isinstance(node, yaml.MappingNode):
            found = next(((k, v) for k, v in node.value if k.value == str(part)), None)
            if found is None:
                if index == len(loc) - 1:
                    parts.append(str(part))
                continue
            parts.append(str(part))
            line = found[0].start_mark.line + 1
            node = found[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            parts.append(str(part))
            node = node.value[part]
            line = node.start_mark.line + 1
        else:
            parts.append(str(part))
    return '.'.join(parts) or '<root>', line


def parse_config(text: str) -> RunConfig:
    """Texto YAML -> RunConfig validada e objetos de domínio montados, ou ConfigError com todos os problemas"""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as error:
        mark = getattr(error, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError([ConfigIssue('<yaml>', str(getattr(error, 'problem', error)), line)])

    if not isinstance(data, dict):
        raise ConfigError([ConfigIssue('<root>', "o documento deve ser um mapeamento", 1)])

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as error:
        issues = []
        for item in error.errors():
            loc = item['loc']
            key, line = _locate(root, loc)
            issues.append(ConfigIssue(key, item['msg'], line))
        raise ConfigError(issues)

    try:
        observable = _build_observable(config.observable)
        model = _build_model(config, observable)
        _check_growth(config, model)
        initial = _build_initial(config, model)
        family = _build_family(config, model)
    except BuildIssue as error:
        raise ConfigError([ConfigIssue(error.key, error.message, _locate(root, error.key.split('.'))[1])])

    config._markov = model
    config._initial = initial
    config._family = family
    config._digest = hashlib.sha256(text.encode('utf-8')).hexdigest()
    logger.info(f"✅ Configuração válida: {model.variant}, ξ = {observable.describe()}")
    return config

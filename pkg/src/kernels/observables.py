#!/usr/bin/env python3
"""
Catálogo de observáveis não negativos ξ : X -> [0, +inf)
Contém os tipos power, quadratic, constant, exp_decay, expression e table
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from errors import ObservableError
from .expression import ExpressionAst, parse_expression, print_expression, evaluate_expression, growth_degree

logger = logging.getLogger(__name__)

OBSERVABLE_KINDS = ('power', 'quadratic', 'constant', 'exp_decay', 'expression', 'table')

# Grade larga usada para estimar sup ξ/V de expressões
_SUP_GRID = np.concatenate([-np.logspace(-3, 4, 400)[::-1], [0.0], np.logspace(-3, 4, 400)])


@dataclass(frozen=True)
class Observable:
    """Observável ξ com metadados de crescimento"""
    kind: str
    params: Tuple[Tuple[str, Any], ...] = ()
    ast: Optional[ExpressionAst] = None
    positive_ae: Optional[bool] = None  # declarado pelo usuário: ξ > 0 Lebesgue-q.t.p.
    values: Optional[Tuple[float, ...]] = field(default=None, compare=True)

    # --- construtores ---

    @classmethod
    def power(cls, q: float, scale: float = 1.0, positive_ae: Optional[bool] = None) -> 'Observable':
        if q < 0 or scale <= 0:
            raise ObservableError("power exige q >= 0 e scale > 0", q=q, scale=scale)
        return cls('power', (('q', float(q)), ('scale', float(scale))), positive_ae=positive_ae)

    @classmethod
    def quadratic(cls, positive_ae: Optional[bool] = None) -> 'Observable':
        return cls('quadratic', positive_ae=positive_ae)

    @classmethod
    def constant(cls, c: float, positive_ae: Optional[bool] = None) -> 'Observable':
        if not (c >= 0 and math.isfinite(c)):
            raise ObservableError("constant exige c >= 0 finito", c=c)
        return cls('constant', (('c', float(c)),), positive_ae=positive_ae)

    @classmethod
    def exp_decay(cls, positive_ae: Optional[bool] = None) -> 'Observable':
        return cls('exp_decay', positive_ae=positive_ae)

    @classmethod
    def expression(cls, text: str, positive_ae: Optional[bool] = None) -> 'Observable':
        ast = parse_expression(text)
        return cls('expression', (('text', print_expression(ast)),), ast=ast, positive_ae=positive_ae)

    @classmethod
    def table(cls, values, positive_ae: Optional[bool] = None) -> 'Observable':
        values = tuple(float(v) for v in values)
        if not values:
            raise ObservableError("table exige ao menos um valor")
        if any(not (v >= 0 and math.isfinite(v)) for v in values):
            raise ObservableError("table exige valores finitos e não negativos", values=list(values))
        return cls('table', values=values, positive_ae=positive_ae)

    @classmethod
    def from_config(cls, kind: str, params: Dict[str, Any]) -> 'Observable':
        """Constrói a partir da seção observable da configuração"""
        params = dict(params or {})
        positive = params.get('positive_ae')
        if kind == 'power':
            return cls.power(params.get('q', 1.0), params.get('scale', 1.0), positive)
        if kind == 'quadratic':
            return cls.quadratic(positive)
        if kind == 'constant':
            return cls.constant(params.get('c', 1.0), positive)
        if kind == 'exp_decay':
            return cls.exp_decay(positive)
        if kind == 'expression':
            return cls.expression(params['text'], positive)
        if kind == 'table':
            return cls.table(params['values'], positive)
        raise ObservableError(f"tipo de observável desconhecido: {kind}", kind=kind)

    # --- avaliação ---

    def param(self, name: str) -> Any:
        return dict(self.params)[name]

    def _raw(self, x: np.ndarray) -> np.ndarray:
        if self.kind == 'power':
            with np.errstate(over='ignore'):
                return self.param('scale') * np.abs(x) ** self.param('q')
        if self.kind == 'quadratic':
            return x * x
        if self.kind == 'constant':
            return np.full_like(x, self.param('c'))
        if self.kind == 'exp_decay':
            return np.exp(-np.abs(x))
        if self.kind == 'table':
            index = x.astype(int)
            if np.any(index != x) or np.any(index < 0) or np.any(index >= len(self.values)):
                raise ObservableError("table avaliado fora dos estados", states=len(self.values))
            return np.asarray(self.values)[index]
        return evaluate_expression(self.ast, x)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        values = self._raw(x)
        if not np.all(np.isfinite(values)):
            raise ObservableError(f"ξ não finito em {int(np.sum(~np.isfinite(values)))} ponto(s)",
                                  observable=self.describe())
        if np.any(values < 0):
            bad = float(x[values < 0].flat[0])
            raise ObservableError(f"ξ negativo em x={bad}", observable=self.describe(), x=bad)
        return values

    # --- metadados ---

    def describe(self) -> str:
        if self.kind == 'expression':
            return f"expression({self.param('text')})"
        if self.kind == 'table':
            return f"table({list(self.values)})"
        if self.params:
            inner = ', '.join(f"{k}={v}" for k, v in self.params)
            return f"{self.kind}({inner})"
        return self.kind

    @property
    def degree(self) -> float:
        """Grau de crescimento polinomial em |x| -> infinito"""
        if self.kind == 'power':
            return self.param('q')
        if self.kind == 'quadratic':
            return 2.0
        if self.kind in ('constant', 'table'):
            return 0.0
        if self.kind == 'exp_decay':
            return -math.inf
        return growth_degree(self.ast)

    @property
    def coercive(self) -> bool:
        """ξ(x) -> +inf quando |x| -> +inf"""
        if self.kind == 'power':
            return self.param('q') > 0
        if self.kind == 'quadratic':
            return True
        if self.kind != 'expression':
            return False
        if self.degree <= 0:
            return False
        near = self._raw(np.array([-10.0, 10.0]))
        far = self._raw(np.array([-1e3, 1e3]))
        return bool(np.all(far > near))

    def sup_xi_over_v(self, r0: float) -> Optional[float]:
        """Constante c com ξ <= c·V, V(x) = (1+|x|)^r0; None quando sup ξ/V = inf"""
        if self.kind == 'power':
            return self.param('scale') if self.param('q') <= r0 else None
        if self.kind == 'quadratic':
            return 1.0 if r0 >= 2 else None
        if self.kind == 'constant':
            return self.param('c')
        if self.kind == 'exp_decay':
            return 1.0
        if self.kind == 'table':
            return max(self.values)
        if self.degree > r0:
            return None
        with np.errstate(over='ignore', invalid='ignore'):
            ratio = self._raw(_SUP_GRID) / (1.0 + np.abs(_SUP_GRID)) ** r0
        ratio = ratio[np.isfinite(ratio)]
        return float(np.max(ratio)) if ratio.size else None

    def is_constant(self) -> bool:
        return self.kind == 'constant'

    def decay_radius(self, beta: float) -> float:
        """Raio R com ξ(y) <= beta para |y| > R (math.inf se não existir)"""
        if self.kind == 'exp_decay':
            return max(0.0, math.log(1.0 / beta)) if beta < 1 else 0.0
        if self.kind == 'constant':
            return 0.0 if self.param('c') <= beta else math.inf
        if self.kind != 'expression' or self.degree >= 0:
            return math.inf
        radii = np.logspace(-3, 5, 4000)
        values = np.maximum(self._raw(radii), self._raw(-radii))
        above = np.nonzero(values > beta)[0]
        if above.size == 0:
            return 0.0
        if above[-1] == radii.size - 1:
            return math.inf
        return float(radii[above[-1] + 1])


def evaluate_observable_on_grid(obs: Observable, grid) -> np.ndarray:
    """Vetor ξ(x_i) sobre uma grade não vazia"""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ObservableError("grade vazia")
    return obs(grid)

"""
Pacote de modelos de Markov (P, π, ξ): kernels, leis, observáveis e expressões
"""

from .expression import (
    Const,
    Var,
    Unary,
    Binary,
    ExpressionAst,
    parse_expression,
    print_expression,
    evaluate_expression,
    growth_degree
)

from .observables import (
    Observable,
    OBSERVABLE_KINDS,
    evaluate_observable_on_grid
)

from .laws import (
    NoiseSpec,
    DistributionSpec,
    InitialLaw,
    WeightFunction
)

from .models import (
    MarkovModel,
    AR1Model,
    KnudsenModel,
    FiniteStateModel,
    UKernel,
    DEFAULT_TAIL_MASS,
    sample_path,
    transition_density,
    stationary_vector,
    ar1_stationary_law
)

__all__ = [
    # Expressões
    'Const',
    'Var',
    'Unary',
    'Binary',
    'ExpressionAst',
    'parse_expression',
    'print_expression',
    'evaluate_expression',
    'growth_degree',

    # Observáveis
    'Observable',
    'OBSERVABLE_KINDS',
    'evaluate_observable_on_grid',

    # Leis
    'NoiseSpec',
    'DistributionSpec',
    'InitialLaw',
    'WeightFunction',

    # Modelos
    'MarkovModel',
    'AR1Model',
    'KnudsenModel',
    'FiniteStateModel',
    'UKernel',
    'DEFAULT_TAIL_MASS',
    'sample_path',
    'transition_density',
    'stationary_vector',
    'ar1_stationary_law'
]

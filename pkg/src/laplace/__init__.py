"""
Pacote de transformadas de Laplace das somas parciais e da função geradora g_Y(γ, λ)
"""

from .estimators import (
    LaplaceEstimate,
    DEFAULT_TRIALS,
    SOURCES,
    laplace_mc,
    laplace_mc_series,
    laplace_oracle_iid,
    laplace_oracle_riccati,
    laplace_oracle_finite,
    laplace_series,
    marginal_laplace,
    oracle_source,
    iter_oracle,
    iter_iid,
    iter_riccati,
    iter_finite
)

from .generating import (
    GeneratingValue,
    DEFAULT_SERIES_TOL,
    DEFAULT_N_MAX,
    STATUS_FINITE,
    STATUS_DIVERGENT,
    STATUS_INCONCLUSIVE,
    generating_function,
    LaplaceGeneratingSupplier,
    IidGenerating,
    MatrixGenerating
)

__all__ = [
    # Estimadores
    'LaplaceEstimate',
    'DEFAULT_TRIALS',
    'SOURCES',
    'laplace_mc',
    'laplace_mc_series',
    'laplace_oracle_iid',
    'laplace_oracle_riccati',
    'laplace_oracle_finite',
    'laplace_series',
    'marginal_laplace',
    'oracle_source',
    'iter_oracle',
    'iter_iid',
    'iter_riccati',
    'iter_finite',

    # Função geradora
    'GeneratingValue',
    'DEFAULT_SERIES_TOL',
    'DEFAULT_N_MAX',
    'STATUS_FINITE',
    'STATUS_DIVERGENT',
    'STATUS_INCONCLUSIVE',
    'generating_function',
    'LaplaceGeneratingSupplier',
    'IidGenerating',
    'MatrixGenerating'
]

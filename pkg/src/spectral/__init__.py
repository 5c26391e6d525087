"""
Pacote espectral: discretização de P_γ, tripla de Perron, projetor e desigualdades
"""

from .discretization import (
    GridSpec,
    TiltedOperator,
    TiltFamily,
    DEFAULT_GRID_SIZE,
    discretize,
    gauss_legendre,
    tilt_vector
)

from .perron import (
    SpectralTriple,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    perron,
    projector_apply,
    r_derivative
)

from .inequalities import (
    DriftReport,
    ContinuityReport,
    DoeblinFortetReport,
    drift_check,
    continuity_modulus,
    doeblin_fortet_check
)

__all__ = [
    # Discretização
    'GridSpec',
    'TiltedOperator',
    'TiltFamily',
    'DEFAULT_GRID_SIZE',
    'discretize',
    'gauss_legendre',
    'tilt_vector',

    # Perron
    'SpectralTriple',
    'DEFAULT_MAX_ITER',
    'DEFAULT_TOL',
    'perron',
    'projector_apply',
    'r_derivative',

    # Desigualdades
    'DriftReport',
    'ContinuityReport',
    'DoeblinFortetReport',
    'drift_check',
    'continuity_modulus',
    'doeblin_fortet_check'
]

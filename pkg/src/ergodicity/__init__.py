"""
Pacote de ergodicidade multiplicativa: A, ρ, (M, θ), ν, C_ν, gás de Knudsen e contraexemplo
"""

from .report import (
    FitResult,
    NuResult,
    CNuResult,
    ErgodicityReport,
    NU_FOUND,
    NU_INFINITE,
    BRACKET_INVALID,
    NU_TOL,
    amplitude,
    fit_mult_ergodicity,
    solve_nu,
    c_nu,
    build_report,
    oracle_series_supplier
)

from .knudsen import (
    KnudsenFixedPoint,
    KnudsenCriterion,
    generating_supplier,
    knudsen_lambda,
    knudsen_nu_criterion
)

from .counterexample import (
    CounterexampleRow,
    counterexample_demo
)

__all__ = [
    # Relatório
    'FitResult',
    'NuResult',
    'CNuResult',
    'ErgodicityReport',
    'NU_FOUND',
    'NU_INFINITE',
    'BRACKET_INVALID',
    'NU_TOL',
    'amplitude',
    'fit_mult_ergodicity',
    'solve_nu',
    'c_nu',
    'build_report',
    'oracle_series_supplier',

    # Gás de Knudsen
    'KnudsenFixedPoint',
    'KnudsenCriterion',
    'generating_supplier',
    'knudsen_lambda',
    'knudsen_nu_criterion',

    # Contraexemplo
    'CounterexampleRow',
    'counterexample_demo'
]

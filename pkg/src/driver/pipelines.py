#!/usr/bin/env python3
"""
Um pipeline por subcomando. Cada pipeline recebe a RunConfig já validada,
chama as operações dos módulos e grava os CSVs pelo CsvWriter
"""

import logging
from typing import Callable, Dict

import numpy as np

from errors import PreconditionError
from kernels import KnudsenModel, sample_path
from laplace import laplace_mc_series, laplace_series, oracle_source
from spectral import TiltFamily, perron, r_derivative
from ergodicity import (
    build_report, c_nu, counterexample_demo, generating_supplier, knudsen_lambda,
    knudsen_nu_criterion, solve_nu, NU_FOUND
)

from .config import RunConfig
from .output import CsvWriter

logger = logging.getLogger(__name__)

LAPLACE_COLUMNS = ['gamma', 'n', 'value', 'std_error', 'source']
SPECTRUM_COLUMNS = ['gamma', 'r', 'sub_modulus', 'gap_ratio', 'residual', 'left_residual', 'iterations']
CURVE_COLUMNS = ['gamma', 'r', 'r_prime', 'sub_modulus', 'residual', 'N', 'X_max']
REPORT_COLUMNS = ['gamma', 'rho', 'A', 'r_prime', 'sub_modulus']
SUMMARY_COLUMNS = ['nu', 'nu_status', 'C_nu_formula', 'C_nu_direct', 'C_nu_discrepancy', 'C_nu_status',
                   'fit_M', 'fit_theta', 'fit_status', 'initial_law', 'positive_ae']


def _family(config: RunConfig) -> TiltFamily:
    """Grade montada e verificada em parse_config (domain.n, domain.xmax, domain.weight_exponent)"""
    return config.tilt_family


def run_simulate(config: RunConfig, writer: CsvWriter) -> Dict:
    model, mc = config.markov_model, config.mc
    path = sample_path(model, config.initial_law, mc.horizon, mc.seed)
    xi = model.observable(path)
    rows = [{'n': k, 'x': float(x), 'xi': float(v)} for k, (x, v) in enumerate(zip(path, xi))]
    return {'files': [writer.write('simulate', rows, ['n', 'x', 'xi'])]}


def run_laplace(config: RunConfig, writer: CsvWriter) -> Dict:
    """Monte Carlo para cada γ e, quando existe, a sequência exata ao lado (coluna source)"""
    model, mc, mu = config.markov_model, config.mc, config.initial_law
    has_oracle = oracle_source(model, mu) is not None
    rows = []
    for gamma in config.tilt.values():
        for estimate in laplace_mc_series(model, mu, gamma, mc.horizon, mc.trials, mc.seed):
            rows.append(estimate.to_row())
        if has_oracle:
            for estimate in laplace_series(model, mu, gamma, mc.horizon):
                rows.append(estimate.to_row())
    return {'files': [writer.write('laplace', rows, LAPLACE_COLUMNS)]}


def run_spectrum(config: RunConfig, writer: CsvWriter) -> Dict:
    family = _family(config)
    solve = config.solve
    rows, vectors = [], []
    for gamma in config.tilt.values():
        triple = perron(family.tilt(gamma), solve.perron_tol, solve.max_iter)
        rows.append({
            'gamma': gamma, 'r': triple.r, 'sub_modulus': triple.sub_modulus, 'gap_ratio': triple.gap_ratio,
            'residual': triple.residual, 'left_residual': triple.left_residual, 'iterations': triple.iterations
        })
        for node, phi, pi in zip(triple.nodes, triple.phi, triple.pi_gamma):
            vectors.append({'gamma': gamma, 'node': float(node), 'phi': float(phi), 'pi_gamma': float(pi)})
    return {'files': [
        writer.write('spectrum', rows, SPECTRUM_COLUMNS),
        writer.write('eigenvectors', vectors, ['gamma', 'node', 'phi', 'pi_gamma'])
    ]}


def run_curve(config: RunConfig, writer: CsvWriter) -> Dict:
    """γ -> (r, r') numa grade compartilhada; r não crescente é verificado e registrado"""
    model, solve = config.markov_model, config.solve
    family = _family(config)
    rows = []
    for gamma in sorted(config.tilt.values()):
        op = family.tilt(gamma)
        triple = perron(op, solve.perron_tol, solve.max_iter)
        slope = r_derivative(model, gamma, triple) if triple.r > 0 else 0.0
        rows.append({
            'gamma': gamma, 'r': triple.r, 'r_prime': slope, 'sub_modulus': triple.sub_modulus,
            'residual': triple.residual, 'N': op.size, 'X_max': op.xmax
        })
    radii = np.array([row['r'] for row in rows])
    if radii.size > 1 and np.any(np.diff(radii) > solve.perron_tol):
        logger.warning("⚠️ r(γ) não é monótona na grade: aumente N ou reduza a tolerância")
    return {'files': [writer.write('curve', rows, CURVE_COLUMNS)]}


def run_nu(config: RunConfig, writer: CsvWriter) -> Dict:
    model, mu, solve = config.markov_model, config.initial_law, config.solve
    family = _family(config)
    result = solve_nu(model, mu, tuple(solve.nu_bracket), solve.nu_tol, family, lam=solve.lam,
                      perron_tol=solve.perron_tol, perron_max_iter=solve.max_iter)
    row = {
        'nu': result.nu, 'nu_status': result.status, 'r_lo': result.r_lo, 'r_hi': result.r_hi,
        'r_infinity': result.r_infinity, 'iterations': result.iterations,
        'C_nu_formula': None, 'C_nu_direct': None, 'C_nu_status': 'not_run'
    }
    if result.status == NU_FOUND:
        cn = c_nu(model, mu, result.nu, solve.series_tol, family, lam=solve.lam,
                  perron_tol=solve.perron_tol, perron_max_iter=solve.max_iter, n_max=solve.n_max)
        row.update({'C_nu_formula': cn.formula, 'C_nu_direct': cn.direct, 'C_nu_status': cn.status})
    return {'files': [writer.write('nu', [row], list(row))]}


def run_report(config: RunConfig, writer: CsvWriter) -> Dict:
    mc, solve = config.mc, config.solve
    report = build_report(
        config.markov_model, config.initial_law, config.tilt.values(),
        horizon=mc.horizon, trials=mc.trials, seed=mc.seed, bracket=tuple(solve.nu_bracket),
        nu_tol=solve.nu_tol, series_tol=solve.series_tol, lam=solve.lam,
        family=config.tilt_family, perron_tol=solve.perron_tol, perron_max_iter=solve.max_iter, n_max=solve.n_max
    )
    summary = report.summary()
    summary.update({f"check_{key}": value for key, value in sorted(report.checks.items())})
    columns = SUMMARY_COLUMNS + sorted(k for k in summary if k.startswith('check_'))
    return {'files': [
        writer.write('report', report.rows(), REPORT_COLUMNS),
        writer.write('summary', [summary], columns)
    ]}


def run_knudsen_fixedpoint(config: RunConfig, writer: CsvWriter) -> Dict:
    """λ(γ) pela equação de ponto fixo, lado a lado com o raio de Perron da discretização"""
    model, solve = config.markov_model, config.solve
    if not isinstance(model, KnudsenModel) or not model.alpha < 1:
        raise PreconditionError("knudsen-fixedpoint exige modelo knudsen com alpha < 1",
                                variant=model.variant)
    family = _family(config)
    g_z = generating_supplier(model, family)
    rows = []
    for gamma in config.tilt.values():
        fixed = knudsen_lambda(gamma, model.alpha, g_z)
        r = perron(family.tilt(gamma), solve.perron_tol, solve.max_iter).r
        rows.append({
            'gamma': gamma, 'lambda': fixed.lam, 'status': fixed.status, 'iterations': fixed.iterations,
            'lower_bound': fixed.lower_bound, 'r': r,
            'deviation': abs(fixed.lam - r) if fixed.lam is not None else None
        })
    files = [writer.write('knudsen_fixedpoint', rows, list(rows[0]) if rows else None)]
    if 0.5 < model.alpha < 1:
        criterion = knudsen_nu_criterion(model.alpha, g_z)
        files.append(writer.write('knudsen_criterion', [{
            'alpha': model.alpha, 'threshold_value': criterion.threshold_value,
            'nu_finite': criterion.nu_finite
        }], ['alpha', 'threshold_value', 'nu_finite']))
    return {'files': files}


def run_counterexample(config: RunConfig, writer: CsvWriter) -> Dict:
    """Tabela de cotas inferiores do núcleo de saltos limitados com o ξ da seção observable"""
    section = config.counterexample
    rows = counterexample_demo(section.step_bound, section.gammas, section.ns, section.betas,
                               section.trials, config.mc.seed, config.markov_model.observable)
    return {'files': [writer.write('counterexample', [row.to_row() for row in rows])]}


PIPELINES: Dict[str, Callable[[RunConfig, CsvWriter], Dict]] = {
    'simulate': run_simulate,
    'laplace': run_laplace,
    'spectrum': run_spectrum,
    'curve': run_curve,
    'nu': run_nu,
    'report': run_report,
    'knudsen-fixedpoint': run_knudsen_fixedpoint,
    'counterexample': run_counterexample
}


def run(command: str, config: RunConfig) -> Dict:
    """Executa o subcomando e retorna {'status', 'command', 'files'}"""
    if command not in PIPELINES:
        raise PreconditionError(f"subcomando desconhecido: {command}", command=command,
                                available=sorted(PIPELINES))
    writer = CsvWriter(config.output.directory, config.digest, config.mc.seed, command,
                       config.output.precision)
    logger.info(f"🚀 merg {command}: saída em {config.output.directory}")
    result = PIPELINES[command](config, writer)
    logger.info(f"✅ merg {command}: {len(result['files'])} arquivo(s)")
    return {'status': 'success', 'command': command, **result}

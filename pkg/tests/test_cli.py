import glob
import json
import math
import os
import textwrap

import pytest

import merg
from errors import ConfigError
from driver import body, parse_config, read_csv

AR1_MINIMAL = """
model:
  variant: ar1
  alpha: 0.5
observable:
  kind: quadratic
"""

CONSTANT_FINITE = """
model:
  variant: finite
  matrix:
    - [0.5, 0.5, 0.0]
    - [0.25, 0.5, 0.25]
    - [0.0, 0.5, 0.5]
observable:
  kind: constant
  params:
    c: 1.0
mc:
  trials: 500
  horizon: 12
tilt:
  gammas: [0.0, 0.5, 1.0]
"""

KNUDSEN_FINITE = """
model:
  variant: knudsen
  alpha: 0.7
  base_kernel:
    type: finite
    matrix:
      - [0.5, 0.5, 0.0]
      - [0.25, 0.5, 0.25]
      - [0.0, 0.5, 0.5]
  pi:
    family: discrete
    probabilities: [0.25, 0.5, 0.25]
observable:
  kind: table
  params:
    values: [0.0, 1.0, 2.0]
mc:
  trials: 1000
  horizon: 12
tilt:
  gammas: [0.5, 1.0, 2.0]
"""

RESAMPLING = """
model:
  variant: knudsen
  alpha: 0.5
  base_kernel:
    type: resampling
  pi:
    family: exponential
    rate: 1.0
observable:
  kind: power
  params:
    q: 1
mc:
  trials: 2000
  horizon: 20
tilt:
  gammas: [0.5, 1.0, 2.0]
"""


def _write(tmp_path, text, name='run.yaml'):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text), encoding='utf-8')
    return str(path)


def _run(tmp_path, command, text, out='out', seed=None):
    argv = [command, '--config', _write(tmp_path, text), '--out', str(tmp_path / out)]
    if seed is not None:
        argv += ['--seed', str(seed)]
    return merg.main(argv), tmp_path / out


# --- parse_config ---

CONFIG_FILES = sorted(glob.glob(os.path.join(os.path.dirname(__file__), '..', 'configs', '*.yaml')))


@pytest.mark.parametrize('path', CONFIG_FILES)
def test_shipped_configs_parse(path):
    with open(path, encoding='utf-8') as handle:
        assert parse_config(handle.read()).markov_model is not None


def test_minimal_config_gets_defaults():
    config = parse_config(AR1_MINIMAL)
    assert config.domain.n == 400
    assert config.mc.trials == 100_000
    assert config.solve.perron_tol == 1e-10
    assert config.solve.nu_tol == 1e-8
    assert config.solve.lam == 2.0
    assert config.markov_model.variant == 'ar1'
    assert config.initial_law.kind == 'stationary'
    assert len(config.digest) == 64


def test_alpha_out_of_range_names_key_and_line():
    text = AR1_MINIMAL.replace("alpha: 0.5", "alpha: 1.5")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    issue = info.value.issues[0]
    assert issue.key == 'model.alpha'
    assert issue.line == 4
    assert "alpha must satisfy |alpha| < 1" in issue.message


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError) as info:
        parse_config(AR1_MINIMAL + "mc:\n  trails: 10\n")
    keys = [issue.key for issue in info.value.issues]
    assert 'mc.trails' in keys


def test_all_issues_are_reported():
    text = AR1_MINIMAL.replace("alpha: 0.5", "alpha: 2.0") + "domain:\n  n: 1\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert {issue.key for issue in info.value.issues} == {'model.alpha', 'domain.n'}


def test_expression_observable_growth_check():
    accepted = parse_config(AR1_MINIMAL.replace("kind: quadratic", "kind: expression\n  params:\n    text: x*x"))
    assert accepted.markov_model.observable.coercive
    with pytest.raises(ConfigError) as info:
        parse_config(AR1_MINIMAL.replace("kind: quadratic", "kind: expression\n  params:\n    text: exp(x)"))
    assert info.value.issues[0].key == 'observable'
    override = AR1_MINIMAL.replace("kind: quadratic", "kind: expression\n  params:\n    text: exp(x)\n  allow_unbounded: true")
    assert parse_config(override).observable.allow_unbounded


def test_malformed_expression_shows_caret():
    with pytest.raises(ConfigError) as info:
        parse_config(AR1_MINIMAL.replace("kind: quadratic", "kind: expression\n  params:\n    text: x + * 2"))
    issue = info.value.issues[0]
    assert issue.key == 'observable.params.text'
    assert "x + * 2\n    ^" in issue.message


def test_yaml_syntax_error_has_line():
    with pytest.raises(ConfigError) as info:
        parse_config("model:\n  variant: ar1\n  alpha: [0.5\n")
    assert info.value.issues[0].line is not None


def test_tilt_range_expands():
    config = parse_config(AR1_MINIMAL + "tilt:\n  start: 0.0\n  stop: 1.0\n  step: 0.25\n")
    assert config.tilt.values() == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_knudsen_requires_stationary_pi():
    text = KNUDSEN_FINITE.replace("[0.25, 0.5, 0.25]", "[0.5, 0.25, 0.25]")
    with pytest.raises(ConfigError):
        parse_config(text)


def test_nested_observable_params_and_grid_size():
    text = AR1_MINIMAL.replace("kind: quadratic", "kind: power\n  params:\n    q: 1.5\n    positive_ae: true")
    config = parse_config(text + "domain:\n  n: 64\n")
    assert config.model.variant == 'ar1'
    assert config.domain.n == 64
    assert config.tilt_family.nodes.size == 64
    assert config.markov_model.observable.param('q') == 1.5
    assert config.markov_model.observable.positive_ae is True


@pytest.mark.parametrize('text', [
    AR1_MINIMAL + "domain:\n  N: 64\n",
    AR1_MINIMAL.replace("kind: quadratic", "kind: power\n  q: 1"),
    AR1_MINIMAL.replace("variant: ar1", "type: ar1")
])
def test_legacy_key_names_are_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_grid_without_stationary_mass_is_rejected_at_parse():
    with pytest.raises(ConfigError) as info:
        parse_config(AR1_MINIMAL + "domain:\n  xmax: 1.0\n")
    issue = info.value.issues[0]
    assert issue.key == 'domain.xmax'
    assert issue.line == 8
    assert "domain.xmax >=" in issue.message


def test_empty_domain_maps_to_domain_key():
    with pytest.raises(ConfigError) as info:
        parse_config(AR1_MINIMAL + "domain:\n  xmax: 2.0\n  xmin: 3.0\n")
    assert info.value.issues[0].key == 'domain.xmax'


def test_xmin_cutting_stationary_mass_maps_to_xmin():
    with pytest.raises(ConfigError) as info:
        parse_config(AR1_MINIMAL + "domain:\n  xmin: 1.0\n")
    assert info.value.issues[0].key == 'domain.xmin'


@pytest.mark.parametrize('gammas', ["[0.5, .inf]", "[.nan]"])
def test_non_finite_tilt_is_rejected(gammas):
    with pytest.raises(ConfigError) as info:
        parse_config(RESAMPLING.replace("gammas: [0.5, 1.0, 2.0]", f"gammas: {gammas}"))
    assert all(issue.key.startswith('tilt.gammas') for issue in info.value.issues)


def test_weight_exponent_reaches_tilt_family():
    config = parse_config(AR1_MINIMAL + "domain:\n  weight_exponent: 0.5\n")
    assert config.tilt_family.weight_exponent == 0.5


# --- subcomandos ---

def test_spectrum_at_zero_is_one(tmp_path):
    status, out = _run(tmp_path, 'spectrum', CONSTANT_FINITE)
    assert status == 0
    frame = read_csv(str(out / 'spectrum.csv'))
    row = frame[frame['gamma'] == 0.0].iloc[0]
    assert row['r'] == pytest.approx(1.0, abs=1e-8)
    assert (out / 'eigenvectors.csv').exists()


def test_csv_header_block(tmp_path):
    status, out = _run(tmp_path, 'curve', CONSTANT_FINITE, seed=5)
    assert status == 0
    lines = (out / 'curve.csv').read_text(encoding='utf-8').splitlines()
    assert lines[0].startswith('# merg ')
    assert lines[1].startswith('# config_sha256 ')
    assert lines[2] == '# seed 5'
    assert lines[3] == '# command curve'
    assert lines[4] == 'gamma,r,r_prime,sub_modulus,residual,N,X_max'


def test_curve_matches_constant_closed_form(tmp_path):
    status, out = _run(tmp_path, 'curve', CONSTANT_FINITE)
    frame = read_csv(str(out / 'curve.csv'))
    for _, row in frame.iterrows():
        assert row['r'] == pytest.approx(math.exp(-row['gamma']), abs=1e-8)
        assert row['r_prime'] == pytest.approx(-math.exp(-row['gamma']), abs=1e-8)


def test_nu_on_constant_observable(tmp_path):
    status, out = _run(tmp_path, 'nu', CONSTANT_FINITE)
    assert status == 0
    row = read_csv(str(out / 'nu.csv')).iloc[0]
    assert row['nu'] == pytest.approx(math.log(2.0), abs=1e-8)
    assert row['C_nu_formula'] == pytest.approx(1.0 / (2.0 * math.log(2.0)), abs=1e-6)


def test_nu_pipeline_uses_solve_settings(tmp_path, monkeypatch):
    import ergodicity.report as report_module
    series_limits, perron_args = [], []
    generating_function, perron = report_module.generating_function, report_module.perron

    def recording_generating_function(*args, **kwargs):
        series_limits.append(args[4] if len(args) > 4 else kwargs.get('n_max'))
        return generating_function(*args, **kwargs)

    def recording_perron(*args, **kwargs):
        perron_args.append(tuple(args[1:3]))
        return perron(*args, **kwargs)

    monkeypatch.setattr(report_module, 'generating_function', recording_generating_function)
    monkeypatch.setattr(report_module, 'perron', recording_perron)
    text = CONSTANT_FINITE + "solve:\n  n_max: 5000\n  perron_tol: 1.0e-9\n  max_iter: 777\n"
    status, out = _run(tmp_path, 'nu', text)
    assert status == 0
    assert series_limits and set(series_limits) == {5000}
    assert (1e-9, 777) in perron_args
    assert read_csv(str(out / 'nu.csv')).iloc[0]['nu'] == pytest.approx(math.log(2.0), abs=1e-8)


def test_report_uses_parsed_tilt_family(tmp_path, monkeypatch):
    import driver.pipelines as pipelines
    seen = {}
    build_report = pipelines.build_report

    def recording_build_report(*args, **kwargs):
        seen.update(kwargs)
        return build_report(*args, **kwargs)

    monkeypatch.setattr(pipelines, 'build_report', recording_build_report)
    text = RESAMPLING + "domain:\n  weight_exponent: 0.5\nsolve:\n  n_max: 3000\n"
    status, _ = _run(tmp_path, 'report', text)
    assert status == 0
    assert seen['family'].weight_exponent == 0.5
    assert seen['n_max'] == 3000


def test_report_summary_carries_positive_ae(tmp_path):
    text = RESAMPLING.replace("    q: 1\n", "    q: 1\n    positive_ae: true\n")
    status, out = _run(tmp_path, 'report', text)
    assert status == 0
    assert bool(read_csv(str(out / 'summary.csv')).iloc[0]['positive_ae']) is True


def test_laplace_lists_mc_and_oracle(tmp_path):
    status, out = _run(tmp_path, 'laplace', KNUDSEN_FINITE)
    frame = read_csv(str(out / 'laplace.csv'))
    assert list(frame.columns) == ['gamma', 'n', 'value', 'std_error', 'source']
    assert set(frame['source']) == {'monte_carlo', 'oracle_finite'}
    assert frame['value'].between(0.0, 1.0).all()


def test_simulate_writes_path(tmp_path):
    status, out = _run(tmp_path, 'simulate', KNUDSEN_FINITE)
    frame = read_csv(str(out / 'simulate.csv'))
    assert len(frame) == 13
    assert set(frame['x']).issubset({0.0, 1.0, 2.0})


def test_knudsen_fixedpoint_pipeline(tmp_path):
    status, out = _run(tmp_path, 'knudsen-fixedpoint', KNUDSEN_FINITE)
    assert status == 0
    frame = read_csv(str(out / 'knudsen_fixedpoint.csv'))
    assert (frame['deviation'] < 1e-8).all()
    criterion = read_csv(str(out / 'knudsen_criterion.csv')).iloc[0]
    assert criterion['threshold_value'] == pytest.approx(0.5, abs=1e-12)


def test_report_on_resampling(tmp_path):
    status, out = _run(tmp_path, 'report', RESAMPLING)
    assert status == 0
    summary = read_csv(str(out / 'summary.csv')).iloc[0]
    assert summary['nu'] == pytest.approx(1.0, abs=1e-6)
    assert summary['C_nu_formula'] == pytest.approx(1.0, abs=1e-3)
    assert summary['C_nu_discrepancy'] < 0.02
    report = read_csv(str(out / 'report.csv'))
    for _, row in report.iterrows():
        assert row['rho'] == pytest.approx(1.0 / (1.0 + row['gamma']), abs=1e-6)


def test_report_is_deterministic(tmp_path):
    _run(tmp_path, 'report', RESAMPLING, out='first', seed=3)
    _run(tmp_path, 'report', RESAMPLING, out='second', seed=3)
    for name in ('report.csv', 'summary.csv'):
        assert body(str(tmp_path / 'first' / name)) == body(str(tmp_path / 'second' / name))


def test_laplace_mc_is_deterministic(tmp_path):
    _run(tmp_path, 'laplace', KNUDSEN_FINITE, out='first', seed=8)
    _run(tmp_path, 'laplace', KNUDSEN_FINITE, out='second', seed=8)
    assert body(str(tmp_path / 'first' / 'laplace.csv')) == body(str(tmp_path / 'second' / 'laplace.csv'))


def test_counterexample_pipeline(tmp_path):
    text = AR1_MINIMAL.replace("kind: quadratic", "kind: exp_decay") + "counterexample:\n  trials: 200\n  ns: [1, 3]\n"
    status, out = _run(tmp_path, 'counterexample', text)
    assert status == 0
    frame = read_csv(str(out / 'counterexample.csv'))
    assert len(frame) == 3 * 2 * 3
    assert (frame['estimate'] >= frame['lower_bound'] * (1.0 - 1e-12)).all()
    # x = R + nS + 1 com R = ln(1/β)
    row = frame[(frame['beta'] == 0.01) & (frame['n'] == 3)].iloc[0]
    assert row['x'] == pytest.approx(math.log(100.0) + 3.0 + 1.0)


def test_counterexample_needs_decaying_observable(tmp_path, capsys):
    status, _ = _run(tmp_path, 'counterexample', AR1_MINIMAL + "counterexample:\n  trials: 10\n")
    assert status == 2
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith('{')]
    assert json.loads(lines[-1])['error'] == 'precondition'


# --- erros ---

def test_invalid_config_exits_with_json(tmp_path, capsys):
    status, _ = _run(tmp_path, 'spectrum', AR1_MINIMAL.replace("alpha: 0.5", "alpha: 1.5"))
    assert status == 2
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith('{')]
    payload = json.loads(lines[0])
    assert payload['error'] == 'config_invalid'
    assert payload['details']['key'] == 'model.alpha'


def test_precondition_failure_exits_two(tmp_path, capsys):
    status, _ = _run(tmp_path, 'knudsen-fixedpoint', CONSTANT_FINITE)
    assert status == 2
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith('{')]
    assert json.loads(lines[-1])['error'] == 'precondition'


def test_missing_config_file(tmp_path, capsys):
    status = merg.main(['nu', '--config', str(tmp_path / 'absent.yaml')])
    assert status == 2

#!/usr/bin/env python3
"""
Tests for the command-line front end and configuration layering
"""
import sys
import os
import argparse
import json

import pytest

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from lab_cli import build_parser, main, parse_levels, resolve_config  # noqa: E402
from lab_config import LabConfig, load_config  # noqa: E402
from lab_errors import ConfigError  # noqa: E402
from lab_operations import command_variables  # noqa: E402


def _run(capsys, argv):
    status = main(argv)
    return status, json.loads(capsys.readouterr().out)


def test_bmo_command_prints_record(capsys):
    """A successful command prints inputs, results and provenance"""
    status, record = _run(capsys, ['--resolution', '6', 'bmo', '--b', 'heaviside', '--domain=-1:1'])
    assert status == 0
    assert record['results']['constant'] == pytest.approx(0.5)
    assert record['inputs']['command'] == 'bmo'
    assert record['provenance']['resolution'] == 6
    assert 'version' in record['provenance']


def test_lab_error_exits_with_two(capsys):
    """Unknown function ids give an error record and status 2"""
    status, record = _run(capsys, ['bmo', '--b', 'nosuch'])
    assert status == 2
    assert record['error']['code'] == 'UNKNOWN_FUNCTION'
    assert record['error']['context']['function_id'] == 'nosuch'


def test_luxemburg_command(capsys):
    """The L1 Luxemburg norm of a constant is the constant"""
    status, record = _run(capsys, ['--resolution', '5', 'luxemburg', '--f', 'const:3', '--young', 'power:1'])
    assert status == 0
    assert record['results']['norm'] == pytest.approx(3.0, rel=1e-8)


def test_config_precedence(tmp_path):
    """Defaults < environment < config file < flags"""
    path = tmp_path / 'lab.json'
    path.write_text(json.dumps({'resolution': 5, 'seed': 11}), encoding='utf-8')
    parser = build_parser()
    environ = {'LAB_RESOLUTION': '7', 'LAB_SEED': '3', 'LAB_DIMENSION': '2'}

    config = resolve_config(parser.parse_args(['bmo', '--b', 'x']), environ)
    assert (config.resolution, config.seed, config.dimension) == (7, 3, 2)

    args = parser.parse_args(['--config', str(path), 'bmo', '--b', 'x'])
    config = resolve_config(args, environ)
    assert (config.resolution, config.seed, config.dimension) == (5, 11, 2)

    args = parser.parse_args(['--config', str(path), '--resolution', '9', 'bmo', '--b', 'x'])
    assert resolve_config(args, environ).resolution == 9


def test_config_errors(tmp_path):
    """Bad environment values, unknown keys and non-object files are refused"""
    with pytest.raises(ConfigError):
        LabConfig.from_env({'LAB_SEED': 'many'})
    with pytest.raises(ConfigError):
        LabConfig().merged({'colour': 'blue'})
    path = tmp_path / 'list.json'
    path.write_text('[1, 2]', encoding='utf-8')
    with pytest.raises(ConfigError):
        load_config(path)


def test_parse_levels():
    """Level windows read as inclusive pairs"""
    assert parse_levels('-8..-2') == (-8, -2)
    assert parse_levels('-3') == (-3, -3)
    with pytest.raises(argparse.ArgumentTypeError):
        parse_levels('2..-2')


def test_sweep_writes_csv(tmp_path, capsys):
    """--out receives the sweep table with its slope footer"""
    path = tmp_path / 'power.csv'
    status, record = _run(capsys, ['--resolution', '6', '--out', str(path),
                                   'sweep', 'power-weight', '--p', '2'])
    assert status == 0
    assert record['results']['csv_path'] == str(path)
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == 'delta,apq_constant'
    assert lines[-1].startswith('#slope,')


def test_sweep_parameter_error(capsys):
    """Sweep parameter errors carry the offending field"""
    status, record = _run(capsys, ['--dim', '2', 'sweep', 'sobolev', '--p', '3'])
    assert status == 2
    assert record['error']['code'] == 'PARAMETER_ERROR'


def test_global_flags_after_subcommand(capsys):
    """--dim and --resolution work after the subcommand and override earlier values"""
    status, record = _run(capsys, ['sweep', 'sobolev', '--dim', '2', '--p', '1', '--deltas', '0.5'])
    assert status == 0
    assert record['inputs']['dimension'] == 2
    row = record['results']['rows'][0]
    assert row['delta'] == pytest.approx(0.5)
    assert row['norm_q'] == pytest.approx(2.50663, rel=1e-5)
    assert row['apq_constant'] >= 1.0

    args = build_parser().parse_args(['--resolution', '4', 'bmo', '--b', 'x', '--resolution', '7'])
    assert resolve_config(args, {}).resolution == 7
    args = build_parser().parse_args(['--resolution', '4', 'bmo', '--b', 'x'])
    assert resolve_config(args, {}).resolution == 4


def test_transform_takes_operator_positionally(capsys):
    """The operator id is the first argument of transform"""
    status, record = _run(capsys, ['transform', 'hilbert', '--f', 'charfn:-1:1', '--resolution', '10'])
    assert status == 0
    assert record['inputs']['op'] == 'hilbert'
    assert record['results']['operator'] == 'hilbert'
    assert record['results']['input_l2_norm'] == pytest.approx(1.0)
    assert record['provenance']['resolution'] == 10


def test_apq_exponent_written_in_n_delta_and_conjugate(capsys):
    """(n-δ)/p' reads n from --dim, δ from --delta and p' from --p"""
    status, record = _run(capsys, ['apq', '--w', "power:(n-δ)/p'", '--p', '4/3', '--q', '4',
                                   '--dim', '2', '--delta', '0.2'])
    assert status == 0
    assert record['results']['p'] == pytest.approx(4.0 / 3.0)
    assert record['results']['q'] == pytest.approx(4.0)
    assert 1.0 <= record['results']['constant'] < float('inf')
    assert record['inputs']['delta'] == '0.2'


def test_command_variables():
    """n, delta, p, q and their conjugates are visible; --var entries win"""
    config = LabConfig().merged({'dimension': 3})
    variables = command_variables(config, {'p': '4/3', 'q': 4, 'delta': 'n/10'})
    assert variables['n'] == 3.0
    assert variables['delta'] == pytest.approx(0.3)
    assert variables["p'"] == pytest.approx(4.0)
    assert variables["q'"] == pytest.approx(4.0 / 3.0)
    assert command_variables(config, {'p': 2, 'var': ['p=3']})['p'] == 3.0
    assert "p'" not in command_variables(config, {'p': 1})


def test_negative_domain_needs_equals_form(capsys):
    """--domain=-1:1 reaches the sampler; a bare -1:1 reads as an option"""
    status, record = _run(capsys, ['--resolution', '4', 'luxemburg', '--f', 'charfn:-1:0', '--young', 'power:1',
                                   '--domain=-1:1'])
    assert status == 0
    assert record['results']['norm'] == pytest.approx(0.5)
    with pytest.raises(SystemExit):
        build_parser().parse_args(['bmo', '--b', 'x', '--domain', '-1:1'])

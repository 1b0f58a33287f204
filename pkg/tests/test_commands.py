"""
Tests for the command registry, the handler's exit codes and the CLI entry point
"""
import json
import os

import pytest

from core.command_handler import CommandHandler
from core.errors import EXIT_OK, EXIT_USAGE
from run_pwcycles import build_parser, build_run_config, main, project_root
from tools.tools_registry import ToolsRegistry

COMMANDS = {'construct', 'count', 'levels', 'melnikov', 'pseudo-hopf', 'lift', 'sweep'}


@pytest.fixture
def handler():
    return CommandHandler(ToolsRegistry(str(project_root / 'config' / 'tools')))


def _load(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


class TestRegistry:

    def test_all_commands_load(self, handler):
        registry = handler.tools_registry
        assert registry.get_tool_errors() == {}
        assert {entry['name'] for entry in handler.list_commands()} == COMMANDS

    def test_declared_schema_matches_code(self, handler):
        for name in COMMANDS:
            tool = handler.tools_registry.get_tool(name)
            declared = set(tool.input_schema['properties'])
            assert declared == set(tool.get_input_schema()['properties']), name


class TestHandler:

    def test_construct_level0(self, handler, out_dir):
        outcome = handler.handle('construct', {'k': 0, 'out': out_dir})
        assert outcome.exit_code == EXIT_OK
        data = _load(os.path.join(out_dir, 'construct_k0.json'))
        assert data['degree'] == 2
        assert outcome.to_dict()['files'] == [os.path.join(out_dir, 'construct_k0.json')]

    def test_runs_are_counted(self, handler, out_dir):
        handler.handle('construct', {'k': 0, 'out': out_dir})
        metrics = {m['name']: m for m in handler.tools_registry.get_tool_metrics()}
        assert metrics['construct']['execution_count'] == 1
        assert metrics['count']['execution_count'] == 0

    def test_schema_violation_is_usage_error(self, handler, out_dir):
        outcome = handler.handle('construct', {'k': -1, 'out': out_dir})
        assert outcome.exit_code == EXIT_USAGE
        assert outcome.error['type'] == 'ValidationError'

    def test_deep_level_without_flag(self, handler, out_dir):
        outcome = handler.handle('construct', {'k': 3, 'out': out_dir})
        assert outcome.exit_code == EXIT_USAGE
        assert outcome.error['type'] == 'UsageError'

    def test_unknown_command(self, handler):
        assert handler.handle('draw', {}).exit_code == EXIT_USAGE

    def test_count_level0(self, handler, out_dir):
        outcome = handler.handle('count', {'k': 0, 'out': out_dir, 'jobs': 1})
        assert outcome.exit_code == EXIT_OK
        data = _load(os.path.join(out_dir, 'count_k0.json'))
        assert data['reports'][0]['found'] == 1
        assert data['shiftBound']['0']['passed']
        assert os.path.exists(os.path.join(out_dir, 'displacement_k0.csv'))

    def test_count_level0_with_pseudo_hopf_step(self, handler, out_dir):
        outcome = handler.handle('count', {'k': 0, 'out': out_dir, 'jobs': 1, 'pseudo_hopf_mode': True})
        assert outcome.exit_code == EXIT_OK
        row = _load(os.path.join(out_dir, 'count_k0.json'))['pseudoHopf'][0]
        assert row['step']['passed']
        assert row['countWithShift'] == 1
        assert row['refinedExpected'] == 2

    def test_sweep_level0(self, handler, out_dir):
        outcome = handler.handle('sweep', {'k': 0, 'out': out_dir, 'grid': 200})
        assert outcome.exit_code == EXIT_OK
        assert _load(os.path.join(out_dir, 'sweep_k0.json'))['found'] == 1

    def test_melnikov_level0(self, handler, out_dir):
        outcome = handler.handle('melnikov', {'k': 0, 'out': out_dir})
        assert outcome.exit_code == EXIT_OK
        data = _load(os.path.join(out_dir, 'melnikov_k0.json'))
        assert data['zeros'] == [{'y': pytest.approx(0.5), 'simple': True}]

    def test_levels_level0(self, handler, out_dir):
        outcome = handler.handle('levels', {'k': 0, 'out': out_dir, 'grid': 50, 'contours': 3})
        assert outcome.exit_code == EXIT_OK
        assert os.path.exists(os.path.join(out_dir, 'levels_k0.csv'))

    @pytest.mark.slow
    def test_lift_demo(self, handler, out_dir):
        outcome = handler.handle('lift', {'out': out_dir})
        assert outcome.exit_code == EXIT_OK
        data = _load(os.path.join(out_dir, 'lift.json'))
        assert data['main']['found'] == 2
        assert data['controls']['epsilonZero']['found'] == 1
        assert data['controls']['wrongSign']['found'] == 1
        assert os.path.exists(os.path.join(out_dir, 'lift_summary.csv'))

    @pytest.mark.slow
    def test_pseudo_hopf_demo(self, handler, out_dir):
        outcome = handler.handle('pseudo-hopf', {'out': out_dir, 'b_magnitudes': [5e-2]})
        assert outcome.exit_code == EXIT_OK
        assert _load(os.path.join(out_dir, 'pseudo_hopf_demo.json'))['passed']


class TestCli:

    def test_list(self, capsys):
        assert main(['--list']) == EXIT_OK
        out = capsys.readouterr().out
        assert all(name in out for name in COMMANDS)

    def test_run_config_from_flags(self, monkeypatch):
        monkeypatch.delenv('PWCYCLES_OUT', raising=False)
        argv = ['count', '--k', '1', '--tol-ode-rtol', '1e-9', '--adaptive']
        args = build_parser().parse_args(argv)
        props = type('Props', (), {'get': lambda self, key, default=None: None})()
        config = build_run_config(args, props)
        assert config['tolerances'] == {'ode-rtol': 1e-9}
        assert config['adaptive'] is True
        assert 'pseudo_hopf_mode' not in config
        assert config['out'] == 'out'

    def test_construct_end_to_end(self, tmp_path, monkeypatch, capsys):
        monkeypatch.delenv('PWCYCLES_OUT', raising=False)
        monkeypatch.chdir(tmp_path)
        out = str(tmp_path / 'run')
        assert main(['construct', '--k', '1', '--out', out]) == EXIT_OK
        printed = json.loads(capsys.readouterr().out)
        assert printed['passed'] is True
        assert os.path.exists(os.path.join(out, 'metrics.prom'))
        assert os.path.exists(tmp_path / 'logs' / 'pwcycles.log')

    def test_missing_command(self):
        assert main([]) == EXIT_USAGE

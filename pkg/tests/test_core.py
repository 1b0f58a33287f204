"""
Tests for properties, tolerances, run configuration and report writing
"""
import csv
import json

import numpy as np
import pytest

from core.errors import (
    EXIT_NUMERICAL, EXIT_USAGE, ConvergenceError, PreconditionError, UsageError,
)
from core.properties_configurator import PropertiesConfigurator
from core.report_writer import ReportWriter
from core.run_config import load_coefficient_tables, resolve_family, validate_run_config
from pwcycles.hamiltonian_family import default_epsilon_vector
from pwcycles.tolerances import OVERRIDE_FLAGS, Tolerances


@pytest.fixture
def props_file(tmp_path):
    path = tmp_path / "test.properties"
    path.write_text(
        "# run settings\n"
        "base.dir=/data\n"
        "output.dir=${base.dir}/out\n"
        "loop=${loop}\n"
        "numerics.residual=1e-9\n"
        "numerics.root_grid=512\n"
        "melnikov.schedule=1e-2, 1e-3,oops,1e-4\n"
        "flag=yes\n"
    )
    return str(path)


class TestPropertiesConfigurator:

    def test_references_resolve(self, props_file):
        props = PropertiesConfigurator([props_file])
        assert props.get('output.dir') == '/data/out'
        assert props.get_bool('flag')
        assert props.get_int('numerics.root_grid') == 512

    def test_environment_wins_over_properties(self, props_file, monkeypatch):
        monkeypatch.setenv('base.dir', '/env')
        assert PropertiesConfigurator([props_file]).get('output.dir') == '/env/out'

    def test_circular_reference_counts_as_missing(self, props_file):
        assert PropertiesConfigurator([props_file]).get('loop', 'fallback') == 'fallback'

    def test_float_list_skips_bad_items(self, props_file):
        props = PropertiesConfigurator([props_file])
        assert props.get_float_list('melnikov.schedule') == [1e-2, 1e-3, 1e-4]
        assert props.get_float_list('missing') is None

    def test_singleton(self, props_file):
        assert PropertiesConfigurator([props_file]) is PropertiesConfigurator()


class TestTolerances:

    def test_properties_override_defaults(self, props_file):
        tol = Tolerances.from_properties(PropertiesConfigurator([props_file]))
        assert tol.residual == 1e-9
        assert tol.root_grid == 512
        assert tol.margin == Tolerances().margin

    def test_cli_override(self):
        tol = Tolerances().with_overrides({'ode-rtol': 1e-8, 'root': None})
        assert tol.ode_rtol == 1e-8
        assert tol.root == Tolerances().root

    @pytest.mark.parametrize("value", [1e-15, 0.1])
    def test_override_bounds(self, value):
        with pytest.raises(UsageError) as info:
            Tolerances().with_overrides({'newton': value})
        assert info.value.exit_code == EXIT_USAGE

    def test_unknown_override(self):
        with pytest.raises(UsageError):
            Tolerances().with_overrides({'speed': 1e-3})

    def test_every_flag_names_a_field(self):
        names = set(Tolerances.__dataclass_fields__)
        assert set(OVERRIDE_FLAGS.values()) <= names


class TestRunConfig:

    def test_unknown_keys_rejected(self):
        with pytest.raises(UsageError):
            validate_run_config({'command': 'count', 'colour': 'red'})
        with pytest.raises(UsageError):
            validate_run_config({'k': 1})

    def test_defaults_from_canonical_file(self):
        k, epsilon, vector, tables = resolve_family({'k': 2})
        assert k == 2
        assert epsilon == 1e-3
        assert vector == default_epsilon_vector(2, tables)
        assert [t.level for t in tables] == [0, 1, 2]

    def test_explicit_arguments_win(self):
        _, epsilon, vector, _ = resolve_family({'k': 1, 'epsilon': 2e-3, 'epsilon_vector': [5e-3]})
        assert epsilon == 2e-3
        assert vector == (5e-3,)

    def test_vector_length_must_match(self):
        with pytest.raises(UsageError):
            resolve_family({'k': 2, 'epsilon_vector': [1e-2]})

    def test_deep_levels_need_the_flag(self):
        with pytest.raises(UsageError):
            resolve_family({'k': 3})

    def test_missing_file_falls_back(self, tmp_path):
        tables = load_coefficient_tables(str(tmp_path / "absent.json"))
        assert tables.source == 'canonical'
        assert len(tables.tables) == 1

    def test_mislabelled_level_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"levels": [{"k": 1, "aPlus": [0.0] * 7, "aMinus": [0.0] * 7}]}))
        with pytest.raises(UsageError):
            load_coefficient_tables(str(path))

    def test_wrong_coefficient_count_is_usage_error(self, tmp_path):
        path = tmp_path / "short.json"
        path.write_text(json.dumps({"levels": [{"k": 0, "aPlus": [0.0], "aMinus": [0.0]}]}))
        with pytest.raises((UsageError, PreconditionError)) as info:
            load_coefficient_tables(str(path))
        assert info.value.exit_code == EXIT_USAGE


class TestReportWriter:

    def test_json_is_sorted_and_plain(self, out_dir):
        writer = ReportWriter(out_dir)
        path = writer.write_json("r.json", {"b": np.float64(0.5), "a": (1, 2), "c": np.arange(2)})
        with open(path, encoding='utf-8') as f:
            text = f.read()
        assert json.loads(text) == {"a": [1, 2], "b": 0.5, "c": [0, 1]}
        assert text.index('"a"') < text.index('"b"')
        assert writer.written == [path]

    def test_csv_columns(self, out_dir):
        writer = ReportWriter(out_dir)
        rows = [{"y": np.float64(0.25), "delta": 1.0, "extra": 3}]
        path = writer.write_csv("t.csv", rows, ("y", "delta"))
        with open(path, encoding='utf-8', newline='') as f:
            rows = list(csv.DictReader(f))
        assert rows == [{"y": "0.25", "delta": "1.0"}]


def test_numerical_errors_exit_one():
    assert ConvergenceError("x").exit_code == EXIT_NUMERICAL
    assert ConvergenceError("x", y=np.float64(1.0)).to_dict()["context"]["y"] == 1.0

"""
Tests for config: YAML loading, strict keys and the help schema.
"""

import tempfile
from pathlib import Path

import pytest
import yaml

from wpn.config import (
    ConfigError,
    ExperimentConfig,
    describe_schema,
    load_config,
    parse_config,
    schema_lines,
)
from wpn.graph_core import named_graph


def _write_config(directory: str, document: dict, name: str = "config.yml") -> Path:
    path = Path(directory) / name
    path.write_text(yaml.safe_dump(document, sort_keys=False), encoding="utf-8")
    return path


class TestDefaults:
    """Tests for the default configuration."""

    def test_load_none(self):
        config = load_config(None)
        assert config.dynamics.engine == "gradient"
        assert config.dynamics.lam == 20.0
        assert config.seeds == list(range(10))
        assert config.output == "out"
        assert config.simulation.enabled is False

    def test_empty_document(self):
        assert parse_config(None).to_dict() == ExperimentConfig().to_dict()

    def test_domain_objects(self):
        config = load_config(None)
        assert config.criterion_config().epsilon == 1e-6
        assert config.mac_config().kind == "ideal_tdma"
        assert config.schedule().t0 == 10.0
        assert config.simulation_options().trigger == "periodic"
        assert config.dynamics_options()["dt"] == 0.01

    def test_generated_problem(self):
        """Without edge list or family the seeded generator supplies the graph."""
        g = load_config(None).problem_graph()
        assert g.n == 12
        assert g.positions


class TestParsing:
    """Tests for strict parsing."""

    def test_lambda_key(self):
        config = parse_config({"dynamics": {"lambda": 50}})
        assert config.dynamics.lam == 50.0
        assert config.to_dict()["dynamics"]["lambda"] == 50.0

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"dynamics": {"lamda": 50}})
        assert excinfo.value.key == "dynamics.lamda"
        assert "dynamics.lamda" in str(excinfo.value)

    def test_unknown_section(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"radio": {}})
        assert excinfo.value.key == "radio"

    def test_wrong_type(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"criterion": {"max_steps": "many"}})
        assert excinfo.value.key == "criterion.max_steps"

    def test_bool_is_not_int(self):
        with pytest.raises(ConfigError):
            parse_config({"criterion": {"max_steps": True}})

    def test_int_accepted_for_float(self):
        assert parse_config({"energy": {"g_a": 2}}).energy.g_a == 2.0

    def test_unknown_engine(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"dynamics": {"engine": "annealing"}})
        assert excinfo.value.key == "dynamics.engine"

    def test_non_positive_lambda(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"dynamics": {"lambda": 0}})
        assert excinfo.value.key == "dynamics.lambda"

    def test_zero_gains_rejected(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"energy": {"g_a": 0, "g_b": 0}})
        assert excinfo.value.key == "energy"

    def test_one_zero_gain_allowed(self):
        assert parse_config({"energy": {"g_a": 0}}).energy_config().g_a == 0.0

    def test_mac_validation(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"mac": {"p_transmit": 1.5}})
        assert excinfo.value.key == "mac"

    def test_seeds(self):
        assert parse_config({"seeds": [3, 4]}).seeds == [3, 4]
        with pytest.raises(ConfigError):
            parse_config({"seeds": []})
        with pytest.raises(ConfigError):
            parse_config({"seeds": [1.5]})

    def test_too_many_seeds(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"criterion": {"max_episodes": 2}, "seeds": [0, 1, 2]})
        assert excinfo.value.key == "seeds"

    def test_nullable_period(self):
        assert parse_config({"simulation": {"period": None}}).simulation.period is None
        assert parse_config({"simulation": {"period": 12}}).simulation_options().period == 12

    def test_family(self):
        config = parse_config({"problem": {"family": "K1,3"}})
        assert config.problem_graph() == named_graph("K1,3")

    def test_bad_family(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"problem": {"family": "Q3"}}).problem_graph()
        assert excinfo.value.key == "problem.family"


class TestLoadConfig:
    """Tests for loading files."""

    def test_edge_list_relative_to_config(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            Path(tmpdir, "p3.edges").write_text("n 3\n0 1\n1 2\n", encoding="utf-8")
            path = _write_config(tmpdir, {"problem": {"edge_list": "p3.edges"}})
            config = load_config(path)
            assert config.problem_graph() == named_graph("P3")

    def test_missing_edge_list(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = _write_config(tmpdir, {"problem": {"edge_list": "absent.edges"}})
            with pytest.raises(ConfigError) as excinfo:
                load_config(path).problem_graph()
            assert excinfo.value.key == "problem.edge_list"

    def test_invalid_yaml(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "broken.yml"
            path.write_text("dynamics: [unclosed\n", encoding="utf-8")
            with pytest.raises(ConfigError):
                load_config(path)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/config.yml")

    def test_sample_config(self):
        path = Path(__file__).resolve().parent.parent / "sample" / "config.yml"
        config = load_config(path)
        assert config.simulation.enabled
        assert config.problem_graph() == named_graph("P3")


class TestTopology:
    """Tests for the radio topology option."""

    def test_defaults_to_problem_graph(self):
        config = load_config(None)
        g = named_graph("P3")
        assert config.topology(g) is g

    def test_radius_over_positions(self):
        config = parse_config({"simulation": {"topology_radius": 2.0}})
        g = config.problem_graph()
        assert config.topology(g) == named_graph(f"K{g.n}")

    def test_radius_needs_positions(self):
        config = parse_config({"simulation": {"topology_radius": 0.5}})
        with pytest.raises(ConfigError):
            config.topology(named_graph("P3"))


class TestSchema:
    """Tests for the documented key list."""

    def test_every_key_listed(self):
        keys = {line.split(" = ", 1)[0] for line in schema_lines()}
        expected = {
            f"{section}.{key}"
            for section, values in ExperimentConfig().to_dict().items()
            if isinstance(values, dict)
            for key in values
        }
        assert expected | {"seeds", "output"} == keys

    def test_defaults_shown(self):
        lines = schema_lines()
        assert "dynamics.lambda = 20.0" in lines
        assert "simulation.period = null" in lines
        assert "simulation.enabled = false" in lines
        assert "problem.generator = random_geometric" in lines

    def test_describe_contains_every_line(self):
        text = describe_schema()
        for line in schema_lines():
            assert line in text

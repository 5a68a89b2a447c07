import pytest

from ras_lab.grids.lattice import DEFAULT_GRIDS
from ras_lab.runs.config import RunConfig
from ras_lab.runs.tests.factories import COARSE_CART_YAML
from ras_lab.systems.benchmarks import BenchmarkId, CartModel, ChaseModel
from ras_lab.utils.exceptions import ConfigError, ValidationError


def config_error(text: str) -> ConfigError:
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_yaml(text)
    return excinfo.value


class TestDefaults:
    def test_empty_document_is_the_cart_study(self):
        config = RunConfig.from_yaml("")
        assert isinstance(config.model(), CartModel)
        assert config.grid == DEFAULT_GRIDS[BenchmarkId.CART2D]
        assert config.solver.gamma == 0.999
        assert config.evaluation.count == 1000

    def test_chase_takes_its_own_grid(self):
        config = RunConfig.from_yaml("benchmark:\n  id: chase4d\n")
        assert isinstance(config.model(), ChaseModel)
        assert config.grid.ndim == 4

    def test_learning_seeds_follow_the_master_seed(self):
        config = RunConfig.from_yaml("seed: 11\nqlearn:\n  episodes: 3\n")
        assert config.qlearn.seed == 11
        assert config.ddpg.seed == 11
        assert config.qlearn.episodes == 3

    def test_ddpg_discount_follows_the_solver(self):
        assert RunConfig.from_yaml("solver:\n  gamma: 0.95\n").ddpg.gamma == 0.95
        assert RunConfig.from_yaml("solver:\n  gamma: 0.95\nddpg:\n  gamma: 0.9\n").ddpg.gamma == 0.9
        assert RunConfig.from_yaml("").ddpg.gamma == RunConfig.from_yaml("").solver.gamma

    def test_solver_config_uses_benchmark_lattices(self):
        solver = RunConfig.from_yaml(COARSE_CART_YAML).solver_config()
        assert solver.n_controls == 11
        assert solver.n_disturbances == 9
        assert solver.gamma == 0.95


class TestStrictness:
    def test_unknown_section_key_names_path_and_line(self):
        error = config_error("seed: 1\nsolver:\n  gamma: 0.9\n  gama: 0.9\n")
        assert error.details["path"] == "solver.gama"
        assert error.details["line"] == 4

    def test_unknown_top_level_key(self):
        error = config_error("seed: 1\noutput: out\n")
        assert error.details["path"] == "output"
        assert error.details["line"] == 2

    def test_zero_evaluation_count(self):
        error = config_error("evaluation:\n  count: 0\n")
        assert isinstance(error, ValidationError)
        assert error.details["path"] == "evaluation.count"
        assert error.details["line"] == 2

    def test_grid_dimension_must_match_benchmark(self):
        error = config_error("grid:\n  lower: [0, 0, 0]\n  upper: [1, 1, 1]\n  counts: [3, 3, 3]\n")
        assert error.details["path"] == "grid"

    def test_unknown_benchmark(self):
        error = config_error("benchmark:\n  id: quadrotor\n")
        assert error.details["path"] == "benchmark.id"
        assert error.details["line"] == 2

    def test_invalid_value_is_located(self):
        error = config_error("solver:\n  gamma: 1.5\n")
        assert error.details["path"] == "solver.gamma"
        assert error.details["line"] == 2

    def test_malformed_yaml(self):
        error = config_error("solver:\n  gamma: [0.9\n")
        assert error.details["line"] is not None

    def test_sections_must_be_mappings(self):
        assert config_error("solver: 3\n").details["path"] == "solver"

    def test_input_lattice_counts_per_dimension(self):
        error = config_error("solver:\n  control_counts: [5, 5]\n")
        assert error.details["path"] == "solver.control_counts"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.load(tmp_path / "absent.yaml")


class TestHash:
    def test_round_trip_is_identity(self):
        config = RunConfig.from_yaml(COARSE_CART_YAML)
        again = RunConfig.from_yaml(config.to_yaml())
        assert again.as_dict() == config.as_dict()
        assert again.config_hash == config.config_hash

    def test_equivalent_spellings_hash_alike(self):
        first = RunConfig.from_yaml("solver:\n  tolerance: 1e-6\nddpg:\n  tau: 1\n")
        second = RunConfig.from_yaml("solver:\n  tolerance: 0.000001\nddpg:\n  tau: 1.0\n")
        assert first.config_hash == second.config_hash

    def test_explicit_defaults_hash_like_omitted_ones(self):
        assert RunConfig.from_yaml("seed: 0\n").config_hash == RunConfig.from_yaml("").config_hash

    def test_any_change_changes_the_hash(self):
        assert RunConfig.from_yaml("seed: 1\n").config_hash != RunConfig.from_yaml("seed: 2\n").config_hash

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(COARSE_CART_YAML)
        assert RunConfig.load(path).config_hash == RunConfig.from_yaml(COARSE_CART_YAML).config_hash

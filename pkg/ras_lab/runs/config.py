"""Run configuration: a strict YAML document with one section per concern.

Unknown keys are rejected with their dotted path and source line. Missing
sections take benchmark-dependent defaults, and the hash covers the fully
defaulted document so two files meaning the same run hash the same.
"""
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml

from ras_lab.ddpg.training import DDPGConfig
from ras_lab.grids.io import PathLike
from ras_lab.grids.lattice import DEFAULT_GRIDS, GridSpec
from ras_lab.simulation.rollout import DisturbanceMode
from ras_lab.solvers.config import SCHEMES, QLearnConfig, SolverConfig
from ras_lab.systems.benchmarks import DEFAULT_DT, BenchmarkId, SystemModel, build_model
from ras_lab.utils.exceptions import ConfigError, RasLabError

POLICIES = ("ras", "ra", "neural")
LOOKUPS = ("nearest", "lookahead")
GRID_NAMES = ("h", "hg", "v", "v_ra", "h_q", "v_q")


@dataclass(frozen=True)
class BenchmarkSpec:
    id: str = BenchmarkId.CART2D.value
    dt: float = DEFAULT_DT
    #: Overrides of the benchmark constants.
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", {key: float(value) for key, value in dict(self.params).items()})


@dataclass(frozen=True)
class SolverSettings:
    gamma: float = 0.999
    tolerance: float = 1e-6
    max_sweeps: int = 20000
    scheme: str = "jacobi"
    epsilon_fraction: float = 1e-3
    threads: int = 1
    chunk_size: int = 4096
    stencil_cache_mb: float = 512.0
    #: Lattice values per input dimension; benchmark defaults when empty.
    control_counts: Tuple[int, ...] = ()
    disturbance_counts: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "control_counts", tuple(int(c) for c in self.control_counts))
        object.__setattr__(self, "disturbance_counts", tuple(int(c) for c in self.disturbance_counts))
        if self.scheme not in SCHEMES:
            raise ConfigError(f"Unknown sweep scheme '{self.scheme}'.", {"path": "solver.scheme"})
        if not 0 < self.gamma < 1:
            raise ConfigError("gamma must lie in (0, 1).", {"path": "solver.gamma", "gamma": self.gamma})

    def build(self, model: SystemModel, threads: Optional[int] = None) -> SolverConfig:
        return SolverConfig.for_model(
            model,
            control_counts=self.control_counts or None,
            disturbance_counts=self.disturbance_counts or None,
            gamma=self.gamma,
            tolerance=self.tolerance,
            max_sweeps=self.max_sweeps,
            scheme=self.scheme,
            epsilon_fraction=self.epsilon_fraction,
            threads=threads or self.threads,
            chunk_size=self.chunk_size,
            stencil_cache_mb=self.stencil_cache_mb,
        )


@dataclass(frozen=True)
class EvaluationSpec:
    count: int = 1000
    horizon: int = 600
    #: Membership threshold for sampling inside a set, as a fraction of the value range.
    threshold_fraction: float = 0.01
    modes: Tuple[str, ...] = (DisturbanceMode.RANDOM.value,)
    policies: Tuple[str, ...] = ("ras", "ra")
    policy_lookup: str = "lookahead"
    #: Start of the single ``simulate`` trajectory; the benchmark default when empty.
    initial_state: Tuple[float, ...] = ()
    #: Trajectories written to ``traj/`` per policy and mode.
    saved_trajectories: int = 10

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(DisturbanceMode(mode).value for mode in self.modes))
        object.__setattr__(self, "policies", tuple(self.policies))
        object.__setattr__(self, "initial_state", tuple(float(v) for v in self.initial_state))
        if self.count < 1:
            raise ConfigError("evaluation.count must be at least 1.", {"path": "evaluation.count", "count": self.count})
        if self.horizon < 1:
            raise ConfigError("evaluation.horizon must be at least 1.", {"path": "evaluation.horizon"})
        unknown = sorted(set(self.policies) - set(POLICIES))
        if unknown or not self.policies:
            raise ConfigError(
                "Unknown evaluation policies.", {"path": "evaluation.policies", "unknown": unknown, "choices": POLICIES}
            )
        if self.policy_lookup not in LOOKUPS:
            raise ConfigError(
                f"Unknown policy lookup '{self.policy_lookup}'.",
                {"path": "evaluation.policy_lookup", "choices": LOOKUPS},
            )


@dataclass(frozen=True)
class RenderSpec:
    #: State dimensions spanning the image plane.
    axes: Tuple[int, int] = (0, 1)
    #: Coordinates of the remaining dimensions, in order; zero when empty.
    fixed: Tuple[float, ...] = ()
    grids: Tuple[str, ...] = ("h", "hg", "v", "v_ra")
    #: Saved trajectories drawn over the figures.
    trajectories: int = 5
    #: Pixels per grid node.
    scale: int = 3

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(int(axis) for axis in self.axes))
        object.__setattr__(self, "fixed", tuple(float(value) for value in self.fixed))
        object.__setattr__(self, "grids", tuple(self.grids))
        unknown = sorted(set(self.grids) - set(GRID_NAMES))
        if unknown:
            raise ConfigError("Unknown grids to render.", {"path": "render.grids", "unknown": unknown})
        if self.scale < 1:
            raise ConfigError("render.scale must be positive.", {"path": "render.scale"})


SECTIONS = {
    "benchmark": BenchmarkSpec,
    "solver": SolverSettings,
    "qlearn": QLearnConfig,
    "ddpg": DDPGConfig,
    "evaluation": EvaluationSpec,
    "render": RenderSpec,
}
GRID_KEYS = ("lower", "upper", "counts")
TOP_LEVEL = ("benchmark", "grid", "solver", "qlearn", "ddpg", "evaluation", "render", "output_dir", "seed")
# Keys holding free-form mappings, checked by their consumer.
OPEN_MAPPINGS = {("benchmark", "params")}


def _key_lines(text: str) -> Dict[Tuple[str, ...], int]:
    """1-based source line of every mapping key, by key path."""
    lines: Dict[Tuple[str, ...], int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key_path = path + (str(key_node.value),)
                lines[key_path] = key_node.start_mark.line + 1
                walk(value_node, key_path)

    walk(yaml.compose(text), ())
    return lines


def _plain(value):
    if isinstance(value, (tuple, list)):
        return [_plain(item) for item in value]
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    return value


@dataclass(frozen=True)
class RunConfig:
    benchmark: BenchmarkSpec
    grid: GridSpec
    solver: SolverSettings = SolverSettings()
    qlearn: QLearnConfig = QLearnConfig()
    ddpg: DDPGConfig = DDPGConfig()
    evaluation: EvaluationSpec = EvaluationSpec()
    render: RenderSpec = RenderSpec()
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        try:
            model = self.model()
        except RasLabError as error:
            raise ConfigError(f"Invalid benchmark: {error.message}", {**error.details, "path": "benchmark"}) from None
        if self.grid.ndim != model.state_dim:
            raise ConfigError(
                "Grid dimension does not match the benchmark.",
                {"path": "grid", "grid": self.grid.ndim, "benchmark": model.state_dim},
            )
        for key, counts, dim in (
            ("control_counts", self.solver.control_counts, model.control_dim),
            ("disturbance_counts", self.solver.disturbance_counts, model.disturbance_dim),
        ):
            if counts and len(counts) != dim:
                raise ConfigError(
                    "One lattice count per input dimension is required.", {"path": f"solver.{key}", "dimensions": dim}
                )
        if self.evaluation.initial_state and len(self.evaluation.initial_state) != model.state_dim:
            raise ConfigError("evaluation.initial_state has the wrong dimension.", {"path": "evaluation.initial_state"})
        axes = self.render.axes
        if len(axes) != 2 or axes[0] == axes[1] or not all(0 <= axis < model.state_dim for axis in axes):
            raise ConfigError("render.axes must name two distinct state dimensions.", {"path": "render.axes"})
        if self.render.fixed and len(self.render.fixed) != model.state_dim - 2:
            raise ConfigError("render.fixed needs one value per remaining dimension.", {"path": "render.fixed"})
        try:
            self.solver_config()
        except RasLabError as error:
            raise ConfigError(f"Invalid 'solver': {error.message}", {**error.details, "path": "solver"}) from None

    def model(self) -> SystemModel:
        return build_model(self.benchmark.id, dt=self.benchmark.dt, params=self.benchmark.params)

    def solver_config(self, threads: Optional[int] = None) -> SolverConfig:
        return self.solver.build(self.model(), threads)

    def as_dict(self) -> Dict[str, Any]:
        document: Dict[str, Any] = {"grid": self.grid.as_dict(), "output_dir": self.output_dir, "seed": self.seed}
        for name in SECTIONS:
            document[name] = _plain(asdict(getattr(self, name)))
        return document

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.as_dict(), sort_keys=True, default_flow_style=None)

    @classmethod
    def from_dict(
        cls, data: Optional[Mapping[str, Any]], lines: Optional[Dict[Tuple[str, ...], int]] = None
    ) -> "RunConfig":
        lines = lines or {}
        data = dict(data or {})
        _check_keys(data, lines)

        def section(name: str, default: Dict[str, Any] = None) -> Dict[str, Any]:
            value = data.get(name)
            if value is None:
                return dict(default or {})
            if not isinstance(value, Mapping):
                raise ConfigError(f"Section '{name}' must be a mapping.", {"path": name, "line": lines.get((name,))})
            return {**(default or {}), **value}

        seed = _build(int, data.get("seed", 0), "seed", lines)
        benchmark = _build(BenchmarkSpec, section("benchmark"), "benchmark", lines)
        try:
            default_grid = DEFAULT_GRIDS[BenchmarkId(benchmark.id)]
        except ValueError:
            raise ConfigError(
                f"Unknown benchmark '{benchmark.id}'.",
                {
                    "path": "benchmark.id",
                    "line": lines.get(("benchmark", "id")),
                    "choices": [b.value for b in BenchmarkId],
                },
            ) from None
        # the critics are compared against tabular values discounted by solver.gamma
        solver = _build(SolverSettings, section("solver"), "solver", lines)
        return _build(
            cls,
            dict(
                benchmark=benchmark,
                grid=_build(GridSpec, section("grid", default_grid.as_dict()), "grid", lines),
                solver=solver,
                qlearn=_build(QLearnConfig, section("qlearn", {"seed": seed}), "qlearn", lines),
                ddpg=_build(DDPGConfig, section("ddpg", {"seed": seed, "gamma": solver.gamma}), "ddpg", lines),
                evaluation=_build(EvaluationSpec, section("evaluation"), "evaluation", lines),
                render=_build(RenderSpec, section("render"), "render", lines),
                output_dir=str(data.get("output_dir", "out")),
                seed=seed,
            ),
            "",
            lines,
        )

    @classmethod
    def from_yaml(cls, text: str, source: str = "<string>") -> "RunConfig":
        try:
            data = yaml.safe_load(text)
            lines = _key_lines(text) if data else {}
        except yaml.YAMLError as error:
            mark = getattr(error, "problem_mark", None)
            raise ConfigError(
                f"Malformed YAML in {source}.",
                {"source": source, "line": mark.line + 1 if mark else None, "problem": str(error)},
            ) from None
        if data is not None and not isinstance(data, Mapping):
            raise ConfigError("A run configuration must be a mapping.", {"source": source})
        return cls.from_dict(data, lines)

    @classmethod
    def load(cls, path: PathLike) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError("Configuration file not found.", {"path": str(path)})
        return cls.from_yaml(path.read_text(), source=str(path))


def _allowed_keys(name: str) -> List[str]:
    if name == "grid":
        return list(GRID_KEYS)
    return [f.name for f in fields(SECTIONS[name])]


def _check_keys(data: Mapping[str, Any], lines: Dict[Tuple[str, ...], int]):
    for key in data:
        if key not in TOP_LEVEL:
            raise ConfigError(
                f"Unknown configuration key '{key}'.",
                {"path": key, "line": lines.get((key,)), "allowed": list(TOP_LEVEL)},
            )
    for name in ("grid",) + tuple(SECTIONS):
        section = data.get(name)
        if not isinstance(section, Mapping):
            continue
        allowed = _allowed_keys(name)
        for key in section:
            if key not in allowed:
                raise ConfigError(
                    f"Unknown configuration key '{name}.{key}'.",
                    {"path": f"{name}.{key}", "line": lines.get((name, key)), "allowed": allowed},
                )
            value = section[key]
            if isinstance(value, Mapping) and (name, key) not in OPEN_MAPPINGS:
                raise ConfigError(
                    f"'{name}.{key}' must not be a mapping.", {"path": f"{name}.{key}", "line": lines.get((name, key))}
                )


def _build(factory, values, path: str, lines: Dict[Tuple[str, ...], int]):
    """Call ``factory`` on a section, locating any failure in the source."""
    try:
        if isinstance(values, dict):
            return factory(**_coerce(factory, values))
        return factory(values)
    except ConfigError as error:
        key_path = tuple(str(error.details.get("path", path)).split("."))
        error.details.setdefault("line", lines.get(key_path) or lines.get(key_path[:1]))
        raise
    except RasLabError as error:
        raise ConfigError(
            f"Invalid '{path or 'configuration'}': {error.message}",
            {"path": path, "line": lines.get((path,)), **error.details},
        ) from None
    except (TypeError, ValueError, KeyError) as error:
        raise ConfigError(
            f"Invalid '{path or 'configuration'}': {error}", {"path": path, "line": lines.get((path,))}
        ) from None


def _coerce(factory, values: Dict[str, Any]) -> Dict[str, Any]:
    """Cast scalars to the declared field type, so ``1`` and ``1.0`` hash alike."""
    if not isinstance(factory, type) or not hasattr(factory, "__dataclass_fields__"):
        return values
    types = {f.name: f.type for f in fields(factory)}
    coerced = dict(values)
    for key, value in values.items():
        if types.get(key) in (int, float) and isinstance(value, (int, float, str)) and not isinstance(value, bool):
            coerced[key] = types[key](value)
    return coerced

"""Scenario configuration, restarts and alphabet sweeps."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import analysis
from .model import (
    GRID_TYPES,
    AgentType,
    EnvironmentSpec,
    PopulationModel,
    agent_env_info,
    agent_output_info,
    blind_info,
    code_similarity,
    env_info_pair,
    factored_sensor,
    grid_structure,
    similarity_bound,
    symmetric_sensor,
    type_sensor,
    well_mixed_structure,
)
from .optim import CmaEsConfig, OptimizationTrace, ParamCodec, optimize_scenario

log = logging.getLogger(__name__)

KINDS = ("well_mixed", "grid", "flexible", "heterogeneous")


class ConfigError(ValueError):
    pass


@dataclass
class OptimizerSettings:
    max_evaluations: int = 200_000
    population_size: int | None = None
    sigma0: float = 0.3
    restarts: int | None = None
    stagnation_generations: int = 200
    target_tolerance: float = 1e-9
    # standard deviation of a random starting mean; 0 starts every restart at uniform codes
    initial_spread: float = 0.0


@dataclass
class TypeGroup:
    id: str
    region: list[int]
    count: int


@dataclass
class ScenarioConfig:
    kind: str
    seed: int
    n_agents: int | None = None
    grid: tuple[int, int] | None = None
    env_states: int = 4
    env_distribution: list[float] | None = None
    sensor: str = "factored"  # factored | symmetric | types
    noise: float = 0.01
    types: list[TypeGroup] = field(default_factory=list)
    output_states: int = 4
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    cluster_tolerance: float = 1e-3
    structure_threshold: float | None = None
    out_dir: str | None = None

    def __post_init__(self):
        try:
            if isinstance(self.optimizer, dict):
                self.optimizer = OptimizerSettings(**self.optimizer)
            self.types = [TypeGroup(**t) if isinstance(t, dict) else t for t in self.types]
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.seed is None or int(self.seed) != self.seed:
            raise ConfigError("seed is required and must be an integer")
        if self.kind == "grid":
            if not self.grid or len(self.grid) != 2 or min(self.grid) < 1:
                raise ConfigError("grid scenario needs grid = [width, height] with positive entries")
            self.grid = (int(self.grid[0]), int(self.grid[1]))
            n = self.grid[0] * self.grid[1]
            if self.n_agents not in (None, n):
                raise ConfigError(f"n_agents {self.n_agents} disagrees with grid {self.grid}")
            self.n_agents = n
        if self.kind == "heterogeneous" or self.sensor == "types":
            self.sensor = "types"
            if not self.types:
                raise ConfigError("type-based sensors need a non-empty 'types' list")
            n = sum(t.count for t in self.types)
            if self.n_agents not in (None, n):
                raise ConfigError(f"n_agents {self.n_agents} disagrees with type counts ({n})")
            self.n_agents = n
        if not self.n_agents or self.n_agents < 1:
            raise ConfigError("n_agents must be a positive integer")
        if self.sensor not in ("factored", "symmetric", "types"):
            raise ConfigError(f"unknown sensor template {self.sensor!r}")
        if self.sensor == "factored" and self.env_states & (self.env_states - 1):
            raise ConfigError("factored sensor needs a power-of-two number of environment states")
        if self.output_states < 1:
            raise ConfigError("output_states must be positive")
        if self.optimizer.restarts is None:
            self.optimizer.restarts = 10 if self.kind == "heterogeneous" else 3
        if self.optimizer.restarts < 1:
            raise ConfigError("restarts must be at least 1")
        if self.optimizer.initial_spread < 0:
            raise ConfigError("initial_spread must be nonnegative")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioConfig:
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kind" not in data:
            raise ConfigError("config is missing 'kind'")
        if "seed" not in data:
            raise ConfigError("config is missing 'seed'")
        if data.get("grid") is not None:
            data["grid"] = tuple(data["grid"])
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> ScenarioConfig:
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if d["grid"] is not None:
            d["grid"] = list(d["grid"])
        return d

    def replace(self, **changes) -> ScenarioConfig:
        d = self.to_dict()
        d.update(changes)
        return ScenarioConfig.from_dict(d)


def quadrant_types(count: int = 4) -> list[TypeGroup]:
    return [TypeGroup(t.id, sorted(t.region), count) for t in GRID_TYPES]


def build_template(config: ScenarioConfig) -> PopulationModel:
    """Population with uniform codes, the configured sensors and structure."""
    if config.env_distribution is not None:
        env = EnvironmentSpec(config.env_distribution)
        if env.states != config.env_states:
            raise ConfigError("env_distribution length disagrees with env_states")
    else:
        env = EnvironmentSpec.uniform(config.env_states)

    types: list[AgentType | None]
    if config.sensor == "types":
        sensors, types = [], []
        for group in config.types:
            t = AgentType(group.id, frozenset(group.region))
            s = type_sensor(t, env).table
            sensors += [s] * group.count
            types += [t] * group.count
        sensors = np.stack(sensors)
    else:
        if config.sensor == "factored":
            s = factored_sensor(int(np.log2(config.env_states)), config.noise)
        else:
            s = symmetric_sensor(config.env_states, config.noise)
        sensors = np.broadcast_to(s.table, (config.n_agents,) + s.table.shape)
        types = [None] * config.n_agents

    n = config.n_agents
    if config.kind == "grid":
        structure = grid_structure(*config.grid)
    else:
        # flexible runs start from the well-mixed structure (all-zero logits)
        structure = well_mixed_structure(n)
    n_y = sensors.shape[-1]
    codes = np.full((n, n_y, config.output_states), 1.0 / config.output_states)
    return PopulationModel.from_arrays(env, sensors, codes, structure, types)


def build_codec(config: ScenarioConfig, template: PopulationModel) -> ParamCodec:
    return ParamCodec.for_model(template, free_structure=config.kind == "flexible")


def restart_seeds(seed: int, restarts: int) -> list[int]:
    return [int(s.generate_state(1, dtype=np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(restarts)]


@dataclass
class RestartResult:
    seed: int
    model: PopulationModel
    initial_model: PopulationModel
    trace: OptimizationTrace
    similarity: float


def run_restarts(config: ScenarioConfig, template=None, codec=None) -> list[RestartResult]:
    template = template or build_template(config)
    codec = codec or build_codec(config, template)
    opt = config.optimizer
    results = []
    for k, seed in enumerate(restart_seeds(config.seed, opt.restarts)):
        mean = None
        if opt.initial_spread > 0:
            mean = np.random.default_rng(seed).normal(scale=opt.initial_spread, size=codec.dimension)
        cma = CmaEsConfig(
            dimension=codec.dimension,
            population_size=opt.population_size,
            sigma0=opt.sigma0,
            max_evaluations=opt.max_evaluations,
            target_tolerance=opt.target_tolerance,
            stagnation_generations=opt.stagnation_generations,
            seed=seed,
            initial_mean=mean,
        )
        model, trace = optimize_scenario(template, codec, cma)
        initial = codec.apply(template, trace.initial_parameters)
        sim = code_similarity(model)
        log.info("%s restart %d/%d: similarity %.6f after %d evaluations (%s)",
                 config.kind, k + 1, opt.restarts, sim, trace.evaluations, trace.stop_reason)
        results.append(RestartResult(seed, model, initial, trace, sim))
    return results


def default_threshold(config: ScenarioConfig) -> float:
    """Edge threshold for structure graphs: zero for fixed structures; for
    flexible ones a hundredth of the uniform pair weight."""
    if config.structure_threshold is not None:
        return config.structure_threshold
    if config.kind == "flexible":
        return 0.01 / config.n_agents**2
    return 0.0


@dataclass
class RunReport:
    config: dict[str, Any]
    restart_seed: int
    initial_code_similarity: float
    final_code_similarity: float
    similarity_bound: float
    env_info_pair: float
    blind_info: float | None
    agent_env_info: list[float]
    agent_output_info: list[float]
    clusters: list[dict[str, Any]]
    components: list[list[int]]
    restart_similarities: list[float]
    evaluations: int
    stop_reason: str
    artifacts: dict[str, str] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_json_dict(self) -> dict[str, Any]:
        """Everything except wall time, which would break byte-for-byte
        reproducibility of results.json."""
        d = asdict(self)
        d.pop("wall_time")
        return d


def summarize(config: ScenarioConfig, best: RestartResult, restarts: list[RestartResult]) -> RunReport:
    model = best.model
    clusters = analysis.group_codes(model.codes, config.cluster_tolerance)
    graph = analysis.structure_graph(model.structure, default_threshold(config))
    return RunReport(
        config=config.to_dict(),
        restart_seed=best.seed,
        initial_code_similarity=code_similarity(best.initial_model),
        final_code_similarity=best.similarity,
        similarity_bound=similarity_bound(model),
        env_info_pair=env_info_pair(model),
        blind_info=blind_info(model) if config.kind == "heterogeneous" else None,
        agent_env_info=[agent_env_info(model, i) for i in range(model.n_agents)],
        agent_output_info=[agent_output_info(model, i) for i in range(model.n_agents)],
        clusters=[
            {"members": list(c.members), "count": c.count, "representative": c.representative.tolist()}
            for c in clusters
        ],
        components=[sorted(c) for c in analysis.connected_components(graph)],
        restart_similarities=[r.similarity for r in restarts],
        evaluations=sum(r.trace.evaluations for r in restarts),
        stop_reason=best.trace.stop_reason,
    )


def run(config: ScenarioConfig, out_dir: str | Path | None = None, write: bool = True):
    """Optimize with restarts, keep the restart with the highest code
    similarity, and write the artifacts. Returns (report, best restart)."""
    from .artifacts import emit_artifacts

    start = time.perf_counter()
    restarts = run_restarts(config)
    best = max(restarts, key=lambda r: r.similarity)
    report = summarize(config, best, restarts)
    report.wall_time = time.perf_counter() - start
    out = out_dir or config.out_dir
    if write and out is not None:
        emit_artifacts(report, best.model, best.trace, out, initial_model=best.initial_model)
    return report, best


@dataclass
class SweepRow:
    output_states: int
    best_blind_info: float
    blind_info_of_best_similarity: float
    best_similarity: float
    centre_posterior: float
    restart_blind_info: list[float]


def sweep_alphabet(
    base: ScenarioConfig, sizes, out_dir: str | Path | None = None, centre_state: int | None = None
) -> list[SweepRow]:
    """Best-of-restarts blind information for each alphabet size.

    ``best_blind_info`` is the maximum over restarts; the blind information
    of the restart with the best code similarity is reported alongside.
    ``centre_posterior`` is the largest posterior any output pair puts on
    ``centre_state`` (0-based; defaults to the middle state) in the restart
    with the best blind information.
    """
    from .artifacts import write_sweep_csv

    sizes = list(sizes)
    if not sizes:
        raise ValueError("empty alphabet range")
    if centre_state is None:
        centre_state = base.env_states // 2
    rows = []
    for nx in sizes:
        config = base.replace(output_states=nx)
        restarts = run_restarts(config)
        infos = [blind_info(r.model) for r in restarts]
        k = int(np.argmax(infos))
        best_sim = max(range(len(restarts)), key=lambda i: restarts[i].similarity)
        _, centre = analysis.concept_table(restarts[k].model).best_pair_for(centre_state)
        rows.append(SweepRow(nx, infos[k], infos[best_sim], restarts[best_sim].similarity, centre, infos))
        log.info("|X|=%d: best blind info %.5f", nx, infos[k])
        if out_dir is not None:
            from .artifacts import emit_artifacts
            best = restarts[k]
            report = summarize(config, best, restarts)
            emit_artifacts(report, best.model, best.trace, Path(out_dir) / f"x{nx}",
                           initial_model=best.initial_model)
    if out_dir is not None:
        write_sweep_csv(rows, Path(out_dir) / "sweep.csv")
    return rows

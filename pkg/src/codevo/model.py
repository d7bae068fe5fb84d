"""Population model: environment, per-agent sensors and codes, and the
interaction structure p(Θ, Θ′).

Objective quantities are computed from the factorized arrays directly; the
fully assembled joint from :func:`build_joint` is for inspection and
verification. The factorized routines accept a leading batch axis on codes
and structure so an optimizer can score a whole generation at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .infotheory import (
    SUM_TOL,
    ConditionalTable,
    JointTable,
    Variable,
    entropy_of,
    mutual_information_matrix,
    product_and_normalize,
)

# variable names used in assembled joints
THETA, THETA_P = "theta", "theta'"
MU = "mu"
Y, Y_P = "y", "y'"
X, X_P = "x", "x'"


def _stochastic(arr, what: str, ndim: int) -> np.ndarray:
    a = np.array(arr, dtype=float)
    if a.ndim != ndim:
        raise ValueError(f"{what}: expected {ndim}-d array, got shape {a.shape}")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError(f"{what}: entries must be finite and nonnegative")
    bad = np.abs(a.sum(axis=-1) - 1.0) > SUM_TOL
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ValueError(f"{what}: row {idx} does not sum to 1")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class EnvironmentSpec:
    distribution: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "distribution", _stochastic(self.distribution, "environment", 1))

    @classmethod
    def uniform(cls, states: int) -> EnvironmentSpec:
        if states < 1:
            raise ValueError("environment needs at least one state")
        return cls(np.full(states, 1.0 / states))

    @property
    def states(self) -> int:
        return self.distribution.shape[0]


@dataclass(frozen=True, eq=False)
class SensorSpec:
    """p(y | μ) for one agent, shape (|μ|, |Y|)."""

    table: np.ndarray
    noise: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "table", _stochastic(self.table, "sensor", 2))
        if self.noise is not None and not 0.0 <= self.noise < 1.0:
            raise ValueError(f"sensor noise must lie in [0, 1), got {self.noise}")

    @property
    def sensor_states(self) -> int:
        return self.table.shape[1]


@dataclass(frozen=True, eq=False)
class Code:
    """p(x | y), shape (|Y|, |X|)."""

    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", _stochastic(self.table, "code", 2))

    @classmethod
    def uniform(cls, sensor_states: int, output_states: int) -> Code:
        return cls(np.full((sensor_states, output_states), 1.0 / output_states))

    @property
    def shape(self) -> tuple[int, int]:
        return self.table.shape


@dataclass(frozen=True)
class AgentType:
    """Sensor type: which environment states (1-based) an agent can tell
    apart from the rest. An empty region is a blind agent."""

    id: str
    region: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "region", frozenset(int(s) for s in self.region))
        if any(s < 1 for s in self.region):
            raise ValueError(f"type {self.id}: region states are 1-based")

    @property
    def blind(self) -> bool:
        return not self.region


# Five sensor types over a uniform 3x3 environment (states numbered row-wise 1..9).
GRID_TYPES = (
    AgentType("phi1"),
    AgentType("phi2", frozenset({1, 2, 4, 5})),
    AgentType("phi3", frozenset({2, 3, 5, 6})),
    AgentType("phi4", frozenset({4, 5, 7, 8})),
    AgentType("phi5", frozenset({5, 6, 8, 9})),
)


@dataclass(frozen=True, eq=False)
class PopulationStructure:
    """p(θ, θ′) over ordered agent pairs."""

    pair_probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.pair_probabilities, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"structure must be a square matrix, got shape {p.shape}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("structure entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"structure sums to {p.sum()!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "pair_probabilities", p)

    @property
    def n_agents(self) -> int:
        return self.pair_probabilities.shape[0]

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.pair_probabilities))


@dataclass(frozen=True, eq=False)
class Agent:
    sensor: SensorSpec
    code: Code
    type: AgentType | None = None


@dataclass(frozen=True, eq=False)
class PopulationModel:
    environment: EnvironmentSpec
    agents: tuple[Agent, ...]
    structure: PopulationStructure
    output_states: int = field(default=0)

    def __post_init__(self):
        agents = tuple(self.agents)
        if not agents:
            raise ValueError("population has no agents")
        object.__setattr__(self, "agents", agents)
        n_y = agents[0].sensor.sensor_states
        n_x = self.output_states or agents[0].code.shape[1]
        object.__setattr__(self, "output_states", n_x)
        for i, a in enumerate(agents):
            if a.sensor.table.shape != (self.environment.states, n_y):
                raise ValueError(
                    f"agent {i}: sensor shape {a.sensor.table.shape}, "
                    f"expected {(self.environment.states, n_y)}"
                )
            if a.code.shape != (n_y, n_x):
                raise ValueError(f"agent {i}: code shape {a.code.shape}, expected {(n_y, n_x)}")
        if self.structure.n_agents != len(agents):
            raise ValueError(
                f"structure is {self.structure.n_agents}x{self.structure.n_agents} "
                f"but population has {len(agents)} agents"
            )

    @classmethod
    def from_arrays(cls, env, sensors, codes, structure, types=None) -> PopulationModel:
        env = env if isinstance(env, EnvironmentSpec) else EnvironmentSpec(env)
        structure = structure if isinstance(structure, PopulationStructure) else PopulationStructure(structure)
        sensors = np.asarray(sensors, dtype=float)
        codes = np.asarray(codes, dtype=float)
        if sensors.ndim == 2:
            sensors = np.broadcast_to(sensors, (codes.shape[0],) + sensors.shape)
        types = list(types) if types is not None else [None] * codes.shape[0]
        if not (len(sensors) == len(codes) == len(types)):
            raise ValueError("sensors, codes and types disagree on the number of agents")
        agents = tuple(Agent(SensorSpec(s), Code(c), t) for s, c, t in zip(sensors, codes, types))
        return cls(env, agents, structure, codes.shape[-1])

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def sensor_states(self) -> int:
        return self.agents[0].sensor.sensor_states

    @cached_property
    def sensors(self) -> np.ndarray:
        """Stacked sensors, shape (n, |μ|, |Y|)."""
        return np.stack([a.sensor.table for a in self.agents])

    @cached_property
    def codes(self) -> np.ndarray:
        """Stacked codes, shape (n, |Y|, |X|)."""
        return np.stack([a.code.table for a in self.agents])

    @property
    def types(self) -> list[AgentType | None]:
        return [a.type for a in self.agents]

    def with_codes(self, codes, structure=None) -> PopulationModel:
        codes = np.asarray(codes, dtype=float)
        if codes.shape[0] != self.n_agents:
            raise ValueError(f"{codes.shape[0]} codes for {self.n_agents} agents")
        agents = tuple(replace(a, code=Code(c)) for a, c in zip(self.agents, codes))
        if structure is None:
            structure = self.structure
        elif not isinstance(structure, PopulationStructure):
            structure = PopulationStructure(structure)
        return PopulationModel(self.environment, agents, structure, codes.shape[-1])


# --------------------------------------------------------------------------
# structures and sensors

def well_mixed_structure(n: int) -> PopulationStructure:
    if n < 1:
        raise ValueError("well-mixed structure needs at least one agent")
    return PopulationStructure(np.full((n, n), 1.0 / n**2))


def grid_neighbours(width: int, height: int) -> list[tuple[int, int]]:
    """Undirected 4-neighbour pairs (i < j), agents numbered row-wise."""
    pairs = []
    for r in range(height):
        for c in range(width):
            i = r * width + c
            if c + 1 < width:
                pairs.append((i, i + 1))
            if r + 1 < height:
                pairs.append((i, i + width))
    return pairs


def grid_structure(width: int, height: int) -> PopulationStructure:
    """Uniform over self-pairs and ordered 4-neighbour pairs of a grid."""
    if width < 1 or height < 1:
        raise ValueError(f"grid dimensions must be positive, got {width}x{height}")
    n = width * height
    mask = np.eye(n, dtype=bool)
    for i, j in grid_neighbours(width, height):
        mask[i, j] = mask[j, i] = True
    return PopulationStructure(mask / mask.sum())


def symmetric_sensor(states: int, eps: float) -> SensorSpec:
    """|Y| = |μ| = states; correct reading w.p. 1-ε, the rest spread evenly."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"sensor noise must lie in [0, 1), got {eps}")
    if states == 1:
        return SensorSpec(np.ones((1, 1)), eps)
    t = np.full((states, states), eps / (states - 1))
    np.fill_diagonal(t, 1.0 - eps)
    return SensorSpec(t, eps)


def factored_sensor(bits: int, eps: float) -> SensorSpec:
    """Environment of 2**bits states read as independent binary components,
    each through a binary symmetric channel with crossover ε.

    State and sensor indices share the same bit layout, so sensor state k
    names environment state k.
    """
    if bits < 1:
        raise ValueError("factored sensor needs at least one component")
    channel = symmetric_sensor(2, eps).table
    t = np.ones((1, 1))
    for _ in range(bits):
        t = np.kron(t, channel)
    return SensorSpec(t, eps)


def type_sensor(agent_type: AgentType, env: EnvironmentSpec) -> SensorSpec:
    """Binary sensor reading y1 inside ``agent_type.region`` and y2 outside;
    a blind type reads either with probability 1/2 regardless of μ."""
    states = env.states
    if any(s > states for s in agent_type.region):
        raise ValueError(f"type {agent_type.id}: region exceeds {states} states")
    if len(agent_type.region) == states:
        raise ValueError(f"type {agent_type.id}: region covers every state, nothing to distinguish")
    if agent_type.blind:
        return SensorSpec(np.full((states, 2), 0.5))
    inside = np.array([(s + 1) in agent_type.region for s in range(states)], dtype=float)
    return SensorSpec(np.column_stack([inside, 1.0 - inside]), 0.0)


# --------------------------------------------------------------------------
# factorized quantities

def output_given_env(sensors: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """p(x | μ, θ), shape (..., n, |μ|, |X|); codes may carry batch axes."""
    return np.einsum("amy,...ayx->...amx", sensors, codes)


def _pair_env_joint(env, left: np.ndarray, structure: np.ndarray, right: np.ndarray) -> np.ndarray:
    """p(μ, u, v) = p(μ) Σ p(θ,θ′) L[θ,μ,u] R[θ′,μ,v], shape (..., |μ|, |U|, |V|)."""
    left_w = np.einsum("...ab,...amu->...bmu", structure, left)
    return np.einsum("m,...bmu,...bmv->...muv", env, left_w, right)


def output_pair_env_joint(env, sensors, codes, structure) -> np.ndarray:
    """p(μ, x, x′)."""
    q = output_given_env(sensors, codes)
    return _pair_env_joint(env, q, structure, q)


def output_pair_joint(env, sensors, codes, structure) -> np.ndarray:
    """p(x, x′), with optional leading batch axes on codes and structure."""
    q = output_given_env(sensors, codes)
    w = np.einsum("...ab,...bmv->...amv", structure, q)
    return np.einsum("m,...amu,...amv->...uv", env, q, w)


def code_similarity_arrays(env, sensors, codes, structure) -> np.ndarray | float:
    """I(X_Θ; X_Θ′) from raw arrays; batched over leading axes."""
    return mutual_information_matrix(output_pair_joint(env, sensors, codes, structure))


def _info_about_env(p_env_rest: np.ndarray) -> float:
    """I(μ; R) for a joint shaped (|μ|, ...)."""
    flat = p_env_rest.reshape(p_env_rest.shape[0], -1)
    return float(mutual_information_matrix(flat))


def code_similarity(model: PopulationModel) -> float:
    """I(X_Θ; X_Θ′) in bits."""
    return float(code_similarity_arrays(
        model.environment.distribution, model.sensors, model.codes, model.structure.pair_probabilities
    ))


def similarity_bound(model: PopulationModel) -> float:
    """I(Y_Θ; Y_Θ′) in bits."""
    s = model.sensors
    pyy = _pair_env_joint(model.environment.distribution, s, model.structure.pair_probabilities, s).sum(axis=0)
    return float(mutual_information_matrix(pyy))


def env_info_pair(model: PopulationModel) -> float:
    """I(μ; Y_Θ, X_Θ′): environmental information from own sensor plus the
    perceived output."""
    q = output_given_env(model.sensors, model.codes)
    p = _pair_env_joint(model.environment.distribution, model.sensors, model.structure.pair_probabilities, q)
    return _info_about_env(p)


def own_sensor_info(model: PopulationModel) -> float:
    """I(μ; Y_Θ) with Θ drawn from the structure's first marginal."""
    p_theta = model.structure.pair_probabilities.sum(axis=1)
    p = np.einsum("a,m,amy->my", p_theta, model.environment.distribution, model.sensors)
    return _info_about_env(p)


def side_information(model: PopulationModel) -> float:
    """I(μ; X_Θ′ | Y_Θ) = I(μ; Y_Θ, X_Θ′) − I(μ; Y_Θ)."""
    return max(env_info_pair(model) - own_sensor_info(model), 0.0)


def blind_info(model: PopulationModel) -> float:
    """I(μ; X_Θ, X_Θ′): what an observer without sensors learns from an
    output pair."""
    p = output_pair_env_joint(
        model.environment.distribution, model.sensors, model.codes, model.structure.pair_probabilities
    )
    return _info_about_env(p)


def _check_agent(model: PopulationModel, agent: int):
    if not (isinstance(agent, (int, np.integer)) and 0 <= agent < model.n_agents):
        raise IndexError(f"agent index {agent!r} out of range for {model.n_agents} agents")


def agent_env_info(model: PopulationModel, agent: int) -> float:
    """I(μ; Y_θ) for a single agent."""
    _check_agent(model, agent)
    p = model.environment.distribution[:, None] * model.sensors[agent]
    return _info_about_env(p)


def agent_output_info(model: PopulationModel, agent: int) -> float:
    """I(μ; X_θ) for a single agent."""
    _check_agent(model, agent)
    q = model.sensors[agent] @ model.codes[agent]
    return _info_about_env(model.environment.distribution[:, None] * q)


def environment_entropy(model: PopulationModel) -> float:
    return float(entropy_of(model.environment.distribution))


# --------------------------------------------------------------------------
# assembled joint

def model_variables(model: PopulationModel) -> dict[str, Variable]:
    n, m = model.n_agents, model.environment.states
    ny, nx = model.sensor_states, model.output_states
    return {
        THETA: Variable(THETA, n), THETA_P: Variable(THETA_P, n), MU: Variable(MU, m),
        Y: Variable(Y, ny), Y_P: Variable(Y_P, ny), X: Variable(X, nx), X_P: Variable(X_P, nx),
    }


def model_factors(model: PopulationModel) -> list[JointTable | ConditionalTable]:
    """The six factors of the population network."""
    v = model_variables(model)
    return [
        JointTable((v[THETA], v[THETA_P]), model.structure.pair_probabilities),
        JointTable((v[MU],), model.environment.distribution),
        ConditionalTable((v[Y],), (v[THETA], v[MU]), model.sensors),
        ConditionalTable((v[Y_P],), (v[THETA_P], v[MU]), model.sensors),
        ConditionalTable((v[X],), (v[THETA], v[Y]), model.codes),
        ConditionalTable((v[X_P],), (v[THETA_P], v[Y_P]), model.codes),
    ]


def build_joint(model: PopulationModel) -> JointTable:
    """Dense joint over (Θ, Θ′, μ, Y_Θ, Y_Θ′, X_Θ, X_Θ′)."""
    return product_and_normalize(model_factors(model))


def relabel_outputs(model: PopulationModel, permutation: Sequence[int]) -> PopulationModel:
    """Apply the same output-symbol permutation to every agent's code."""
    perm = np.asarray(permutation)
    if sorted(perm.tolist()) != list(range(model.output_states)):
        raise ValueError("not a permutation of the output alphabet")
    return model.with_codes(model.codes[:, :, perm])

"""CMA-ES and the mapping from unconstrained parameter vectors to codes.

The strategy is the standard (μ/μ_w, λ)-CMA-ES with log-rank recombination
weights, cumulative step-size adaptation and rank-one plus rank-μ covariance
updates, using the usual default learning rates. It maximizes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .model import PopulationModel, code_similarity_arrays

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# parameter codec

def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


class Decoded(NamedTuple):
    codes: np.ndarray
    structure: np.ndarray | None


@dataclass(frozen=True)
class ParamCodec:
    """Real vector <-> code rows (and optionally the pair structure).

    The vector holds one block of ``output_states`` logits per (agent,
    sensor state) row, agent-major; with ``free_structure`` a final block of
    n² logits gives p(θ, θ′) row-major. Every real vector decodes to valid
    probabilities.
    """

    n_agents: int
    sensor_states: int
    output_states: int
    free_structure: bool = False

    @classmethod
    def for_model(cls, model: PopulationModel, free_structure: bool = False) -> ParamCodec:
        return cls(model.n_agents, model.sensor_states, model.output_states, free_structure)

    @property
    def code_dimension(self) -> int:
        return self.n_agents * self.sensor_states * self.output_states

    @property
    def dimension(self) -> int:
        return self.code_dimension + (self.n_agents**2 if self.free_structure else 0)

    @property
    def layout(self) -> list[tuple[int, int]]:
        """(agent, sensor state) for each code row, in vector order."""
        return [(a, y) for a in range(self.n_agents) for y in range(self.sensor_states)]

    def decode(self, params) -> Decoded:
        """Decode one vector of shape (d,) or a batch of shape (B, d)."""
        p = np.asarray(params, dtype=float)
        if p.shape[-1] != self.dimension:
            raise ValueError(f"parameter vector has length {p.shape[-1]}, codec expects {self.dimension}")
        batch = p.shape[:-1]
        codes = softmax(p[..., : self.code_dimension].reshape(
            batch + (self.n_agents, self.sensor_states, self.output_states)))
        structure = None
        if self.free_structure:
            s = softmax(p[..., self.code_dimension:].reshape(batch + (self.n_agents**2,)))
            structure = s.reshape(batch + (self.n_agents, self.n_agents))
        return Decoded(codes, structure)

    def apply(self, template: PopulationModel, params) -> PopulationModel:
        codes, structure = self.decode(params)
        return template.with_codes(codes, structure)


def decode(codec: ParamCodec, params) -> Decoded:
    return codec.decode(params)


# --------------------------------------------------------------------------
# CMA-ES

class NonFiniteObjectiveError(ValueError):
    def __init__(self, params: np.ndarray, value):
        super().__init__(f"objective returned {value!r}")
        self.params = np.array(params)
        self.value = value


@dataclass
class CmaEsConfig:
    dimension: int
    population_size: int | None = None
    sigma0: float = 0.3
    max_evaluations: int = 100_000
    # stop when best-so-far gains less than this over `stagnation_generations`
    target_tolerance: float = 1e-9
    stagnation_generations: int = 200
    seed: int = 0
    initial_mean: np.ndarray | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if self.population_size is None:
            self.population_size = 4 + int(3 * math.log(self.dimension))
        if self.population_size < 2:
            raise ValueError("population size must be at least 2")
        if not self.sigma0 > 0:
            raise ValueError("initial step size must be positive")


class GenerationRecord(NamedTuple):
    generation: int
    evaluations: int
    best: float
    mean: float
    sigma: float
    best_so_far: float


@dataclass
class OptimizationTrace:
    records: list[GenerationRecord] = field(default_factory=list)
    best_parameters: np.ndarray | None = None
    best_value: float = -math.inf
    initial_parameters: np.ndarray | None = None
    evaluations: int = 0
    stop_reason: str = ""

    @property
    def best_so_far(self) -> np.ndarray:
        return np.array([r.best_so_far for r in self.records])


class CMAES:
    """Ask/tell CMA-ES minimizer state."""

    def __init__(self, config: CmaEsConfig):
        n = config.dimension
        self.config = config
        self.dim = n
        self.rng = np.random.default_rng(config.seed)
        self.lam = lam = int(config.population_size)
        self.mu = mu = lam // 2
        w = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        self.weights = w / w.sum()
        self.mueff = mueff = 1.0 / np.sum(self.weights**2)

        self.cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))

        mean = config.initial_mean
        self.mean = np.zeros(n) if mean is None else np.array(mean, dtype=float)
        if self.mean.shape != (n,):
            raise ValueError(f"initial mean has shape {self.mean.shape}, expected {(n,)}")
        self.sigma = float(config.sigma0)
        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.C = np.eye(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self.inv_sqrt_C = np.eye(n)
        self.generation = 0
        self.evaluations = 0
        self._eigen_generation = 0
        self._steps: np.ndarray | None = None

    def _update_eigensystem(self):
        if self.generation - self._eigen_generation <= 1 / ((self.c1 + self.cmu) * self.dim * 10):
            return
        self._eigen_generation = self.generation
        self.C = np.triu(self.C) + np.triu(self.C, 1).T
        d2, self.B = np.linalg.eigh(self.C)
        self.D = np.sqrt(np.maximum(d2, 1e-300))
        self.inv_sqrt_C = (self.B / self.D) @ self.B.T

    def ask(self) -> np.ndarray:
        self._update_eigensystem()
        z = self.rng.standard_normal((self.lam, self.dim))
        self._steps = (z * self.D) @ self.B.T
        return self.mean + self.sigma * self._steps

    def tell(self, values: np.ndarray):
        """Update the state from the losses of the last ``ask`` (lower is better)."""
        values = np.asarray(values, dtype=float)
        order = np.argsort(values, kind="stable")
        steps = self._steps[order[: self.mu]]
        n, cs, cc = self.dim, self.cs, self.cc

        step_w = self.weights @ steps
        self.mean = self.mean + self.sigma * step_w
        self.generation += 1
        self.evaluations += self.lam

        self.ps = (1 - cs) * self.ps + math.sqrt(cs * (2 - cs) * self.mueff) * (self.inv_sqrt_C @ step_w)
        ps_norm = np.linalg.norm(self.ps)
        hsig = ps_norm / math.sqrt(1 - (1 - cs) ** (2 * self.generation)) / self.chi_n < 1.4 + 2 / (n + 1)
        self.pc = (1 - cc) * self.pc + hsig * math.sqrt(cc * (2 - cc) * self.mueff) * step_w

        rank_mu = (steps.T * self.weights) @ steps
        self.C = (
            (1 - self.c1 - self.cmu) * self.C
            + self.c1 * (np.outer(self.pc, self.pc) + (1 - hsig) * cc * (2 - cc) * self.C)
            + self.cmu * rank_mu
        )
        self.sigma *= math.exp((cs / self.damps) * (ps_norm / self.chi_n - 1))

    @property
    def condition_number(self) -> float:
        return float((self.D.max() / self.D.min()) ** 2)


def cma_es_maximize(
    objective: Callable[[np.ndarray], float],
    config: CmaEsConfig,
    vectorized: bool = False,
) -> OptimizationTrace:
    """Maximize ``objective`` with CMA-ES.

    With ``vectorized=True`` the objective receives the whole generation as
    a (λ, d) array and returns λ values. Stops at ``max_evaluations``, when
    the best-so-far value stagnates, or when the search distribution
    degenerates numerically.
    """
    es = CMAES(config)
    trace = OptimizationTrace()
    history: list[float] = []

    while es.evaluations + es.lam <= config.max_evaluations or es.generation == 0:
        xs = es.ask()
        if trace.initial_parameters is None:
            trace.initial_parameters = xs[0].copy()
        if vectorized:
            fs = np.asarray(objective(xs), dtype=float).reshape(-1)
        else:
            fs = np.array([objective(x) for x in xs], dtype=float)
        bad = np.flatnonzero(~np.isfinite(fs))
        if bad.size:
            raise NonFiniteObjectiveError(xs[bad[0]], fs[bad[0]])
        es.tell(-fs)

        i = int(np.argmax(fs))
        if fs[i] > trace.best_value:
            trace.best_value = float(fs[i])
            trace.best_parameters = xs[i].copy()
        trace.records.append(GenerationRecord(
            es.generation, es.evaluations, float(fs[i]), float(fs.mean()), es.sigma, trace.best_value
        ))
        history.append(trace.best_value)

        window = config.stagnation_generations
        if len(history) > window and history[-1] - history[-1 - window] < config.target_tolerance:
            trace.stop_reason = "stagnation"
            break
        if es.condition_number > 1e14 or not np.isfinite(es.sigma) or es.sigma * es.D.max() < 1e-12:
            trace.stop_reason = "degenerate"
            break
    else:
        trace.stop_reason = "max_evaluations"

    trace.evaluations = es.evaluations
    log.debug("cma-es stopped (%s) after %d evaluations, best %.9g",
              trace.stop_reason, trace.evaluations, trace.best_value)
    return trace


# --------------------------------------------------------------------------
# scenario optimization

def similarity_objective(template: PopulationModel, codec: ParamCodec):
    """Batched code-similarity objective over parameter vectors."""
    env = template.environment.distribution
    sensors = template.sensors
    fixed = template.structure.pair_probabilities

    def objective(params: np.ndarray) -> np.ndarray:
        codes, structure = codec.decode(params)
        return code_similarity_arrays(env, sensors, codes, fixed if structure is None else structure)

    return objective


def optimize_scenario(
    template: PopulationModel, codec: ParamCodec, config: CmaEsConfig
) -> tuple[PopulationModel, OptimizationTrace]:
    """Maximize code similarity over the codec's parameters.

    Returns the model decoded from the best parameters and the trace; the
    trace's ``initial_parameters`` decode to the starting codes.
    """
    if (codec.n_agents, codec.sensor_states, codec.output_states) != (
        template.n_agents, template.sensor_states, template.output_states
    ):
        raise ValueError("codec does not match the template's shape")
    if config.dimension != codec.dimension:
        raise ValueError(f"optimizer dimension {config.dimension} != codec dimension {codec.dimension}")
    trace = cma_es_maximize(similarity_objective(template, codec), config, vectorized=True)
    return codec.apply(template, trace.best_parameters), trace

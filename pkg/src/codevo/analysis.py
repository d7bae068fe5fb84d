"""Post-hoc analysis of evolved populations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .infotheory import jsd_rows
from .model import Code, PopulationModel, PopulationStructure, output_pair_env_joint


def _table(code) -> np.ndarray:
    return code.table if isinstance(code, Code) else np.asarray(code, dtype=float)


def code_distance(a, b) -> float:
    """Square root of the per-sensor-state JSD between two codes, averaged
    uniformly over sensor states. Lies in [0, 1]."""
    ta, tb = _table(a), _table(b)
    if ta.shape != tb.shape:
        raise ValueError(f"code shapes differ: {ta.shape} vs {tb.shape}")
    return float(np.sqrt(jsd_rows(ta, tb).mean()))


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: tuple[str, ...]
    values: np.ndarray

    def __len__(self):
        return len(self.labels)


def distance_matrix(codes: Sequence, labels: Iterable[str] | None = None) -> DistanceMatrix:
    tables = [_table(c) for c in codes]
    if not tables:
        raise ValueError("no codes given")
    for i, t in enumerate(tables):
        if t.shape != tables[0].shape:
            raise ValueError(f"code {i} has shape {t.shape}, code 0 has {tables[0].shape}")
    stack = np.stack(tables)
    jsd = jsd_rows(stack[:, None], stack[None, :]).mean(axis=-1)
    d = np.sqrt(jsd)
    d = np.minimum(d, d.T)  # exact symmetry
    np.fill_diagonal(d, 0.0)
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(len(tables)))
    if len(labels) != len(tables):
        raise ValueError("one label per code required")
    return DistanceMatrix(labels, d)


def classical_mds(d: DistanceMatrix | np.ndarray, dims: int = 2) -> np.ndarray:
    """Torgerson scaling: coordinates from the top eigenpairs of the
    double-centred squared distances.

    Negative eigenvalues are clamped to zero, so rank-deficient inputs give
    zero columns. Each axis is flipped so its largest-magnitude coordinate
    is positive.
    """
    values = d.values if isinstance(d, DistanceMatrix) else np.asarray(d, dtype=float)
    n = values.shape[0]
    if n < 1:
        raise ValueError("empty distance matrix")
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (values**2) @ j
    b = 0.5 * (b + b.T)
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:dims]
    evals = np.maximum(evals[order], 0.0)
    coords = evecs[:, order] * np.sqrt(evals)
    if coords.shape[1] < dims:
        coords = np.hstack([coords, np.zeros((n, dims - coords.shape[1]))])
    for k in range(dims):
        col = coords[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            coords[:, k] = -col
    return coords - coords.mean(axis=0)


@dataclass(frozen=True, eq=False)
class CodeCluster:
    representative: np.ndarray
    members: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.members)


def _components(n: int, pairs: Sequence[tuple[int, int]]) -> list[list[int]]:
    if n == 0:
        return []
    rows = [i for i, _ in pairs]
    cols = [j for _, j in pairs]
    graph = coo_matrix((np.ones(len(pairs)), (rows, cols)), shape=(n, n))
    _, labels = _cc(graph, directed=False)
    groups: dict[int, list[int]] = {}
    for node, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(node)
    return sorted(groups.values(), key=lambda g: g[0])


def group_codes(codes: Sequence, tolerance: float = 1e-3) -> list[CodeCluster]:
    """Single-linkage groups of codes whose distance is within ``tolerance``.

    Clusters are ordered by size (largest first), ties by lowest member.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    tables = [_table(c) for c in codes]
    if not tables:
        return []
    d = distance_matrix(tables).values
    pairs = [(int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(d <= tolerance, 1)))]
    clusters = []
    for members in _components(len(tables), pairs):
        rep = np.mean([tables[i] for i in members], axis=0)
        rep = rep / rep.sum(axis=-1, keepdims=True)
        clusters.append(CodeCluster(rep, tuple(members)))
    clusters.sort(key=lambda c: (-c.count, c.members[0]))
    return clusters


@dataclass(frozen=True, eq=False)
class ConceptTable:
    """p(μ | X_Θ = x, X_Θ′ = x′) for each output pair of positive probability."""

    pairs: tuple[tuple[int, int], ...]
    pair_marginal: np.ndarray
    pair_posterior: np.ndarray

    def posterior(self, x: int, x_other: int) -> np.ndarray | None:
        """Posterior for one pair, or None if the pair never occurs."""
        try:
            return self.pair_posterior[self.pairs.index((x, x_other))]
        except ValueError:
            return None

    def best_pair_for(self, state: int) -> tuple[tuple[int, int], float]:
        """Pair with the highest posterior on a 0-based environment state."""
        k = int(np.argmax(self.pair_posterior[:, state]))
        return self.pairs[k], float(self.pair_posterior[k, state])


def concept_table(model: PopulationModel, min_probability: float = 1e-15) -> ConceptTable:
    p = output_pair_env_joint(
        model.environment.distribution, model.sensors, model.codes, model.structure.pair_probabilities
    )
    marginal = p.sum(axis=0)
    pairs, post, marg = [], [], []
    for x, xp in zip(*np.nonzero(marginal > min_probability)):
        pairs.append((int(x), int(xp)))
        marg.append(marginal[x, xp])
        post.append(p[:, x, xp] / marginal[x, xp])
    return ConceptTable(tuple(pairs), np.array(marg), np.array(post).reshape(len(pairs), -1))


@dataclass(frozen=True)
class StructureGraph:
    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]
    isolated: tuple[int, ...]

    @property
    def self_loops(self) -> tuple[tuple[int, int, float], ...]:
        return tuple(e for e in self.edges if e[0] == e[1])

    @property
    def links(self) -> tuple[tuple[int, int, float], ...]:
        return tuple(e for e in self.edges if e[0] != e[1])


def structure_graph(structure: PopulationStructure | np.ndarray, threshold: float = 0.0) -> StructureGraph:
    """Undirected weighted graph of the interaction structure.

    The weight of {i, j} is p(i, j) + p(j, i) (p(i, i) for a self-loop);
    edges with weight at or below ``threshold`` are dropped. Nodes without
    links to other agents are reported as isolated.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    p = structure.pair_probabilities if isinstance(structure, PopulationStructure) else np.asarray(structure)
    n = p.shape[0]
    sym = p + p.T
    np.fill_diagonal(sym, np.diag(p))
    edges = []
    for i in range(n):
        for j in range(i, n):
            if sym[i, j] > threshold:
                edges.append((i, j, float(sym[i, j])))
    linked = {i for i, j, _ in edges if i != j} | {j for i, j, _ in edges if i != j}
    return StructureGraph(n, tuple(edges), tuple(i for i in range(n) if i not in linked))


def connected_components(graph: StructureGraph | Sequence[tuple], n_nodes: int | None = None) -> list[set[int]]:
    """Connected components, self-loops ignored. Accepts a
    :class:`StructureGraph` or a plain edge list plus ``n_nodes``."""
    if isinstance(graph, StructureGraph):
        edges, n = graph.edges, graph.n_nodes
    else:
        edges = list(graph)
        n = n_nodes if n_nodes is not None else 1 + max((max(e[0], e[1]) for e in edges), default=-1)
    pairs = [(int(e[0]), int(e[1])) for e in edges if e[0] != e[1]]
    return [set(c) for c in _components(n, pairs)]

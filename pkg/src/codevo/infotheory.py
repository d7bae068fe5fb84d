"""Dense discrete distributions over named variables and the information
measures computed on them.

A :class:`JointTable` stores its probabilities as an ``ndarray`` whose axes
follow the order of ``variables`` (row-major, so the last variable varies
fastest when flattened). All logarithms are base 2.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SUM_TOL = 1e-9
# below this, probabilities are exact zeros inside log computations
LOG_FLOOR = 1e-15


@dataclass(frozen=True)
class Variable:
    name: str
    cardinality: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.cardinality) != self.cardinality or self.cardinality < 1:
            raise ValueError(f"variable {self.name!r}: cardinality must be a positive integer")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.cardinality:
                raise ValueError(f"variable {self.name!r}: {len(labels)} labels for cardinality {self.cardinality}")
            if len(set(labels)) != len(labels):
                raise ValueError(f"variable {self.name!r}: labels must be unique")
            object.__setattr__(self, "labels", labels)


def _names(spec: str | Iterable[str]) -> tuple[str, ...]:
    if isinstance(spec, str):
        return (spec,)
    return tuple(spec)


def _check_unique(variables: Sequence[Variable], what: str):
    seen = set()
    for v in variables:
        if v.name in seen:
            raise ValueError(f"{what}: variable {v.name!r} appears twice")
        seen.add(v.name)


@dataclass(frozen=True, eq=False)
class JointTable:
    """Joint distribution over ``variables``.

    ``probabilities`` may be given flat or already shaped; it is stored with
    one axis per variable and made read-only.
    """

    variables: tuple[Variable, ...]
    probabilities: np.ndarray = field(repr=False)

    def __post_init__(self):
        variables = tuple(self.variables)
        _check_unique(variables, "JointTable")
        shape = tuple(v.cardinality for v in variables)
        p = np.array(self.probabilities, dtype=float)
        if p.size != int(np.prod(shape, dtype=np.int64)):
            raise ValueError(f"JointTable: {p.size} entries for shape {shape}")
        p = p.reshape(shape)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("JointTable: entries must be finite and nonnegative")
        total = p.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"JointTable: entries sum to {total!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def uniform(cls, variables: Sequence[Variable]) -> JointTable:
        shape = tuple(v.cardinality for v in variables)
        return cls(tuple(variables), np.full(shape, 1.0 / np.prod(shape)))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probabilities.shape

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"unknown variable {name!r}; table has {list(self.names)}") from None

    def variable(self, name: str) -> Variable:
        return self.variables[self.axis(name)]

    def flat(self) -> np.ndarray:
        return self.probabilities.ravel()


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """Conditional distribution p(targets | conditions).

    ``rows`` has the condition axes first, then the target axes; every
    slice over the target axes is a distribution.
    """

    targets: tuple[Variable, ...]
    conditions: tuple[Variable, ...]
    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        targets, conditions = tuple(self.targets), tuple(self.conditions)
        if not targets:
            raise ValueError("ConditionalTable needs at least one target")
        _check_unique(targets + conditions, "ConditionalTable")
        shape = tuple(v.cardinality for v in conditions + targets)
        r = np.array(self.rows, dtype=float)
        if r.size != int(np.prod(shape, dtype=np.int64)):
            raise ValueError(f"ConditionalTable: {r.size} entries for shape {shape}")
        r = r.reshape(shape)
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise ValueError("ConditionalTable: entries must be finite and nonnegative")
        sums = r.reshape(int(np.prod(shape[: len(conditions)], dtype=np.int64)), -1).sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
        if bad.size:
            raise ValueError(f"ConditionalTable: row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1")
        r.flags.writeable = False
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "conditions", conditions)
        object.__setattr__(self, "rows", r)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.conditions + self.targets


def marginalize(joint: JointTable, keep: str | Iterable[str]) -> JointTable:
    """Sum out every variable not in ``keep``; the kept variables retain
    their order in ``joint``."""
    keep = set(_names(keep))
    for name in keep:
        joint.axis(name)
    drop = tuple(i for i, v in enumerate(joint.variables) if v.name not in keep)
    kept = tuple(v for v in joint.variables if v.name in keep)
    p = joint.probabilities.sum(axis=drop) if drop else joint.probabilities
    return JointTable(kept, p)


def product_and_normalize(factors: Sequence[JointTable | ConditionalTable]) -> JointTable:
    """Multiply the factors of a directed factorization into one joint.

    Each variable must be the target of exactly one factor and every
    conditioning variable must be a target somewhere. Variables appear in
    the result in the order they are first produced as targets.
    """
    if not factors:
        raise ValueError("no factors given")
    cards: dict[str, int] = {}
    produced: list[Variable] = []
    for f in factors:
        targets = f.variables if isinstance(f, JointTable) else f.targets
        for v in f.variables:
            if cards.setdefault(v.name, v.cardinality) != v.cardinality:
                raise ValueError(
                    f"cardinality mismatch for {v.name!r}: {cards[v.name]} vs {v.cardinality}"
                )
        for v in targets:
            if any(u.name == v.name for u in produced):
                raise ValueError(f"variable {v.name!r} is the target of more than one factor")
            produced.append(v)
    produced_names = {v.name for v in produced}
    for f in factors:
        for v in f.variables:
            if v.name not in produced_names:
                raise ValueError(f"variable {v.name!r} is conditioned on but never produced")
    if len(produced) > len(string.ascii_letters):
        raise ValueError("too many variables for dense product")

    letter = {v.name: string.ascii_letters[i] for i, v in enumerate(produced)}
    operands, subscripts = [], []
    for f in factors:
        arr = f.probabilities if isinstance(f, JointTable) else f.rows
        operands.append(arr)
        subscripts.append("".join(letter[v.name] for v in f.variables))
    out = "".join(letter[v.name] for v in produced)
    p = np.einsum(",".join(subscripts) + "->" + out, *operands, optimize=True)
    total = p.sum()
    if not total > 0:
        raise ValueError("factor product has zero total mass")
    return JointTable(tuple(produced), p / total)


def entropy_of(p: np.ndarray, axis=None) -> np.ndarray | float:
    """Shannon entropy in bits of probability array(s), summed over ``axis``."""
    p = np.asarray(p, dtype=float)
    safe = np.where(p > LOG_FLOOR, p, 1.0)
    terms = np.where(p > LOG_FLOOR, -p * np.log2(safe), 0.0)
    return terms.sum(axis=axis)


def entropy(joint: JointTable, over: str | Iterable[str]) -> float:
    """Entropy in bits of the marginal of ``joint`` on ``over``."""
    over = _names(over)
    if not over:
        raise ValueError("entropy over an empty set of variables")
    return float(entropy_of(marginalize(joint, over).probabilities))


def _disjoint(*groups: tuple[str, ...]):
    seen: set[str] = set()
    for g in groups:
        overlap = seen.intersection(g)
        if overlap:
            raise ValueError(f"variable sets overlap on {sorted(overlap)}")
        seen.update(g)


def mutual_information(joint: JointTable, a: str | Iterable[str], b: str | Iterable[str]) -> float:
    """I(A;B) in bits, clamped at zero."""
    a, b = _names(a), _names(b)
    if not a or not b:
        raise ValueError("mutual information needs nonempty variable sets")
    _disjoint(a, b)
    mi = entropy(joint, a) + entropy(joint, b) - entropy(joint, a + b)
    return max(mi, 0.0)


def conditional_mutual_information(
    joint: JointTable,
    a: str | Iterable[str],
    b: str | Iterable[str],
    given: str | Iterable[str],
) -> float:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C) in bits, clamped at zero."""
    a, b, c = _names(a), _names(b), _names(given)
    if not a or not b:
        raise ValueError("mutual information needs nonempty variable sets")
    _disjoint(a, b, c)
    if not c:
        return mutual_information(joint, a, b)
    cmi = entropy(joint, a + c) + entropy(joint, b + c) - entropy(joint, a + b + c) - entropy(joint, c)
    return max(cmi, 0.0)


def mutual_information_matrix(pxy: np.ndarray) -> np.ndarray | float:
    """I(X;Y) for a joint given as a (..., |X|, |Y|) array; leading axes batch."""
    pxy = np.asarray(pxy, dtype=float)
    mi = entropy_of(pxy.sum(axis=-1), axis=-1) + entropy_of(pxy.sum(axis=-2), axis=-1) \
        - entropy_of(pxy, axis=(-2, -1))
    return np.maximum(mi, 0.0)


def _as_distribution(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if np.any(p < 0) or abs(p.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"{name} is not a probability distribution")
    return p


def kl_divergence(p, q) -> float:
    """D(p||q) in bits. Raises if p puts mass where q has none."""
    p, q = _as_distribution(p, "p"), _as_distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError(f"support size mismatch: {p.size} vs {q.size}")
    support = p > LOG_FLOOR
    if np.any(support & (q <= LOG_FLOOR)):
        i = int(np.flatnonzero(support & (q <= LOG_FLOOR))[0])
        raise ValueError(f"p is not absolutely continuous w.r.t. q (index {i})")
    d = np.sum(p[support] * np.log2(p[support] / q[support]))
    return max(float(d), 0.0)


def jensen_shannon_divergence(p, q) -> float:
    """JSD(p, q) in bits; lies in [0, 1]."""
    p, q = _as_distribution(p, "p"), _as_distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError(f"support size mismatch: {p.size} vs {q.size}")
    m = 0.5 * (p + q)
    return min(0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m), 1.0)


def jsd_rows(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise JSD in bits over the last axis; broadcasts."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m = 0.5 * (p + q)
    # entropy form: H(m) - (H(p) + H(q)) / 2
    jsd = entropy_of(m, axis=-1) - 0.5 * (entropy_of(p, axis=-1) + entropy_of(q, axis=-1))
    return np.clip(jsd, 0.0, 1.0)

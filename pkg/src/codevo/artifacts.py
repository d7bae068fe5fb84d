"""Result files: JSON, CSV, SVG and DOT outputs of a run."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

import numpy as np

from . import analysis, svg
from .model import AgentType, PopulationModel, PopulationStructure

FLOAT_FMT = "{:.6f}"


def _fmt(v) -> str:
    return FLOAT_FMT.format(v)


def _out(path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path.parent}: {exc.strerror}") from None
    return path


def _write_text(path: Path, text: str):
    try:
        _out(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def _write_csv(path: Path, header: list[str], rows: list[list]):
    try:
        with open(_out(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# model (de)serialization

def model_to_dict(model: PopulationModel, initial_codes: np.ndarray | None = None, **extra) -> dict[str, Any]:
    types = [None if t is None else {"id": t.id, "region": sorted(t.region)} for t in model.types]
    d = {
        "environment": model.environment.distribution.tolist(),
        "sensors": model.sensors.tolist(),
        "codes": model.codes.tolist(),
        "structure": model.structure.pair_probabilities.tolist(),
        "types": types,
        "output_states": model.output_states,
    }
    if initial_codes is not None:
        d["initial_codes"] = np.asarray(initial_codes).tolist()
    d.update(extra)
    return d


def model_from_dict(d: dict[str, Any]) -> PopulationModel:
    try:
        types = [None if t is None else AgentType(t["id"], frozenset(t["region"])) for t in d.get("types") or []]
        return PopulationModel.from_arrays(
            d["environment"], d["sensors"], d["codes"], PopulationStructure(d["structure"]), types or None
        )
    except KeyError as exc:
        raise ValueError(f"codes file is missing field {exc.args[0]!r}") from None


def load_codes(path: str | Path) -> tuple[PopulationModel, dict[str, Any]]:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(data), data


# --------------------------------------------------------------------------
# individual artifacts

def structure_dot(graph: analysis.StructureGraph, labels: list[str] | None = None) -> str:
    labels = labels or [str(i) for i in range(graph.n_nodes)]
    lines = ["graph structure {", "  node [shape=circle];"]
    for i in range(graph.n_nodes):
        lines.append(f'  {i} [label="{labels[i]}"];')
    for i, j, w in graph.edges:
        lines.append(f'  {i} -- {j} [weight={_fmt(w)}, label="{_fmt(w)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_trace(trace, path: Path):
    rows = [[r.generation, r.evaluations, _fmt(r.best_so_far), _fmt(r.best), _fmt(r.mean), _fmt(r.sigma)]
            for r in trace.records]
    _write_csv(path, ["generation", "evaluations", "best", "generation_best", "mean", "sigma"], rows)


def write_distances(initial: np.ndarray, final: np.ndarray, out: Path):
    """Distances and MDS of initial and final codes together."""
    n = len(final)
    labels = [f"initial_{i}" for i in range(n)] + [f"final_{i}" for i in range(n)]
    dm = analysis.distance_matrix(list(initial) + list(final), labels)
    _write_csv(out / "distances.csv", ["code"] + labels,
               [[labels[i]] + [_fmt(v) for v in dm.values[i]] for i in range(2 * n)])
    coords = analysis.classical_mds(dm, 2)
    _write_csv(out / "mds.csv", ["code", "phase", "agent", "x", "y"],
               [[labels[i], "initial" if i < n else "final", i % n, _fmt(coords[i, 0]), _fmt(coords[i, 1])]
                for i in range(2 * n)])
    _write_text(out / "mds.svg", svg.scatter(
        [("initial", coords[:n], "diamond", "#d62728"), ("final", coords[n:], "circle", "#1f77b4")],
        title="code distance (classical MDS)",
    ))
    return dm, coords


def write_concepts(model: PopulationModel, out: Path):
    table = analysis.concept_table(model)
    m = model.environment.states
    rows = [[x + 1, xp + 1, _fmt(table.pair_marginal[k])] + [_fmt(v) for v in table.pair_posterior[k]]
            for k, (x, xp) in enumerate(table.pairs)]
    _write_csv(out / "concepts.csv", ["x", "x_other", "p_pair"] + [f"mu{s + 1}" for s in range(m)], rows)
    shown = [k for k, (x, xp) in enumerate(table.pairs) if x <= xp]
    panel = table.pair_posterior[shown] if shown else np.zeros((0, m))
    names = [f"({table.pairs[k][0] + 1},{table.pairs[k][1] + 1})" for k in shown]
    body = svg.heatmap_panels([("p(mu | x, x')  rows: " + " ".join(names), panel)],
                              row_label="pair", col_label="mu", cell=16.0, columns=1)
    _write_text(out / "concepts_heatmap.svg", body)
    return table


def write_code_heatmap(clusters: list[analysis.CodeCluster], model: PopulationModel, out: Path):
    panels = []
    for k, c in enumerate(clusters):
        types = sorted({model.types[i].id for i in c.members if model.types[i] is not None})
        tag = f" [{','.join(types)}]" if types else ""
        panels.append((f"{chr(97 + k) if k < 26 else k}: {c.count} agents{tag}", c.representative))
    _write_text(out / "codes_heatmap.svg", svg.heatmap_panels(panels))


def emit_artifacts(report, model: PopulationModel, trace, out_dir, initial_model: PopulationModel | None = None):
    """Write every output file of a run into ``out_dir``; returns the
    mapping of artifact names to relative file names."""
    out = Path(out_dir)
    initial = initial_model.codes if initial_model is not None else model.codes
    files = {
        "results": "results.json", "timing": "timing.json", "trace": "trace.csv",
        "distances": "distances.csv", "mds": "mds.csv", "mds_plot": "mds.svg",
        "codes": "codes.json", "codes_plot": "codes_heatmap.svg", "structure": "structure.dot",
    }
    kind = report.config.get("kind")
    if kind == "heterogeneous":
        files.update(concepts="concepts.csv", concepts_plot="concepts_heatmap.svg")
    report.artifacts = dict(files)

    write_trace(trace, out / "trace.csv")
    write_distances(initial, model.codes, out)
    clusters = analysis.group_codes(model.codes, report.config.get("cluster_tolerance", 1e-3))
    write_code_heatmap(clusters, model, out)
    from .scenarios import ScenarioConfig, default_threshold
    threshold = default_threshold(ScenarioConfig.from_dict(report.config))
    _write_text(out / "structure.dot", structure_dot(analysis.structure_graph(model.structure, threshold)))
    if kind == "heterogeneous":
        write_concepts(model, out)
    _write_text(out / "codes.json", dump_json(model_to_dict(
        model, initial, cluster_tolerance=report.config.get("cluster_tolerance", 1e-3),
        structure_threshold=threshold, kind=kind,
    )))
    _write_text(out / "results.json", dump_json(report.to_json_dict()))
    _write_text(out / "timing.json", dump_json({"wall_time_seconds": report.wall_time}))
    return files


def write_sweep_csv(rows, path: Path):
    _write_csv(Path(path), ["output_states", "best_blind_info", "blind_info_of_best_similarity",
                            "best_similarity", "centre_posterior"],
               [[r.output_states, _fmt(r.best_blind_info), _fmt(r.blind_info_of_best_similarity),
                 _fmt(r.best_similarity), _fmt(r.centre_posterior)] for r in rows])


def analyze(codes_path, out_dir) -> dict[str, Any]:
    """Re-analyse a saved population without optimizing."""
    from .model import (agent_env_info, agent_output_info, blind_info, code_similarity,
                        env_info_pair, similarity_bound)

    model, data = load_codes(codes_path)
    out = Path(out_dir)
    tol = data.get("cluster_tolerance", 1e-3)
    threshold = data.get("structure_threshold", 0.0)
    clusters = analysis.group_codes(model.codes, tol)
    graph = analysis.structure_graph(model.structure, threshold)
    has_types = any(t is not None for t in model.types)
    result = {
        "code_similarity": code_similarity(model),
        "similarity_bound": similarity_bound(model),
        "env_info_pair": env_info_pair(model),
        "blind_info": blind_info(model) if has_types else None,
        "agent_env_info": [agent_env_info(model, i) for i in range(model.n_agents)],
        "agent_output_info": [agent_output_info(model, i) for i in range(model.n_agents)],
        "clusters": [{"members": list(c.members), "count": c.count,
                      "representative": c.representative.tolist()} for c in clusters],
        "components": [sorted(c) for c in analysis.connected_components(graph)],
    }
    initial = np.asarray(data["initial_codes"]) if "initial_codes" in data else model.codes
    write_distances(initial, model.codes, out)
    write_code_heatmap(clusters, model, out)
    _write_text(out / "structure.dot", structure_dot(graph))
    if has_types:
        write_concepts(model, out)
    _write_text(out / "analysis.json", dump_json(result))
    return result

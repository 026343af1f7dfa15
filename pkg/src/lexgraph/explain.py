"""Human-readable justification of predicted links: side-by-side feature and
metadata comparison plus occlusion-based feature attribution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .casegraph import CaseGraph, to_undirected
from .corpus import Document
from .errors import GraphError
from .gnn import RgcnModel, _forward, prepare_edges


@dataclass
class FeatureDiff:
    name: str
    value_u: float
    value_v: float
    delta_normalized: float  # |difference| on the z-scored scale


@dataclass
class Explanation:
    u: str  # document id
    v: str
    link_score: float | None
    shared_lawpoints: list[str]
    feature_diffs: list[FeatureDiff]
    metadata_pairs: dict[str, tuple[str, str]]
    top_attributions: list[tuple[str, float]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "u": self.u,
            "v": self.v,
            "link_score": self.link_score,
            "shared_lawpoints": self.shared_lawpoints,
            "feature_diffs": [
                {
                    "name": fd.name,
                    "value_u": fd.value_u,
                    "value_v": fd.value_v,
                    "delta_normalized": fd.delta_normalized,
                }
                for fd in self.feature_diffs
            ],
            "metadata_pairs": {k: list(v) for k, v in self.metadata_pairs.items()},
            "top_attributions": [
                {"feature": name, "drop": drop} for name, drop in self.top_attributions
            ],
        }


def _check_index(graph: CaseGraph, idx: int, name: str) -> None:
    if not 0 <= idx < graph.n_nodes:
        raise GraphError(f"{name}={idx} outside node range [0, {graph.n_nodes})")


def compare_nodes(
    graph: CaseGraph, docs: Sequence[Document], u: int, v: int
) -> Explanation:
    """Side-by-side feature and metadata listing for two nodes; shared
    lawpoints are the concepts both nodes mention (nonzero count columns)."""
    _check_index(graph, u, "u")
    _check_index(graph, v, "v")
    by_id = {d.id: d for d in docs}
    u_id, v_id = graph.node_ids[u], graph.node_ids[v]
    doc_u, doc_v = by_id.get(u_id), by_id.get(v_id)
    if doc_u is None or doc_v is None:
        raise GraphError("graph node missing from the corpus")

    diffs: list[FeatureDiff] = []
    shared: list[str] = []
    for col, name in enumerate(graph.feature_names):
        raw_u = float(graph.raw_features[u, col])
        raw_v = float(graph.raw_features[v, col])
        delta = abs(float(graph.features[u, col]) - float(graph.features[v, col]))
        diffs.append(FeatureDiff(name, raw_u, raw_v, delta))
        if (
            graph.feature_sources[col] == "lawpoint-count"
            and raw_u > 0
            and raw_v > 0
        ):
            shared.append(graph.feature_keys[col])

    keys = ["title", "court", "doc_type", "date"]
    keys += sorted(set(doc_u.metadata) | set(doc_v.metadata))

    def lookup(doc: Document, key: str) -> str:
        if key == "title":
            return doc.title
        if key == "court":
            return doc.court
        if key == "doc_type":
            return doc.doc_type
        if key == "date":
            return doc.date or ""
        return doc.metadata.get(key, "")

    metadata_pairs = {key: (lookup(doc_u, key), lookup(doc_v, key)) for key in keys}
    return Explanation(
        u=u_id,
        v=v_id,
        link_score=None,
        shared_lawpoints=sorted(shared),
        feature_diffs=diffs,
        metadata_pairs=metadata_pairs,
    )


def attribute_link(
    model: RgcnModel,
    graph: CaseGraph,
    features: np.ndarray,
    u: int,
    v: int,
    k: int,
    message_edges: dict[str, list[tuple[int, int]]] | None = None,
) -> list[tuple[str, float]]:
    """Top-k features by occlusion: zero one (normalized) column for both
    endpoints, recompute embeddings, and record the score drop."""
    _check_index(graph, u, "u")
    _check_index(graph, v, "v")
    dim = features.shape[1]
    if k > dim:
        raise GraphError(f"k={k} exceeds feature dimension {dim}")
    if message_edges is None:
        message_edges = {model.task: to_undirected(graph.edges.get(model.task, []))}
    rel_edges = prepare_edges(message_edges, features.shape[0])
    diag = model.relation_diagonals[model.task]

    def pair_score(feats: np.ndarray) -> float:
        emb, _ = _forward(feats, rel_edges, model)
        return float(np.sum(emb[u] * diag * emb[v]))

    base = pair_score(features)
    drops: list[tuple[str, float]] = []
    for col in range(dim):
        occluded = features.copy()
        occluded[u, col] = 0.0
        occluded[v, col] = 0.0
        drops.append((graph.feature_names[col], base - pair_score(occluded)))
    drops.sort(key=lambda pair: -pair[1])
    return drops[:k]

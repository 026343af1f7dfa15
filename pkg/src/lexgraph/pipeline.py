"""Immutable artifact snapshot consumed by the HTTP service: corpus,
annotations, case graph, trained models, and precomputed embeddings."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotate import Mention, load_mentions_json
from .casegraph import CaseGraph, to_undirected
from .corpus import Document, load_corpus
from .errors import DataError, GraphError
from .explain import Explanation, attribute_link, compare_nodes
from .gnn import RgcnModel, _forward, load_model, prepare_edges

TASKS = ("cites", "similar_to")


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


@dataclass
class PipelineArtifacts:
    docs: list[Document]
    docs_by_id: dict[str, Document]
    mentions: dict[str, list[Mention]]
    graph: CaseGraph
    stats: dict
    models: dict[str, RgcnModel]
    model_extras: dict[str, dict]
    embeddings: dict[str, np.ndarray] = field(default_factory=dict)
    eval_reports: dict[str, dict] = field(default_factory=dict)

    @classmethod
    def load(cls, directory) -> "PipelineArtifacts":
        root = Path(directory)
        if not root.is_dir():
            raise DataError(f"artifact directory {root} does not exist")
        docs = load_corpus(root / "corpus.jsonl")
        docs_by_id = {d.id: d for d in docs}
        mentions = (
            load_mentions_json(root / "mentions.json")
            if (root / "mentions.json").exists()
            else {}
        )
        graph = CaseGraph.load(root / "graph.json")
        with open(root / "stats.json", encoding="utf-8") as fh:
            stats = json.load(fh)

        models: dict[str, RgcnModel] = {}
        extras: dict[str, dict] = {}
        for task in TASKS:
            path = root / f"model-{task}.bin"
            if path.exists():
                model, extra = load_model(path)
                models[task] = model
                extras[task] = extra
        if not models:
            raise DataError(f"no model-<task>.bin checkpoints found in {root}")

        eval_reports: dict[str, dict] = {}
        for task in TASKS:
            path = root / f"eval-{task}.json"
            if path.exists():
                with open(path, encoding="utf-8") as fh:
                    eval_reports[task] = json.load(fh)

        artifacts = cls(
            docs=docs,
            docs_by_id=docs_by_id,
            mentions=mentions,
            graph=graph,
            stats=stats,
            models=models,
            model_extras=extras,
            eval_reports=eval_reports,
        )
        artifacts.validate()
        artifacts._precompute_embeddings()
        return artifacts

    def validate(self) -> None:
        missing = [i for i in self.graph.node_ids if i not in self.docs_by_id]
        if missing:
            raise DataError(f"graph nodes missing from corpus: {missing[:5]}")
        dim = self.graph.features.shape[1]
        for task, model in self.models.items():
            if model.input_dim != dim:
                raise DataError(
                    f"model {task!r} expects {model.input_dim} features, "
                    f"graph has {dim}"
                )

    def _precompute_embeddings(self) -> None:
        for task, model in self.models.items():
            edges = {task: to_undirected(self.graph.edges.get(task, []))}
            emb, _ = _forward(
                self.graph.features,
                prepare_edges(edges, self.graph.n_nodes),
                model,
            )
            self.embeddings[task] = emb

    # ------------------------------------------------------------------
    # Read-only queries

    def _require_task(self, task: str) -> RgcnModel:
        if task not in self.models:
            raise DataError(f"no trained model for task {task!r}")
        return self.models[task]

    def node_index(self, case_id: str) -> int:
        try:
            return self.graph.node_ids.index(case_id)
        except ValueError:
            raise GraphError(f"unknown case id {case_id!r}") from None

    def search(self, query: str, limit: int = 50) -> list[Document]:
        q = query.strip().lower()
        hits = []
        for doc_id in self.graph.node_ids:
            doc = self.docs_by_id[doc_id]
            if not q or q in doc.id.lower() or q in doc.title.lower():
                hits.append(doc)
            if len(hits) >= limit:
                break
        return hits

    def predict(self, u_id: str, v_id: str, task: str) -> float:
        model = self._require_task(task)
        u, v = self.node_index(u_id), self.node_index(v_id)
        emb = self.embeddings[task]
        diag = model.relation_diagonals[task]
        raw = float(np.sum(emb[u] * diag * emb[v]))
        return _sigmoid(raw)

    def similar(self, case_id: str, k: int, task: str = "similar_to") -> list[tuple[str, float]]:
        model = self._require_task(task)
        u = self.node_index(case_id)
        emb = self.embeddings[task]
        diag = model.relation_diagonals[task]
        raw = np.sum(emb * (emb[u] * diag), axis=1)
        scored = [
            (self.graph.node_ids[i], _sigmoid(float(raw[i])))
            for i in range(self.graph.n_nodes)
            if i != u
        ]
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return scored[:k]

    def explain(
        self, u_id: str, v_id: str, k: int = 5, task: str | None = None
    ) -> Explanation:
        if task is None:
            task = "similar_to" if "similar_to" in self.models else "cites"
        model = self._require_task(task)
        u, v = self.node_index(u_id), self.node_index(v_id)
        explanation = compare_nodes(self.graph, self.docs, u, v)
        explanation.link_score = self.predict(u_id, v_id, task)
        k = min(k, self.graph.features.shape[1])
        message_edges = {task: to_undirected(self.graph.edges.get(task, []))}
        explanation.top_attributions = attribute_link(
            model, self.graph, self.graph.features, u, v, k, message_edges
        )
        return explanation

    def subgraph(self, center_id: str, hops: int, task: str) -> dict:
        """Observed task edges within `hops` of the center, plus the highest
        scoring unobserved pairs among the included nodes (score > 0.5)."""
        self._require_task(task)
        center = self.node_index(center_id)
        edges = self.graph.edges.get(task, [])
        adjacency: dict[int, set[int]] = {}
        for s, d in edges:
            adjacency.setdefault(s, set()).add(d)
            adjacency.setdefault(d, set()).add(s)

        nodes = {center}
        frontier = {center}
        for _ in range(hops):
            nxt: set[int] = set()
            for node in frontier:
                nxt |= adjacency.get(node, set())
            nxt -= nodes
            nodes |= nxt
            frontier = nxt
        node_list = sorted(nodes)

        observed = sorted(
            {(min(s, d), max(s, d)) for s, d in edges if s in nodes and d in nodes}
        )
        out_edges = []
        for s, d in observed:
            score = self.predict(self.graph.node_ids[s], self.graph.node_ids[d], task)
            out_edges.append(
                {
                    "src": self.graph.node_ids[s],
                    "dst": self.graph.node_ids[d],
                    "score": score,
                    "observed": True,
                }
            )
        observed_set = set(observed)
        predicted = []
        for i_pos, s in enumerate(node_list):
            for d in node_list[i_pos + 1 :]:
                if (s, d) in observed_set:
                    continue
                score = self.predict(
                    self.graph.node_ids[s], self.graph.node_ids[d], task
                )
                if score > 0.5:
                    predicted.append((score, s, d))
        predicted.sort(key=lambda t: (-t[0], t[1], t[2]))
        for score, s, d in predicted[:30]:
            out_edges.append(
                {
                    "src": self.graph.node_ids[s],
                    "dst": self.graph.node_ids[d],
                    "score": score,
                    "observed": False,
                }
            )

        return {
            "center": center_id,
            "task": task,
            "nodes": [
                {
                    "id": self.graph.node_ids[i],
                    "title": self.docs_by_id[self.graph.node_ids[i]].title,
                }
                for i in node_list
            ],
            "edges": out_edges,
        }

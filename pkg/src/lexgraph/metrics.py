"""Rank-based ROC-AUC (midrank ties), its brute-force oracle, and the
evaluation harness for trained link predictors."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .casegraph import CaseGraph, EdgeSplit, to_undirected
from .errors import DataError
from .gnn import RgcnModel, prepare_edges, score_edges, _forward, _sigmoid


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    n = values.shape[0]
    order = np.argsort(values, kind="mergesort")
    sv = values[order]
    boundaries = np.nonzero(np.diff(sv))[0] + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [n]])
    group_mid = (starts + ends - 1) / 2.0 + 1.0
    ranks = np.empty(n)
    ranks[order] = np.repeat(group_mid, ends - starts)
    return ranks


def roc_auc(pos_scores: Sequence[float], neg_scores: Sequence[float]) -> float:
    """P(random positive outranks random negative), ties counting half;
    computed from midranks in O((P+N) log(P+N))."""
    n_pos, n_neg = len(pos_scores), len(neg_scores)
    if n_pos == 0 or n_neg == 0:
        raise DataError("roc_auc needs nonempty positive and negative scores")
    combined = np.concatenate(
        [np.asarray(pos_scores, dtype=np.float64), np.asarray(neg_scores, dtype=np.float64)]
    )
    ranks = _midranks(combined)
    pos_rank_sum = ranks[:n_pos].sum()
    u_stat = pos_rank_sum - n_pos * (n_pos + 1) / 2.0
    return float(u_stat / (n_pos * n_neg))


def auc_oracle(pos_scores: Sequence[float], neg_scores: Sequence[float]) -> float:
    """Explicit pair count; quadratic, used to cross-check roc_auc."""
    if len(pos_scores) == 0 or len(neg_scores) == 0:
        raise DataError("auc_oracle needs nonempty positive and negative scores")
    total = 0.0
    for p in pos_scores:
        for q in neg_scores:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos_scores) * len(neg_scores))


@dataclass
class EvalReport:
    relation: str
    auc: float
    n_test_pos: int
    n_test_neg: int
    edge_scores: list[tuple[int, int, float, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "auc": self.auc,
            "n_test_pos": self.n_test_pos,
            "n_test_neg": self.n_test_neg,
            "edge_scores": [
                {"src": s, "dst": d, "score": sc, "label": lb}
                for s, d, sc, lb in self.edge_scores
            ],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["src", "dst", "score", "label"])
            for s, d, sc, lb in self.edge_scores:
                writer.writerow([s, d, repr(sc), lb])


def evaluate(
    model: RgcnModel,
    graph: CaseGraph,
    features: np.ndarray,
    split: EdgeSplit,
) -> EvalReport:
    """AUC over the held-out split. Embeddings use message passing over the
    undirected train positives only, matching the training-time view."""
    if model.task != split.relation:
        raise DataError(
            f"model was trained for {model.task!r}, split is {split.relation!r}"
        )
    if not split.test_pos or not split.test_neg:
        raise DataError("evaluate needs nonempty test positives and negatives")
    message_edges = {model.task: to_undirected(split.train_pos)}
    emb, _ = _forward(
        features, prepare_edges(message_edges, features.shape[0]), model
    )
    diag = model.relation_diagonals[model.task]
    pos_raw = score_edges(emb, diag, split.test_pos)
    neg_raw = score_edges(emb, diag, split.test_neg)
    auc = roc_auc(pos_raw.tolist(), neg_raw.tolist())

    edge_scores: list[tuple[int, int, float, int]] = []
    for (s, d), sc in zip(split.test_pos, _sigmoid(pos_raw)):
        edge_scores.append((s, d, float(sc), 1))
    for (s, d), sc in zip(split.test_neg, _sigmoid(neg_raw)):
        edge_scores.append((s, d, float(sc), 0))

    return EvalReport(
        relation=split.relation,
        auc=auc,
        n_test_pos=len(split.test_pos),
        n_test_neg=len(split.test_neg),
        edge_scores=edge_scores,
    )

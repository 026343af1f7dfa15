"""LDA by collapsed Gibbs sampling, TF-IDF scoring, topic occurrence
reports, and feature suggestions against the ontology.

The per-sweep sampling kernel is compiled (Cython) when the extension built;
otherwise a pure-Python kernel with identical arithmetic is used. Results are
bitwise-identical either way; set ``LEXGRAPH_PURE_PY=1`` to force the
fallback.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .annotate import Ontology
from .errors import DataError


def _select_kernel():
    if not os.environ.get("LEXGRAPH_PURE_PY"):
        try:
            from . import _gibbs

            return _gibbs.gibbs_sweep, "cython"
        except ImportError:
            pass
    from . import _gibbs_py

    return _gibbs_py.gibbs_sweep, "python"


_gibbs_sweep, KERNEL = _select_kernel()


def kernel_name() -> str:
    """Which sweep kernel was selected at import ("cython" or "python")."""
    return KERNEL


TokenizedDoc = tuple[str, Sequence[str]]  # (doc id, stem sequence)


@dataclass
class TopicModel:
    k: int
    alpha: float
    beta: float
    phi: np.ndarray  # K x V, rows sum to 1
    theta: np.ndarray  # D x K, rows sum to 1
    assignments: np.ndarray  # int32 per token
    vocab: dict[str, int]
    doc_labels: list[str]
    ll_history: list[tuple[int, float]] = field(default_factory=list)
    topic_token_counts: np.ndarray | None = None  # survives checkpointing

    def topic_counts(self) -> np.ndarray:
        if self.assignments.size:
            return np.bincount(self.assignments, minlength=self.k).astype(np.float64)
        if self.topic_token_counts is not None:
            return self.topic_token_counts.astype(np.float64)
        raise DataError("model has neither assignments nor stored topic counts")

    @property
    def vocab_list(self) -> list[str]:
        words = [""] * len(self.vocab)
        for w, i in self.vocab.items():
            words[i] = w
        return words


def fit_lda(
    docs: Sequence[TokenizedDoc],
    k: int,
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
    ll_every: int = 50,
    check_counts: bool = False,
) -> TopicModel:
    """Collapsed Gibbs sampling for ``iterations`` full sweeps; phi/theta are
    smoothed estimates from the final counts. Deterministic given the seed."""
    if k < 1:
        raise DataError("k must be >= 1")
    if iterations < 1:
        raise DataError("iterations must be >= 1")
    if alpha is None:
        alpha = 50.0 / k

    vocab_words = sorted({stem for _, stems in docs for stem in stems})
    if not vocab_words:
        raise DataError("empty vocabulary: no tokens in corpus")
    vocab = {w: i for i, w in enumerate(vocab_words)}

    doc_labels = [doc_id for doc_id, _ in docs]
    word_ids = np.array(
        [vocab[s] for _, stems in docs for s in stems], dtype=np.int32
    )
    doc_ids = np.array(
        [d for d, (_, stems) in enumerate(docs) for _ in stems], dtype=np.int32
    )
    n_tokens = word_ids.shape[0]
    n_docs = len(docs)
    v = len(vocab_words)

    rng = np.random.Generator(np.random.PCG64(seed))
    z = np.minimum((rng.random(n_tokens) * k).astype(np.int64), k - 1).astype(np.int32)

    n_dk = np.zeros((n_docs, k), dtype=np.int64)
    n_kw = np.zeros((k, v), dtype=np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)
    np.add.at(n_kw, (z, word_ids), 1)
    n_k = np.bincount(z, minlength=k).astype(np.int64)
    n_d = np.bincount(doc_ids, minlength=n_docs).astype(np.int64)

    ll_history: list[tuple[int, float]] = []
    for sweep in range(1, iterations + 1):
        uniforms = rng.random(n_tokens)
        _gibbs_sweep(word_ids, doc_ids, z, n_dk, n_kw, n_k, alpha, beta, uniforms)
        if check_counts:
            _check_counts(word_ids, doc_ids, z, n_dk, n_kw, n_k)
        if sweep % ll_every == 0 or sweep == iterations:
            phi, theta = _estimates(n_dk, n_kw, n_k, n_d, alpha, beta)
            ll = _log_likelihood(phi, theta, doc_ids, word_ids)
            ll_history.append((sweep, ll))

    phi, theta = _estimates(n_dk, n_kw, n_k, n_d, alpha, beta)
    return TopicModel(
        k=k,
        alpha=alpha,
        beta=beta,
        phi=phi,
        theta=theta,
        assignments=z,
        vocab=vocab,
        doc_labels=doc_labels,
        ll_history=ll_history,
        topic_token_counts=n_k.copy(),
    )


def _estimates(n_dk, n_kw, n_k, n_d, alpha, beta) -> tuple[np.ndarray, np.ndarray]:
    k, v = n_kw.shape
    phi = (n_kw + beta) / (n_k + v * beta)[:, None]
    theta = (n_dk + alpha) / (n_d + k * alpha)[:, None]
    return phi, theta


def _log_likelihood(phi, theta, doc_ids, word_ids) -> float:
    mix = theta @ phi
    return float(np.log(mix[doc_ids, word_ids]).sum())


def _check_counts(word_ids, doc_ids, z, n_dk, n_kw, n_k) -> None:
    k, v = n_kw.shape
    ref_kw = np.zeros((k, v), dtype=np.int64)
    np.add.at(ref_kw, (z, word_ids), 1)
    ref_dk = np.zeros(n_dk.shape, dtype=np.int64)
    np.add.at(ref_dk, (doc_ids, z), 1)
    assert np.array_equal(ref_kw, n_kw), "topic-word counts drifted"
    assert np.array_equal(ref_dk, n_dk), "document-topic counts drifted"
    assert np.array_equal(n_kw.sum(axis=1), n_k), "topic totals drifted"


class TopicSummary(NamedTuple):
    topic: int
    top_stem: str
    occurrence_pct: float
    top_words: list[str]


def topic_report(model: TopicModel, top_n: int = 10, words_per_topic: int = 10) -> list[TopicSummary]:
    """Topics ranked by share of token assignments, with their top words."""
    counts = model.topic_counts()
    total = counts.sum()
    shares = 100.0 * counts / total if total > 0 else counts
    vocab_list = model.vocab_list
    order = sorted(range(model.k), key=lambda t: (-shares[t], t))
    report = []
    for t in order[:top_n]:
        top_idx = np.argsort(-model.phi[t], kind="stable")[:words_per_topic]
        words = [vocab_list[i] for i in top_idx]
        report.append(TopicSummary(t, words[0], float(shares[t]), words))
    return report


@dataclass
class TfIdfIndex:
    idf: dict[str, float]
    scores: dict[str, dict[str, float]]  # doc id -> stem -> tf-idf

    def score(self, doc_id: str, stem: str) -> float:
        return self.scores.get(doc_id, {}).get(stem, 0.0)


def tfidf(docs: Sequence[TokenizedDoc]) -> TfIdfIndex:
    """tf = count / doc length, idf = ln(D / df), score = tf * idf."""
    if not docs:
        raise DataError("tfidf needs a nonempty corpus")
    n_docs = len(docs)
    df: dict[str, int] = {}
    for _, stems in docs:
        for stem in set(stems):
            df[stem] = df.get(stem, 0) + 1
    idf = {stem: math.log(n_docs / count) for stem, count in df.items()}

    scores: dict[str, dict[str, float]] = {}
    for doc_id, stems in docs:
        length = len(stems)
        doc_scores: dict[str, float] = {}
        if length:
            counts: dict[str, int] = {}
            for stem in stems:
                counts[stem] = counts.get(stem, 0) + 1
            for stem, c in counts.items():
                doc_scores[stem] = (c / length) * idf[stem]
        scores[doc_id] = doc_scores
    return TfIdfIndex(idf=idf, scores=scores)


def suggest_features(
    report: Sequence[TopicSummary], ontology: Ontology
) -> list[tuple[str, str | None]]:
    """Match each topic's top stem to an ontology node type by prefix
    (stems are truncated forms, e.g. "articl" -> "article")."""
    out: list[tuple[str, str | None]] = []
    for summary in report:
        stem = summary.top_stem
        candidates = sorted(t for t in ontology.node_types if t.startswith(stem))
        out.append((stem, candidates[0] if candidates else None))
    return out


# ---------------------------------------------------------------------------
# Checkpoint format: one JSON header line, then little-endian float64 blocks
# for phi (K x V) and theta (D x K), row-major.


def save_topic_model(model: TopicModel, path) -> None:
    header = {
        "k": model.k,
        "alpha": model.alpha,
        "beta": model.beta,
        "vocab": model.vocab_list,
        "doc_labels": model.doc_labels,
        "ll_history": model.ll_history,
        "topic_token_counts": None
        if model.topic_token_counts is None
        else [int(c) for c in model.topic_token_counts],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, ensure_ascii=False).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(model.phi, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.theta, dtype="<f8").tobytes())


def load_topic_model(path) -> TopicModel:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        k = header["k"]
        vocab_list = header["vocab"]
        doc_labels = header["doc_labels"]
        v = len(vocab_list)
        d = len(doc_labels)
        phi = np.frombuffer(fh.read(k * v * 8), dtype="<f8").reshape(k, v).copy()
        theta = np.frombuffer(fh.read(d * k * 8), dtype="<f8").reshape(d, k).copy()
    return TopicModel(
        k=k,
        alpha=header["alpha"],
        beta=header["beta"],
        phi=phi,
        theta=theta,
        assignments=np.zeros(0, dtype=np.int32),
        vocab={w: i for i, w in enumerate(vocab_list)},
        doc_labels=doc_labels,
        ll_history=[tuple(x) for x in header["ll_history"]],
        topic_token_counts=None
        if header.get("topic_token_counts") is None
        else np.array(header["topic_token_counts"], dtype=np.int64),
    )

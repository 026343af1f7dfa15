"""Attributed case graph: feature encoding, edge sets, undirected
conversion, train/test splits, and negative sampling."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .annotate import AliasTable, Mention, canonicalize, count_sentences
from .corpus import Document, count_tokens
from .errors import GraphError

FEATURE_SOURCES = ("metadata-ordinal", "metadata-numeric", "lawpoint-count")

# documents that become graph nodes; legislation stays background material
_NODE_DOC_TYPES = ("case", "judgment")


class FeatureDef(NamedTuple):
    name: str
    source: str
    key: str


def parse_feature_spec(entries: Sequence[dict], valid_concepts: Iterable[str] | None = None) -> list[FeatureDef]:
    spec: list[FeatureDef] = []
    names: set[str] = set()
    for e in entries:
        fd = FeatureDef(e["name"], e["source"], e["key"])
        if fd.source not in FEATURE_SOURCES:
            raise GraphError(f"feature {fd.name!r}: unknown source {fd.source!r}")
        if fd.name in names:
            raise GraphError(f"duplicate feature name {fd.name!r}")
        names.add(fd.name)
        spec.append(fd)
    if valid_concepts is not None:
        concepts = set(valid_concepts)
        for fd in spec:
            if fd.source == "lawpoint-count" and fd.key not in concepts:
                raise GraphError(
                    f"feature {fd.name!r}: {fd.key!r} is not a known lawpoint concept"
                )
    return spec


def load_feature_spec(path, valid_concepts: Iterable[str] | None = None) -> list[FeatureDef]:
    with open(path, encoding="utf-8") as fh:
        return parse_feature_spec(json.load(fh), valid_concepts)


def _feature_view(doc: Document) -> dict[str, str]:
    """Flat string view of a document for feature lookup: raw fields plus
    derived counts, all stringly typed like the metadata map."""
    meta = doc.metadata

    def n_items(key: str) -> int:
        value = meta.get(key, "")
        return len([p for p in value.split(";") if p.strip()])

    year = month = ""
    if doc.date:
        year, month = doc.date[0:4], doc.date[5:7]

    view = dict(meta)
    view.update(
        {
            "court": doc.court,
            "doc_type": doc.doc_type,
            "jurisdiction": meta.get("jurisdiction", ""),
            "year": year,
            "month": month,
            "judge_count": str(n_items("judges")),
            "plaintiff_count": str(n_items("plaintiffs")),
            "defendant_count": str(n_items("defendants")),
            "appellant_count": str(n_items("appellants")),
            "cited_section_count": str(n_items("sections")),
            "cited_act_count": str(n_items("acts")),
            "sentence_count": str(count_sentences(doc.body)),
            "token_count": str(count_tokens(doc.body)),
        }
    )
    return view


def build_ordinal_maps(
    docs: Sequence[Document], spec: Sequence[FeatureDef], aliases: AliasTable
) -> dict[str, dict[str, int]]:
    """Per-ordinal-feature canonical-label -> code maps; code 0 is reserved
    for unknown/absent values, known labels get 1..n in sorted order."""
    maps: dict[str, dict[str, int]] = {}
    for fd in spec:
        if fd.source != "metadata-ordinal":
            continue
        values: set[str] = set()
        for doc in docs:
            raw = _feature_view(doc).get(fd.key, "")
            if raw.strip():
                values.add(canonicalize(raw, aliases))
        maps[fd.name] = {label: i + 1 for i, label in enumerate(sorted(values))}
    return maps


def encode_features(
    doc: Document,
    mentions: Sequence[Mention],
    spec: Sequence[FeatureDef],
    aliases: AliasTable,
    ordinal_maps: dict[str, dict[str, int]],
) -> np.ndarray:
    """One real value per spec entry: ordinal code, parsed numeric, or
    mention count for the named concept."""
    view = _feature_view(doc)
    concept_counts: dict[str, int] = {}
    for m in mentions:
        concept_counts[m.concept] = concept_counts.get(m.concept, 0) + 1

    vec = np.zeros(len(spec), dtype=np.float64)
    for i, fd in enumerate(spec):
        if fd.source == "metadata-ordinal":
            raw = view.get(fd.key, "")
            if raw.strip():
                code = ordinal_maps.get(fd.name, {}).get(canonicalize(raw, aliases), 0)
            else:
                code = 0
            vec[i] = float(code)
        elif fd.source == "metadata-numeric":
            raw = view.get(fd.key, "").strip()
            if not raw:
                vec[i] = 0.0
            else:
                try:
                    vec[i] = float(raw)
                except ValueError:
                    raise GraphError(
                        f"document {doc.id!r}: value {raw!r} for key {fd.key!r} "
                        f"is not numeric"
                    ) from None
        else:  # lawpoint-count
            vec[i] = float(concept_counts.get(fd.key, 0))
    return vec


@dataclass
class CaseGraph:
    node_ids: list[str]  # sorted document ids
    feature_names: list[str]
    feature_sources: list[str]
    feature_keys: list[str]
    features: np.ndarray  # N x d, column z-scored
    raw_features: np.ndarray  # N x d, as encoded
    norm_mean: np.ndarray
    norm_std: np.ndarray
    edges: dict[str, list[tuple[int, int]]] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def index_of(self, doc_id: str) -> int:
        try:
            return self.node_ids.index(doc_id)
        except ValueError:
            raise GraphError(f"unknown case id {doc_id!r}") from None

    def to_json(self) -> dict:
        return {
            "nodes": self.node_ids,
            "feature_names": self.feature_names,
            "feature_sources": self.feature_sources,
            "feature_keys": self.feature_keys,
            "features": self.features.tolist(),
            "raw_features": self.raw_features.tolist(),
            "norm_mean": self.norm_mean.tolist(),
            "norm_std": self.norm_std.tolist(),
            "edges": {rel: [list(e) for e in es] for rel, es in sorted(self.edges.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CaseGraph":
        return cls(
            node_ids=list(obj["nodes"]),
            feature_names=list(obj["feature_names"]),
            feature_sources=list(obj["feature_sources"]),
            feature_keys=list(obj["feature_keys"]),
            features=np.array(obj["features"], dtype=np.float64).reshape(
                len(obj["nodes"]), len(obj["feature_names"])
            ),
            raw_features=np.array(obj["raw_features"], dtype=np.float64).reshape(
                len(obj["nodes"]), len(obj["feature_names"])
            ),
            norm_mean=np.array(obj["norm_mean"], dtype=np.float64),
            norm_std=np.array(obj["norm_std"], dtype=np.float64),
            edges={rel: [tuple(e) for e in es] for rel, es in obj["edges"].items()},
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_json(), fh, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CaseGraph":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def build_case_graph(
    docs: Sequence[Document],
    mentions_by_doc: dict[str, list[Mention]],
    spec: Sequence[FeatureDef],
    aliases: AliasTable,
) -> CaseGraph:
    """Nodes are case/judgment documents sorted by id; features are encoded
    per the feature spec and z-scored per column; edge sets come from
    citations and the similar_to metadata (stored one direction per pair)."""
    node_docs = sorted(
        (d for d in docs if d.doc_type in _NODE_DOC_TYPES), key=lambda d: d.id
    )
    if not node_docs:
        raise GraphError("no case or judgment documents to build a graph from")
    index = {d.id: i for i, d in enumerate(node_docs)}
    ordinal_maps = build_ordinal_maps(node_docs, spec, aliases)

    raw = np.stack(
        [
            encode_features(d, mentions_by_doc.get(d.id, []), spec, aliases, ordinal_maps)
            for d in node_docs
        ]
    )
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)
    safe = np.where(std > 0, std, 1.0)
    normalized = (raw - mean) / safe
    normalized[:, std == 0] = 0.0

    cites: list[tuple[int, int]] = []
    for doc in node_docs:
        src = index[doc.id]
        for target in doc.citations:
            dst = index.get(target)
            if dst is not None:
                cites.append((src, dst))

    similar_pairs: set[tuple[int, int]] = set()
    for doc in node_docs:
        raw_value = doc.metadata.get("similar_to", "")
        for part in raw_value.split(";"):
            part = part.strip()
            if not part:
                continue
            other = index.get(part)
            if other is None or other == index[doc.id]:
                continue
            a, b = index[doc.id], other
            similar_pairs.add((min(a, b), max(a, b)))

    return CaseGraph(
        node_ids=[d.id for d in node_docs],
        feature_names=[fd.name for fd in spec],
        feature_sources=[fd.source for fd in spec],
        feature_keys=[fd.key for fd in spec],
        features=normalized,
        raw_features=raw,
        norm_mean=mean,
        norm_std=std,
        edges={"cites": cites, "similar_to": sorted(similar_pairs)},
    )


def to_undirected(edges: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """Original edges followed by their reverses; length exactly doubles."""
    edges = list(edges)
    return edges + [(d, s) for s, d in edges]


@dataclass
class EdgeSplit:
    relation: str
    train_pos: list[tuple[int, int]]
    test_pos: list[tuple[int, int]]
    train_neg: list[tuple[int, int]]
    test_neg: list[tuple[int, int]]
    seed: int
    test_fraction: float


def split_edges(
    pos_edges: Sequence[tuple[int, int]], test_fraction: float, seed: int
) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """(train_pos, test_pos) from a seeded uniform shuffle and prefix split;
    |test| = round(test_fraction * |pos|)."""
    if not 0.0 <= test_fraction <= 1.0:
        raise GraphError(f"test_fraction must be in [0, 1], got {test_fraction}")
    edges = list(pos_edges)
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(len(edges))
    shuffled = [edges[i] for i in order]
    n_test = int(round(test_fraction * len(edges)))
    return shuffled[n_test:], shuffled[:n_test]


def sample_negatives(
    graph: CaseGraph,
    relation: str,
    m: int,
    seed: int,
    exclude: set[tuple[int, int]] | None = None,
) -> list[tuple[int, int]]:
    """m node pairs disjoint from the relation's positives (either
    orientation, since training treats edges as undirected), from the
    exclusion set, and from the diagonal. Deterministic under the seed."""
    n = graph.n_nodes
    forbidden: set[tuple[int, int]] = set(exclude) if exclude else set()
    for s, d in graph.edges.get(relation, []):
        forbidden.add((s, d))
        forbidden.add((d, s))
    forbidden_offdiag = sum(1 for s, d in forbidden if s != d and s < n and d < n)
    feasible = n * (n - 1) - forbidden_offdiag
    if m < 0 or m > feasible:
        raise GraphError(f"cannot sample {m} negatives; only {feasible} pairs free")
    if m == 0:
        return []

    rng = np.random.Generator(np.random.PCG64(seed))
    if n * n <= 4_000_000:
        pool = [
            (s, d)
            for s in range(n)
            for d in range(n)
            if s != d and (s, d) not in forbidden
        ]
        picks = rng.choice(len(pool), size=m, replace=False)
        return [pool[i] for i in picks]

    out: list[tuple[int, int]] = []
    chosen: set[tuple[int, int]] = set()
    while len(out) < m:
        batch = rng.integers(0, n, size=(2 * (m - len(out)) + 16, 2))
        for s, d in batch:
            pair = (int(s), int(d))
            if pair[0] == pair[1] or pair in forbidden or pair in chosen:
                continue
            chosen.add(pair)
            out.append(pair)
            if len(out) == m:
                break
    return out


def make_split(
    graph: CaseGraph,
    relation: str,
    test_fraction: float = 0.1,
    seed: int = 0,
    negative_ratio: int = 1,
) -> EdgeSplit:
    """Positive prefix split plus 1:negative_ratio sampled negatives for the
    train and test sides (test negatives avoid the train negatives too)."""
    pos = graph.edges.get(relation)
    if not pos:
        raise GraphError(f"relation {relation!r} has no edges to split")
    train_pos, test_pos = split_edges(pos, test_fraction, seed)
    train_neg = sample_negatives(graph, relation, negative_ratio * len(train_pos), seed + 1)
    test_neg = sample_negatives(
        graph, relation, negative_ratio * len(test_pos), seed + 2, exclude=set(train_neg)
    )
    return EdgeSplit(
        relation=relation,
        train_pos=train_pos,
        test_pos=test_pos,
        train_neg=train_neg,
        test_neg=test_neg,
        seed=seed,
        test_fraction=test_fraction,
    )

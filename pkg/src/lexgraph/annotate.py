"""Gazetteer lawpoint annotation, alias canonicalization, ontology-typed
triple extraction, and knowledge-graph statistics."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .corpus import Document
from .errors import AnnotationError

_WS_RE = re.compile(r"\s+")
_SENTENCE_BOUNDARY_RE = re.compile(r"[.!?]\s+[A-Z]")

# doc_type -> ontology node type for the document itself
_DOC_NODE_TYPE = {"case": "case", "judgment": "judgement", "legislation": "act"}

# metadata key -> (predicate, object entity type, multi-valued)
_METADATA_RULES = {
    "judges": ("judge", "judge", True),
    "plaintiffs": ("plaintiff", "plaintiff", True),
    "defendants": ("defendant", "defendant", True),
    "appellants": ("appellant", "appellant", True),
    "jurisdiction": ("jurisdiction", "jurisdiction", False),
    "sections": ("cites_section", "section", True),
    "acts": ("cites_act", "act", True),
    "articles": ("cites_article", "article", True),
    "similar_to": ("similar_to", "case", True),
}


def _normalize_phrase(phrase: str) -> str:
    return _WS_RE.sub(" ", phrase.strip().lower())


class LawpointDictionary:
    """Concept label -> list of lowercase-normalized phrases; each phrase
    belongs to exactly one concept."""

    def __init__(self, concepts: dict[str, list[str]]):
        self.concepts: dict[str, list[str]] = {}
        self._phrase_to_concept: dict[str, str] = {}
        for concept, phrases in concepts.items():
            if not phrases:
                raise AnnotationError(f"concept {concept!r} has no phrases")
            normalized = []
            for phrase in phrases:
                norm = _normalize_phrase(phrase)
                if not norm:
                    raise AnnotationError(f"concept {concept!r} has an empty phrase")
                owner = self._phrase_to_concept.get(norm)
                if owner is not None and owner != concept:
                    raise AnnotationError(
                        f"phrase {norm!r} mapped to both {owner!r} and {concept!r}"
                    )
                self._phrase_to_concept[norm] = concept
                normalized.append(norm)
            self.concepts[concept] = normalized
        # longest first, ties alphabetical, so the scan below is longest-match
        self._phrases = sorted(self._phrase_to_concept, key=lambda p: (-len(p), p))

    def concept_of(self, phrase: str) -> str:
        return self._phrase_to_concept[phrase]

    def concept_labels(self) -> list[str]:
        return sorted(self.concepts)

    def iter_phrases_longest_first(self) -> Sequence[str]:
        return self._phrases

    @classmethod
    def from_json(cls, path) -> "LawpointDictionary":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))


class Mention(NamedTuple):
    doc_id: str
    phrase: str  # normalized dictionary phrase
    concept: str
    start: int  # byte offset into the body
    end: int


class AliasTable:
    """Many-to-one alias surface -> canonical label map. Canonical labels are
    fixed points (lowercase, trimmed, and never re-mapped)."""

    def __init__(self, aliases: dict[str, str]):
        table: dict[str, str] = {}
        for alias, canonical in aliases.items():
            a = alias.strip().lower()
            c = canonical.strip().lower()
            if not a or not c:
                raise AnnotationError("empty alias or canonical label")
            table[a] = c
        for canonical in set(table.values()):
            mapped = table.get(canonical, canonical)
            if mapped != canonical:
                raise AnnotationError(
                    f"canonical label {canonical!r} is itself aliased to {mapped!r}"
                )
        self._table = table

    def canonical(self, surface: str) -> str:
        key = surface.strip().lower()
        return self._table.get(key, key)

    def to_json(self) -> dict[str, str]:
        return dict(sorted(self._table.items()))

    @classmethod
    def from_json(cls, path) -> "AliasTable":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))


def canonicalize(surface: str, aliases: AliasTable) -> str:
    """Canonical label for a surface: alias lookup, else lowercase-trim."""
    return aliases.canonical(surface)


@dataclass(frozen=True)
class Ontology:
    node_types: frozenset[str]
    relation_types: frozenset[tuple[str, str, str]]

    def __post_init__(self):
        for s, p, o in self.relation_types:
            if s not in self.node_types or o not in self.node_types:
                raise AnnotationError(
                    f"relation ({s}, {p}, {o}) references undeclared node types"
                )

    @property
    def predicates(self) -> frozenset[str]:
        return frozenset(p for _, p, _ in self.relation_types)

    @classmethod
    def from_dict(cls, obj: dict) -> "Ontology":
        return cls(
            node_types=frozenset(obj["node_types"]),
            relation_types=frozenset(tuple(r) for r in obj["relation_types"]),
        )

    @classmethod
    def from_json(cls, path) -> "Ontology":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


class Triple(NamedTuple):
    subject: str  # document id
    predicate: str
    object: str  # canonical object label (a document id for cites/similar_to)


@dataclass
class Entity:
    id: str
    surface: str
    type: str
    canonical: str


@dataclass
class KnowledgeGraph:
    entities: dict[str, Entity] = field(default_factory=dict)
    triples: list[Triple] = field(default_factory=list)

    @property
    def relations(self) -> list[str]:
        return sorted({t.predicate for t in self.triples})


def _lowercase_preserving_length(body: str) -> str:
    lowered = body.lower()
    if len(lowered) == len(body):
        return lowered
    # A few Unicode characters lowercase to multiple code points; keep those
    # untouched so spans into the original body stay valid.
    return "".join(c.lower() if len(c.lower()) == 1 else c for c in body)


def match_lawpoints(doc: Document, dictionary: LawpointDictionary) -> list[Mention]:
    """Non-overlapping longest (then leftmost) dictionary-phrase matches over
    the lowercased body, on word boundaries, with byte spans."""
    body = doc.body
    lowered = _lowercase_preserving_length(body)
    phrases = dictionary.iter_phrases_longest_first()
    n = len(lowered)

    offs = None
    if not body.isascii():
        offs = [0] * (n + 1)
        pos = 0
        for i, ch in enumerate(body):
            offs[i] = pos
            pos += len(ch.encode("utf-8"))
        offs[n] = pos

    mentions: list[Mention] = []
    i = 0
    while i < n:
        ch = lowered[i]
        if not ch.isalnum() or (i > 0 and lowered[i - 1].isalnum()):
            i += 1
            continue
        hit = None
        for phrase in phrases:
            end = i + len(phrase)
            if end <= n and lowered.startswith(phrase, i):
                if end == n or not lowered[end].isalnum():
                    hit = phrase
                    break
        if hit is None:
            i += 1
            continue
        end = i + len(hit)
        b_start, b_end = (i, end) if offs is None else (offs[i], offs[end])
        mentions.append(Mention(doc.id, hit, dictionary.concept_of(hit), b_start, b_end))
        i = end
    return mentions


def _split_multi(value: str) -> list[str]:
    return [part.strip() for part in value.split(";") if part.strip()]


def extract_triples(
    doc: Document,
    mentions: Sequence[Mention],
    ontology: Ontology,
    aliases: AliasTable,
) -> list[Triple]:
    """Typed triples from metadata relations, mention concepts, and citations;
    objects canonicalized, output sorted by (predicate, object), deduplicated.
    """
    predicates = ontology.predicates
    raw: list[tuple[Triple, str]] = []  # (triple, object entity type)

    def add(predicate: str, obj: str, etype: str) -> None:
        if predicate not in predicates:
            raise AnnotationError(f"predicate {predicate!r} not in ontology")
        raw.append((Triple(doc.id, predicate, obj), etype))

    if doc.court.strip():
        add("court", canonicalize(doc.court, aliases), "court")

    for key, value in doc.metadata.items():
        if key not in _METADATA_RULES:
            raise AnnotationError(
                f"document {doc.id!r}: no extraction rule for metadata key {key!r}"
            )
        predicate, etype, multi = _METADATA_RULES[key]
        values = _split_multi(value) if multi else [value.strip()]
        for v in values:
            if v:
                add(predicate, canonicalize(v, aliases), etype)

    for concept in sorted({m.concept for m in mentions}):
        add("lawpoint", canonicalize(concept, aliases), "lawpoint")

    for cited in doc.citations:
        add("cites", cited, "case")

    seen: set[Triple] = set()
    out: list[Triple] = []
    for triple, _ in raw:
        if triple not in seen:
            seen.add(triple)
            out.append(triple)
    out.sort(key=lambda t: (t.predicate, t.object))
    return out


# object entity type per predicate, used when assembling the full graph
_PREDICATE_OBJECT_TYPE = {
    "court": "court",
    "judge": "judge",
    "plaintiff": "plaintiff",
    "defendant": "defendant",
    "appellant": "appellant",
    "jurisdiction": "jurisdiction",
    "lawpoint": "lawpoint",
    "cites_section": "section",
    "cites_act": "act",
    "cites_article": "article",
}


def build_kg(
    docs: Sequence[Document],
    mentions_by_doc: dict[str, list[Mention]],
    ontology: Ontology,
    aliases: AliasTable,
) -> KnowledgeGraph:
    """Assemble the corpus-wide knowledge graph from per-document triples."""
    kg = KnowledgeGraph()
    doc_types = {doc.id: _DOC_NODE_TYPE[doc.doc_type] for doc in docs}

    for doc in docs:
        kg.entities[doc.id] = Entity(
            id=doc.id, surface=doc.title, type=doc_types[doc.id], canonical=doc.id
        )

    all_triples: set[Triple] = set()
    for doc in docs:
        triples = extract_triples(doc, mentions_by_doc.get(doc.id, []), ontology, aliases)
        all_triples.update(triples)
        for triple in triples:
            obj = triple.object
            if triple.predicate in ("cites", "similar_to"):
                if obj not in kg.entities:
                    kg.entities[obj] = Entity(
                        id=obj, surface=obj, type=doc_types.get(obj, "case"), canonical=obj
                    )
                continue
            etype = _PREDICATE_OBJECT_TYPE[triple.predicate]
            ent_id = f"{etype}:{obj}"
            if ent_id not in kg.entities:
                kg.entities[ent_id] = Entity(id=ent_id, surface=obj, type=etype, canonical=obj)

    kg.triples = sorted(all_triples)
    return kg


def count_sentences(body: str) -> int:
    """Pinned sentence count: terminators (. ! ?) followed by whitespace and
    an uppercase letter mark boundaries; a nonempty body has boundaries + 1."""
    if not body.strip():
        return 0
    return len(_SENTENCE_BOUNDARY_RE.findall(body)) + 1


@dataclass(frozen=True)
class StatsReport:
    documents: int
    sentences: int
    triples: int
    entities: int
    relations: int

    def to_json(self) -> dict[str, int]:
        return {
            "documents": self.documents,
            "sentences": self.sentences,
            "triples": self.triples,
            "entities": self.entities,
            "relations": self.relations,
        }


def kg_stats(kg: KnowledgeGraph, docs: Sequence[Document]) -> StatsReport:
    return StatsReport(
        documents=len(docs),
        sentences=sum(count_sentences(doc.body) for doc in docs),
        triples=len(kg.triples),
        entities=len(kg.entities),
        relations=len(kg.relations),
    )


def write_triples_tsv(kg: KnowledgeGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s, p, o in kg.triples:
            fh.write(f"{s}\t{p}\t{o}\n")


def write_mentions_json(mentions_by_doc: dict[str, list[Mention]], path) -> None:
    payload = {
        doc_id: [
            {"phrase": m.phrase, "concept": m.concept, "start": m.start, "end": m.end}
            for m in ms
        ]
        for doc_id, ms in sorted(mentions_by_doc.items())
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def load_mentions_json(path) -> dict[str, list[Mention]]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return {
        doc_id: [Mention(doc_id, m["phrase"], m["concept"], m["start"], m["end"]) for m in ms]
        for doc_id, ms in payload.items()
    }


def annotate_corpus(
    docs: Sequence[Document], dictionary: LawpointDictionary
) -> dict[str, list[Mention]]:
    return {doc.id: match_lawpoints(doc, dictionary) for doc in docs}

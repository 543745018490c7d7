"""Query-driven pruning of objects and relations.

Object matching is incremental: cheap lexical alias lookup first, then a
word-embedding cosine comparison for whatever the lexical pass missed.
The surviving subgraph depends on how many objects matched (two or more:
keep them and their interrelations; exactly one: keep its outgoing edges
and their tails; none: keep everything). Relations are then ranked per
head object by query relevance first and center distance second, cut to
the top k, and deduplicated so an unordered pair keeps only its first
edge.
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .config import PipelineConfig
from .errors import ValidationError
from .types import (
    DEPTH_LABELS,
    DIRECTIONAL_LABELS,
    RELATION_LABELS,
    ObjectInstance,
    Relation,
    SceneGraph,
    ontology_order,
)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on non-alphanumerics."""
    return _TOKEN_RE.findall(text.lower())


def _contains_sequence(haystack: Sequence[str], needle: Sequence[str]) -> bool:
    if not needle or len(needle) > len(haystack):
        return False
    return any(
        list(haystack[i:i + len(needle)]) == list(needle)
        for i in range(len(haystack) - len(needle) + 1)
    )


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    text = resources.files("scenemark.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def content_tokens(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Query tokens minus function words; the semantic matching input."""
    if stopwords is None:
        stopwords = default_stopwords()
    return [t for t in tokenize(text) if t not in stopwords]


@dataclass(frozen=True)
class SynonymLexicon:
    """Aliases per canonical class label; every label aliases itself."""

    aliases: dict[str, tuple[str, ...]]

    @classmethod
    def from_mapping(cls, mapping: dict[str, Iterable[str]]) -> "SynonymLexicon":
        out = {}
        for label, names in mapping.items():
            label = label.strip().lower()
            lowered = [n.strip().lower() for n in names if n.strip()]
            if label not in lowered:
                lowered.insert(0, label)
            out[label] = tuple(lowered)
        return cls(out)

    @classmethod
    def load_default(cls) -> "SynonymLexicon":
        text = resources.files("scenemark.data").joinpath(
            "object_synonyms.json").read_text("utf-8")
        return cls.from_mapping(json.loads(text))

    @classmethod
    def load(cls, path) -> "SynonymLexicon":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))

    def aliases_for(self, class_label: str) -> tuple[str, ...]:
        return self.aliases.get(class_label, (class_label,))


@dataclass(frozen=True)
class RelationLexicon:
    """Trigger phrases per relation label."""

    triggers: dict[str, tuple[str, ...]]

    def __post_init__(self):
        for label in RELATION_LABELS:
            if not self.triggers.get(label):
                raise ValidationError("every relation label needs at least one "
                                      "trigger phrase", field=label)

    @classmethod
    def from_mapping(cls, mapping: dict[str, Iterable[str]]) -> "RelationLexicon":
        return cls({
            label: tuple(p.strip().lower() for p in phrases)
            for label, phrases in mapping.items()
        })

    @classmethod
    def load_default(cls) -> "RelationLexicon":
        text = resources.files("scenemark.data").joinpath(
            "relation_lexicon.json").read_text("utf-8")
        return cls.from_mapping(json.loads(text))

    @classmethod
    def load(cls, path) -> "RelationLexicon":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))

    def head_tokens(self, label: str, stopwords: frozenset[str] | None = None) -> list[str]:
        """One representative token per trigger phrase, for semantic matching."""
        if stopwords is None:
            stopwords = default_stopwords()
        heads = []
        for phrase in self.triggers.get(label, ()):
            tokens = tokenize(phrase)
            informative = [t for t in tokens if t not in stopwords]
            pick = informative[0] if informative else (tokens[0] if tokens else None)
            if pick and pick not in heads:
                heads.append(pick)
        return heads


class WordVectorTable:
    """Token to dense-vector map with cosine lookup; empty table allowed."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        dims = {v.shape[0] for v in vectors.values()}
        if len(dims) > 1:
            raise ValidationError(f"mixed vector dimensions {sorted(dims)}",
                                  field="vectors")
        self.dim = dims.pop() if dims else 0
        self._unit = {
            token: vec / np.linalg.norm(vec) for token, vec in vectors.items()
        }

    def __len__(self) -> int:
        return len(self._unit)

    def __contains__(self, token: str) -> bool:
        return token in self._unit

    @classmethod
    def empty(cls) -> "WordVectorTable":
        return cls({})

    @classmethod
    def from_text(cls, text: str) -> "WordVectorTable":
        """Parse ``token v1 ... vd`` lines; a leading ``count dim`` header
        (two integer fields) is tolerated and skipped. Zero-norm rows are
        dropped since they cannot contribute to any cosine."""
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(text.splitlines()):
            parts = line.split()
            if not parts:
                continue
            if lineno == 0 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue
                except ValueError:
                    pass
            token = parts[0].lower()
            try:
                vec = np.array([float(p) for p in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ValidationError(f"line {lineno + 1}: non-numeric component",
                                      field=token) from exc
            if vec.size == 0:
                raise ValidationError(f"line {lineno + 1}: no components", field=token)
            if np.linalg.norm(vec) > 0:
                vectors[token] = vec
        return cls(vectors)

    @classmethod
    def load(cls, path) -> "WordVectorTable":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def cosine(self, a: str, b: str) -> float | None:
        ua, ub = self._unit.get(a), self._unit.get(b)
        if ua is None or ub is None:
            return None
        return float(np.dot(ua, ub))

    def best_cosine(self, left: Iterable[str], right: Iterable[str]) -> float:
        """Max cosine over token pairs; -inf when nothing is comparable."""
        best = float("-inf")
        right = [t for t in right if t in self._unit]
        for a in left:
            ua = self._unit.get(a)
            if ua is None:
                continue
            for b in right:
                best = max(best, float(np.dot(ua, self._unit[b])))
        return best


def match_objects(
    query: str,
    objects: Sequence[ObjectInstance],
    lexicon: SynonymLexicon,
    vectors: WordVectorTable,
    tau_query_obj: float,
    stopwords: frozenset[str] | None = None,
) -> set[int]:
    """Indices of query-relevant objects, lexical pass then semantic pass."""
    if not query:
        raise ValidationError("query must be non-empty", field="query")
    qtokens = tokenize(query)
    qcontent = content_tokens(query, stopwords)

    relevant: set[int] = set()
    for idx, obj in enumerate(objects):
        aliases = lexicon.aliases_for(obj.class_label)
        if any(_contains_sequence(qtokens, tokenize(alias)) for alias in aliases):
            relevant.add(idx)

    if len(vectors) == 0 or not qcontent:
        return relevant
    for idx, obj in enumerate(objects):
        if idx in relevant:
            continue
        alias_tokens: list[str] = []
        for alias in lexicon.aliases_for(obj.class_label):
            for t in tokenize(alias):
                if t not in alias_tokens:
                    alias_tokens.append(t)
        if vectors.best_cosine(qcontent, alias_tokens) > tau_query_obj:
            relevant.add(idx)
    return relevant


def extract_relation_terms(
    query: str,
    relation_lexicon: RelationLexicon,
    vectors: WordVectorTable | None = None,
    tau: float = 0.5,
    stopwords: frozenset[str] | None = None,
) -> set[str]:
    """Relation labels whose trigger phrases the query mentions."""
    qtokens = tokenize(query)
    matched: set[str] = set()
    for label in RELATION_LABELS:
        for phrase in relation_lexicon.triggers.get(label, ()):
            if _contains_sequence(qtokens, tokenize(phrase)):
                matched.add(label)
                break
    if vectors is None or len(vectors) == 0:
        return matched
    qcontent = content_tokens(query, stopwords)
    for label in RELATION_LABELS:
        if label in matched:
            continue
        heads = relation_lexicon.head_tokens(label, stopwords)
        if qcontent and heads and vectors.best_cosine(qcontent, heads) > tau:
            matched.add(label)
    return matched


def select_subgraph(
    objects: Sequence[ObjectInstance],
    relations: Sequence[Relation],
    relevant: set[int],
) -> tuple[list[int], list[Relation]]:
    """Apply the none/one/many branch; returns kept object indices (original
    order) and surviving relations (original indices, canonical order)."""
    if len(relevant) >= 2:
        kept = sorted(relevant)
        edges = [r for r in relations
                 if r.head_index in relevant and r.tail_index in relevant]
    elif len(relevant) == 1:
        head = next(iter(relevant))
        edges = [r for r in relations if r.head_index == head]
        kept = sorted({head} | {r.tail_index for r in edges})
    else:
        kept = list(range(len(objects)))
        edges = list(relations)
    return kept, edges


def _label_relevance(
    label: str,
    query_labels: set[str],
    relation_lexicon: RelationLexicon | None,
    vectors: WordVectorTable | None,
    tau: float,
) -> int:
    if label in query_labels:
        return 0
    if relation_lexicon is None or vectors is None or len(vectors) == 0:
        return 1
    heads = relation_lexicon.head_tokens(label)
    for q in query_labels:
        if vectors.best_cosine(heads, relation_lexicon.head_tokens(q)) > tau:
            return 0
    return 1


def rank_and_prune(
    relations: Sequence[Relation],
    query_labels: set[str],
    k: int,
    relation_lexicon: RelationLexicon | None = None,
    vectors: WordVectorTable | None = None,
    tau: float = 0.5,
) -> list[Relation]:
    """Keep at most k relations per head: query-relevant ones first, nearer
    ones next. Survivors stay in their incoming (canonical) order."""
    if k < 1:
        raise ValidationError("k must be >= 1", field="k")
    by_head: dict[int, list[int]] = {}
    for pos, rel in enumerate(relations):
        by_head.setdefault(rel.head_index, []).append(pos)

    scores = {
        pos: _label_relevance(rel.label, query_labels, relation_lexicon, vectors, tau)
        for pos, rel in enumerate(relations)
    }
    kept: set[int] = set()
    for positions in by_head.values():
        ranked = sorted(
            positions,
            key=lambda p: (scores[p], relations[p].center_distance,
                           ontology_order(relations[p].label),
                           relations[p].tail_index),
        )
        kept.update(ranked[:k])
    return [
        dataclasses.replace(rel, relevance_rank=scores[pos])
        for pos, rel in enumerate(relations)
        if pos in kept
    ]


def _relation_group(label: str) -> str:
    if label in DIRECTIONAL_LABELS:
        return "directional"
    if label in DEPTH_LABELS:
        return "depth"
    return "proximity"


def deduplicate(relations: Sequence[Relation], scope: str = "pair") -> list[Relation]:
    """Single pass keeping the first edge per unordered pair (or per
    pair-and-group under the laxer scope)."""
    seen = set()
    out = []
    for rel in relations:
        key = rel.pair() if scope == "pair" else (rel.pair(), _relation_group(rel.label))
        if key in seen:
            continue
        seen.add(key)
        out.append(rel)
    return out


def filter_scene(
    objects: Sequence[ObjectInstance],
    relations: Sequence[Relation],
    query: str,
    synonyms: SynonymLexicon,
    relation_lexicon: RelationLexicon,
    vectors: WordVectorTable,
    cfg: PipelineConfig,
) -> tuple[SceneGraph, list[int]]:
    """Full filtering pipeline; returns the reindexed scene graph plus the
    original index of each kept object."""
    if not objects:
        return SceneGraph(objects=(), relations=()), []
    relevant = match_objects(query, objects, synonyms, vectors,
                             cfg.tau_query_obj)
    kept, edges = select_subgraph(objects, relations, relevant)
    query_labels = extract_relation_terms(query, relation_lexicon, vectors,
                                          cfg.tau_query_obj)
    ranked = rank_and_prune(edges, query_labels, cfg.k,
                            relation_lexicon, vectors, cfg.tau_query_obj)
    final = deduplicate(ranked, cfg.dedup_scope)

    index_map = {orig: new for new, orig in enumerate(kept)}
    return (
        SceneGraph(
            objects=tuple(objects[i] for i in kept),
            relations=tuple(
                dataclasses.replace(r, head_index=index_map[r.head_index],
                                    tail_index=index_map[r.tail_index])
                for r in final
            ),
        ),
        kept,
    )

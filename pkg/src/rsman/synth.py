"""Synthetic corpora for exercising aggregation strategies.

The generator builds documents whose head entity has exactly two mentions,
each a (context-marker, payload-token) span. The first relation holds iff
the payload of the first slot comes from signal vocabulary A, the second
iff the other slot's payload comes from vocabulary B. A configurable share
of documents arrives in confounded pairs: the two documents share the same
head-mention token multiset (so any mention-averaged entity vector is
identical) but carry different labels. Only aggregation that can tell the
slots apart separates such pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Document, Entity, Fact, Mention, RelationSchema

__all__ = ["SynthSpec", "SynthCorpus", "generate", "confounding_ceiling", "toy_corpus"]

MARKER_A = "mark_a"
MARKER_B = "mark_b"
ANCHOR = "anchor"
FILLER = "near"


@dataclass(frozen=True)
class SynthSpec:
    n_documents: int = 200
    n_relations: int = 2
    signal_size: int = 20
    neutral_size: int = 20
    confound_rate: float = 0.3  # fraction of documents that belong to confounded pairs
    seed: int = 0
    signal_a: tuple | None = None  # explicit vocabularies override signal_size
    signal_b: tuple | None = None

    def __post_init__(self):
        if self.n_documents < 1:
            raise ValueError("need at least one document")
        if self.n_relations < 2:
            raise ValueError("the label rule uses two relations; n_relations must be >= 2")
        if self.signal_size < 2 or self.neutral_size < 1:
            raise ValueError("signal_size must be >= 2 and neutral_size >= 1")
        if not 0.0 <= self.confound_rate <= 1.0:
            raise ValueError("confound_rate must be in [0, 1]")
        a, b = self.vocab_a(), self.vocab_b()
        overlap = set(a) & set(b)
        if overlap:
            raise ValueError(f"signal vocabularies overlap: {sorted(overlap)[:3]}")
        reserved = {MARKER_A, MARKER_B, ANCHOR, FILLER} | set(self._neutral())
        clash = (set(a) | set(b)) & reserved
        if clash:
            raise ValueError(f"signal tokens clash with structural tokens: {sorted(clash)[:3]}")

    def vocab_a(self) -> tuple:
        if self.signal_a is not None:
            return tuple(self.signal_a)
        return tuple(f"sa{i:02d}" for i in range(self.signal_size))

    def vocab_b(self) -> tuple:
        if self.signal_b is not None:
            return tuple(self.signal_b)
        return tuple(f"sb{i:02d}" for i in range(self.signal_size))

    def _neutral(self) -> tuple:
        return tuple(f"nt{i:02d}" for i in range(self.neutral_size))


@dataclass(frozen=True)
class SynthCorpus:
    documents: tuple
    schema: RelationSchema
    confounded_pairs: tuple  # ((positive doc id, negative doc id), ...)


def _make_doc(doc_id: str, a_tok: str, b_tok: str, in_a: bool, in_b: bool) -> Document:
    sent0 = (MARKER_A, a_tok, FILLER, ANCHOR, ".")
    sent1 = (MARKER_B, b_tok, ".")
    head = Entity(
        index=0,
        entity_type="SYNTH",
        mentions=(
            Mention(surface=f"{MARKER_A} {a_tok}", sentence_index=0, start=0, end=2),
            Mention(surface=f"{MARKER_B} {b_tok}", sentence_index=1, start=0, end=2),
        ),
    )
    tail = Entity(
        index=1,
        entity_type="ANCHOR",
        mentions=(Mention(surface=ANCHOR, sentence_index=0, start=3, end=4),),
    )
    facts = []
    if in_a:
        facts.append(Fact(head=0, tail=1, relation=0))
    if in_b:
        facts.append(Fact(head=0, tail=1, relation=1))
    return Document(
        id=doc_id,
        sentences=(sent0, sent1),
        entities=(head, tail),
        facts=tuple(facts),
    )


def generate(spec: SynthSpec) -> SynthCorpus:
    """Deterministic corpus for the given spec."""
    rng = np.random.default_rng(spec.seed)
    sig_a, sig_b = spec.vocab_a(), spec.vocab_b()
    neutral = spec._neutral()
    neg_pool_a = neutral + sig_b  # anything outside A's signal vocabulary
    neg_pool_b = neutral + sig_a

    n_pairs = int(round(spec.confound_rate * spec.n_documents / 2))
    n_free = spec.n_documents - 2 * n_pairs

    names = ["rel_a", "rel_b"] + [f"rel_x{i}" for i in range(spec.n_relations - 2)]
    schema = RelationSchema(names=tuple(names))

    docs = []
    for i in range(n_free):
        if rng.random() < 0.5:
            a_tok, in_a = sig_a[rng.integers(len(sig_a))], True
        else:
            a_tok, in_a = neg_pool_a[rng.integers(len(neg_pool_a))], False
        if rng.random() < 0.5:
            b_tok, in_b = sig_b[rng.integers(len(sig_b))], True
        else:
            b_tok, in_b = neg_pool_b[rng.integers(len(neg_pool_b))], False
        docs.append(_make_doc(f"synth-{len(docs):04d}", a_tok, b_tok, in_a, in_b))

    pairs = []
    for _ in range(n_pairs):
        x = sig_a[rng.integers(len(sig_a))]
        y = sig_b[rng.integers(len(sig_b))]
        pos = _make_doc(f"synth-{len(docs):04d}", x, y, True, True)
        docs.append(pos)
        neg = _make_doc(f"synth-{len(docs):04d}", y, x, False, False)
        docs.append(neg)
        pairs.append((pos.id, neg.id))

    return SynthCorpus(documents=tuple(docs), schema=schema, confounded_pairs=tuple(pairs))


def confounding_ceiling(docs, confounded_pairs) -> float:
    """Best micro F1 any pair-blind classifier can reach on this corpus.

    A classifier whose entity representations collapse the two documents of
    a confounded pair must make identical decisions on both, so each
    (pair, relation) slot where their labels differ costs either one false
    positive or one false negative. With perfect behavior everywhere else
    the optimum is to predict every such slot, giving F1 = 2G / (2G + D)
    for G gold facts and D disagreeing slots.
    """
    by_id = {doc.id: doc for doc in docs}
    total_gold = sum(len(doc.facts) for doc in docs)
    disagreements = 0
    for id_a, id_b in confounded_pairs:
        facts_a = {(f.head, f.tail, f.relation) for f in by_id[id_a].facts}
        facts_b = {(f.head, f.tail, f.relation) for f in by_id[id_b].facts}
        disagreements += len(facts_a ^ facts_b)
    if total_gold + disagreements == 0:
        return 1.0
    return 2.0 * total_gold / (2.0 * total_gold + disagreements)


def toy_corpus():
    """Two small hand-written documents with multi-mention entities.

    Used by the gradient-check command and as a smoke fixture: it exercises
    single- and multi-mention entities, positive pairs and NA pairs.
    """
    schema = RelationSchema(names=("founded", "based_in", "works_at"))
    doc1 = Document(
        id="toy-1",
        sentences=(
            ("Anna", "Meyer", "founded", "Orbital", "Labs", "in", "Berlin", "."),
            ("She", "left", "Orbital", "Labs", "later", "."),
        ),
        entities=(
            Entity(
                index=0,
                entity_type="PER",
                mentions=(
                    Mention(surface="Anna Meyer", sentence_index=0, start=0, end=2),
                    Mention(surface="She", sentence_index=1, start=0, end=1),
                ),
            ),
            Entity(
                index=1,
                entity_type="ORG",
                mentions=(
                    Mention(surface="Orbital Labs", sentence_index=0, start=3, end=5),
                    Mention(surface="Orbital Labs", sentence_index=1, start=2, end=4),
                ),
            ),
            Entity(
                index=2,
                entity_type="LOC",
                mentions=(Mention(surface="Berlin", sentence_index=0, start=6, end=7),),
            ),
        ),
        facts=(
            Fact(head=0, tail=1, relation=0),
            Fact(head=1, tail=2, relation=1),
        ),
    )
    doc2 = Document(
        id="toy-2",
        sentences=(
            ("Kiro", "Tanaka", "works", "at", "Orbital", "Labs", "."),
            ("Kiro", "praised", "the", "Labs", "."),
        ),
        entities=(
            Entity(
                index=0,
                entity_type="PER",
                mentions=(
                    Mention(surface="Kiro Tanaka", sentence_index=0, start=0, end=2),
                    Mention(surface="Kiro", sentence_index=1, start=0, end=1),
                ),
            ),
            Entity(
                index=1,
                entity_type="ORG",
                mentions=(
                    Mention(surface="Orbital Labs", sentence_index=0, start=4, end=6),
                    Mention(surface="Labs", sentence_index=1, start=3, end=4),
                ),
            ),
        ),
        facts=(Fact(head=0, tail=1, relation=2),),
    )
    for doc in (doc1, doc2):
        doc.validate(schema.count)
    return [doc1, doc2], schema

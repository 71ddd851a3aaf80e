"""DocRED-format corpus handling.

Documents are token-level: each document is a list of tokenized sentences,
a list of entities (coreference clusters of mention spans) and a list of
gold relation facts. Mention embeddings computed by an external encoder can
be attached through the MEMB1 binary format defined here.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mention",
    "Entity",
    "Fact",
    "Document",
    "RelationSchema",
    "FactIndex",
    "StatsReport",
    "CorpusError",
    "ParseError",
    "ValidationError",
    "EmbeddingFileError",
    "parse_docred",
    "serialize_docred",
    "corpus_stats",
    "build_fact_index",
    "load_mention_embeddings",
    "save_mention_embeddings",
]

MEMB_MAGIC = b"MEMB1\n"


class CorpusError(ValueError):
    """Base class for corpus-level failures."""


class ParseError(CorpusError):
    """Raised when input bytes are not valid DocRED JSON."""


class ValidationError(CorpusError):
    """Raised when a document violates a structural invariant."""


class EmbeddingFileError(CorpusError):
    """Raised when an MEMB1 embedding file is malformed or incomplete."""


@dataclass(frozen=True)
class Mention:
    """One contiguous token span referring to an entity."""

    surface: str
    sentence_index: int
    start: int
    end: int  # half-open: tokens [start, end)

    def __post_init__(self):
        if self.start >= self.end:
            raise ValidationError(
                f"empty or inverted mention span [{self.start},{self.end}) for {self.surface!r}"
            )
        if self.start < 0:
            raise ValidationError(f"negative span start for {self.surface!r}")


@dataclass(frozen=True)
class Entity:
    """A coreference cluster of mentions treated as one relation argument."""

    index: int
    entity_type: str
    mentions: tuple[Mention, ...]

    def __post_init__(self):
        if len(self.mentions) == 0:
            raise ValidationError(f"entity {self.index} has no mentions")


@dataclass(frozen=True)
class Fact:
    """A gold (head, relation, tail) assertion within one document."""

    head: int
    tail: int
    relation: int
    evidence: tuple[int, ...] = ()

    def __post_init__(self):
        if self.head == self.tail:
            raise ValidationError(f"self-relation on entity {self.head}")


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[tuple[str, ...], ...]
    entities: tuple[Entity, ...]
    facts: tuple[Fact, ...]

    def validate(self, n_relations: int | None = None) -> None:
        for ent in self.entities:
            for m in ent.mentions:
                if m.sentence_index < 0 or m.sentence_index >= len(self.sentences):
                    raise ValidationError(
                        f"doc {self.id!r}: mention {m.surface!r} in out-of-range "
                        f"sentence {m.sentence_index}"
                    )
                if m.end > len(self.sentences[m.sentence_index]):
                    raise ValidationError(
                        f"doc {self.id!r}: mention {m.surface!r} span "
                        f"[{m.start},{m.end}) exceeds sentence length "
                        f"{len(self.sentences[m.sentence_index])}"
                    )
        for f in self.facts:
            if not (0 <= f.head < len(self.entities)) or not (0 <= f.tail < len(self.entities)):
                raise ValidationError(
                    f"doc {self.id!r}: fact ({f.head},{f.relation},{f.tail}) "
                    f"references a missing entity"
                )
            if n_relations is not None and not (0 <= f.relation < n_relations):
                raise ValidationError(
                    f"doc {self.id!r}: relation id {f.relation} out of range"
                )


@dataclass(frozen=True)
class RelationSchema:
    """Ordered inventory of relation names; ids are list positions."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) == 0:
            raise ValidationError("relation schema is empty")
        if len(set(self.names)) != len(self.names):
            raise ValidationError("relation names are not unique")

    @property
    def count(self) -> int:
        return len(self.names)

    def id_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown relation name {name!r}") from None


def _norm_name(name: str) -> str:
    return " ".join(name.split()).lower()


class FactIndex:
    """Exact-match index of (head name, tail name, relation) keys from a split.

    Membership follows the in-train convention: a query matches if any
    (head surface, tail surface) pair from the query's name sets appears
    with the same relation in the indexed split.
    """

    def __init__(self, keys: set[tuple[str, str, int]] | None = None):
        self._keys = set(keys) if keys else set()

    def __len__(self) -> int:
        return len(self._keys)

    def add_documents(self, docs) -> None:
        for doc in docs:
            for f in doc.facts:
                heads = {_norm_name(m.surface) for m in doc.entities[f.head].mentions}
                tails = {_norm_name(m.surface) for m in doc.entities[f.tail].mentions}
                for h in heads:
                    for t in tails:
                        self._keys.add((h, t, f.relation))

    def contains(self, head_names, tail_names, relation: int) -> bool:
        for h in head_names:
            hn = _norm_name(h)
            for t in tail_names:
                if (hn, _norm_name(t), relation) in self._keys:
                    return True
        return False


def build_fact_index(train_docs) -> FactIndex:
    """Index the facts of a training split for ignored-F1 bookkeeping."""
    index = FactIndex()
    index.add_documents(train_docs)
    return index


def _require(cond: bool, doc_id: str, msg: str) -> None:
    if not cond:
        raise ValidationError(f"doc {doc_id!r}: {msg}")


def parse_docred(data: bytes | str, schema: RelationSchema) -> list[Document]:
    """Parse DocRED-convention JSON bytes into validated Documents.

    Expects an array of objects with `title`, `sents`, `vertexSet` and an
    optional `labels` list (absent or empty for unlabeled splits).
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        byte_offset = len(text[: e.pos].encode("utf-8"))
        raise ParseError(f"malformed JSON at byte offset {byte_offset}: {e.msg}") from e
    if not isinstance(raw, list):
        raise ParseError("top-level JSON value must be an array of documents")

    docs = []
    for obj in raw:
        doc_id = str(obj.get("title", f"doc-{len(docs)}"))
        _require("sents" in obj, doc_id, "missing 'sents'")
        _require("vertexSet" in obj, doc_id, "missing 'vertexSet'")
        sentences = tuple(tuple(str(tok) for tok in sent) for sent in obj["sents"])

        entities = []
        for ent_idx, vertex in enumerate(obj["vertexSet"]):
            _require(len(vertex) > 0, doc_id, f"entity {ent_idx} has no mentions")
            mentions = []
            for men in vertex:
                sent_id = int(men["sent_id"])
                start, end = (int(p) for p in men["pos"])
                _require(
                    0 <= sent_id < len(sentences),
                    doc_id,
                    f"mention {men.get('name')!r} has out-of-range sentence {sent_id}",
                )
                _require(
                    0 <= start < end <= len(sentences[sent_id]),
                    doc_id,
                    f"mention {men.get('name')!r} has invalid span [{start},{end}) "
                    f"in a {len(sentences[sent_id])}-token sentence",
                )
                mentions.append(
                    Mention(
                        surface=str(men.get("name", " ".join(sentences[sent_id][start:end]))),
                        sentence_index=sent_id,
                        start=start,
                        end=end,
                    )
                )
            entities.append(
                Entity(
                    index=ent_idx,
                    entity_type=str(vertex[0].get("type", "")),
                    mentions=tuple(mentions),
                )
            )

        facts = []
        for label in obj.get("labels", []) or []:
            h, t = int(label["h"]), int(label["t"])
            _require(0 <= h < len(entities), doc_id, f"label head {h} out of range")
            _require(0 <= t < len(entities), doc_id, f"label tail {t} out of range")
            _require(h != t, doc_id, f"label relates entity {h} to itself")
            rel_name = str(label["r"])
            try:
                rel = schema.id_of(rel_name)
            except ValidationError:
                raise ValidationError(
                    f"doc {doc_id!r}: unknown relation name {rel_name!r}"
                ) from None
            evidence = tuple(int(s) for s in label.get("evidence", []))
            facts.append(Fact(head=h, tail=t, relation=rel, evidence=evidence))

        doc = Document(
            id=doc_id,
            sentences=sentences,
            entities=tuple(entities),
            facts=tuple(facts),
        )
        doc.validate(schema.count)
        docs.append(doc)
    return docs


def serialize_docred(docs, schema: RelationSchema) -> bytes:
    """Inverse of parse_docred; parse(serialize(parse(x))) == parse(x)."""
    out = []
    for doc in docs:
        vertex_set = [
            [
                {
                    "name": m.surface,
                    "sent_id": m.sentence_index,
                    "pos": [m.start, m.end],
                    "type": ent.entity_type,
                }
                for m in ent.mentions
            ]
            for ent in doc.entities
        ]
        labels = [
            {
                "h": f.head,
                "t": f.tail,
                "r": schema.names[f.relation],
                "evidence": list(f.evidence),
            }
            for f in doc.facts
        ]
        out.append(
            {
                "title": doc.id,
                "sents": [list(s) for s in doc.sentences],
                "vertexSet": vertex_set,
                "labels": labels,
            }
        )
    return json.dumps(out, ensure_ascii=False).encode("utf-8")


@dataclass(frozen=True)
class StatsReport:
    documents: int
    entities: int
    mentions: int
    facts: int
    avg_mentions_per_entity: float
    multi_mention_share: float  # fraction of entities with >= 2 mentions

    def to_json(self) -> dict:
        return {
            "documents": self.documents,
            "entities": self.entities,
            "mentions": self.mentions,
            "facts": self.facts,
            "avg_mentions_per_entity": self.avg_mentions_per_entity,
            "multi_mention_share": self.multi_mention_share,
        }


def corpus_stats(docs) -> StatsReport:
    """Document/entity/mention/fact counts and mention-multiplicity stats."""
    docs = list(docs)
    if not docs:
        raise CorpusError("corpus_stats needs at least one document")
    n_entities = 0
    n_mentions = 0
    n_multi = 0
    n_facts = 0
    for doc in docs:
        n_facts += len(doc.facts)
        for ent in doc.entities:
            n_entities += 1
            n_mentions += len(ent.mentions)
            if len(ent.mentions) >= 2:
                n_multi += 1
    if n_entities == 0:
        raise CorpusError("corpus has no entities")
    return StatsReport(
        documents=len(docs),
        entities=n_entities,
        mentions=n_mentions,
        facts=n_facts,
        avg_mentions_per_entity=n_mentions / n_entities,
        multi_mention_share=n_multi / n_entities,
    )


def save_mention_embeddings(vectors: dict, dim: int) -> bytes:
    """Serialize {(doc_id, entity_idx, mention_idx): vector} to MEMB1 bytes."""
    chunks = [MEMB_MAGIC]
    header = {"dim": int(dim), "count": len(vectors)}
    chunks.append(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
    for (doc_id, ent_idx, men_idx), vec in vectors.items():
        vec = np.asarray(vec, dtype=np.float32)
        if vec.shape != (dim,):
            raise EmbeddingFileError(
                f"vector for ({doc_id!r},{ent_idx},{men_idx}) has shape {vec.shape}, "
                f"expected ({dim},)"
            )
        chunks.append(f"{doc_id}\t{ent_idx}\t{men_idx}\n".encode("utf-8"))
        chunks.append(struct.pack(f"<{dim}f", *vec.tolist()))
    return b"".join(chunks)


def load_mention_embeddings(data: bytes, docs=None) -> dict:
    """Load an MEMB1 file into {(doc_id, entity_idx, mention_idx): float64 vector}.

    When ``docs`` is given, additionally checks that every mention of the
    corpus has exactly one vector of the declared dimension.
    """
    if not data.startswith(MEMB_MAGIC):
        raise EmbeddingFileError("not an MEMB1 file (bad magic)")
    pos = len(MEMB_MAGIC)
    nl = data.find(b"\n", pos)
    if nl < 0:
        raise EmbeddingFileError("truncated header")
    try:
        header = json.loads(data[pos:nl].decode("utf-8"))
        dim, count = int(header["dim"]), int(header["count"])
    except (ValueError, KeyError) as e:
        raise EmbeddingFileError(f"bad header: {e}") from e
    if dim <= 0 or count < 0:
        raise EmbeddingFileError(f"bad header values dim={dim} count={count}")
    pos = nl + 1

    vectors = {}
    rec_bytes = 4 * dim
    for rec in range(count):
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise EmbeddingFileError(f"record {rec}: truncated key line")
        parts = data[pos:nl].decode("utf-8").split("\t")
        if len(parts) != 3:
            raise EmbeddingFileError(f"record {rec}: key line has {len(parts)} fields, expected 3")
        key = (parts[0], int(parts[1]), int(parts[2]))
        pos = nl + 1
        payload = data[pos : pos + rec_bytes]
        if len(payload) < rec_bytes:
            raise EmbeddingFileError(
                f"record {rec} ({key}): expected {dim} floats, payload truncated"
            )
        vec = np.frombuffer(payload, dtype="<f4", count=dim).astype(np.float64)
        if key in vectors:
            raise EmbeddingFileError(f"record {rec}: duplicate key {key}")
        vectors[key] = vec
        pos += rec_bytes
    if pos != len(data):
        raise EmbeddingFileError(f"{len(data) - pos} trailing bytes after record {count - 1}")

    if docs is not None:
        for doc in docs:
            for ent in doc.entities:
                for j in range(len(ent.mentions)):
                    if (doc.id, ent.index, j) not in vectors:
                        raise EmbeddingFileError(
                            f"missing vector for mention ({doc.id!r}, entity {ent.index}, "
                            f"mention {j})"
                        )
    return vectors

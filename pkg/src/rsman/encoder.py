"""Mention representations.

Two sources: a trainable token-embedding table (self-contained mode), where
a mention vector is the mean of its window-clipped token embeddings, or
precomputed per-mention vectors loaded from an MEMB1 file (external-backbone
mode). Only the trained mode carries gradients.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import numerics
from .corpus import CorpusError, Document, Mention

__all__ = [
    "Vocabulary",
    "MentionRepr",
    "build_vocab",
    "init_embedding_table",
    "encode_mention",
    "mention_token_ids",
    "encode_all",
]

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


@dataclass(frozen=True)
class Vocabulary:
    """Token -> dense id map with PAD=0 and UNK=1 reserved."""

    token_to_id: dict
    lowercase: bool = False

    @property
    def size(self) -> int:
        return len(self.token_to_id)

    @property
    def pad_id(self) -> int:
        return self.token_to_id[PAD_TOKEN]

    @property
    def unk_id(self) -> int:
        return self.token_to_id[UNK_TOKEN]

    def id_of(self, token: str) -> int:
        if self.lowercase:
            token = token.lower()
        return self.token_to_id.get(token, self.token_to_id[UNK_TOKEN])


def build_vocab(docs, min_count: int = 2, lowercase: bool = False) -> Vocabulary:
    """Count tokens over all sentences; keep those seen >= min_count times.

    Ordering is deterministic: frequency descending, then lexicographic.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter()
    for doc in docs:
        for sent in doc.sentences:
            for tok in sent:
                counts[tok.lower() if lowercase else tok] += 1
    if not counts:
        raise CorpusError("cannot build a vocabulary from an empty corpus")
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    token_to_id = {PAD_TOKEN: 0, UNK_TOKEN: 1}
    for tok in kept:
        token_to_id[tok] = len(token_to_id)
    return Vocabulary(token_to_id=token_to_id, lowercase=lowercase)


def init_embedding_table(vocab_size: int, dim: int, rng: np.random.Generator) -> numerics.Param:
    """Uniform init in [-0.5/dim, 0.5/dim)."""
    scale = 0.5 / dim
    return numerics.Param(rng.uniform(-scale, scale, size=(vocab_size, dim)))


@dataclass
class MentionRepr:
    """The vector for one mention plus what backward needs to reach it."""

    vector: np.ndarray
    provenance: str  # "trained" | "precomputed"
    token_ids: np.ndarray | None = None  # rows of the embedding table averaged


def mention_token_ids(doc: Document, mention: Mention, vocab: Vocabulary, window: int) -> np.ndarray:
    """Ids of the tokens in [start - window, end + window), clipped to the sentence."""
    if window < 0:
        raise ValueError("window must be >= 0")
    sent = doc.sentences[mention.sentence_index]
    lo = max(0, mention.start - window)
    hi = min(len(sent), mention.end + window)
    return np.array([vocab.id_of(t) for t in sent[lo:hi]], dtype=np.intp)


def encode_mention(
    doc: Document,
    mention: Mention,
    table: numerics.Param,
    vocab: Vocabulary,
    window: int = 0,
) -> MentionRepr:
    """Mean of the embedding rows of the mention's window-clipped tokens."""
    ids = mention_token_ids(doc, mention, vocab, window)
    vec = table.value[ids].mean(axis=0)
    return MentionRepr(vector=vec, provenance="trained", token_ids=ids)


def encode_mention_backward(upstream: np.ndarray, repr_: MentionRepr, table: numerics.Param) -> None:
    """Accumulate d(mean of rows) into the touched embedding rows."""
    ids = repr_.token_ids
    np.add.at(table.grad, ids, upstream / len(ids))


def encode_all(
    doc: Document,
    table: numerics.Param | None = None,
    vocab: Vocabulary | None = None,
    window: int = 0,
    precomputed: dict | None = None,
) -> list:
    """Per-entity lists of MentionRepr, preserving mention order.

    Pass (table, vocab) for trained mode or ``precomputed`` (an MEMB1 map)
    for external-backbone mode.
    """
    if (precomputed is None) == (table is None):
        raise ValueError("pass exactly one of (table, vocab) or precomputed")
    out = []
    for ent in doc.entities:
        reps = []
        for j, m in enumerate(ent.mentions):
            if precomputed is not None:
                key = (doc.id, ent.index, j)
                if key not in precomputed:
                    raise CorpusError(
                        f"no precomputed vector for mention ({doc.id!r}, entity "
                        f"{ent.index}, mention {j}: {m.surface!r})"
                    )
                reps.append(MentionRepr(vector=precomputed[key], provenance="precomputed"))
            else:
                reps.append(encode_mention(doc, m, table, vocab, window))
        out.append(reps)
    return out

"""Full model: mention encoding, aggregation, bilinear pair classification.

One :class:`RelationModel` owns every trainable tensor. Forward passes cache
what their backward needs; ``document_backward`` accumulates analytic
gradients into the params. The aggregator can be overridden per call, which
lets the attentive and pooled paths run over identical parameters.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import aggregation, classifier, encoder
from .aggregation import AGGREGATORS, SIMILARITY_MODES
from .classifier import PairScore
from .corpus import Document
from .numerics import Param

__all__ = ["ModelConfig", "RelationModel", "ordered_pairs"]

ENCODER_MODES = ("trained", "precomputed")


@dataclass
class ModelConfig:
    n_relations: int
    embed_dim: int = 64
    proto_dim: int | None = None  # defaults to embed_dim
    bilinear_dim: int | None = 64  # equal to embed_dim -> no reduction matrix
    aggregator: str = "rsman"
    similarity: str = "dot"
    mlp_hidden: int | None = None  # defaults to proto_dim
    encoder_mode: str = "trained"
    vocab_size: int = 0
    window: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.proto_dim is None:
            self.proto_dim = self.embed_dim
        if self.bilinear_dim is None:
            self.bilinear_dim = self.embed_dim
        if self.similarity == "mlp" and self.mlp_hidden is None:
            self.mlp_hidden = self.proto_dim
        if self.aggregator not in AGGREGATORS:
            raise ValueError(f"unknown aggregator {self.aggregator!r}; pick one of {AGGREGATORS}")
        if self.similarity not in SIMILARITY_MODES:
            raise ValueError(f"unknown similarity {self.similarity!r}")
        if self.encoder_mode not in ENCODER_MODES:
            raise ValueError(f"unknown encoder mode {self.encoder_mode!r}")
        if self.encoder_mode == "trained" and self.vocab_size <= 0:
            raise ValueError("trained encoder mode needs vocab_size > 0")
        if min(self.n_relations, self.embed_dim, self.proto_dim, self.bilinear_dim) < 1:
            raise ValueError("dimensions and relation count must be positive")
        if self.window < 0:
            raise ValueError("window must be >= 0")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "ModelConfig":
        return cls(**data)


@dataclass
class DocForward:
    """Everything the backward pass of one document needs."""

    doc: Document
    reps: list
    aggregator: str
    pairs: list
    states: list
    logits: np.ndarray  # (K, R)
    labels: np.ndarray  # (K, R)
    loss: float


def ordered_pairs(doc: Document) -> list:
    """All ordered (head, tail) index pairs, head != tail."""
    n = len(doc.entities)
    return [(s, o) for s in range(n) for o in range(n) if s != o]


def label_matrix(doc: Document, pairs, n_relations: int) -> np.ndarray:
    y = np.zeros((len(pairs), n_relations))
    index = {pair: k for k, pair in enumerate(pairs)}
    for f in doc.facts:
        k = index.get((f.head, f.tail))
        if k is not None:
            y[k, f.relation] = 1.0
    return y


class RelationModel:
    """Trainable document-level relation scorer."""

    def __init__(self, config: ModelConfig):
        self.config = config
        rng = np.random.default_rng(config.seed)
        # draw order is fixed: it determines reproducible init from the seed
        self.embedding = None
        if config.encoder_mode == "trained":
            self.embedding = encoder.init_embedding_table(config.vocab_size, config.embed_dim, rng)
        self.attention = aggregation.init_attention_params(
            config.embed_dim,
            config.proto_dim,
            rng,
            mlp_hidden=config.mlp_hidden if config.similarity == "mlp" else None,
        )
        self.prototypes = aggregation.init_prototypes(config.n_relations, config.proto_dim, rng)
        self.bank = classifier.init_bilinear_bank(
            config.n_relations, config.bilinear_dim, config.embed_dim, rng
        )

    # ------------------------------------------------------------ params

    def named_params(self) -> dict:
        out = {}
        if self.embedding is not None:
            out["embedding"] = self.embedding
        out["proj_W"] = self.attention.proj_W
        out["proj_b"] = self.attention.proj_b
        for name in ("mlp_W1", "mlp_b1", "mlp_w2", "mlp_b2"):
            p = getattr(self.attention, name)
            if p is not None:
                out[name] = p
        out["prototypes"] = self.prototypes
        out["bilinear"] = self.bank.forms
        out["bilinear_bias"] = self.bank.biases
        if self.bank.reduce is not None:
            out["reduce"] = self.bank.reduce
        return out

    def zero_grad(self) -> None:
        for p in self.named_params().values():
            p.zero_grad()

    # ----------------------------------------------------------- encode

    def encode(self, doc: Document, vocab=None, precomputed=None) -> list:
        """Per-entity mention representations for one document."""
        if self.config.encoder_mode == "trained":
            if vocab is None:
                raise ValueError("trained encoder mode needs a vocabulary")
            return encoder.encode_all(
                doc, table=self.embedding, vocab=vocab, window=self.config.window
            )
        if precomputed is None:
            raise ValueError("precomputed encoder mode needs an embedding map")
        return encoder.encode_all(doc, precomputed=precomputed)

    # ---------------------------------------------------------- forward

    def _entity_state(self, reps, aggregator: str) -> dict:
        M = np.stack([r.vector for r in reps])
        state = {"M": M}
        if aggregator == "rsman":
            S, cache = aggregation.attention_scores(
                self.prototypes.value, M, self.attention, mode=self.config.similarity
            )
            A = aggregation.attention_weight_matrix(S)
            E = aggregation.relation_specific_reps(A, M)
            Z = E @ self.bank.reduce.value.T if self.bank.reduce is not None else E
            state.update(scores=S, weights=A, ereps=E, Z=Z, cache=cache)
        else:
            pool = getattr(aggregation, f"{aggregator}_pool")
            e = pool(M)
            z = self.bank.reduce.value @ e if self.bank.reduce is not None else e
            R = self.config.n_relations
            state.update(erep=e, z=z, Z=np.broadcast_to(z, (R, z.shape[0])))
        return state

    def document_forward(self, doc: Document, reps, aggregator=None, pairs=None) -> DocForward:
        aggregator = aggregator or self.config.aggregator
        if aggregator not in AGGREGATORS:
            raise ValueError(f"unknown aggregator {aggregator!r}")
        if pairs is None:
            pairs = ordered_pairs(doc)
        states = [self._entity_state(r, aggregator) for r in reps]
        R = self.config.n_relations
        logits = np.zeros((len(pairs), R))
        for k, (s, o) in enumerate(pairs):
            logits[k] = classifier.pair_logits_relation_specific(
                states[s]["Z"], states[o]["Z"], self.bank
            )
        labels = label_matrix(doc, pairs, R)
        loss = 0.0
        if pairs:
            loss = float(
                np.mean([classifier.bce_loss(logits[k], labels[k]) for k in range(len(pairs))])
            )
        return DocForward(
            doc=doc,
            reps=reps,
            aggregator=aggregator,
            pairs=pairs,
            states=states,
            logits=logits,
            labels=labels,
            loss=loss,
        )

    def document_loss(self, doc, reps, aggregator=None, pairs=None):
        fwd = self.document_forward(doc, reps, aggregator=aggregator, pairs=pairs)
        return fwd.loss, fwd

    # --------------------------------------------------------- backward

    def document_backward(self, fwd: DocForward, upstream: float = 1.0) -> None:
        """Accumulate gradients of ``upstream * fwd.loss`` into the params."""
        K = len(fwd.pairs)
        if K == 0:
            return
        states = fwd.states
        dZ = [None] * len(states)

        def add_dZ(i, val):
            if dZ[i] is None:
                dZ[i] = val.copy()
            else:
                dZ[i] += val

        W = self.bank.forms.value
        for k, (s, o) in enumerate(fwd.pairs):
            # d(mean over pairs of mean-over-relations BCE)
            dlogits = classifier.bce_loss_backward(fwd.logits[k], fwd.labels[k]) * (upstream / K)
            Z_s, Z_o = states[s]["Z"], states[o]["Z"]
            self.bank.biases.grad += dlogits
            self.bank.forms.grad += np.einsum("r,ri,rj->rij", dlogits, Z_s, Z_o)
            add_dZ(s, np.einsum("r,rij,rj->ri", dlogits, W, Z_o))
            add_dZ(o, np.einsum("r,rij,ri->rj", dlogits, W, Z_s))

        for i, state in enumerate(states):
            if dZ[i] is None:
                continue
            M = state["M"]
            if fwd.aggregator == "rsman":
                if self.bank.reduce is not None:
                    dE = dZ[i] @ self.bank.reduce.value
                    self.bank.reduce.grad += dZ[i].T @ state["ereps"]
                else:
                    dE = dZ[i]
                A = state["weights"]
                dA, dM = aggregation.relation_specific_reps_backward(dE, A, M)
                dS = aggregation.attention_weight_matrix_backward(dA, A)
                dM += aggregation.attention_scores_backward(
                    dS, self.prototypes, M, self.attention, state["cache"],
                    mode=self.config.similarity,
                )
            else:
                dz = dZ[i].sum(axis=0)  # broadcast view: relation grads collapse
                if self.bank.reduce is not None:
                    de = self.bank.reduce.value.T @ dz
                    self.bank.reduce.grad += np.outer(dz, state["erep"])
                else:
                    de = dz
                if fwd.aggregator == "avg":
                    dM = aggregation.avg_pool_backward(de, M.shape[0])
                elif fwd.aggregator == "max":
                    dM = aggregation.max_pool_backward(de, M)
                else:
                    dM = aggregation.lse_pool_backward(de, M, state["erep"])
            if self.embedding is not None:
                for j, rep in enumerate(fwd.reps[i]):
                    encoder.encode_mention_backward(dM[j], rep, self.embedding)

    # --------------------------------------------------------- predict

    def predict_document(self, doc: Document, reps, aggregator=None) -> list:
        fwd = self.document_forward(doc, reps, aggregator=aggregator)
        return [
            PairScore(
                doc_id=doc.id,
                head=s,
                tail=o,
                probs=classifier.probabilities(fwd.logits[k]),
            )
            for k, (s, o) in enumerate(fwd.pairs)
        ]

    def attention_map(self, doc: Document, reps, entity_index: int, relation_names) -> "aggregation.AttentionMap":
        """Normalized attention of every relation over one entity's mentions."""
        if not (0 <= entity_index < len(doc.entities)):
            raise ValueError(f"doc {doc.id!r} has no entity {entity_index}")
        state = self._entity_state(reps[entity_index], "rsman")
        return aggregation.AttentionMap(
            relation_names=tuple(relation_names),
            mention_surfaces=tuple(m.surface for m in doc.entities[entity_index].mentions),
            scores=state["scores"],
            weights=state["weights"],
        )

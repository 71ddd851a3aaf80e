"""Per-relation bilinear scoring of ordered entity pairs.

Each relation owns a bilinear form (W_r, b_r) applied to the head and tail
entity vectors, optionally after a shared linear reduction when the entity
dimension differs from the bilinear dimension. Loss is mean multi-label
binary cross-entropy in the numerically stable logits form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import numerics
from .numerics import Param

__all__ = [
    "BilinearBank",
    "PairScore",
    "Prediction",
    "init_bilinear_bank",
    "bilinear_logit",
    "bilinear_logit_backward",
    "pair_logits_fixed",
    "pair_logits_relation_specific",
    "bce_loss",
    "bce_loss_backward",
    "probabilities",
    "predict",
    "predictions_to_json",
]

# smallest/largest float64 strictly inside (0, 1)
_P_LO = np.nextafter(0.0, 1.0)
_P_HI = np.nextafter(1.0, 0.0)


@dataclass
class BilinearBank:
    """One (d_b, d_b) form and scalar bias per relation, plus optional reduction."""

    forms: Param  # (R, d_b, d_b)
    biases: Param  # (R,)
    reduce: Param | None = None  # (d_b, d_m) when d_b != d_m

    @property
    def n_relations(self) -> int:
        return self.forms.value.shape[0]


def init_bilinear_bank(
    n_relations: int,
    bilinear_dim: int,
    embed_dim: int,
    rng: np.random.Generator,
) -> BilinearBank:
    # std 1/d keeps initial logits near 0, i.e. probabilities near 0.5
    forms = Param(rng.normal(0.0, 1.0 / bilinear_dim, size=(n_relations, bilinear_dim, bilinear_dim)))
    biases = Param(np.zeros(n_relations))
    reduce = None
    if bilinear_dim != embed_dim:
        reduce = Param(rng.normal(0.0, 1.0 / np.sqrt(embed_dim), size=(bilinear_dim, embed_dim)))
    return BilinearBank(forms=forms, biases=biases, reduce=reduce)


def bilinear_logit(z_s: np.ndarray, z_o: np.ndarray, W: np.ndarray, b: float) -> float:
    """z_s^T W z_o + b."""
    if z_s.shape != (W.shape[0],) or z_o.shape != (W.shape[1],):
        raise ValueError(f"bilinear shape mismatch: {z_s.shape}, W {W.shape}, {z_o.shape}")
    return float(z_s @ W @ z_o + b)


def bilinear_logit_backward(upstream: float, z_s: np.ndarray, z_o: np.ndarray, W: np.ndarray):
    """Gradients wrt (z_s, z_o, W, b)."""
    dz_s = upstream * (W @ z_o)
    dz_o = upstream * (W.T @ z_s)
    dW = upstream * np.outer(z_s, z_o)
    return dz_s, dz_o, dW, upstream


def pair_logits_fixed(z_s: np.ndarray, z_o: np.ndarray, bank: BilinearBank) -> np.ndarray:
    """All relations' logits for one pair of fixed entity vectors.

    Delegates to the relation-specific route via broadcast views so both
    paths share one arithmetic path exactly.
    """
    R = bank.n_relations
    Z_s = np.broadcast_to(z_s, (R, z_s.shape[0]))
    Z_o = np.broadcast_to(z_o, (R, z_o.shape[0]))
    return pair_logits_relation_specific(Z_s, Z_o, bank)


def pair_logits_relation_specific(Z_s: np.ndarray, Z_o: np.ndarray, bank: BilinearBank) -> np.ndarray:
    """Logits where head/tail vectors are indexed by relation: (R, d_b) each."""
    R = bank.n_relations
    if Z_s.shape[0] != R or Z_o.shape[0] != R:
        raise ValueError(
            f"relation-specific reps cover {Z_s.shape[0]}/{Z_o.shape[0]} relations, "
            f"bank has {R}"
        )
    return np.einsum("ri,rij,rj->r", Z_s, bank.forms.value, Z_o) + bank.biases.value


def bce_loss(logits: np.ndarray, labels: np.ndarray) -> float:
    """Mean over relations of binary cross-entropy, computed from logits.

    Uses max(z,0) - z*y + log1p(exp(-|z|)), which never overflows.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if logits.shape != labels.shape:
        raise ValueError(f"logits {logits.shape} vs labels {labels.shape}")
    per = np.maximum(logits, 0.0) - logits * labels + np.log1p(np.exp(-np.abs(logits)))
    return float(per.mean())


def bce_loss_backward(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d(mean BCE)/dlogits = (sigmoid(logits) - labels) / R."""
    return (numerics.sigmoid(logits) - labels) / logits.shape[0]


def probabilities(logits: np.ndarray) -> np.ndarray:
    """Sigmoid probabilities clipped to the open interval (0, 1)."""
    return np.clip(numerics.sigmoid(np.asarray(logits, dtype=np.float64)), _P_LO, _P_HI)


@dataclass(frozen=True)
class PairScore:
    """Per-relation probabilities for one ordered entity pair."""

    doc_id: str
    head: int
    tail: int
    probs: np.ndarray  # (R,), strictly inside (0, 1)


@dataclass(frozen=True, order=True)
class Prediction:
    doc_id: str
    head: int
    tail: int
    relation: int
    score: float

    @property
    def key(self):
        return (self.doc_id, self.head, self.tail, self.relation)


def predict(scores, threshold: float) -> list[Prediction]:
    """Emit (doc, head, tail, r) for every probability >= threshold."""
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    out = []
    for ps in scores:
        for r, p in enumerate(ps.probs):
            if p >= threshold:
                out.append(
                    Prediction(doc_id=ps.doc_id, head=ps.head, tail=ps.tail, relation=r, score=float(p))
                )
    return out


def predictions_to_json(predictions, relation_names) -> str:
    """Official submission shape: [{title, h_idx, t_idx, r, score}, ...]."""
    rows = [
        {
            "title": p.doc_id,
            "h_idx": p.head,
            "t_idx": p.tail,
            "r": relation_names[p.relation],
            "score": p.score,
        }
        for p in predictions
    ]
    return json.dumps(rows, ensure_ascii=False, indent=1)

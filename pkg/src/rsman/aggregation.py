"""Mention -> entity aggregation.

Fixed poolers (average, elementwise max, elementwise logsumexp) produce one
vector per entity. The attentive path scores every mention against each
relation's trainable prototype, softmax-normalizes per entity, and returns
one weighted-sum vector per (entity, relation). All backward passes are
hand-derived.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import numerics
from .numerics import Param

__all__ = [
    "AttentionParams",
    "AttentionMap",
    "init_prototypes",
    "init_attention_params",
    "avg_pool",
    "avg_pool_backward",
    "max_pool",
    "max_pool_backward",
    "lse_pool",
    "lse_pool_backward",
    "similarity",
    "attention_weights",
    "relation_specific_rep",
    "project_mentions",
    "attention_scores",
    "attention_weight_matrix",
    "relation_specific_reps",
]

POOLERS = ("avg", "max", "lse")
AGGREGATORS = POOLERS + ("rsman",)
SIMILARITY_MODES = ("dot", "mlp")


@dataclass
class AttentionParams:
    """Projection into prototype space, plus optional MLP scorer weights."""

    proj_W: Param  # (proto_dim, embed_dim)
    proj_b: Param  # (proto_dim,)
    mlp_W1: Param | None = None  # (hidden, proto_dim + embed_dim)
    mlp_b1: Param | None = None  # (hidden,)
    mlp_w2: Param | None = None  # (hidden,)
    mlp_b2: Param | None = None  # (1,)


def init_prototypes(n_relations: int, proto_dim: int, rng: np.random.Generator) -> Param:
    # std 1/sqrt(d) keeps initial dot-product scores O(1)
    return Param(rng.normal(0.0, 1.0 / np.sqrt(proto_dim), size=(n_relations, proto_dim)))


def init_attention_params(
    embed_dim: int,
    proto_dim: int,
    rng: np.random.Generator,
    mlp_hidden: int | None = None,
) -> AttentionParams:
    proj_W = Param(rng.normal(0.0, 1.0 / np.sqrt(embed_dim), size=(proto_dim, embed_dim)))
    proj_b = Param(np.zeros(proto_dim))
    params = AttentionParams(proj_W=proj_W, proj_b=proj_b)
    if mlp_hidden is not None:
        cat = proto_dim + embed_dim
        params.mlp_W1 = Param(rng.normal(0.0, 1.0 / np.sqrt(cat), size=(mlp_hidden, cat)))
        params.mlp_b1 = Param(np.zeros(mlp_hidden))
        params.mlp_w2 = Param(rng.normal(0.0, 1.0 / np.sqrt(mlp_hidden), size=(mlp_hidden,)))
        params.mlp_b2 = Param(np.zeros(1))
    return params


def _as_matrix(mentions) -> np.ndarray:
    M = np.asarray(mentions, dtype=np.float64)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.shape[0] == 0:
        raise ValueError("cannot aggregate an empty mention list")
    return M


# ---------------------------------------------------------------- poolers

def avg_pool(mentions) -> np.ndarray:
    """Arithmetic mean of the mention vectors."""
    return _as_matrix(mentions).mean(axis=0)


def avg_pool_backward(upstream: np.ndarray, n_mentions: int) -> np.ndarray:
    """(Q, d) gradient: 1/Q of the upstream to each mention."""
    return np.tile(upstream / n_mentions, (n_mentions, 1))


def max_pool(mentions) -> np.ndarray:
    """Elementwise maximum across mentions."""
    return _as_matrix(mentions).max(axis=0)


def max_pool_backward(upstream: np.ndarray, mentions) -> np.ndarray:
    """Routes each dimension's gradient to the first argmax mention."""
    M = _as_matrix(mentions)
    grads = np.zeros_like(M)
    winners = M.argmax(axis=0)  # first index on ties
    grads[winners, np.arange(M.shape[1])] = upstream
    return grads


def lse_pool(mentions) -> np.ndarray:
    """Elementwise logsumexp across mentions (stable)."""
    M = _as_matrix(mentions)
    m = M.max(axis=0)
    return m + np.log(np.exp(M - m).sum(axis=0))


def lse_pool_backward(upstream: np.ndarray, mentions, out: np.ndarray) -> np.ndarray:
    M = _as_matrix(mentions)
    return np.exp(M - out) * upstream


# ------------------------------------------------- attention, single slot

def similarity(p_r: np.ndarray, m: np.ndarray, params: AttentionParams, mode: str = "dot") -> float:
    """Relevance score between one relation prototype and one mention."""
    if mode == "dot":
        return float(np.dot(p_r, numerics.affine(m, params.proj_W.value, params.proj_b.value)))
    if mode == "mlp":
        scores, _ = attention_scores(
            p_r.reshape(1, -1), m.reshape(1, -1), params, mode="mlp"
        )
        return float(scores[0, 0])
    raise ValueError(f"unknown similarity mode {mode!r}")


def attention_weights(scores: np.ndarray) -> np.ndarray:
    """Softmax over one entity's mention scores for one relation."""
    return numerics.softmax(scores)


def relation_specific_rep(weights: np.ndarray, mentions) -> np.ndarray:
    """Attention-weighted sum of the mention vectors."""
    M = _as_matrix(mentions)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (M.shape[0],):
        raise ValueError(f"{weights.shape[0]} weights for {M.shape[0]} mentions")
    return weights @ M


# ------------------------------------------------ attention, whole entity
#
# Batched forms over one entity: prototypes P (R, d_p), mentions M (Q, d_m).
# scores S (R, Q), weights A (R, Q), representations E = A @ M (R, d_m).

def project_mentions(M: np.ndarray, params: AttentionParams) -> np.ndarray:
    """(Q, d_m) -> (Q, d_p) through the shared projection layer."""
    return M @ params.proj_W.value.T + params.proj_b.value


def project_mentions_backward(dProj: np.ndarray, M: np.ndarray, params: AttentionParams) -> np.ndarray:
    params.proj_W.grad += dProj.T @ M
    params.proj_b.grad += dProj.sum(axis=0)
    return dProj @ params.proj_W.value


def attention_scores(prototypes: np.ndarray, M: np.ndarray, params: AttentionParams, mode: str = "dot"):
    """(R, Q) score matrix plus the cache its backward needs."""
    if mode == "dot":
        proj = project_mentions(M, params)
        return prototypes @ proj.T, {"proj": proj}
    if mode == "mlp":
        if params.mlp_W1 is None:
            raise ValueError("attention params carry no MLP weights")
        d_p = prototypes.shape[1]
        W1p = params.mlp_W1.value[:, :d_p]
        W1m = params.mlp_W1.value[:, d_p:]
        pre = (prototypes @ W1p.T)[:, None, :] + (M @ W1m.T)[None, :, :] + params.mlp_b1.value
        hidden = np.tanh(pre)  # (R, Q, h)
        scores = hidden @ params.mlp_w2.value + params.mlp_b2.value[0]
        return scores, {"hidden": hidden}
    raise ValueError(f"unknown similarity mode {mode!r}")


def attention_scores_backward(
    dS: np.ndarray,
    prototypes: Param,
    M: np.ndarray,
    params: AttentionParams,
    cache: dict,
    mode: str = "dot",
) -> np.ndarray:
    """Accumulates prototype/projection grads; returns dM (Q, d_m)."""
    if mode == "dot":
        proj = cache["proj"]
        prototypes.grad += dS @ proj
        dProj = dS.T @ prototypes.value
        return project_mentions_backward(dProj, M, params)
    hidden = cache["hidden"]
    dHidden = dS[:, :, None] * params.mlp_w2.value
    dPre = dHidden * (1.0 - hidden * hidden)  # (R, Q, h)
    params.mlp_w2.grad += (hidden * dS[:, :, None]).sum(axis=(0, 1))
    params.mlp_b2.grad += dS.sum()
    params.mlp_b1.grad += dPre.sum(axis=(0, 1))
    d_p = prototypes.value.shape[1]
    W1p = params.mlp_W1.value[:, :d_p]
    W1m = params.mlp_W1.value[:, d_p:]
    dPer_r = dPre.sum(axis=1)  # (R, h)
    dPer_m = dPre.sum(axis=0)  # (Q, h)
    prototypes.grad += dPer_r @ W1p
    params.mlp_W1.grad[:, :d_p] += dPer_r.T @ prototypes.value
    params.mlp_W1.grad[:, d_p:] += dPer_m.T @ M
    return dPer_m @ W1m


def attention_weight_matrix(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax of the (R, Q) score matrix."""
    return np.vstack([numerics.softmax(row) for row in scores])


def attention_weight_matrix_backward(dA: np.ndarray, A: np.ndarray) -> np.ndarray:
    return np.vstack(
        [numerics.softmax_backward(drow, arow) for drow, arow in zip(dA, A)]
    )


def relation_specific_reps(A: np.ndarray, M: np.ndarray) -> np.ndarray:
    """E = A @ M: one entity vector per relation."""
    return A @ M


def relation_specific_reps_backward(dE: np.ndarray, A: np.ndarray, M: np.ndarray):
    dA = dE @ M.T
    dM = A.T @ dE
    return dA, dM


# ------------------------------------------------------------ attention map

@dataclass
class AttentionMap:
    """Per-relation attention over one entity's mentions."""

    relation_names: tuple
    mention_surfaces: tuple
    scores: np.ndarray  # (R, Q)
    weights: np.ndarray  # (R, Q); rows sum to 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["relation", *self.mention_surfaces])
        for name, row in zip(self.relation_names, self.weights):
            writer.writerow([name, *[f"{w:.10g}" for w in row]])
        return buf.getvalue()

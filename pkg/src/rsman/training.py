"""Optimization loop: AdamW with decoupled decay, linear warmup/decay
schedule, global-norm gradient clipping, seeded shuffling, checkpointing.

Training is strictly deterministic for a fixed config and seed: document
order per epoch comes from one seeded generator and gradient accumulation
is serial in that order, so repeated runs produce byte-identical
checkpoints and metrics logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import evaluation
from .corpus import build_fact_index
from .encoder import PAD_TOKEN, UNK_TOKEN, Vocabulary
from .model import ModelConfig, RelationModel, label_matrix, ordered_pairs

__all__ = [
    "TrainConfig",
    "OptimizerState",
    "TrainResult",
    "lr_at",
    "clip_gradients",
    "adamw_step",
    "train",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_MAGIC = b"RSCK1\n"


@dataclass
class TrainConfig:
    learning_rate: float = 5e-5
    batch_size: int = 8
    epochs: int = 60
    warmup_ratio: float = 0.1
    clip_norm: float = 1.0
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    threshold: float = 0.5
    tune_threshold: bool = False
    encoder_mode: str = "trained"
    negative_ratio: float | None = None  # train-time NA-pair downsampling; None = keep all

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 <= self.warmup_ratio < 1:
            raise ValueError("warmup ratio must be in [0, 1)")
        if self.clip_norm <= 0:
            raise ValueError("clip norm must be positive")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch size and epochs must be >= 1")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must be in (0, 1)")
        if self.negative_ratio is not None and self.negative_ratio < 0:
            raise ValueError("negative ratio must be >= 0")

    @classmethod
    def docred(cls, **overrides) -> "TrainConfig":
        """Stock hyper-parameters for DocRED-scale runs."""
        base = dict(learning_rate=5e-5, batch_size=8, epochs=60, clip_norm=1.0, warmup_ratio=0.1)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def dwie(cls, **overrides) -> "TrainConfig":
        """Stock hyper-parameters for DWIE-scale runs."""
        base = dict(learning_rate=3e-5, batch_size=4, epochs=40, clip_norm=1.0, warmup_ratio=0.1)
        base.update(overrides)
        return cls(**base)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def lr_at(step: float, total_steps: int, peak_lr: float, warmup_ratio: float) -> float:
    """Piecewise-linear schedule: 0 -> peak over the warmup, then peak -> 0."""
    if total_steps <= 0:
        raise ValueError("total_steps must be positive")
    if not 0 <= step <= total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    warmup = warmup_ratio * total_steps
    if step < warmup:
        return peak_lr * step / warmup
    return peak_lr * (total_steps - step) / (total_steps - warmup)


def clip_gradients(params, max_norm: float) -> float:
    """Scale all grads so the global L2 norm is at most max_norm.

    Returns the applied scale (1.0 when no clipping happened).
    """
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    if isinstance(params, dict):
        params = params.values()
    params = list(params)
    sq = 0.0
    for p in params:
        sq += float((p.grad * p.grad).sum())
    if not np.isfinite(sq):
        raise ValueError("non-finite gradient encountered while clipping")
    norm = np.sqrt(sq)
    if norm <= max_norm:
        return 1.0
    scale = max_norm / norm
    for p in params:
        p.grad *= scale
    return scale


@dataclass
class OptimizerState:
    """First/second moment accumulators per parameter plus a step counter."""

    m: dict
    v: dict
    step: int = 0

    @classmethod
    def for_params(cls, params: dict) -> "OptimizerState":
        return cls(
            m={k: np.zeros_like(p.value) for k, p in params.items()},
            v={k: np.zeros_like(p.value) for k, p in params.items()},
        )


def adamw_step(
    params: dict,
    state: OptimizerState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> None:
    """Bias-corrected moment update, then p -= lr*(m^/(sqrt(v^)+eps)) + lr*wd*p."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for name, p in params.items():
        g = p.grad
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        update = lr * ((m / bc1) / (np.sqrt(v / bc2) + eps)) + lr * weight_decay * p.value
        p.value -= update


@dataclass
class TrainResult:
    model: RelationModel
    history: list
    best_epoch: int | None = None
    best_dev_f1: float | None = None
    threshold: float = 0.5


def _training_pairs(doc, rng, negative_ratio, n_relations):
    pairs = ordered_pairs(doc)
    if negative_ratio is None or not pairs:
        return pairs
    labels = label_matrix(doc, pairs, n_relations)
    positive = [p for p, row in zip(pairs, labels) if row.any()]
    negative = [p for p, row in zip(pairs, labels) if not row.any()]
    keep = int(np.ceil(negative_ratio * max(1, len(positive))))
    if keep >= len(negative):
        return pairs
    chosen = rng.choice(len(negative), size=keep, replace=False)
    kept = positive + [negative[i] for i in sorted(chosen)]
    return kept


def train(
    config: TrainConfig,
    docs,
    model: RelationModel,
    vocab: Vocabulary | None = None,
    precomputed: dict | None = None,
    dev_docs=None,
    log_path=None,
) -> TrainResult:
    """Run the full optimization loop; leaves the best weights in the model."""
    docs = list(docs)
    if not docs:
        raise ValueError("cannot train on an empty corpus")
    params = model.named_params()
    state = OptimizerState.for_params(params)
    rng = np.random.default_rng(config.seed)
    steps_per_epoch = int(np.ceil(len(docs) / config.batch_size))
    total_steps = config.epochs * steps_per_epoch

    dev_index = None
    if dev_docs is not None:
        dev_docs = list(dev_docs)
        dev_index = build_fact_index(docs)

    def encode(doc):
        return model.encode(doc, vocab=vocab, precomputed=precomputed)

    history = []
    best = None  # (f1, epoch, {name: value copy})
    log_file = open(log_path, "w") if log_path else None
    try:
        done_steps = 0
        for epoch in range(1, config.epochs + 1):
            order = rng.permutation(len(docs))
            batch_losses = []
            for start in range(0, len(docs), config.batch_size):
                batch = order[start : start + config.batch_size]
                model.zero_grad()
                batch_loss = 0.0
                for idx in batch:
                    doc = docs[idx]
                    pairs = _training_pairs(doc, rng, config.negative_ratio, model.config.n_relations)
                    loss, fwd = model.document_loss(doc, encode(doc), pairs=pairs)
                    if not np.isfinite(loss):
                        raise RuntimeError(
                            f"non-finite loss {loss} at epoch {epoch}, step {done_steps}, "
                            f"doc {doc.id!r}"
                        )
                    model.document_backward(fwd, upstream=1.0 / len(batch))
                    batch_loss += loss / len(batch)
                clip_gradients(params, config.clip_norm)
                lr = lr_at(done_steps, total_steps, config.learning_rate, config.warmup_ratio)
                adamw_step(
                    params, state, lr,
                    beta1=config.beta1, beta2=config.beta2, eps=config.eps,
                    weight_decay=config.weight_decay,
                )
                done_steps += 1
                batch_losses.append(batch_loss)

            record = {
                "epoch": epoch,
                "train_loss": float(np.mean(batch_losses)),
                "dev_f1": None,
                "dev_ign_f1": None,
                "lr": lr_at(done_steps, total_steps, config.learning_rate, config.warmup_ratio),
            }
            if dev_docs is not None:
                preds = evaluation.predict_corpus(
                    model, dev_docs, vocab=vocab, precomputed=precomputed,
                    threshold=config.threshold,
                )
                report = evaluation.ign_f1(
                    preds, evaluation.gold_facts(dev_docs), dev_index, dev_docs
                )
                record["dev_f1"] = report.f1
                record["dev_ign_f1"] = report.ign_f1
                if best is None or report.f1 > best[0]:
                    best = (report.f1, epoch, {k: p.value.copy() for k, p in params.items()})
            history.append(record)
            if log_file:
                log_file.write(json.dumps(record, sort_keys=True) + "\n")
                log_file.flush()
    finally:
        if log_file:
            log_file.close()

    result = TrainResult(model=model, history=history, threshold=config.threshold)
    if best is not None:
        result.best_dev_f1, result.best_epoch = best[0], best[1]
        for name, value in best[2].items():
            np.copyto(params[name].value, value)
    if config.tune_threshold:
        tune_on = dev_docs if dev_docs is not None else docs
        result.threshold, _ = evaluation.tune_threshold(
            model, tune_on, vocab=vocab, precomputed=precomputed
        )
    return result


# ----------------------------------------------------------- checkpoints

def save_checkpoint(
    model: RelationModel,
    vocab: Vocabulary | None = None,
    relations=None,
    threshold: float = 0.5,
    extra: dict | None = None,
) -> bytes:
    """Versioned binary: JSON header line + little-endian float64 payloads."""
    params = model.named_params()
    header = {
        "format": 1,
        "config": model.config.to_json(),
        "params": [[name, list(p.value.shape)] for name, p in params.items()],
        "vocab": None,
        "relations": list(relations) if relations is not None else None,
        "threshold": threshold,
        "extra": extra or {},
    }
    if vocab is not None:
        tokens = [None] * vocab.size
        for tok, idx in vocab.token_to_id.items():
            tokens[idx] = tok
        header["vocab"] = {"tokens": tokens, "lowercase": vocab.lowercase}
    chunks = [CHECKPOINT_MAGIC, json.dumps(header, sort_keys=True).encode("utf-8"), b"\n"]
    for _, p in params.items():
        chunks.append(np.ascontiguousarray(p.value, dtype="<f8").tobytes())
    return b"".join(chunks)


def load_checkpoint(data: bytes):
    """Inverse of save_checkpoint.

    Returns (model, vocab | None, relations | None, threshold, extra).
    """
    if not data.startswith(CHECKPOINT_MAGIC):
        raise ValueError("not a checkpoint (bad magic)")
    nl = data.find(b"\n", len(CHECKPOINT_MAGIC))
    if nl < 0:
        raise ValueError("truncated checkpoint header")
    header = json.loads(data[len(CHECKPOINT_MAGIC) : nl].decode("utf-8"))
    if header.get("format") != 1:
        raise ValueError(f"unsupported checkpoint format {header.get('format')!r}")
    config = ModelConfig.from_json(header["config"])
    model = RelationModel(config)
    params = model.named_params()
    listed = [name for name, _ in header["params"]]
    if listed != list(params.keys()):
        raise ValueError(
            f"checkpoint parameters {listed} do not match model parameters {list(params.keys())}"
        )
    pos = nl + 1
    for name, shape in header["params"]:
        p = params[name]
        if list(p.value.shape) != shape:
            raise ValueError(f"checkpoint shape {shape} for {name!r} != model {p.value.shape}")
        n = int(np.prod(shape)) if shape else 1
        payload = data[pos : pos + 8 * n]
        if len(payload) < 8 * n:
            raise ValueError(f"truncated payload for parameter {name!r}")
        p.value[...] = np.frombuffer(payload, dtype="<f8").reshape(shape)
        pos += 8 * n
    if pos != len(data):
        raise ValueError(f"{len(data) - pos} trailing bytes in checkpoint")

    vocab = None
    if header.get("vocab"):
        tokens = header["vocab"]["tokens"]
        if tokens[:2] != [PAD_TOKEN, UNK_TOKEN]:
            raise ValueError("checkpoint vocabulary is missing the reserved tokens")
        vocab = Vocabulary(
            token_to_id={tok: i for i, tok in enumerate(tokens)},
            lowercase=bool(header["vocab"]["lowercase"]),
        )
    relations = tuple(header["relations"]) if header.get("relations") else None
    return model, vocab, relations, float(header.get("threshold", 0.5)), header.get("extra", {})

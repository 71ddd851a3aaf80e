"""Scikit-learn style estimator wrapping the model and training loop.

``RelationExtractor`` follows the fit/predict contract and inherits
``get_params``/``set_params`` from :class:`sklearn.base.BaseEstimator`, so
it composes with clone, grid search and pipelines that treat documents as
opaque samples. X is always a list of :class:`rsman.corpus.Document`; gold
labels travel inside the documents, so ``y`` is ignored.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import evaluation, training
from .corpus import Document, RelationSchema, load_mention_embeddings
from .encoder import build_vocab
from .model import ModelConfig, RelationModel

__all__ = ["RelationExtractor", "check_documents"]


def check_documents(X, allow_empty: bool = False) -> list:
    """Validate that X is a list of Documents; returns it as a list."""
    if isinstance(X, Document):
        raise TypeError("pass a list of Documents, not a single Document")
    docs = list(X)
    if not docs and not allow_empty:
        raise ValueError("document list is empty")
    for d in docs:
        if not isinstance(d, Document):
            raise TypeError(f"expected Document, got {type(d).__name__}")
    return docs


class RelationExtractor(BaseEstimator):
    """Document-level relation extractor with configurable mention aggregation.

    Parameters mirror the model and trainer knobs; see ModelConfig and
    TrainConfig for semantics. ``aggregator`` picks how an entity's mention
    vectors become entity vectors: "avg", "max", "lse", or "rsman"
    (relation-specific attention over mentions).
    """

    def __init__(
        self,
        aggregator: str = "rsman",
        similarity: str = "dot",
        embed_dim: int = 64,
        proto_dim: int | None = None,
        bilinear_dim: int | None = 64,
        window: int = 0,
        min_count: int = 2,
        lowercase: bool = False,
        encoder_mode: str = "trained",
        learning_rate: float = 5e-5,
        batch_size: int = 8,
        epochs: int = 60,
        warmup_ratio: float = 0.1,
        clip_norm: float = 1.0,
        weight_decay: float = 0.01,
        threshold: float = 0.5,
        tune_threshold: bool = False,
        negative_ratio: float | None = None,
        seed: int = 0,
    ):
        self.aggregator = aggregator
        self.similarity = similarity
        self.embed_dim = embed_dim
        self.proto_dim = proto_dim
        self.bilinear_dim = bilinear_dim
        self.window = window
        self.min_count = min_count
        self.lowercase = lowercase
        self.encoder_mode = encoder_mode
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.warmup_ratio = warmup_ratio
        self.clip_norm = clip_norm
        self.weight_decay = weight_decay
        self.threshold = threshold
        self.tune_threshold = tune_threshold
        self.negative_ratio = negative_ratio
        self.seed = seed

    # ------------------------------------------------------------- fit

    def fit(self, X, y=None, schema: RelationSchema | None = None, dev_docs=None, embeddings=None):
        """Train on labeled documents.

        ``schema`` is required: it fixes the relation inventory the label
        ids refer to. ``embeddings`` (an MEMB1 map or its raw bytes) is
        required in precomputed encoder mode.
        """
        docs = check_documents(X)
        if schema is None:
            raise ValueError("fit needs schema=RelationSchema(...) naming the relations")
        if dev_docs is not None:
            dev_docs = check_documents(dev_docs)

        precomputed = None
        vocab = None
        if self.encoder_mode == "precomputed":
            if embeddings is None:
                raise ValueError("precomputed encoder mode needs embeddings=")
            precomputed = (
                load_mention_embeddings(embeddings) if isinstance(embeddings, bytes) else embeddings
            )
            dims = {v.shape[0] for v in precomputed.values()}
            if dims != {self.embed_dim}:
                raise ValueError(
                    f"embed_dim={self.embed_dim} but embedding file has dimension(s) {sorted(dims)}"
                )
        else:
            vocab = build_vocab(docs, min_count=self.min_count, lowercase=self.lowercase)

        config = ModelConfig(
            n_relations=schema.count,
            embed_dim=self.embed_dim,
            proto_dim=self.proto_dim,
            bilinear_dim=self.bilinear_dim,
            aggregator=self.aggregator,
            similarity=self.similarity,
            encoder_mode=self.encoder_mode,
            vocab_size=vocab.size if vocab is not None else 0,
            window=self.window,
            seed=self.seed,
        )
        train_config = training.TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            warmup_ratio=self.warmup_ratio,
            clip_norm=self.clip_norm,
            weight_decay=self.weight_decay,
            seed=self.seed,
            threshold=self.threshold,
            tune_threshold=self.tune_threshold,
            encoder_mode=self.encoder_mode,
            negative_ratio=self.negative_ratio,
        )
        model = RelationModel(config)
        result = training.train(
            train_config, docs, model,
            vocab=vocab, precomputed=precomputed, dev_docs=dev_docs,
        )
        self.schema_ = schema
        self.vocab_ = vocab
        self.precomputed_ = precomputed
        self.model_ = result.model
        self.threshold_ = result.threshold
        self.history_ = result.history
        self.best_dev_f1_ = result.best_dev_f1
        return self

    # --------------------------------------------------------- predict

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("this RelationExtractor is not fitted yet; call fit first")

    def predict(self, X, threshold: float | None = None):
        """Predicted (doc, head, tail, relation) triples with scores."""
        self._check_fitted()
        docs = check_documents(X)
        return evaluation.predict_corpus(
            self.model_, docs,
            vocab=self.vocab_, precomputed=self.precomputed_,
            threshold=self.threshold_ if threshold is None else threshold,
        )

    def predict_proba(self, X):
        """Per-pair relation probabilities as a list of PairScore."""
        self._check_fitted()
        docs = check_documents(X)
        return evaluation.score_corpus(
            self.model_, docs, vocab=self.vocab_, precomputed=self.precomputed_
        )

    def score(self, X, y=None) -> float:
        """Micro F1 of the thresholded predictions against the gold facts in X."""
        docs = check_documents(X)
        report = evaluation.micro_f1(self.predict(docs), evaluation.gold_facts(docs))
        return report.f1

    # ----------------------------------------------------- persistence

    def to_checkpoint(self) -> bytes:
        self._check_fitted()
        return training.save_checkpoint(
            self.model_,
            vocab=self.vocab_,
            relations=self.schema_.names,
            threshold=self.threshold_,
        )

    @classmethod
    def from_checkpoint(cls, data: bytes) -> "RelationExtractor":
        model, vocab, relations, threshold, _ = training.load_checkpoint(data)
        if relations is None:
            raise ValueError("checkpoint carries no relation schema")
        cfg = model.config
        est = cls(
            aggregator=cfg.aggregator,
            similarity=cfg.similarity,
            embed_dim=cfg.embed_dim,
            proto_dim=cfg.proto_dim,
            bilinear_dim=cfg.bilinear_dim,
            window=cfg.window,
            encoder_mode=cfg.encoder_mode,
            threshold=threshold,
            seed=cfg.seed,
        )
        est.model_ = model
        est.vocab_ = vocab
        est.precomputed_ = None
        est.schema_ = RelationSchema(names=relations)
        est.threshold_ = threshold
        est.history_ = []
        est.best_dev_f1_ = None
        return est

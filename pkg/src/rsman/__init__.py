"""Document-level relation extraction with relation-specific mention attention.

Entities in a document are clusters of mentions; classic aggregators pool
mention vectors into one fixed entity vector, while the attentive path keeps
a trainable prototype per candidate relation and re-weights the mentions for
each relation before bilinear pair classification.
"""

from .aggregation import (
    AttentionMap,
    attention_weights,
    avg_pool,
    lse_pool,
    max_pool,
    relation_specific_rep,
    similarity,
)
from .classifier import PairScore, Prediction, predict, predictions_to_json
from .corpus import (
    Document,
    Entity,
    Fact,
    FactIndex,
    Mention,
    RelationSchema,
    StatsReport,
    build_fact_index,
    corpus_stats,
    load_mention_embeddings,
    parse_docred,
    save_mention_embeddings,
    serialize_docred,
)
from .estimator import RelationExtractor
from .evaluation import (
    MetricReport,
    evaluate_subsets,
    gold_facts,
    ign_f1,
    micro_f1,
    subset_partition,
)
from .model import ModelConfig, RelationModel
from .numerics import GradCheckReport, Param, grad_check
from .synth import SynthCorpus, SynthSpec, confounding_ceiling, generate, toy_corpus
from .training import (
    TrainConfig,
    TrainResult,
    adamw_step,
    clip_gradients,
    load_checkpoint,
    lr_at,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionMap",
    "Document",
    "Entity",
    "Fact",
    "FactIndex",
    "GradCheckReport",
    "Mention",
    "MetricReport",
    "ModelConfig",
    "PairScore",
    "Param",
    "Prediction",
    "RelationExtractor",
    "RelationModel",
    "RelationSchema",
    "StatsReport",
    "SynthCorpus",
    "SynthSpec",
    "TrainConfig",
    "TrainResult",
    "adamw_step",
    "attention_weights",
    "avg_pool",
    "build_fact_index",
    "clip_gradients",
    "confounding_ceiling",
    "corpus_stats",
    "evaluate_subsets",
    "generate",
    "gold_facts",
    "grad_check",
    "ign_f1",
    "load_checkpoint",
    "load_mention_embeddings",
    "lr_at",
    "lse_pool",
    "max_pool",
    "micro_f1",
    "parse_docred",
    "predict",
    "predictions_to_json",
    "relation_specific_rep",
    "save_checkpoint",
    "save_mention_embeddings",
    "serialize_docred",
    "similarity",
    "subset_partition",
    "toy_corpus",
    "train",
]

"""Set-based metrics over predicted relation triples.

Micro F1 compares predicted and gold (doc, head, tail, relation) sets.
The ignored variant drops predictions whose fact also occurs in the
training split (matched on mention surface names) from the precision
numerator and denominator, while the recall denominator keeps the full
gold set, mirroring the official leaderboard treatment.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .corpus import FactIndex

__all__ = [
    "MetricReport",
    "micro_f1",
    "ign_f1",
    "gold_facts",
    "subset_partition",
    "evaluate_subsets",
    "subsets_csv",
    "predict_corpus",
    "tune_threshold",
    "THRESHOLD_GRID",
]

SUBSET_NAMES = ("All", "M1", "M2")
THRESHOLD_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True)
class MetricReport:
    precision: float
    recall: float
    f1: float
    ign_f1: float
    tp: int
    fp: int
    fn: int
    ignored: int

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "ign_f1": self.ign_f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "ignored": self.ignored,
        }


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def _harmonic(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def _pred_keys(predictions) -> set:
    return {p.key for p in predictions}


def gold_facts(docs) -> set:
    """Gold (doc_id, head, tail, relation) keys of a split."""
    return {(doc.id, f.head, f.tail, f.relation) for doc in docs for f in doc.facts}


def _build_report(pred_keys: set, gold: set, ignored: set) -> MetricReport:
    tp = len(pred_keys & gold)
    fp = len(pred_keys - gold)
    fn = len(gold - pred_keys)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, len(gold))
    kept = pred_keys - ignored
    ign_precision = _ratio(len(kept & gold), len(kept))
    return MetricReport(
        precision=precision,
        recall=recall,
        f1=_harmonic(precision, recall),
        ign_f1=_harmonic(ign_precision, recall),
        tp=tp,
        fp=fp,
        fn=fn,
        ignored=len(ignored),
    )


def micro_f1(predictions, gold: set) -> MetricReport:
    """Plain micro precision/recall/F1 over triple sets."""
    return _build_report(_pred_keys(predictions), set(gold), ignored=set())


def ign_f1(predictions, gold: set, index: FactIndex, docs) -> MetricReport:
    """Micro F1 plus the variant ignoring predictions seen in the indexed split."""
    by_id = {doc.id: doc for doc in docs}
    pred_keys = _pred_keys(predictions)
    ignored = set()
    for key in pred_keys:
        doc_id, h, t, r = key
        doc = by_id.get(doc_id)
        if doc is None:
            continue
        heads = [m.surface for m in doc.entities[h].mentions]
        tails = [m.surface for m in doc.entities[t].mentions]
        if index.contains(heads, tails, r):
            ignored.add(key)
    return _build_report(pred_keys, set(gold), ignored)


# ------------------------------------------------------- subset analysis

def _mention_counts(docs) -> dict:
    return {
        doc.id: [len(ent.mentions) for ent in doc.entities]
        for doc in docs
    }


def subset_partition(gold: set, docs) -> dict:
    """Split gold instances by argument mention multiplicity.

    All: every instance; M1: head or tail has more than one mention;
    M2: head or tail has more than two.
    """
    counts = _mention_counts(docs)
    subsets = {name: set() for name in SUBSET_NAMES}
    for key in gold:
        doc_id, h, t, _ = key
        q = max(counts[doc_id][h], counts[doc_id][t])
        subsets["All"].add(key)
        if q > 1:
            subsets["M1"].add(key)
        if q > 2:
            subsets["M2"].add(key)
    return subsets


def evaluate_subsets(predictions, docs, index: FactIndex | None = None) -> list:
    """Per-subset reports: [(name, gold instance count, MetricReport), ...]."""
    gold = gold_facts(docs)
    subsets = subset_partition(gold, docs)
    counts = _mention_counts(docs)
    thresholds = {"All": 0, "M1": 1, "M2": 2}
    out = []
    for name in SUBSET_NAMES:
        min_q = thresholds[name]
        sub_preds = [
            p for p in predictions
            if max(counts[p.doc_id][p.head], counts[p.doc_id][p.tail]) > min_q
        ]
        if index is None:
            report = micro_f1(sub_preds, subsets[name])
        else:
            report = ign_f1(sub_preds, subsets[name], index, docs)
        out.append((name, len(subsets[name]), report))
    return out


def subsets_csv(rows) -> str:
    """CSV in the (subset, P, R, F1) shape, one row per subset."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["subset", "precision", "recall", "f1"])
    for name, _, report in rows:
        writer.writerow([name, f"{report.precision:.6f}", f"{report.recall:.6f}", f"{report.f1:.6f}"])
    return buf.getvalue()


# ------------------------------------------------------ corpus prediction

def score_corpus(model, docs, vocab=None, precomputed=None, aggregator=None) -> list:
    """PairScores for every ordered pair of every document."""
    scores = []
    for doc in docs:
        reps = model.encode(doc, vocab=vocab, precomputed=precomputed)
        scores.extend(model.predict_document(doc, reps, aggregator=aggregator))
    return scores


def predict_corpus(
    model,
    docs,
    vocab=None,
    precomputed=None,
    threshold: float = 0.5,
    aggregator=None,
) -> list:
    """Thresholded predictions for a whole split."""
    from .classifier import predict

    return predict(
        score_corpus(model, docs, vocab=vocab, precomputed=precomputed, aggregator=aggregator),
        threshold,
    )


def tune_threshold(
    model,
    docs,
    vocab=None,
    precomputed=None,
    grid=THRESHOLD_GRID,
    aggregator=None,
):
    """Pick the grid threshold with the best micro F1 (ties: lowest value)."""
    from .classifier import predict

    scores = score_corpus(model, docs, vocab=vocab, precomputed=precomputed, aggregator=aggregator)
    gold = gold_facts(docs)
    best_theta, best_f1 = None, -1.0
    for theta in grid:
        report = micro_f1(predict(scores, theta), gold)
        if report.f1 > best_f1:
            best_theta, best_f1 = theta, report.f1
    return best_theta, best_f1

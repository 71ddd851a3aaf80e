import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsman.classifier import PairScore, Prediction
from rsman.corpus import FactIndex, build_fact_index
from rsman.evaluation import (
    THRESHOLD_GRID,
    evaluate_subsets,
    gold_facts,
    ign_f1,
    micro_f1,
    subset_partition,
    subsets_csv,
)

from conftest import make_doc


def preds_of(*keys, score=0.9):
    return [Prediction(doc_id=d, head=h, tail=t, relation=r, score=score) for d, h, t, r in keys]


# ------------------------------------------------------- brute-force oracle

def brute_force_metrics(pred_keys, gold_keys, ignored_keys):
    """Recompute every number straight from the set definitions."""
    pred_keys, gold_keys = set(pred_keys), set(gold_keys)
    tp = sum(1 for k in pred_keys if k in gold_keys)
    fp = sum(1 for k in pred_keys if k not in gold_keys)
    fn = sum(1 for k in gold_keys if k not in pred_keys)
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / len(gold_keys) if gold_keys else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    kept = pred_keys - set(ignored_keys)
    ign_tp = sum(1 for k in kept if k in gold_keys)
    ign_p = ign_tp / len(kept) if kept else 0.0
    ign = 2 * ign_p * recall / (ign_p + recall) if ign_p + recall else 0.0
    return dict(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1, ign_f1=ign)


# ---------------------------------------------------------------- micro F1

def test_micro_f1_perfect():
    gold = {("d", 0, 1, 0), ("d", 1, 2, 1)}
    report = micro_f1(preds_of(*gold), gold)
    assert report.f1 == 1.0
    assert (report.tp, report.fp, report.fn) == (2, 0, 0)


def test_micro_f1_empty_predictions():
    report = micro_f1([], {("d", 0, 1, 0)})
    assert report.f1 == 0.0
    assert report.precision == 0.0
    assert report.recall == 0.0


def test_micro_f1_two_tp_one_fp_one_fn():
    gold = {("d", 0, 1, 0), ("d", 1, 2, 1), ("d", 2, 0, 1)}
    pred = preds_of(("d", 0, 1, 0), ("d", 1, 2, 1), ("d", 0, 2, 0))
    report = micro_f1(pred, gold)
    oracle = brute_force_metrics({p.key for p in pred}, gold, set())
    assert (report.tp, report.fp, report.fn) == (oracle["tp"], oracle["fp"], oracle["fn"]) == (2, 1, 1)
    assert report.precision == pytest.approx(2 / 3)
    assert report.recall == pytest.approx(2 / 3)
    assert report.f1 == pytest.approx(2 / 3)


def test_micro_f1_symmetric_under_relation_relabeling(rng):
    keys = [("d", h, t, r) for h in range(3) for t in range(3) if h != t for r in range(4)]
    gold = {k for k in keys if rng.random() < 0.4}
    pred_keys = {k for k in keys if rng.random() < 0.4}
    perm = rng.permutation(4)
    relabel = lambda ks: {(d, h, t, int(perm[r])) for d, h, t, r in ks}
    a = micro_f1(preds_of(*pred_keys), gold)
    b = micro_f1(preds_of(*relabel(pred_keys)), relabel(gold))
    assert a == b


# ------------------------------------------------------------------ ign F1

def three_doc_fixture():
    """Docs where some gold facts also occur in a make-believe train split."""
    eval_docs = [
        make_doc(
            "e1",
            [["Cohen", "is", "Australian"], ["He", "sailed"]],
            [
                [("Cohen", 0, 0, 1), ("He", 1, 0, 1)],
                [("Australian", 0, 2, 3)],
            ],
            facts=[(0, 1, 0)],
        ),
        make_doc(
            "e2",
            [["Ada", "visited", "London"]],
            [[("Ada", 0, 0, 1)], [("London", 0, 2, 3)]],
            facts=[(0, 1, 1)],
        ),
        make_doc(
            "e3",
            [["Bo", "founded", "Acme"]],
            [[("Bo", 0, 0, 1)], [("Acme", 0, 2, 3)]],
            facts=[(0, 1, 2)],
        ),
    ]
    train_docs = [
        make_doc(
            "t1",
            [["He", "was", "Australian"]],
            [[("He", 0, 0, 1)], [("Australian", 0, 2, 3)]],
            facts=[(0, 1, 0)],  # same surface fact as e1's gold
        )
    ]
    return eval_docs, train_docs


def test_ign_equals_plain_when_no_overlap():
    eval_docs, _ = three_doc_fixture()
    gold = gold_facts(eval_docs)
    preds = preds_of(*gold)
    report = ign_f1(preds, gold, FactIndex(), eval_docs)
    assert report.ign_f1 == report.f1 == 1.0
    assert report.ignored == 0


def test_ign_all_correct_in_train_is_zero_by_convention():
    eval_docs, train_docs = three_doc_fixture()
    index = build_fact_index(train_docs)
    preds = preds_of(("e1", 0, 1, 0))  # the only prediction is an in-train fact
    gold = gold_facts(eval_docs)
    report = ign_f1(preds, gold, index, eval_docs)
    assert report.ignored == 1
    assert report.ign_f1 == 0.0
    assert report.f1 > 0.0  # the plain metric still credits it


def test_ign_handcrafted_matches_brute_force():
    eval_docs, train_docs = three_doc_fixture()
    index = build_fact_index(train_docs)
    gold = gold_facts(eval_docs)
    # one in-train TP (e1), one fresh TP (e2), one FP (e3's reversed pair)
    preds = preds_of(("e1", 0, 1, 0), ("e2", 0, 1, 1), ("e3", 1, 0, 2))
    report = ign_f1(preds, gold, index, eval_docs)
    oracle = brute_force_metrics(
        {p.key for p in preds}, gold, ignored_keys={("e1", 0, 1, 0)}
    )
    assert report.tp == oracle["tp"] == 2
    assert report.fp == oracle["fp"] == 1
    assert report.fn == oracle["fn"] == 1
    assert report.ignored == 1
    assert report.precision == pytest.approx(oracle["precision"])
    assert report.recall == pytest.approx(oracle["recall"])
    assert report.f1 == pytest.approx(oracle["f1"])
    assert report.ign_f1 == pytest.approx(oracle["ign_f1"])


@settings(max_examples=100)
@given(st.integers(0, 100_000))
def test_ign_never_increases_tp(seed):
    rng = np.random.default_rng(seed)
    eval_docs, train_docs = three_doc_fixture()
    index = build_fact_index(train_docs)
    gold = gold_facts(eval_docs)
    universe = [(d.id, h, t, r) for d in eval_docs
                for h in range(len(d.entities)) for t in range(len(d.entities))
                if h != t for r in range(3)]
    preds = preds_of(*[k for k in universe if rng.random() < 0.5])
    plain = micro_f1(preds, gold)
    ign = ign_f1(preds, gold, index, eval_docs)
    kept_tp = len(({p.key for p in preds} - _ignored_keys(preds, index, eval_docs)) & gold)
    assert kept_tp <= plain.tp
    assert ign.tp == plain.tp  # raw counts unchanged; only ign precision moves


def _ignored_keys(preds, index, docs):
    by_id = {d.id: d for d in docs}
    out = set()
    for p in preds:
        doc = by_id[p.doc_id]
        heads = [m.surface for m in doc.entities[p.head].mentions]
        tails = [m.surface for m in doc.entities[p.tail].mentions]
        if index.contains(heads, tails, p.relation):
            out.add(p.key)
    return out


# ----------------------------------------------------------------- subsets

def multi_mention_docs():
    return [
        make_doc(
            "m",
            [["a", "b", "c", "d", "e", "f"]],
            [
                [("a", 0, 0, 1)],  # Q=1
                [("b", 0, 1, 2), ("c", 0, 2, 3)],  # Q=2
                [("d", 0, 3, 4), ("e", 0, 4, 5), ("f", 0, 5, 6)],  # Q=3
            ],
            facts=[(0, 1, 0), (1, 0, 0), (2, 0, 1)],
        )
    ]


def test_subset_partition_membership():
    docs = multi_mention_docs()
    gold = gold_facts(docs)
    parts = subset_partition(gold, docs)
    # Q=1 vs Q=1 would be All only; here every fact involves a multi-mention arg
    assert ("m", 0, 1, 0) in parts["All"] and ("m", 0, 1, 0) in parts["M1"]
    assert ("m", 0, 1, 0) not in parts["M2"]  # max Q = 2
    assert ("m", 2, 0, 1) in parts["M2"]  # Q=3 head
    assert parts["M2"] <= parts["M1"] <= parts["All"]


def test_subset_partition_single_mention_only():
    docs = [
        make_doc(
            "s", [["a", "b"]],
            [[("a", 0, 0, 1)], [("b", 0, 1, 2)]],
            facts=[(0, 1, 0)],
        )
    ]
    parts = subset_partition(gold_facts(docs), docs)
    assert len(parts["All"]) == 1
    assert len(parts["M1"]) == 0
    assert len(parts["M2"]) == 0


@settings(max_examples=100)
@given(st.integers(0, 100_000))
def test_subset_chain_on_random_corpora(seed):
    rng = np.random.default_rng(seed)
    docs = []
    for d in range(3):
        n_ents = int(rng.integers(2, 5))
        sentence = [f"t{i}" for i in range(10)]
        entities = []
        for e in range(n_ents):
            q = int(rng.integers(1, 4))
            entities.append([(f"t{j}", 0, j, j + 1) for j in rng.choice(10, size=q, replace=False)])
        facts = []
        for h in range(n_ents):
            for t in range(n_ents):
                if h != t and rng.random() < 0.3:
                    facts.append((h, t, int(rng.integers(0, 3))))
        docs.append(make_doc(f"r{d}", [sentence], entities, facts))
    parts = subset_partition(gold_facts(docs), docs)
    assert len(parts["M2"]) <= len(parts["M1"]) <= len(parts["All"])


def test_evaluate_subsets_counts_and_csv():
    docs = multi_mention_docs()
    gold = gold_facts(docs)
    rows = evaluate_subsets(preds_of(*gold), docs)
    names = [name for name, _, _ in rows]
    counts = [count for _, count, _ in rows]
    assert names == ["All", "M1", "M2"]
    assert counts == [3, 3, 1]
    assert all(report.f1 == 1.0 for _, _, report in rows)
    csv_text = subsets_csv(rows)
    lines = csv_text.strip().splitlines()
    assert lines[0] == "subset,precision,recall,f1"
    assert len(lines) == 4
    assert lines[1].startswith("All,")


def test_threshold_grid_shape():
    assert THRESHOLD_GRID[0] == 0.05
    assert THRESHOLD_GRID[-1] == 0.95
    assert len(THRESHOLD_GRID) == 19
    steps = np.diff(THRESHOLD_GRID)
    np.testing.assert_allclose(steps, 0.05, atol=1e-12)

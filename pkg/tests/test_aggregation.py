import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsman import aggregation
from rsman.aggregation import (
    AttentionMap,
    attention_scores,
    attention_scores_backward,
    attention_weight_matrix,
    attention_weights,
    avg_pool,
    avg_pool_backward,
    init_attention_params,
    init_prototypes,
    lse_pool,
    lse_pool_backward,
    max_pool,
    max_pool_backward,
    relation_specific_rep,
    relation_specific_reps,
    similarity,
)
from rsman.numerics import Param, grad_check


def random_mentions(rng, q=None, d=4):
    q = q or rng.integers(1, 5)
    return rng.normal(size=(q, d))


# ----------------------------------------------------------------- poolers

def test_poolers_single_mention_identity(rng):
    v = rng.normal(size=6)
    for pool in (avg_pool, max_pool, lse_pool):
        np.testing.assert_array_equal(pool([v]), v)


def test_avg_pool_mean():
    out = avg_pool([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    np.testing.assert_array_equal(out, [0.5, 0.5])


def test_avg_pool_identical_vectors(rng):
    v = rng.normal(size=3)
    np.testing.assert_allclose(avg_pool([v, v, v]), v, atol=1e-15)


def test_max_pool_elementwise():
    out = max_pool([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    np.testing.assert_array_equal(out, [1.0, 1.0])


def test_lse_pool_closed_form(rng):
    v = rng.normal(size=4)
    out = lse_pool([v, v])
    np.testing.assert_allclose(out, v + math.log(2), atol=1e-13)


def test_poolers_reject_empty():
    for pool in (avg_pool, max_pool, lse_pool):
        with pytest.raises(ValueError):
            pool(np.zeros((0, 3)))


def test_avg_pool_backward_splits_equally():
    grads = avg_pool_backward(np.array([3.0, 6.0]), 3)
    np.testing.assert_array_equal(grads, np.tile([1.0, 2.0], (3, 1)))


def test_max_pool_backward_first_argmax_on_ties():
    M = np.array([[1.0, 5.0], [1.0, 2.0]])
    grads = max_pool_backward(np.array([1.0, 1.0]), M)
    np.testing.assert_array_equal(grads, [[1.0, 1.0], [0.0, 0.0]])


@pytest.mark.parametrize("pool_name", ["avg", "max", "lse"])
def test_pool_backwards_match_central_differences(pool_name, rng):
    M = random_mentions(rng, q=3, d=4)
    u = rng.normal(size=4)
    pool = getattr(aggregation, f"{pool_name}_pool")
    out = pool(M)
    if pool_name == "avg":
        grads = avg_pool_backward(u, 3)
    elif pool_name == "max":
        grads = max_pool_backward(u, M)
    else:
        grads = lse_pool_backward(u, M, out)
    h = 1e-6
    for i in range(M.size):
        Mp, Mm = M.copy(), M.copy()
        Mp.flat[i] += h
        Mm.flat[i] -= h
        num = (float(u @ pool(Mp)) - float(u @ pool(Mm))) / (2 * h)
        assert abs(num - grads.flat[i]) < 1e-7


# -------------------------------------------------------------- similarity

def test_similarity_zero_prototype(rng):
    params = init_attention_params(3, 3, rng)
    assert similarity(np.zeros(3), rng.normal(size=3), params, mode="dot") == 0.0


def test_similarity_identity_projection():
    params = init_attention_params(2, 2, np.random.default_rng(0))
    params.proj_W.value[...] = np.eye(2)
    params.proj_b.value[...] = 0.0
    p = m = np.array([1.0, 0.0])
    assert similarity(p, m, params, mode="dot") == 1.0


def test_similarity_unknown_mode(rng):
    params = init_attention_params(2, 2, rng)
    with pytest.raises(ValueError):
        similarity(np.zeros(2), np.zeros(2), params, mode="cosine")


def test_mlp_similarity_matches_reference(rng):
    # independent recomputation: score = w2 . tanh(W1 [p; m] + b1) + b2
    params = init_attention_params(3, 4, rng, mlp_hidden=5)
    p = rng.normal(size=4)
    m = rng.normal(size=3)
    got = similarity(p, m, params, mode="mlp")
    cat = np.concatenate([p, m])
    ref = float(
        params.mlp_w2.value @ np.tanh(params.mlp_W1.value @ cat + params.mlp_b1.value)
        + params.mlp_b2.value[0]
    )
    assert abs(got - ref) < 1e-12


@pytest.mark.parametrize("mode", ["dot", "mlp"])
def test_attention_gradients_full_check(mode, rng):
    """Gradient of a scalar loss through scores wrt every attention input."""
    R, Q, d_m, d_p = 3, 4, 5, 4
    params = init_attention_params(d_m, d_p, rng, mlp_hidden=3 if mode == "mlp" else None)
    prototypes = init_prototypes(R, d_p, rng)
    M_param = Param(rng.normal(size=(Q, d_m)))
    U = rng.normal(size=(R, Q))  # fixed projection of scores to a scalar

    check_params = {"prototypes": prototypes, "proj_W": params.proj_W, "proj_b": params.proj_b,
                    "mentions": M_param}
    if mode == "mlp":
        check_params.update(
            mlp_W1=params.mlp_W1, mlp_b1=params.mlp_b1, mlp_w2=params.mlp_w2, mlp_b2=params.mlp_b2
        )

    def f():
        for prm in check_params.values():
            prm.zero_grad()
        S, cache = attention_scores(prototypes.value, M_param.value, params, mode=mode)
        dM = attention_scores_backward(U, prototypes, M_param.value, params, cache, mode=mode)
        M_param.grad += dM
        return float((U * S).sum())

    report = grad_check(f, check_params, step=1e-5, tolerance=1e-6)
    assert report.passed, report.summary()


# --------------------------------------------------------- weights and reps

def test_attention_weights_single_mention_is_exactly_one():
    out = attention_weights(np.array([2.7]))
    assert out[0] == 1.0


def test_attention_weights_uniform_for_equal_scores():
    np.testing.assert_allclose(attention_weights(np.array([1.1] * 4)), [0.25] * 4, atol=1e-15)


def test_attention_weights_known_softmax():
    np.testing.assert_allclose(
        attention_weights(np.array([0.0, math.log(3)])), [0.25, 0.75], atol=1e-15
    )


def test_relation_specific_rep_degenerate_single_mention(rng):
    m = rng.normal(size=5)
    out = relation_specific_rep(np.array([1.0]), [m])
    np.testing.assert_array_equal(out, m)


def test_relation_specific_rep_weighted_sum():
    out = relation_specific_rep(
        np.array([0.25, 0.75]), [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    )
    np.testing.assert_array_equal(out, [0.25, 0.75])


def test_relation_specific_rep_identical_mentions_collapse(rng):
    v = rng.normal(size=3)
    w = np.array([0.2, 0.5, 0.3])
    np.testing.assert_allclose(relation_specific_rep(w, [v, v, v]), v, atol=1e-15)
    np.testing.assert_allclose(relation_specific_rep(w, [v, v, v]), avg_pool([v, v, v]), atol=1e-15)


def test_relation_specific_rep_length_mismatch():
    with pytest.raises(ValueError):
        relation_specific_rep(np.array([1.0]), [np.zeros(2), np.zeros(2)])


# ------------------------------------------------------------- properties

scores_strategy = st.lists(
    st.floats(min_value=-30, max_value=30, allow_nan=False), min_size=1, max_size=6
)


@settings(max_examples=200)
@given(scores_strategy)
def test_property_weights_normalized(scores):
    w = attention_weights(np.array(scores))
    assert np.all(w >= 0) and np.all(w <= 1)
    assert abs(w.sum() - 1.0) <= 1e-12


@settings(max_examples=200)
@given(scores_strategy, st.floats(min_value=-20, max_value=20, allow_nan=False))
def test_property_shift_invariance(scores, c):
    base = attention_weights(np.array(scores))
    shifted = attention_weights(np.array(scores) + c)
    np.testing.assert_allclose(shifted, base, atol=1e-12)


@settings(max_examples=100)
@given(st.integers(1, 5), st.integers(2, 4), st.integers(0, 10_000))
def test_property_permutation_equivariance(q, d, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(q, d))
    scores = rng.normal(size=q)
    perm = rng.permutation(q)
    w = attention_weights(scores)
    w_perm = attention_weights(scores[perm])
    np.testing.assert_allclose(w_perm, w[perm], atol=1e-12)
    e = relation_specific_rep(w, M)
    e_perm = relation_specific_rep(w_perm, M[perm])
    np.testing.assert_allclose(e_perm, e, atol=1e-12)
    for pool in (avg_pool, max_pool, lse_pool):
        np.testing.assert_allclose(pool(M[perm]), pool(M), atol=1e-12)


@settings(max_examples=100)
@given(st.integers(1, 5), st.integers(2, 4), st.integers(0, 10_000))
def test_property_convex_hull_containment(q, d, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(q, d))
    w = attention_weights(rng.normal(size=q))
    e = relation_specific_rep(w, M)
    assert np.all(e >= M.min(axis=0) - 1e-12)
    assert np.all(e <= M.max(axis=0) + 1e-12)


def test_attention_weight_matrix_rows(rng):
    S = rng.normal(size=(4, 3))
    A = attention_weight_matrix(S)
    np.testing.assert_allclose(A.sum(axis=1), np.ones(4), atol=1e-12)
    reps = relation_specific_reps(A, rng.normal(size=(3, 5)))
    assert reps.shape == (4, 5)


# ----------------------------------------------------------- attention map

def test_attention_map_csv_layout():
    attn = AttentionMap(
        relation_names=("r1", "r2"),
        mention_surfaces=("Ada Lovelace", "She"),
        scores=np.zeros((2, 2)),
        weights=np.array([[0.25, 0.75], [1.0, 0.0]]),
    )
    rows = list(csv.reader(io.StringIO(attn.to_csv())))
    assert rows[0] == ["relation", "Ada Lovelace", "She"]
    assert rows[1][0] == "r1"
    for row in rows[1:]:
        assert abs(sum(float(x) for x in row[1:]) - 1.0) < 1e-9

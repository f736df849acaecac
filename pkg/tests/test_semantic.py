import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from rtteval.semantic import (
    IdfTable,
    SentenceEmbedding,
    TokenEmbeddings,
    build_idf_table,
    cosine_similarity,
    greedy_match_fscore,
)


def _sent(vec):
    return SentenceEmbedding(np.array(vec, dtype=float))


# --- cosine -----------------------------------------------------------------

def test_cosine_self_similarity():
    assert cosine_similarity(_sent([3.0, 4.0]), _sent([3.0, 4.0])) == pytest.approx(1.0)


def test_cosine_orthogonal():
    assert cosine_similarity(_sent([1, 0]), _sent([0, 1])) == pytest.approx(0.0)


def test_cosine_closed_form():
    assert cosine_similarity(_sent([1, 0]), _sent([1, 1])) == pytest.approx(
        1 / math.sqrt(2), abs=1e-9
    )


def test_cosine_dimension_mismatch():
    with pytest.raises(ValueError):
        cosine_similarity(_sent([1, 0]), _sent([1, 0, 0]))


def test_cosine_zero_norm():
    with pytest.raises(ValueError):
        cosine_similarity(_sent([0.0, 0.0]), _sent([1, 0]))


@given(
    st.lists(st.integers(-50, 50).map(lambda v: v / 10), min_size=3, max_size=3),
    st.lists(st.integers(-50, 50).map(lambda v: v / 10), min_size=3, max_size=3),
    st.floats(0.1, 50),
)
def test_cosine_symmetric_and_scale_invariant(a, b, scale):
    if all(x == 0 for x in a) or all(x == 0 for x in b):
        return
    ab = cosine_similarity(_sent(a), _sent(b))
    ba = cosine_similarity(_sent(b), _sent(a))
    scaled = cosine_similarity(_sent([scale * x for x in a]), _sent(b))
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ab == pytest.approx(scaled, abs=1e-9)
    assert -1.0 <= ab <= 1.0


# --- idf --------------------------------------------------------------------

def test_idf_ubiquitous_piece_weighs_zero():
    table = build_idf_table([["t", "a"], ["t", "b"], ["t", "c"], ["t", "d"]])
    assert table.weight("t") == pytest.approx(0.0, abs=0.0)


def test_idf_rare_piece():
    table = build_idf_table([["t"], ["a"], ["b"], ["c"]])
    assert table.weight("t") == pytest.approx(1.3862944, abs=1e-6)


def test_idf_half_frequency():
    table = build_idf_table([["t"], ["t"], ["b"], ["c"]])
    assert table.weight("t") == pytest.approx(0.6931472, abs=1e-6)


def test_idf_unseen_defaults_to_log_corpus_size():
    table = build_idf_table([["a"], ["b"], ["c"], ["d"]])
    assert table.default_weight == pytest.approx(math.log(4))
    assert table.weight("zzz") == pytest.approx(math.log(4))


def test_idf_counts_documents_not_terms():
    once = build_idf_table([["t", "a"], ["b"]])
    duplicated = build_idf_table([["t", "t", "t", "a"], ["b"]])
    assert once.weight("t") == duplicated.weight("t")


def test_idf_empty_corpus_errors():
    with pytest.raises(ValueError):
        build_idf_table([])


@given(
    st.lists(
        st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=6),
        min_size=1,
        max_size=8,
    )
)
def test_idf_invariants(sentences):
    table = build_idf_table(sentences)
    log_l = math.log(len(sentences))
    for piece, weight in table.weights.items():
        assert -1e-12 <= weight <= log_l + 1e-12
        if all(piece in s for s in sentences):
            assert weight == pytest.approx(0.0, abs=1e-15)


# --- greedy match F ---------------------------------------------------------

def _tok(pieces, matrix):
    return TokenEmbeddings(tuple(pieces), np.array(matrix, dtype=float))


def test_token_embeddings_shape_mismatch():
    with pytest.raises(ValueError):
        _tok(["a", "b"], [[1.0, 0.0]])


def test_greedy_identity_is_one():
    emb = _tok(["a", "b"], [[1.0, 0.0], [0.0, 1.0]])
    idf = IdfTable({"a": 1.0, "b": 0.5}, 4, math.log(4))
    precision, recall, f_score = greedy_match_fscore(emb, emb, idf)
    assert (precision, recall, f_score) == (
        pytest.approx(1.0),
        pytest.approx(1.0),
        pytest.approx(1.0),
    )


def test_greedy_orthogonal_single_pieces_is_zero():
    x = _tok(["a"], [[1.0, 0.0]])
    xhat = _tok(["b"], [[0.0, 1.0]])
    idf = IdfTable({"a": 1.0, "b": 1.0}, 2, math.log(2))
    precision, recall, f_score = greedy_match_fscore(x, xhat, idf)
    assert f_score == 0.0


def test_greedy_two_by_two_derived_case():
    x = _tok(["a", "b"], [[1.0, 0.0], [0.0, 1.0]])
    xhat = _tok(["c", "d"], [[1.0, 0.0], [1.0, 1.0]])
    idf = IdfTable({"a": 1.0, "b": 1.0}, 2, 1.0)
    precision, recall, f_score = greedy_match_fscore(x, xhat, idf)
    expected = (1.0 + 1 / math.sqrt(2)) / 2  # frozen from the enumeration oracle
    assert recall == pytest.approx(expected, abs=1e-9)
    assert precision == pytest.approx(expected, abs=1e-9)
    assert f_score == pytest.approx(expected, abs=1e-9)


def test_greedy_role_swap_swaps_p_and_r():
    x = _tok(["a", "b"], [[1.0, 0.2], [0.1, 1.0]])
    xhat = _tok(["c"], [[0.7, 0.7]])
    idf = IdfTable({"a": 0.9, "b": 0.4, "c": 1.1}, 4, math.log(4))
    p1, r1, f1 = greedy_match_fscore(x, xhat, idf)
    p2, r2, f2 = greedy_match_fscore(xhat, x, idf)
    assert p1 == pytest.approx(r2, abs=1e-12)
    assert r1 == pytest.approx(p2, abs=1e-12)
    assert f1 == pytest.approx(f2, abs=1e-12)


def test_greedy_dimension_mismatch():
    with pytest.raises(ValueError):
        greedy_match_fscore(
            _tok(["a"], [[1.0, 0.0]]),
            _tok(["b"], [[1.0, 0.0, 0.0]]),
            IdfTable({}, 1, 1.0),
        )


def test_greedy_degenerate_idf_errors():
    x = _tok(["a"], [[1.0, 0.0]])
    with pytest.raises(ValueError, match="degenerate idf"):
        greedy_match_fscore(x, x, IdfTable({"a": 0.0}, 1, 0.0))


_DIM = st.shared(st.integers(2, 4), key="dim")
_VEC = st.lists(st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3), min_size=2, max_size=4)


def _emb_strategy(dim):
    vec = st.lists(
        st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3), min_size=dim, max_size=dim
    )
    return st.lists(vec, min_size=1, max_size=5)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_greedy_matches_bruteforce(data):
    dim = data.draw(st.integers(2, 4))
    x_vecs = data.draw(_emb_strategy(dim))
    xhat_vecs = data.draw(_emb_strategy(dim))
    pieces = "abcdefgh"
    x_pieces = [pieces[i % len(pieces)] for i in range(len(x_vecs))]
    xhat_pieces = [pieces[(i + 3) % len(pieces)] for i in range(len(xhat_vecs))]
    weights = {p: 0.25 + 0.1 * i for i, p in enumerate(pieces)}
    idf = IdfTable(weights, 8, 0.5)

    expected = oracles.greedy_fscore_bruteforce(
        x_pieces, x_vecs, xhat_pieces, xhat_vecs, weights, 0.5
    )
    got = greedy_match_fscore(_tok(x_pieces, x_vecs), _tok(xhat_pieces, xhat_vecs), idf)
    for got_value, expected_value in zip(got, expected):
        assert got_value == pytest.approx(expected_value, abs=1e-9)


def test_equal_idf_reduces_to_unweighted_mean():
    x_vecs = [[1.0, 0.0], [0.4, 0.9], [0.2, 0.3]]
    xhat_vecs = [[0.9, 0.1], [0.1, 1.0]]
    x = _tok(["a", "b", "c"], x_vecs)
    xhat = _tok(["d", "e"], xhat_vecs)
    idf = IdfTable({p: 1.0 for p in "abcde"}, 5, 1.0)
    precision, recall, _ = greedy_match_fscore(x, xhat, idf)

    best_x = [
        max(oracles.cosine_bruteforce(xv, yv) for yv in xhat_vecs) for xv in x_vecs
    ]
    best_xhat = [
        max(oracles.cosine_bruteforce(yv, xv) for xv in x_vecs) for yv in xhat_vecs
    ]
    assert recall == pytest.approx(sum(best_x) / len(best_x), abs=1e-9)
    assert precision == pytest.approx(sum(best_xhat) / len(best_xhat), abs=1e-9)


def test_f_between_min_and_max_of_p_and_r():
    x = _tok(["a", "b"], [[1.0, 0.1], [0.3, 1.0]])
    xhat = _tok(["c", "d", "e"], [[0.9, 0.2], [0.2, 0.8], [0.5, 0.5]])
    idf = IdfTable({"a": 1.4, "b": 0.2, "c": 0.9, "d": 0.3, "e": 1.0}, 4, 0.7)
    precision, recall, f_score = greedy_match_fscore(x, xhat, idf)
    assert min(precision, recall) - 1e-12 <= f_score <= max(precision, recall) + 1e-12

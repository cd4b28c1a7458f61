import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokensort.core import (
    Graph,
    SortedSequence,
    TokenSet,
    edge_token,
    read_graphs,
    read_token_sets,
    swap_endpoints,
    tokenize_edges,
    write_graphs,
    write_token_sets,
)


def test_token_set_multiset_equality():
    a = TokenSet(np.array([[1.0, 2.0], [3.0, 4.0]]))
    b = TokenSet(np.array([[3.0, 4.0], [1.0, 2.0]]))
    assert a == b
    c = TokenSet(np.array([[1.0, 2.0], [3.0, 4.1]]))
    assert a != c


def test_token_set_duplicates_reported():
    ts = TokenSet(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]))
    groups = ts.duplicate_groups()
    assert [0, 2] in [sorted(g) for g in groups]


def test_empty_set_rejected():
    with pytest.raises(ValueError):
        TokenSet(np.empty((0, 2)))


def test_sorted_sequence_key_monotonicity_enforced():
    with pytest.raises(ValueError):
        SortedSequence(np.zeros((2, 2)), keys=np.array([1.0, 0.0]))


def test_graph_canonical_edge_orientation():
    feats = np.array([[1.0, 0.0], [0.0, 0.0]])
    g = Graph(feats, ((0, 1),))
    # endpoint with lexicographically smaller features comes first
    u, v = g.edges[0]
    assert list(feats[u]) <= list(feats[v])


def test_graph_duplicate_edges_dropped():
    feats = np.array([[0.0, 0.0], [1.0, 0.0]])
    g = Graph(feats, ((0, 1), (1, 0), (0, 1)))
    assert g.n_edges == 1


def test_graph_bad_endpoint():
    with pytest.raises(ValueError):
        Graph(np.zeros((2, 2)), ((0, 5),))


def test_edge_token_concatenation():
    feats = np.array([[0.0, 1.0], [2.0, 3.0]])
    g = Graph(feats, ((0, 1),))
    u, v = g.edges[0]
    tok = edge_token(g, u, v)
    assert tok.shape == (4,)
    assert np.array_equal(tok[:2], feats[u]) and np.array_equal(tok[2:], feats[v])


def test_tokenize_edges_empty_graph():
    g = Graph(np.zeros((3, 2)), ())
    with pytest.raises(ValueError):
        tokenize_edges(g)


def test_swap_endpoints_involution():
    rows = np.arange(12, dtype=float).reshape(3, 4)
    seq = SortedSequence(rows)
    once = swap_endpoints(seq)
    assert np.array_equal(once.rows[:, :2], rows[:, 2:])
    assert np.array_equal(swap_endpoints(once).rows, rows)


def test_swap_endpoints_odd_dim():
    with pytest.raises(ValueError):
        swap_endpoints(SortedSequence(np.zeros((2, 3))))


def test_token_set_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    sets = [TokenSet(rng.normal(size=(m, 3))) for m in (1, 4, 7)]
    p = tmp_path / "sets.jsonl"
    write_token_sets(p, sets)
    back = read_token_sets(p)
    assert len(back) == 3
    for a, b in zip(sets, back):
        assert np.array_equal(a.values, b.values)  # exact, not approx


def test_malformed_line_reports_lineno(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"tokens": [[1.0, 2.0]]}\nnot json\n')
    with pytest.raises(ValueError, match="line 2"):
        read_token_sets(p)


def test_ragged_dimensions_rejected(tmp_path):
    p = tmp_path / "ragged.jsonl"
    p.write_text(json.dumps({"tokens": [[1.0, 2.0], [3.0]]}) + "\n")
    with pytest.raises(ValueError):
        read_token_sets(p)


def test_graph_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    g = Graph(rng.uniform(size=(5, 2)), ((0, 1), (1, 2), (3, 4)))
    p = tmp_path / "g.jsonl"
    write_graphs(p, [g])
    (back,) = read_graphs(p)
    assert np.array_equal(back.node_features, g.node_features)
    assert back.edges == g.edges


@given(st.integers(1, 8), st.integers(1, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_roundtrip_exact_fuzz(tmp_path_factory, m, n, seed):
    rng = np.random.default_rng(seed)
    ts = TokenSet(rng.normal(scale=100.0, size=(m, n)))
    p = tmp_path_factory.mktemp("rt") / "x.jsonl"
    write_token_sets(p, [ts])
    (back,) = read_token_sets(p)
    assert np.array_equal(back.values, ts.values)

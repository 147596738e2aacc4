import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import barbell
from ppiaudit.graph_io import WeightedGraph
from ppiaudit.mcl import flow_matrix, run_mcl, write_partition


def dense_mcl(graph, inflation=2.0, max_iter=100, eps=1e-5, tol=1e-6):
    """Dense reference: same self-loop, prune and extraction rules, written independently."""
    n = len(graph)
    a = np.zeros((n, n))
    for u, v, w in graph.edges():
        a[graph.index[u], graph.index[v]] = a[graph.index[v], graph.index[u]] = w
    np.fill_diagonal(a, np.maximum(a.max(axis=1), 1e-9))
    m = a / a.sum(axis=0)
    for _ in range(max_iter):
        x = (m @ m) ** inflation
        x = x / x.sum(axis=0)
        x[x < eps] = 0.0
        x = x / x.sum(axis=0)
        done = np.abs(x - m).max() < tol
        m = x
        if done:
            break
    h = nx.Graph()
    h.add_nodes_from(range(n))
    for i in np.flatnonzero(np.diag(m) > 0):
        for j in np.flatnonzero(m[i] > 0):
            h.add_edge(int(i), int(j))
    comps = [frozenset(graph.nodes[i] for i in c) for c in nx.connected_components(h)]
    return sorted((c for c in comps if len(c) >= 2), key=sorted)


def test_two_disconnected_triangles(backend):
    g = WeightedGraph({("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1,
                       ("d", "e"): 1, ("e", "f"): 1, ("d", "f"): 1})
    part = run_mcl(g)
    assert part.modules == [frozenset("abc"), frozenset("def")]
    assert part.converged


def test_single_edge():
    part = run_mcl(WeightedGraph({("a", "b"): 1.0}))
    assert part.modules == [frozenset("ab")]


def test_barbell_two_modules_matches_dense_reference(backend):
    g = barbell(0.05)
    part = run_mcl(g, inflation=2.0)
    assert len(part) == 2
    assert part.modules == dense_mcl(g)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        run_mcl(barbell(), inflation=1.0)
    with pytest.raises(ValueError):
        run_mcl(WeightedGraph({}))


def test_non_convergence_is_flagged(caplog):
    part = run_mcl(barbell(0.5), inflation=1.4, max_iter=1)
    assert not part.converged and part.iterations == 1
    assert "did not converge" in caplog.text


def test_flow_matrix_self_loops():
    m = flow_matrix(WeightedGraph({("a", "b"): 0.5, ("b", "c"): 1.0})).toarray()
    # column a: loop 0.5, edge 0.5
    np.testing.assert_allclose(m[:, 0], [0.5, 0.5, 0.0])
    # column b: loop = max incident 1.0; entries 0.5, 1.0, 1.0
    np.testing.assert_allclose(m[:, 1], [0.2, 0.4, 0.4])


@pytest.mark.parametrize("bridge", [0.05, 0.2, 0.5, 1.0])
def test_inflation_monotone_on_barbells(bridge):
    g = barbell(bridge)
    assert len(run_mcl(g, inflation=5.0)) >= len(run_mcl(g, inflation=1.4))


@st.composite
def graphs(draw):
    n = draw(st.integers(2, 12))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
    ws = draw(st.lists(st.sampled_from([0.1, 0.25, 0.5, 1.0]), min_size=len(edges), max_size=len(edges)))
    return WeightedGraph({(f"v{i:02d}", f"v{j:02d}"): w for (i, j), w in zip(edges, ws)})


@settings(max_examples=60, deadline=None)
@given(graphs(), st.sampled_from([1.4, 2.0, 3.0]))
def test_partition_properties(g, inflation):
    part = run_mcl(g, inflation=inflation)
    seen = set()
    for m in part.modules:
        assert len(m) >= 2
        assert not (m & seen)
        seen |= m
    assert not (seen & part.unassigned)
    assert seen | part.unassigned == set(g.nodes)
    assert part.max_stochastic_error < 1e-9
    again = run_mcl(g, inflation=inflation)
    assert again.modules == part.modules


@settings(max_examples=40, deadline=None)
@given(graphs())
def test_matches_dense_reference(g):
    part = run_mcl(g)
    if part.converged:
        assert part.modules == dense_mcl(g)


def test_write_partition(tmp_path):
    p = tmp_path / "p.csv"
    write_partition(p, [frozenset("ba"), frozenset("c d".split())], prefix="K")
    assert p.read_text().splitlines() == ["module_id,member", "K0,a", "K0,b", "K1,c", "K1,d"]

import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import five_node_annotations, five_node_embeddings, five_node_graph
from ppiaudit.annotations import AnnotationStore
from ppiaudit.graph_io import WeightedGraph
from ppiaudit.nucleus import ProteinProfile, bh_score, compute_profiles, minmax, select_nuclei

S = 1 / math.sqrt(2)


def test_profiles_five_node_hand_values(backend):
    prof = compute_profiles(five_node_graph(), five_node_annotations(), five_node_embeddings())
    # weighted degree a=1.8 b=1.6 c=1.8 d=0.6 e=0.2, scaled over [0.2, 1.8]
    expected = {
        "a": dict(deg_hat=1.0, cc_hat=1.0, kcore_hat=1.0, snc=(1 + S) / 2, rich_hat=1.0, unc_hat=0.8),
        "b": dict(deg_hat=0.875, cc_hat=1.0, kcore_hat=1.0, snc=(1 + S) / 2, rich_hat=0.5, unc_hat=0.9),
        "c": dict(deg_hat=1.0, cc_hat=1 / 3, kcore_hat=1.0, snc=S, rich_hat=1.0, unc_hat=0.8),
        "d": dict(deg_hat=0.25, cc_hat=0.0, kcore_hat=0.0, snc=S / 2, rich_hat=0.5, unc_hat=0.9),
        "e": dict(deg_hat=0.0, cc_hat=0.0, kcore_hat=0.0, snc=0.0, rich_hat=0.0, unc_hat=1.0),
    }
    for node, fields in expected.items():
        p = prof[node]
        for k, v in fields.items():
            assert getattr(p, k) == pytest.approx(v), (node, k)
        bh = (0.25 * fields["deg_hat"] + 0.15 * fields["cc_hat"] + 0.20 * fields["kcore_hat"]
              + 0.20 * fields["snc"] + 0.20 * fields["rich_hat"] - 0.05 * fields["unc_hat"])
        assert p.bh == pytest.approx(bh)


def test_node_without_neighbours_in_embedding_space_has_zero_snc():
    g = WeightedGraph({("a", "b"): 1.0})
    emb = five_node_embeddings()
    prof = compute_profiles(g, AnnotationStore.from_mapping({}), emb)
    # b=(1,0) and a=(1,0) are aligned, so snc is 1 for both
    assert prof["a"].snc == pytest.approx(1.0)
    ann = AnnotationStore.from_mapping({})
    assert prof["b"].rich_hat == 0.0 and prof["b"].unc_hat == 1.0
    g2 = WeightedGraph({("a", "e"): 1.0})
    p2 = compute_profiles(g2, ann, emb)
    assert p2["e"].snc == 0.0


def test_max_degree_node_scaled_to_one():
    prof = compute_profiles(five_node_graph(), five_node_annotations(), five_node_embeddings())
    assert max(p.deg_hat for p in prof.values()) == 1.0


def _profile(**kw):
    base = dict(deg_hat=0.0, cc_hat=0.0, kcore_hat=0.0, snc=0.0, rich_hat=0.0, unc_hat=0.0)
    return ProteinProfile(**{**base, **kw})


def test_bh_examples():
    assert bh_score(_profile(deg_hat=1, cc_hat=1, kcore_hat=1, snc=1, rich_hat=1)) == pytest.approx(1.0)
    assert bh_score(_profile(unc_hat=1)) == pytest.approx(-0.05)
    assert bh_score(_profile(deg_hat=1)) == pytest.approx(0.25)


unit = st.floats(0, 1)


@settings(max_examples=200, deadline=None)
@given(st.lists(unit, min_size=6, max_size=6), st.sampled_from(range(6)), unit)
def test_bh_monotone(vals, idx, bump):
    names = ["deg_hat", "cc_hat", "kcore_hat", "snc", "rich_hat", "unc_hat"]
    p = _profile(**dict(zip(names, vals)))
    q = _profile(**{**dict(zip(names, vals)), names[idx]: min(1.0, vals[idx] + bump)})
    if names[idx] == "unc_hat":
        assert bh_score(q) <= bh_score(p) + 1e-12
    else:
        assert bh_score(q) >= bh_score(p) - 1e-12


def test_minmax_degenerate():
    assert minmax(np.array([2.0, 2.0])).tolist() == [1.0, 1.0]
    assert minmax(np.array([0.0, 0.0])).tolist() == [0.0, 0.0]


def test_adjacent_nodes_suppressed():
    g = WeightedGraph({("a", "b"): 1.0})
    assert select_nuclei({"a": 0.2, "b": 0.9}, g, min_hops=2, k=2) == ["b"]


def test_equal_scores_far_apart_tie_break():
    g = WeightedGraph({("a", "x"): 1.0, ("x", "y"): 1.0, ("y", "b"): 1.0})
    assert select_nuclei({"a": 0.5, "b": 0.5, "x": 0.1, "y": 0.1}, g, k=2) == ["a", "b"]


def test_invalid_arguments():
    g = five_node_graph()
    with pytest.raises(ValueError):
        select_nuclei({"a": 1.0}, g, min_hops=0)
    with pytest.raises(ValueError):
        select_nuclei({"a": 1.0}, g, k=0)


def greedy_oracle(scores, nxg, min_hops, k):
    """Reference selection from all-pairs BFS distances."""
    dist = dict(nx.all_pairs_shortest_path_length(nxg))
    chosen = []
    for n in sorted(scores, key=lambda n: (-scores[n], n)):
        if len(chosen) == k:
            break
        if all(dist[n].get(c, math.inf) >= min_hops for c in chosen):
            chosen.append(n)
    return chosen


def test_two_components_each_get_a_nucleus():
    # two 5-node paths; the top scores all sit in the first component
    edges = {(f"a{i}", f"a{i+1}"): 1.0 for i in range(4)}
    edges.update({(f"b{i}", f"b{i+1}"): 1.0 for i in range(4)})
    g = WeightedGraph(edges)
    scores = {f"a{i}": 1.0 - 0.01 * i for i in range(5)} | {f"b{i}": 0.5 - 0.01 * i for i in range(5)}
    got = select_nuclei(scores, g, min_hops=3, k=4)
    nxg = nx.Graph(list(edges))
    assert got == greedy_oracle(scores, nxg, 3, 4)
    assert any(n.startswith("a") for n in got) and any(n.startswith("b") for n in got)


@st.composite
def scored_graphs(draw):
    n = draw(st.integers(2, 12))
    nodes = [f"n{i:02d}" for i in range(n)]
    pairs = [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
    scores = {v: draw(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0])) for v in nodes}
    return chosen, scores


@settings(max_examples=150, deadline=None)
@given(scored_graphs(), st.integers(1, 4), st.integers(1, 6))
def test_select_matches_bfs_oracle(data, min_hops, k):
    edges, scores = data
    g = WeightedGraph({e: 1.0 for e in edges})
    scores = {v: s for v, s in scores.items() if v in g.index}
    got = select_nuclei(scores, g, min_hops=min_hops, k=k)
    nxg = nx.Graph(edges)
    assert got == greedy_oracle(scores, nxg, min_hops, k)
    dist = dict(nx.all_pairs_shortest_path_length(nxg))
    for i, a in enumerate(got):
        for b in got[i + 1:]:
            assert dist[a].get(b, math.inf) >= min_hops
    # input order does not matter
    assert select_nuclei(dict(reversed(list(scores.items()))), g, min_hops=min_hops, k=k) == got

import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppiaudit.annotations import AnnotationStore
from ppiaudit.embeddings import EmbeddingMatrix, cosine
from ppiaudit.graph_io import WeightedGraph
from ppiaudit.overlap import ModuleSet, module_tfidf
from ppiaudit.supplementation import Addition, SupplementCaps, naive_expand, supplement


@pytest.mark.parametrize("size,budget", [(20, 2), (10, 1), (6, 0), (7, 1), (14, 2), (100, 2)])
def test_budget(size, budget):
    assert SupplementCaps().budget(size) == budget


def test_gate_rejects_all_below():
    caps = SupplementCaps()
    assert caps.gate(0.10, 0.20, 0.20) is None
    assert caps.gate(0.12, 0.0, 0.0) == "topology"
    assert caps.gate(0.0, 0.28, 0.0) == "semantic"
    assert caps.gate(0.0, 0.0, 0.25) == "go"


def star_case(sem_vec, weight_in=1.0, weight_out=9.0):
    """Module of ten nodes m0..m9 in a ring; x links to m0 and to an outside node o."""
    ring = [f"m{i}" for i in range(10)]
    edges = {(ring[i], ring[(i + 1) % 10]): 1.0 for i in range(10)}
    edges[("m0", "x")] = weight_in
    edges[("o", "x")] = weight_out
    g = WeightedGraph(edges)
    vecs = {n: np.array([1.0, 0.0]) for n in g.nodes}
    vecs["x"] = np.asarray(sem_vec, dtype=float)
    emb = EmbeddingMatrix(g.nodes, np.array([vecs[n] for n in g.nodes]))
    return g, emb, ring


def test_node_below_every_gate_is_rejected():
    # topo 1/11 < 0.12, semantic 0 (orthogonal), no annotations
    g, emb, ring = star_case([0.0, 1.0], 1.0, 10.0)
    ann = AnnotationStore.from_mapping({})
    ms = ModuleSet([frozenset(ring)])
    log: list[Addition] = []
    out = supplement(ms, g, emb, ann, module_tfidf(ms.modules, ann), log=log)
    assert out.modules == ms.modules and not log


def test_gated_node_with_enough_gain_is_added():
    # topo 1/2, semantic 1 (aligned) -> gain (0.5 + 1 + 0) / 3 = 0.5
    g, emb, ring = star_case([1.0, 0.0], 1.0, 1.0)
    ann = AnnotationStore.from_mapping({})
    ms = ModuleSet([frozenset(ring)])
    log: list[Addition] = []
    out = supplement(ms, g, emb, ann, module_tfidf(ms.modules, ann), log=log)
    assert out.modules[0] == frozenset(ring) | {"x"}
    assert log[0].gain == pytest.approx(0.5) and log[0].gate == "topology"
    assert out.provenance == ["seed+supplement"]
    # same node under a stricter gain floor stays out
    strict = supplement(ms, g, emb, ann, module_tfidf(ms.modules, ann), SupplementCaps(min_gain=0.51))
    assert strict.modules == ms.modules


def test_naive_expand_reaches_component():
    g = WeightedGraph({("a", "b"): 1, ("b", "c"): 1, ("c", "d"): 1, ("x", "y"): 1})
    out = naive_expand(ModuleSet([frozenset("ab"), frozenset("xy")]), g)
    assert out.modules == [frozenset("abcd"), frozenset("xy")]
    assert out.provenance == ["naive_expand", "naive_expand"]


def supplement_oracle(seed, i, graph, emb, ann, sig, caps):
    """Straight-line reading of the rule, recomputing every channel from scratch."""
    members = set(seed)
    budget = min(caps.max_added, math.floor(caps.max_rel_growth * len(seed) + 1e-9))
    for _ in range(budget):
        cands = []
        bnd = {v for u in members for v in graph.neighbors(u)} - members
        for x in bnd:
            nw = graph.neighbor_weights(x)
            topo = sum(w for y, w in nw.items() if y in members) / sum(nw.values())
            sem = float(np.mean([max(0.0, cosine(emb.vector(x), emb.vector(m))) for m in members]))
            terms = ann.terms(x)
            go = min(1.0, sum(sig.score(t, i) for t in terms) / len(terms)) if terms else 0.0
            if topo >= caps.gate_topo or sem >= caps.gate_sem or go >= caps.gate_go:
                cands.append(((topo + sem + go) / 3, x))
        if not cands:
            break
        best_gain = max(c[0] for c in cands)
        x = min(n for gn, n in cands if gn == best_gain)
        if best_gain < caps.min_gain:
            break
        members.add(x)
    return frozenset(members)


@st.composite
def cases(draw):
    n = draw(st.integers(8, 20))
    nodes = [f"n{i:02d}" for i in range(n)]
    pairs = [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), min_size=n, max_size=3 * n, unique=True))
    ws = draw(st.lists(st.sampled_from([0.25, 0.5, 1.0]), min_size=len(edges), max_size=len(edges)))
    g = WeightedGraph({e: w for e, w in zip(edges, ws)}, nodes=nodes)
    vecs = draw(st.lists(st.sampled_from([(1, 0), (0, 1), (1, 1), (1, 2)]), min_size=n, max_size=n))
    emb = EmbeddingMatrix(g.nodes, np.array(vecs, dtype=float))
    terms = {v: set(draw(st.lists(st.sampled_from("ABC"), max_size=2))) for v in nodes}
    k = draw(st.integers(7, n - 1))
    mods = [frozenset(nodes[:k]), frozenset(nodes[k - 3:])]
    mods = [m for m in mods if len(m) >= 2]
    return g, emb, AnnotationStore.from_mapping(terms), ModuleSet(mods)


@settings(max_examples=80, deadline=None)
@given(cases(), st.sampled_from([0.1, 0.2, 0.38]))
def test_supplement_matches_oracle_and_bounds(case, min_gain):
    g, emb, ann, ms = case
    caps = SupplementCaps(min_gain=min_gain)
    sig = module_tfidf(ms.modules, ann)
    log: list[Addition] = []
    out = supplement(ms, g, emb, ann, sig, caps, log=log)
    for i, (seed, mod) in enumerate(zip(ms.modules, out.modules)):
        assert seed <= mod
        assert len(mod) <= len(seed) + min(2, math.floor(0.15 * len(seed) + 1e-9))
        assert mod == supplement_oracle(seed, i, g, emb, ann, sig, caps)
    for a in log:
        assert a.gain >= min_gain - 1e-12
        assert a.topo >= caps.gate_topo or a.sem >= caps.gate_sem or a.go >= caps.gate_go
    assert supplement(ms, g, emb, ann, sig, caps).modules == out.modules


@settings(max_examples=50, deadline=None)
@given(cases())
def test_naive_expand_is_component_union(case):
    g, _, _, ms = case
    comp = {v: frozenset(c) for c in nx.connected_components(nx.Graph([(u, v) for u, v, _ in g.edges()]))
            for v in c}
    out = naive_expand(ms, g)
    for seed, mod in zip(ms.modules, out.modules):
        assert mod == frozenset().union(*(comp.get(v, frozenset({v})) for v in seed))

"""Candidate module pool from five sources, with composite evidence scores."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .annotations import AnnotationStore
from .embeddings import EmbeddingMatrix
from .graph_io import WeightedGraph
from .nucleus import ProteinProfile

SOURCES = ("mcl", "ego", "expansion", "knn", "union")


@dataclass(frozen=True)
class CandidateWeights:
    cohesion: float = 0.25
    max_bh: float = 0.15
    semantic: float = 0.20
    go: float = 0.15
    size: float = 0.10
    uncertainty: float = 0.10
    fragmentation: float = 0.05


@dataclass(frozen=True)
class CandidateConfig:
    ego_hops: tuple[int, ...] = (1, 2)
    ego_cap: int = 50
    expand_cap: int = 30
    expand_min_gain: float = 0.05
    knn_k: int = 10
    union_jaccard: float = 0.5
    weights: CandidateWeights = field(default_factory=CandidateWeights)


@dataclass
class CandidateModule:
    members: frozenset[str]
    source: str
    composite_score: float = 0.0

    def __len__(self) -> int:
        return len(self.members)


# -- support helpers shared with supplementation ------------------------------


def topology_support(graph: WeightedGraph, x: str, members: Iterable[str]) -> float:
    """Share of x's weighted degree going into ``members``.

    Falls back to neighbour counts when all of x's edges weigh 0.
    """
    nbw = graph.neighbor_weights(x)
    if not nbw:
        return 0.0
    members = members if isinstance(members, (set, frozenset)) else set(members)
    total = sum(nbw.values())
    if total > 0:
        return sum(w for y, w in nbw.items() if y in members and y != x) / total
    return sum(1 for y in nbw if y in members and y != x) / len(nbw)


def semantic_support(emb: EmbeddingMatrix, x: str, members: Iterable[str]) -> float:
    others = [m for m in members if m != x]
    if not others:
        return 0.0
    sims = emb.unit_rows(others) @ emb.unit[emb.index[x]]
    return float(np.maximum(sims, 0.0).mean())


# -- scoring -----------------------------------------------------------------


def size_prior(n: int, peak: int = 5, zero_at: int = 50) -> float:
    if n <= 1 or n >= zero_at:
        return 0.0
    if n <= peak:
        return (n - 1) / (peak - 1)
    return (zero_at - n) / (zero_at - peak)


def largest_component_fraction(graph: WeightedGraph, members: Iterable[str]) -> float:
    members = set(members)
    if not members:
        return 0.0
    seen: set[str] = set()
    best = 0
    for start in sorted(members):
        if start in seen:
            continue
        stack, size = [start], 0
        seen.add(start)
        while stack:
            u = stack.pop()
            size += 1
            for v in graph.neighbors(u):
                if v in members and v not in seen:
                    seen.add(v)
                    stack.append(v)
        best = max(best, size)
    return best / len(members)


def weighted_density(graph: WeightedGraph, members: Sequence[str]) -> float:
    n = len(members)
    if n < 2:
        return 0.0
    mset = set(members)
    internal = sum(w for u in members for v, w in graph.neighbor_weights(u).items() if v in mset) / 2
    return internal / (n * (n - 1) / 2)


def mean_pairwise_similarity(emb: EmbeddingMatrix, members: Sequence[str]) -> float:
    n = len(members)
    if n < 2:
        return 0.0
    u = emb.unit_rows(members)
    s = np.maximum(u @ u.T, 0.0)
    iu = np.triu_indices(n, 1)
    return float(s[iu].mean())


def go_coherence(ann: AnnotationStore, members: Sequence[str]) -> float:
    counts: Counter = Counter()
    for m in members:
        counts.update(ann.terms(m))
    if not counts:
        return 0.0
    top = min(counts, key=lambda t: (-counts[t], t))
    return counts[top] / len(members)


def score_components(
    members: Iterable[str],
    graph: WeightedGraph,
    emb: EmbeddingMatrix,
    ann: AnnotationStore,
    profiles: Mapping[str, ProteinProfile],
) -> dict[str, float]:
    mem = sorted(members)
    return {
        "cohesion": weighted_density(graph, mem),
        "max_bh": max(profiles[m].bh for m in mem),
        "semantic": mean_pairwise_similarity(emb, mem),
        "go": go_coherence(ann, mem),
        "size": size_prior(len(mem)),
        "uncertainty": float(np.mean([profiles[m].unc_hat for m in mem])),
        "fragmentation": 1.0 - largest_component_fraction(graph, mem),
    }


def score_candidate(
    members: Iterable[str],
    graph: WeightedGraph,
    emb: EmbeddingMatrix,
    ann: AnnotationStore,
    profiles: Mapping[str, ProteinProfile],
    weights: CandidateWeights = CandidateWeights(),
) -> float:
    if isinstance(members, CandidateModule):
        members = members.members
    members = list(members)
    if len(members) < 2:
        raise ValueError("candidates need at least two members")
    c = score_components(members, graph, emb, ann, profiles)
    return (
        weights.cohesion * c["cohesion"]
        + weights.max_bh * c["max_bh"]
        + weights.semantic * c["semantic"]
        + weights.go * c["go"]
        + weights.size * c["size"]
        - weights.uncertainty * c["uncertainty"]
        - weights.fragmentation * c["fragmentation"]
    )


# -- generation ----------------------------------------------------------------


def ego_set(graph: WeightedGraph, q: str, hops: int, cap: int = 50) -> frozenset[str]:
    """q plus its <= ``hops`` neighbourhood, keeping the ``cap`` strongest members.

    One-hop members rank by edge weight to q; two-hop members by the best
    product of weights along a path through a one-hop neighbour.
    """
    strength: dict[str, tuple[int, float]] = {}
    for y, w in graph.neighbor_weights(q).items():
        strength[y] = (1, w)
    if hops >= 2:
        for y, wy in graph.neighbor_weights(q).items():
            for z, wz in graph.neighbor_weights(y).items():
                if z == q or strength.get(z, (3, 0.0))[0] == 1:
                    continue
                cur = strength.get(z)
                if cur is None or wy * wz > cur[1]:
                    strength[z] = (2, wy * wz)
    ranked = sorted(strength, key=lambda n: (strength[n][0], -strength[n][1], n))
    return frozenset([q, *ranked[: max(cap - 1, 0)]])


def greedy_expansion(
    graph: WeightedGraph,
    emb: EmbeddingMatrix,
    q: str,
    cap: int = 30,
    min_gain: float = 0.05,
) -> frozenset[str]:
    """Grow {q} by the boundary node with the best 0.5*topology + 0.5*semantic support."""
    unit = emb.aligned_unit(graph.nodes)
    idx = graph.index
    members = {q}
    into: dict[str, float] = {}
    into_n: dict[str, int] = {}
    simsum = np.zeros(len(graph))

    def absorb(node):
        for v, w in graph.neighbor_weights(node).items():
            into[v] = into.get(v, 0.0) + w
            into_n[v] = into_n.get(v, 0) + 1
        np.add(simsum, np.maximum(unit @ unit[idx[node]], 0.0), out=simsum)

    absorb(q)
    while len(members) < cap:
        boundary = sorted(x for x in into if x not in members)
        if not boundary:
            break
        best, best_gain = None, -1.0
        for x in boundary:
            total = graph.weighted_degree(x)
            if total > 0:
                topo = into[x] / total
            else:
                topo = into_n[x] / graph.degree(x)
            g = 0.5 * topo + 0.5 * simsum[idx[x]] / len(members)
            if g > best_gain:
                best, best_gain = x, g
        if best_gain <= min_gain:
            break
        members.add(best)
        absorb(best)
    return frozenset(members)


def knn_set(graph: WeightedGraph, emb: EmbeddingMatrix, q: str, k: int = 10) -> frozenset[str] | None:
    """q and its k most similar nodes, or None without weak graph support.

    Weak support means at least ``|set| - 1`` internal edges.
    """
    unit = emb.aligned_unit(graph.nodes)
    qi = graph.index[q]
    sims = unit @ unit[qi]
    sims[qi] = -np.inf
    order = np.lexsort((np.arange(len(sims)), -sims))[:k]
    members = frozenset([q, *(graph.nodes[i] for i in order)])
    internal = sum(1 for u in members for v in graph.neighbors(u) if v in members) // 2
    return members if internal >= len(members) - 1 else None


def pairwise_jaccard(sets: Sequence[frozenset[str]], others: Sequence[frozenset[str]] | None = None):
    """Sparse intersection counts and Jaccard for all set pairs with overlap.

    Returns ``(rows, cols, jaccard)`` arrays over pairs sharing >= 1 element.
    """
    others = sets if others is None else others
    universe = sorted(set().union(*sets, *others)) if (sets or others) else []
    pos = {x: i for i, x in enumerate(universe)}

    def incidence(ss):
        rows = np.repeat(np.arange(len(ss)), [len(s) for s in ss])
        cols = np.fromiter((pos[x] for s in ss for x in sorted(s)), dtype=np.int64, count=len(rows))
        return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(ss), len(universe)))

    a, b = incidence(sets), incidence(others)
    inter = (a @ b.T).tocoo()
    sa = np.array([len(s) for s in sets], dtype=float)
    sb = np.array([len(s) for s in others], dtype=float)
    j = inter.data / (sa[inter.row] + sb[inter.col] - inter.data)
    return inter.row.astype(np.int64), inter.col.astype(np.int64), j


def generate_candidates(
    graph: WeightedGraph,
    seed_modules: Sequence[Iterable[str]],
    nuclei: Sequence[str],
    emb: EmbeddingMatrix,
    config: CandidateConfig = CandidateConfig(),
) -> list[CandidateModule]:
    """Build the deduplicated pool in canonical (source, members) order."""
    if not nuclei:
        raise ValueError("need at least one nucleus")
    by_source: dict[str, list[frozenset[str]]] = {s: [] for s in SOURCES}
    by_source["mcl"] = [frozenset(m) for m in seed_modules]
    for q in nuclei:
        for h in config.ego_hops:
            by_source["ego"].append(ego_set(graph, q, h, config.ego_cap))
        by_source["expansion"].append(
            greedy_expansion(graph, emb, q, config.expand_cap, config.expand_min_gain)
        )
        nn = knn_set(graph, emb, q, config.knn_k)
        if nn is not None:
            by_source["knn"].append(nn)

    seen: set[frozenset[str]] = set()
    pool: list[CandidateModule] = []

    def admit(source, sets):
        for s in sorted(set(sets), key=lambda m: sorted(m)):
            if len(s) >= 2 and s not in seen:
                seen.add(s)
                pool.append(CandidateModule(s, source))

    for src in SOURCES[:-1]:
        admit(src, by_source[src])

    base = [c.members for c in pool]
    if len(base) >= 2:
        r, c, j = pairwise_jaccard(base)
        hit = (r < c) & (j >= config.union_jaccard)
        admit("union", [base[a] | base[b] for a, b in zip(r[hit], c[hit])])
    return pool


def score_pool(
    pool: Sequence[CandidateModule],
    graph: WeightedGraph,
    emb: EmbeddingMatrix,
    ann: AnnotationStore,
    profiles: Mapping[str, ProteinProfile],
    weights: CandidateWeights = CandidateWeights(),
) -> list[CandidateModule]:
    for cand in pool:
        cand.composite_score = score_candidate(cand.members, graph, emb, ann, profiles, weights)
    return list(pool)


def write_pool(path: str | Path, pool: Sequence[CandidateModule]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["candidate_id", "source", "size", "composite_score", "members"])
        for i, c in enumerate(pool):
            w.writerow([i, c.source, len(c), f"{c.composite_score:.6f}", ";".join(sorted(c.members))])

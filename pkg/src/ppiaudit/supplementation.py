"""Bounded, evidence-gated boundary supplementation and the unbounded control."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .annotations import AnnotationStore
from .candidates import semantic_support, topology_support
from .embeddings import EmbeddingMatrix
from .graph_io import WeightedGraph
from .overlap import ModuleSet, TfidfSignature, functional_dependency


@dataclass(frozen=True)
class SupplementCaps:
    max_rel_growth: float = 0.15
    max_added: int = 2
    min_gain: float = 0.38
    gate_topo: float = 0.12
    gate_sem: float = 0.28
    gate_go: float = 0.25

    def budget(self, size: int) -> int:
        # round() guards against 0.15 * n landing a hair under an integer
        return max(0, min(self.max_added, math.floor(round(self.max_rel_growth * size, 9))))

    def gate(self, topo: float, sem: float, go: float) -> str | None:
        if topo >= self.gate_topo:
            return "topology"
        if sem >= self.gate_sem:
            return "semantic"
        if go >= self.gate_go:
            return "go"
        return None


@dataclass(frozen=True)
class Addition:
    module: int
    node: str
    topo: float
    sem: float
    go: float
    gain: float
    gate: str


def boundary(graph: WeightedGraph, members) -> set[str]:
    return {v for u in members if u in graph for v in graph.neighbors(u)} - set(members)


def channel_triplet(
    x: str, i: int, members, graph: WeightedGraph, emb: EmbeddingMatrix, ann: AnnotationStore, sig: TfidfSignature
) -> tuple[float, float, float]:
    topo = topology_support(graph, x, members)
    sem = semantic_support(emb, x, members)
    go = min(1.0, functional_dependency(x, i, sig, ann))
    return topo, sem, go


def supplement(
    modules: ModuleSet,
    graph: WeightedGraph,
    emb: EmbeddingMatrix,
    ann: AnnotationStore,
    sig: TfidfSignature,
    caps: SupplementCaps = SupplementCaps(),
    log: list[Addition] | None = None,
) -> ModuleSet:
    """Add at most ``caps.budget(|M0|)`` gated boundary nodes to each module.

    Boundary nodes are ranked by the mean of their topology, semantic and GO
    channels; only nodes passing at least one channel gate are eligible, and
    expansion of a module stops once the best eligible gain is below
    ``caps.min_gain``. Ties go to the smaller node id. Seed members are
    never removed.
    """
    out = []
    for i, seed in enumerate(modules.modules):
        members = set(seed)
        budget = caps.budget(len(seed))
        added = 0
        while added < budget:
            best = None
            for x in sorted(boundary(graph, members)):
                topo, sem, go = channel_triplet(x, i, members, graph, emb, ann, sig)
                gate = caps.gate(topo, sem, go)
                if gate is None:
                    continue
                gain = (topo + sem + go) / 3.0
                if best is None or gain > best.gain:
                    best = Addition(i, x, topo, sem, go, gain, gate)
            if best is None or best.gain < caps.min_gain:
                break
            members.add(best.node)
            added += 1
            if log is not None:
                log.append(best)
        out.append(frozenset(members))
    prov = [p if m == s else f"{p}+supplement" for p, m, s in zip(modules.provenance, out, modules.modules)]
    return ModuleSet(out, prov)


def naive_expand(modules: ModuleSet, graph: WeightedGraph) -> ModuleSet:
    """Absorb every boundary node with an internal edge until nothing changes.

    The fixpoint is the union of the connected components touched by the module.
    """
    out = []
    for seed in modules.modules:
        members = set(seed)
        frontier = list(members)
        while frontier:
            u = frontier.pop()
            if u not in graph:
                continue
            for v in graph.neighbors(u):
                if v not in members:
                    members.add(v)
                    frontier.append(v)
        out.append(frozenset(members))
    return ModuleSet(out, ["naive_expand"] * len(out))

"""Baselines: speaker-listener label propagation (SLPA) and MCL with overlap reassignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .annotations import AnnotationStore
from .graph_io import WeightedGraph
from .mcl import run_mcl
from .overlap import ModuleSet, OverlapEvent, apply_overlap_and_transfer


@dataclass(frozen=True)
class SlpaTranscript:
    """Label memories of one SLPA run; thresholds are applied afterwards."""

    nodes: tuple[str, ...]
    memory: np.ndarray  # (n_nodes, iterations + 1) label indices

    def frequencies(self) -> list[dict[int, float]]:
        length = self.memory.shape[1]
        out = []
        for row in self.memory:
            labs, counts = np.unique(row, return_counts=True)
            out.append({int(l): c / length for l, c in zip(labs, counts)})
        return out


def slpa_transcript(
    graph: WeightedGraph, iterations: int = 100, seed: int = 42, weighted: bool = True
) -> SlpaTranscript:
    """Run the propagation loop with all randomness drawn up front from ``seed``."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    rng = np.random.default_rng(seed)
    n = len(graph)
    orders = np.stack([rng.permutation(n) for _ in range(iterations)]) if n else np.empty((iterations, 0), np.int64)
    uniforms = rng.random((iterations, len(graph.indices)))
    mem = kernels.slpa_memory(graph.indptr, graph.indices, graph.weights, orders, uniforms, weighted)
    return SlpaTranscript(graph.nodes, mem)


def slpa_modules(transcript: SlpaTranscript, threshold: float) -> ModuleSet:
    """Keep labels with memory frequency >= ``threshold``; each label's nodes form a module."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    groups: dict[int, set[str]] = {}
    for node, freq in zip(transcript.nodes, transcript.frequencies()):
        for lab, f in freq.items():
            if f >= threshold:
                groups.setdefault(lab, set()).add(node)
    mods = sorted((frozenset(g) for g in groups.values() if len(g) >= 2), key=sorted)
    return ModuleSet(mods, ["slpa"] * len(mods))


def run_slpa(
    graph: WeightedGraph,
    iterations: int = 100,
    threshold: float = 0.1,
    seed: int = 42,
    weighted: bool = True,
) -> ModuleSet:
    return slpa_modules(slpa_transcript(graph, iterations, seed, weighted), threshold)


def run_mcl_overlap(
    graph: WeightedGraph,
    ann: AnnotationStore,
    inflation: float = 2.0,
    alpha: float = 0.5,
    tau_overlap: float = 0.1,
    log: list[OverlapEvent] | None = None,
) -> ModuleSet:
    part = run_mcl(graph, inflation=inflation)
    return apply_overlap_and_transfer(part.modules, graph, ann, alpha=alpha, tau_overlap=tau_overlap, log=log)

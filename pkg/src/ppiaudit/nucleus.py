"""Per-node evidence profiles, nucleus scores and nucleus selection."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

import numpy as np

from . import kernels
from .annotations import AnnotationStore
from .embeddings import EmbeddingMatrix
from .graph_io import WeightedGraph, weighted_degrees

NUCLEUS_WEIGHTS = {"deg_hat": 0.25, "cc_hat": 0.15, "kcore_hat": 0.20, "snc": 0.20, "rich_hat": 0.20}
UNCERTAINTY_PENALTY = 0.05
UNCERTAINTY_CAP = 10


@dataclass(frozen=True)
class ProteinProfile:
    deg_hat: float
    cc_hat: float
    kcore_hat: float
    snc: float
    rich_hat: float
    unc_hat: float
    bh: float = 0.0


def minmax(x: np.ndarray) -> np.ndarray:
    """Min-max scale; on a degenerate range positive values map to 1 and zeros stay 0."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return x
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.where(x > 0, 1.0, 0.0)
    return (x - lo) / (hi - lo)


def clustering_coefficients(graph: WeightedGraph) -> np.ndarray:
    tri = kernels.triangles(graph.indptr, graph.indices).astype(float)
    deg = np.diff(graph.indptr).astype(float)
    pairs = deg * (deg - 1) / 2
    return np.divide(tri, pairs, out=np.zeros_like(tri), where=pairs > 0)


def semantic_neighbourhood_coherence(graph: WeightedGraph, emb: EmbeddingMatrix) -> np.ndarray:
    n = len(graph)
    unit = emb.unit_rows(graph.nodes)
    rows = np.repeat(np.arange(n), np.diff(graph.indptr))
    sims = np.maximum(0.0, np.einsum("ij,ij->i", unit[rows], unit[graph.indices]))
    deg = np.diff(graph.indptr)
    tot = np.bincount(rows, weights=sims, minlength=n)
    return np.divide(tot, deg, out=np.zeros(n), where=deg > 0)


def bh_score(profile: ProteinProfile) -> float:
    pos = sum(w * getattr(profile, k) for k, w in NUCLEUS_WEIGHTS.items())
    return pos - UNCERTAINTY_PENALTY * profile.unc_hat


def compute_profiles(
    graph: WeightedGraph, ann: AnnotationStore, emb: EmbeddingMatrix
) -> dict[str, ProteinProfile]:
    deg_hat = minmax(weighted_degrees(graph))
    cc_hat = minmax(clustering_coefficients(graph))
    kcore_hat = minmax(kernels.core_numbers(graph.indptr, graph.indices))
    snc = semantic_neighbourhood_coherence(graph, emb)
    counts = np.array([len(ann.terms(n)) for n in graph.nodes], dtype=float)
    rich_hat = minmax(counts)
    unc_hat = 1.0 - np.minimum(1.0, counts / UNCERTAINTY_CAP)
    out = {}
    for i, node in enumerate(graph.nodes):
        p = ProteinProfile(
            float(deg_hat[i]), float(cc_hat[i]), float(kcore_hat[i]),
            float(snc[i]), float(rich_hat[i]), float(unc_hat[i]),
        )
        out[node] = ProteinProfile(**{**p.__dict__, "bh": bh_score(p)})
    return out


def write_profiles(path: str | Path, profiles: Mapping[str, ProteinProfile]) -> None:
    names = [f.name for f in fields(ProteinProfile)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", *names])
        for node in sorted(profiles):
            p = profiles[node]
            w.writerow([node, *(f"{getattr(p, k):.6f}" for k in names)])


def _ball(graph: WeightedGraph, src: str, radius: int) -> set[str]:
    seen = {src}
    q = deque([(src, 0)])
    while q:
        u, d = q.popleft()
        if d == radius:
            continue
        for v in graph.neighbors(u):
            if v not in seen:
                seen.add(v)
                q.append((v, d + 1))
    return seen


def select_nuclei(
    scores: Mapping[str, float], graph: WeightedGraph, min_hops: int = 2, k: int | None = None
) -> list[str]:
    """Greedy non-maximum suppression by descending score.

    Accepted nuclei are pairwise at least ``min_hops`` hops apart. Ties are
    broken by node id.
    """
    if min_hops < 1:
        raise ValueError("min_hops must be >= 1")
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    order = sorted(scores, key=lambda n: (-scores[n], n))
    chosen: list[str] = []
    suppressed: set[str] = set()
    for node in order:
        if k is not None and len(chosen) >= k:
            break
        if node in suppressed:
            continue
        chosen.append(node)
        suppressed |= _ball(graph, node, min_hops - 1)
    return chosen

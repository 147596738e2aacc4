"""Per-assignment support channels, confidence labels and evidence bundles."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .annotations import AnnotationStore
from .candidates import semantic_support, topology_support
from .embeddings import EmbeddingMatrix
from .graph_io import WeightedGraph
from .overlap import ModuleSet, TfidfSignature, functional_dependency, module_tfidf

LABELS = ("core", "inner", "outer", "uncertain")
LABEL_RANK = {lab: r for r, lab in enumerate(reversed(LABELS))}  # uncertain=0 .. core=3

CORE_TOPO, CORE_SEM = 0.35, 0.25
INNER_T = 0.25
OUTER_T = 0.12

BUNDLE_HEADER = (
    "protein_id", "community_id", "membership_type", "topology_score", "semantic_score",
    "go_score", "membership_score", "top_go_terms", "evidence_summary", "stability_freq",
)
REQUIRED_FIELDS = BUNDLE_HEADER[:-1]


def assign_label(topo: float, sem: float) -> str:
    if topo >= CORE_TOPO and sem >= CORE_SEM:
        return "core"
    if topo >= INNER_T or sem >= INNER_T:
        return "inner"
    if topo >= OUTER_T or sem >= OUTER_T:
        return "outer"
    return "uncertain"


@dataclass
class EvidenceBundle:
    protein_id: str | None
    community_id: str | None
    membership_type: str | None
    topology_score: float | None
    semantic_score: float | None
    go_score: float | None
    membership_score: float | None
    top_go_terms: list[str] | None
    evidence_summary: str | None
    stability_freq: float | None = None

    def channels(self) -> tuple[float, float, float]:
        return (self.topology_score or 0.0, self.semantic_score or 0.0, self.go_score or 0.0)

    def is_complete(self) -> bool:
        return all(getattr(self, f) is not None for f in REQUIRED_FIELDS)

    def to_row(self) -> list[str]:
        def num(x):
            return "" if x is None else f"{x:.6f}"

        return [
            self.protein_id or "",
            self.community_id or "",
            self.membership_type or "",
            num(self.topology_score),
            num(self.semantic_score),
            num(self.go_score),
            num(self.membership_score),
            "" if self.top_go_terms is None else ";".join(self.top_go_terms),
            self.evidence_summary or "",
            num(self.stability_freq),
        ]


def channel_scores(
    p: str,
    module: int,
    members: Iterable[str],
    graph: WeightedGraph,
    emb: EmbeddingMatrix,
    sig: TfidfSignature,
    ann: AnnotationStore,
) -> tuple[float, float, float]:
    """Raw (topology, semantic, GO) support of ``p`` in module ``module``.

    The GO channel here is the un-normalised functional dependency;
    :func:`build_bundles` rescales it over the whole run.
    """
    members = frozenset(members)
    topo = topology_support(graph, p, members) if p in graph else 0.0
    sem = semantic_support(emb, p, members)
    go = functional_dependency(p, module, sig, ann)
    return topo, sem, go


def summary_sentence(protein: str, module: str, label: str, t: float, s: float, g: float, terms: Sequence[str]) -> str:
    listed = ", ".join(terms) if terms else "none"
    return (
        f"{protein} assigned to {module} as {label}: topology {t:.3f}, semantic {s:.3f}, "
        f"GO {g:.3f}; top terms {listed}."
    )


def module_channels(
    members: Sequence[str], graph: WeightedGraph, emb: EmbeddingMatrix, adj: sp.csr_matrix | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Topology and semantic support of every member of one module, vectorised.

    Agrees with :func:`topology_support` and :func:`semantic_support` per node.
    """
    n = len(members)
    if adj is None:
        adj = adjacency(graph)
    idx = np.array([graph.index[m] for m in members if m in graph.index], dtype=np.int64)
    topo = np.zeros(n)
    if idx.size == n:
        sub = adj[idx][:, idx]
        into = np.asarray(sub.sum(axis=1)).ravel()
        total = np.asarray(adj[idx].sum(axis=1)).ravel()
        links = np.diff(sub.indptr).astype(float)
        deg = np.diff(adj.indptr)[idx].astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            topo = np.where(total > 0, into / total, np.where(deg > 0, links / deg, 0.0))
    else:
        topo = np.array([topology_support(graph, m, members) if m in graph else 0.0 for m in members])
    if n < 2:
        return topo, np.zeros(n)
    u = emb.unit_rows(members)
    s = np.maximum(u @ u.T, 0.0)
    sem = (s.sum(axis=1) - np.diag(s)) / (n - 1)
    return topo, sem


def adjacency(graph: WeightedGraph) -> sp.csr_matrix:
    n = len(graph)
    return sp.csr_matrix((np.asarray(graph.weights), graph.indices, graph.indptr), shape=(n, n))


def build_bundles(
    modules: ModuleSet,
    graph: WeightedGraph,
    emb: EmbeddingMatrix,
    ann: AnnotationStore,
    sig: TfidfSignature | None = None,
    module_ids: Sequence[str] | None = None,
) -> list[EvidenceBundle]:
    """One bundle per (protein, module) assignment, ordered by module then protein."""
    if sig is None:
        sig = module_tfidf(modules.modules, ann) if len(modules) else None
    ids = list(module_ids) if module_ids is not None else [str(i) for i in range(len(modules))]
    adj = adjacency(graph)
    cache: dict[frozenset[str], tuple[np.ndarray, np.ndarray]] = {}
    raw = []
    for i, mod in enumerate(modules.modules):
        members = sorted(mod)
        key = frozenset(mod)
        if key not in cache:
            cache[key] = module_channels(members, graph, emb, adj)
        topo, sem = cache[key]
        for p, t, s in zip(members, topo.tolist(), sem.tolist()):
            raw.append((i, p, t, s, functional_dependency(p, i, sig, ann)))
    if not raw:
        return []
    go = np.array([r[4] for r in raw])
    lo, hi = go.min(), go.max()
    if hi > lo:
        go_n = (go - lo) / (hi - lo)
    else:
        go_n = np.where(go > 0, 1.0, 0.0)
    out = []
    for (i, p, t, s, _), g in zip(raw, go_n.tolist()):
        label = assign_label(t, s)
        terms = sig.top_terms(i, among=sorted(ann.terms(p)), k=5)
        out.append(
            EvidenceBundle(
                protein_id=p,
                community_id=ids[i],
                membership_type=label,
                topology_score=t,
                semantic_score=s,
                go_score=g,
                membership_score=0.5 * t + 0.5 * s,
                top_go_terms=terms,
                evidence_summary=summary_sentence(p, ids[i], label, t, s, g, terms),
            )
        )
    return out


def bundle_completeness(bundles: Sequence[EvidenceBundle]) -> float:
    """Fraction of bundles with every required field present; 0 without bundles."""
    if not bundles:
        return 0.0
    return sum(1 for b in bundles if b.is_complete()) / len(bundles)


def nonzero_channels(b: EvidenceBundle) -> int:
    return sum(1 for c in b.channels() if c > 0)


def support_audit(bundles: Sequence[EvidenceBundle]) -> dict[str, dict[str, float]]:
    out = {}
    for lab in LABELS:
        sel = [b for b in bundles if b.membership_type == lab]
        n = len(sel)
        out[lab] = {
            "count": n,
            "mean_membership": float(np.mean([b.membership_score for b in sel])) if n else 0.0,
            "nonzero_frac": sum(nonzero_channels(b) >= 1 for b in sel) / n if n else 0.0,
            "multichannel_frac": sum(nonzero_channels(b) >= 2 for b in sel) / n if n else 0.0,
        }
    return out


def write_bundles(path: str | Path, bundles: Sequence[EvidenceBundle]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BUNDLE_HEADER)
        for b in bundles:
            w.writerow(b.to_row())


def read_bundles(path: str | Path) -> list[EvidenceBundle]:
    """Parse an evidence_bundles.csv; blank score/text cells become None."""

    def num(x):
        return None if x == "" else float(x)

    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                EvidenceBundle(
                    protein_id=row["protein_id"] or None,
                    community_id=row["community_id"] or None,
                    membership_type=row["membership_type"] or None,
                    topology_score=num(row["topology_score"]),
                    semantic_score=num(row["semantic_score"]),
                    go_score=num(row["go_score"]),
                    membership_score=num(row["membership_score"]),
                    top_go_terms=[t for t in row["top_go_terms"].split(";") if t],
                    evidence_summary=row["evidence_summary"] or None,
                    stability_freq=num(row.get("stability_freq", "")),
                )
            )
    return out


def write_support_audit(path: str | Path, audit: dict[str, dict[str, float]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "count", "mean_membership", "nonzero_frac", "multichannel_frac"])
        for lab in LABELS:
            a = audit[lab]
            w.writerow([lab, a["count"], f"{a['mean_membership']:.6f}", f"{a['nonzero_frac']:.6f}",
                        f"{a['multichannel_frac']:.6f}"])


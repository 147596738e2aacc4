"""GO TF-IDF module signatures, permanence, membership and overlap reassignment."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .annotations import AnnotationStore
from .graph_io import WeightedGraph


@dataclass
class ModuleSet:
    modules: list[frozenset[str]]
    provenance: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.provenance:
            self.provenance = ["seed"] * len(self.modules)
        if len(self.provenance) != len(self.modules):
            raise ValueError("provenance length must match modules")

    def __len__(self) -> int:
        return len(self.modules)

    def __iter__(self):
        return iter(self.modules)

    def memberships(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for i, m in enumerate(self.modules):
            for node in m:
                out.setdefault(node, []).append(i)
        return out

    def assignments(self) -> int:
        return sum(len(m) for m in self.modules)


@dataclass
class TfidfSignature:
    """TF-IDF of GO terms with modules as documents."""

    score_of: list[dict[str, float]]
    idf: dict[str, float]
    df: dict[str, int]

    @property
    def module_count(self) -> int:
        return len(self.score_of)

    def score(self, term: str, module: int) -> float:
        return self.score_of[module].get(term, 0.0)

    def top_terms(self, module: int, among: Iterable[str] | None = None, k: int = 5) -> list[str]:
        sig = self.score_of[module]
        pool = sig if among is None else [t for t in among if t in sig]
        return sorted(pool, key=lambda t: (-sig[t], t))[:k]


def module_tfidf(modules: Sequence[Iterable[str]], ann: AnnotationStore) -> TfidfSignature:
    mods = [frozenset(m) for m in modules]
    if not mods:
        raise ValueError("need at least one module")
    counts = []
    df: Counter = Counter()
    for m in mods:
        c: Counter = Counter()
        for p in m:
            c.update(ann.terms(p))
        counts.append(c)
        df.update(c.keys())
    total = len(mods)
    idf = {t: math.log(total / n) for t, n in df.items()}
    score_of = [{t: (n / len(m)) * idf[t] for t, n in c.items()} for m, c in zip(mods, counts)]
    return TfidfSignature(score_of, idf, dict(df))


def internal_clustering(graph: WeightedGraph, nodes: Sequence[str]) -> float:
    k = len(nodes)
    if k < 2:
        return 0.0
    links = sum(1 for i in range(k) for j in range(i + 1, k) if graph.has_edge(nodes[i], nodes[j]))
    return links / (k * (k - 1) / 2)


def _perm_from_counts(p, members, graph, counts, skip) -> float:
    nbrs = graph.neighbors(p)
    internal = sorted((nbrs & members) - {p})
    e_max = max((c for j, c in counts.items() if j != skip), default=0)
    c_in = internal_clustering(graph, internal) if len(internal) >= 2 else 0.0
    return len(internal) / max(e_max, 1) - (1.0 - c_in)


def permanence(
    p: str,
    members: Iterable[str],
    graph: WeightedGraph,
    modules: Iterable[Iterable[str]],
    skip: int | None = None,
) -> float:
    """Permanence of ``p`` in ``members``.

    Competing modules are all of ``modules`` except index ``skip``; when
    ``skip`` is None, modules equal to ``members`` (ignoring ``p``) are skipped.
    """
    members = frozenset(members)
    nbrs = graph.neighbors(p)
    core = members - {p}
    counts = {}
    for j, other in enumerate(modules):
        other = frozenset(other)
        if skip is None and other - {p} == core:
            continue
        counts[j] = len(nbrs & other)
    return _perm_from_counts(p, members, graph, counts, skip)


def functional_dependency(p: str, module: int, sig: TfidfSignature, ann: AnnotationStore) -> float:
    terms = ann.terms(p)
    if not terms:
        return 0.0
    scores = sig.score_of[module]
    return sum(scores.get(t, 0.0) for t in terms) / len(terms)


def membership(perm: float, fd: float, alpha: float = 0.5) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return alpha * perm + (1.0 - alpha) * fd


@dataclass
class OverlapEvent:
    node: str
    module: int
    perm: float
    fd: float
    score: float
    action: str


def apply_overlap_and_transfer(
    modules: Sequence[Iterable[str]],
    graph: WeightedGraph,
    ann: AnnotationStore,
    alpha: float = 0.5,
    tau_overlap: float = 0.1,
    log: list[OverlapEvent] | None = None,
) -> ModuleSet:
    """One overlap + transfer pass in lexicographic node order.

    Signatures are frozen from the input modules. ``p`` joins an adjacent
    module ``C_j`` when ``M(p, C_j + p) - max_k M(p, C_k) > tau_overlap``.
    Afterwards ``p`` moves from ``C_i`` to its best external module when it
    has more links there and a higher membership, unless ``C_i`` would drop
    below two members.
    """
    mods = [set(m) for m in modules]
    sig = module_tfidf([frozenset(m) for m in mods], ann)
    record = log.append if log is not None else (lambda e: None)

    member_of: dict[str, set[int]] = {}
    for i, m in enumerate(mods):
        for n in m:
            member_of.setdefault(n, set()).add(i)

    for p in sorted(member_of):
        nbrs = graph.neighbors(p) if p in graph else frozenset()
        # only p's own memberships change while p is processed
        counts: Counter = Counter()
        for q in nbrs:
            counts.update(member_of.get(q, ()))

        def score(idx: int, members) -> tuple[float, float, float]:
            perm = _perm_from_counts(p, members, graph, counts, idx)
            fd = functional_dependency(p, idx, sig, ann)
            return perm, fd, membership(perm, fd, alpha)

        for j in sorted(set(counts) - member_of[p]):
            current = max(score(k, mods[k])[2] for k in sorted(member_of[p]))
            perm, fd, cand = score(j, mods[j] | {p})
            accept = cand - current > tau_overlap
            if accept:
                mods[j].add(p)
                member_of[p].add(j)
            record(OverlapEvent(p, j, perm, fd, cand, "overlap" if accept else "reject"))

        for i in sorted(member_of[p]):
            if i not in member_of[p]:
                continue
            outside = [j for j in counts if j not in member_of[p]]
            if not outside:
                break
            best = min(outside, key=lambda j: (-counts[j], j))
            intra = counts.get(i, 0)
            if counts[best] <= intra or len(mods[i]) - 1 < 2:
                continue
            cur = score(i, mods[i])[2]
            perm, fd, new = score(best, mods[best] | {p})
            if new > cur:
                mods[i].discard(p)
                mods[best].add(p)
                member_of[p].discard(i)
                member_of[p].add(best)
                record(OverlapEvent(p, best, perm, fd, new, f"transfer_from_{i}"))
    return ModuleSet([frozenset(m) for m in mods], ["mcl_overlap"] * len(mods))


def write_overlap_log(path: str | Path, events: Sequence[OverlapEvent]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "module", "perm", "fd", "membership", "action"])
        for e in events:
            w.writerow([e.node, e.module, f"{e.perm:.6f}", f"{e.fd:.6f}", f"{e.score:.6f}", e.action])

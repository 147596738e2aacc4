"""Weighted edge-list loading, cleaning, normalisation and summaries."""

from __future__ import annotations

import csv
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    """Raised when an edge list cannot produce a usable graph."""


@dataclass(frozen=True)
class CleaningConfig:
    reject_whitespace: bool = True
    reject_empty: bool = True
    reject_tokens: tuple[str, ...] = ("#NAME?",)
    reject_patterns: tuple[str, ...] = ()

    def rejection_reason(self, ident: str) -> str | None:
        if self.reject_empty and ident == "":
            return "empty_identifier"
        if ident in self.reject_tokens:
            return "corrupted_identifier"
        if self.reject_whitespace and re.search(r"\s", ident):
            return "whitespace_identifier"
        for pat in self.reject_patterns:
            if re.search(pat, ident):
                return "pattern_identifier"
        return None


class WeightedGraph:
    """Immutable undirected simple graph with non-negative edge weights.

    Nodes are kept sorted, so node order (and the CSR arrays) never depend
    on the order edges were supplied in.
    """

    def __init__(self, edges: Mapping[tuple[str, str], float], nodes: Iterable[str] = ()):
        adj: dict[str, dict[str, float]] = {n: {} for n in nodes}
        for (u, v), w in edges.items():
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            w = float(w)
            if not math.isfinite(w) or w < 0:
                raise GraphError(f"invalid weight {w!r} on {u!r}-{v!r}")
            adj.setdefault(u, {})[v] = w
            adj.setdefault(v, {})[u] = w
        self.nodes: tuple[str, ...] = tuple(sorted(adj))
        self.index: dict[str, int] = {n: i for i, n in enumerate(self.nodes)}
        self._adj = {n: dict(sorted(adj[n].items())) for n in self.nodes}
        self._neighbor_sets = {n: frozenset(nb) for n, nb in self._adj.items()}

        n = len(self.nodes)
        counts = np.fromiter((len(self._adj[x]) for x in self.nodes), dtype=np.int64, count=n)
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=self.indptr[1:])
        self.indices = np.empty(self.indptr[-1], dtype=np.int64)
        self.weights = np.empty(self.indptr[-1], dtype=np.float64)
        for i, x in enumerate(self.nodes):
            a = self.indptr[i]
            nbrs = self._adj[x]
            # neighbour dicts are sorted by id, hence by index
            self.indices[a : a + len(nbrs)] = [self.index[y] for y in nbrs]
            self.weights[a : a + len(nbrs)] = list(nbrs.values())
        for arr in (self.indptr, self.indices, self.weights):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: object) -> bool:
        return node in self.index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, WeightedGraph) and self._adj == other._adj

    def __repr__(self) -> str:
        return f"WeightedGraph(nodes={len(self.nodes)}, edges={self.n_edges})"

    @property
    def n_edges(self) -> int:
        return int(self.indptr[-1] // 2)

    def neighbors(self, node: str) -> frozenset[str]:
        return self._neighbor_sets[node]

    def neighbor_weights(self, node: str) -> Mapping[str, float]:
        return self._adj[node]

    def weight(self, u: str, v: str, default: float = 0.0) -> float:
        return self._adj.get(u, {}).get(v, default)

    def has_edge(self, u: str, v: str) -> bool:
        return v in self._adj.get(u, ())

    def degree(self, node: str) -> int:
        return len(self._adj[node])

    def weighted_degree(self, node: str) -> float:
        return sum(self._adj[node].values())

    def edges(self) -> list[tuple[str, str, float]]:
        """Each undirected edge once as ``(u, v, w)`` with ``u < v``."""
        return [(u, v, w) for u in self.nodes for v, w in self._adj[u].items() if u < v]

    def edge_weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges()], dtype=np.float64)

    def subgraph(self, keep: Iterable[str]) -> "WeightedGraph":
        keep = set(keep)
        edges = {(u, v): w for u, v, w in self.edges() if u in keep and v in keep}
        return WeightedGraph(edges, nodes=[n for n in self.nodes if n in keep])

    def with_weights(self, mapping) -> "WeightedGraph":
        return WeightedGraph({(u, v): mapping(w) for u, v, w in self.edges()}, nodes=self.nodes)


@dataclass
class CleaningReport:
    counts: Counter = field(default_factory=Counter)

    def add(self, reason: str, n: int = 1) -> None:
        self.counts[reason] += n

    @property
    def rows_read(self) -> int:
        return self.counts["rows_read"]

    def dropped(self) -> int:
        return sum(v for k, v in self.counts.items() if k not in ("rows_read", "rows_kept", "header", "blank"))

    def rows(self) -> list[tuple[str, int]]:
        order = ["rows_read", "rows_kept", "header", "blank"]
        rest = sorted(k for k in self.counts if k not in order)
        return [(k, self.counts[k]) for k in order + rest if k in self.counts]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["reason", "count"])
            w.writerows(self.rows())


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _split(line: str) -> list[str]:
    # tabs win when present so that ids with embedded spaces are visible
    if "\t" in line:
        return [f.strip(" \r") for f in line.split("\t")]
    return line.split()


def load_edge_list(
    path: str | Path, cleaning: CleaningConfig | None = None
) -> tuple[WeightedGraph, CleaningReport]:
    """Read a tab/whitespace edge list into a cleaned :class:`WeightedGraph`.

    Rows with rejected identifiers, self-loops or unparseable weights are
    dropped and counted. Duplicate undirected edges keep their maximum
    weight; rows without a weight column get weight 1.0. A first row whose
    weight field is non-numeric is treated as a header.
    """
    cleaning = cleaning or CleaningConfig()
    report = CleaningReport()
    edges: dict[tuple[str, str], float] = {}
    try:
        fh = open(path, encoding="utf-8", errors="replace")
    except OSError as exc:
        raise GraphError(f"cannot read edge list {path}: {exc}") from exc
    with fh:
        first = True
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip():
                report.add("blank")
                continue
            fields = _split(line)
            if first:
                first = False
                if len(fields) >= 3 and not _is_number(fields[2]):
                    report.add("header")
                    continue
            report.add("rows_read")
            if len(fields) < 2:
                report.add("too_few_columns")
                continue
            u, v = fields[0], fields[1]
            reason = cleaning.rejection_reason(u) or cleaning.rejection_reason(v)
            if reason:
                report.add(reason)
                continue
            if len(fields) >= 3 and fields[2] != "":
                try:
                    w = float(fields[2])
                except ValueError:
                    report.add("bad_weight")
                    continue
                if not math.isfinite(w) or w < 0:
                    report.add("bad_weight")
                    continue
            else:
                w = 1.0
            if u == v:
                report.add("self_loop")
                continue
            key = (u, v) if u < v else (v, u)
            if key in edges:
                report.add("duplicate_edge")
                if w > edges[key]:
                    edges[key] = w
                continue
            edges[key] = w
            report.add("rows_kept")
    if not edges:
        raise GraphError(f"no usable edges in {path}")
    graph = WeightedGraph(edges)
    logger.info("loaded %s from %s (%d rows dropped)", graph, path, report.dropped())
    return graph, report


def write_edge_list(graph: WeightedGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        for u, v, w in graph.edges():
            fh.write(f"{u}\t{v}\t{w!r}\n")


def normalize_weights(graph: WeightedGraph) -> WeightedGraph:
    """Min-max rescale weights to [0, 1]; a degenerate range maps to 1.0."""
    w = graph.edge_weights()
    if w.size == 0:
        raise GraphError("cannot normalise a graph without edges")
    lo, hi = float(w.min()), float(w.max())
    if hi == lo:
        return graph.with_weights(lambda _: 1.0)
    span = hi - lo
    return graph.with_weights(lambda x: (x - lo) / span)


@dataclass(frozen=True)
class GraphSummary:
    nodes: int
    edges: int
    wdeg_min: float
    wdeg_mean: float
    wdeg_median: float
    wdeg_max: float

    def as_row(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": self.edges,
            "wdeg_min": f"{self.wdeg_min:.6f}",
            "wdeg_mean": f"{self.wdeg_mean:.6f}",
            "wdeg_median": f"{self.wdeg_median:.6f}",
            "wdeg_max": f"{self.wdeg_max:.6f}",
        }


def weighted_degrees(graph: WeightedGraph) -> np.ndarray:
    n = len(graph)
    rows = np.repeat(np.arange(n), np.diff(graph.indptr))
    return np.bincount(rows, weights=graph.weights, minlength=n)


def graph_stats(graph: WeightedGraph) -> GraphSummary:
    wd = weighted_degrees(graph)
    if wd.size == 0:
        return GraphSummary(0, 0, 0.0, 0.0, 0.0, 0.0)
    return GraphSummary(
        nodes=len(graph),
        edges=graph.n_edges,
        wdeg_min=float(wd.min()),
        wdeg_mean=float(wd.mean()),
        wdeg_median=float(np.median(wd)),
        wdeg_max=float(wd.max()),
    )

"""GO annotation parsing with identifier harmonisation, and gold-standard complexes."""

from __future__ import annotations

import csv
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .graph_io import WeightedGraph

logger = logging.getLogger(__name__)

GENERIC_ROOTS = frozenset({"GO:0003674", "GO:0008150", "GO:0005575"})

# GAF 2.x column positions (0-based)
_DB_ID, _SYMBOL, _QUALIFIER, _GO_ID, _SYNONYMS = 1, 2, 3, 4, 10


class AnnotationError(ValueError):
    pass


class GoldError(ValueError):
    pass


@dataclass
class AnnotationStore:
    terms_of: dict[str, frozenset[str]]
    label_of: dict[str, str] = field(default_factory=dict)
    synonym_index: dict[str, str] = field(default_factory=dict)
    stats: Counter = field(default_factory=Counter)

    def terms(self, node: str) -> frozenset[str]:
        return self.terms_of.get(node, frozenset())

    def label(self, term: str) -> str:
        return self.label_of.get(term, term)

    def annotated_count(self, nodes: Iterable[str]) -> int:
        return sum(1 for n in nodes if self.terms_of.get(n))

    def resolve(self, alias: str) -> str | None:
        return self.synonym_index.get(alias)

    @classmethod
    def from_mapping(cls, terms: Mapping[str, Iterable[str]], labels: Mapping[str, str] | None = None):
        clean = {n: frozenset(t for t in ts if t not in GENERIC_ROOTS) for n, ts in terms.items()}
        return cls(terms_of={n: ts for n, ts in clean.items() if ts}, label_of=dict(labels or {}))


def load_term_labels(path: str | Path) -> dict[str, str]:
    """Read ``id -> name`` from an OBO file, or from a two-column TSV."""
    labels: dict[str, str] = {}
    with open(path, encoding="utf-8", errors="replace") as fh:
        text = fh.read()
    if "[Term]" in text:
        cur = None
        for line in text.splitlines():
            line = line.strip()
            if line == "[Term]":
                cur = None
            elif line.startswith("id: "):
                cur = line[4:].strip()
            elif line.startswith("name: ") and cur:
                labels[cur] = line[6:].strip()
    else:
        for line in text.splitlines():
            parts = line.rstrip("\n").split("\t")
            if len(parts) >= 2 and parts[0] and not parts[0].startswith("#"):
                labels[parts[0].strip()] = parts[1].strip()
    return labels


def parse_gaf(
    path: str | Path,
    graph: WeightedGraph,
    labels: Mapping[str, str] | None = None,
    skip_not: bool = True,
) -> AnnotationStore:
    """Attach non-generic GO terms from a GAF 2.x file to graph nodes.

    A record maps to a node when its DB object id, symbol or any synonym
    equals a node id. The DB object id wins; otherwise a record whose
    aliases hit several different nodes is ambiguous and is discarded.
    """
    nodes = set(graph.nodes)
    stats: Counter = Counter()
    terms: dict[str, set[str]] = defaultdict(set)
    alias_targets: dict[str, set[str]] = defaultdict(set)
    try:
        fh = open(path, encoding="utf-8", errors="replace")
    except OSError as exc:
        raise AnnotationError(f"cannot read GAF {path}: {exc}") from exc
    with fh:
        for line in fh:
            if line.startswith("!") or not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            stats["records"] += 1
            if len(cols) <= _GO_ID or ":" not in cols[_GO_ID]:
                stats["malformed"] += 1
                continue
            if skip_not and "NOT" in cols[_QUALIFIER].split("|"):
                stats["not_qualified"] += 1
                continue
            db_id = cols[_DB_ID].strip()
            symbol = cols[_SYMBOL].strip()
            synonyms = []
            if len(cols) > _SYNONYMS and cols[_SYNONYMS].strip():
                synonyms = [s.strip() for s in cols[_SYNONYMS].split("|") if s.strip()]
            aliases = [a for a in [db_id, symbol, *synonyms] if a]
            if db_id in nodes:
                target = db_id
            else:
                hits = sorted({a for a in aliases if a in nodes})
                if not hits:
                    stats["unmapped"] += 1
                    continue
                if len(hits) > 1:
                    stats["alias_collision"] += 1
                    continue
                target = hits[0]
            for a in aliases:
                alias_targets[a].add(target)
            term = cols[_GO_ID].strip()
            if term in GENERIC_ROOTS:
                stats["generic_root"] += 1
                continue
            terms[target].add(term)
            stats["attached"] += 1

    synonym_index = {n: n for n in nodes}
    for alias, targets in alias_targets.items():
        if alias in nodes:
            continue
        if len(targets) == 1:
            synonym_index[alias] = next(iter(targets))
        else:
            stats["ambiguous_alias"] += 1

    store = AnnotationStore(
        terms_of={n: frozenset(ts) for n, ts in sorted(terms.items()) if ts},
        label_of=dict(labels or {}),
        synonym_index=dict(sorted(synonym_index.items())),
        stats=stats,
    )
    stats["annotated_nodes"] = store.annotated_count(graph.nodes)
    logger.info("GO coverage: %d of %d nodes", stats["annotated_nodes"], len(graph))
    return store


@dataclass
class GoldStandard:
    complexes: list[frozenset[str]]
    names: list[str]

    def __len__(self) -> int:
        return len(self.complexes)

    def proteins(self) -> frozenset[str]:
        return frozenset().union(*self.complexes) if self.complexes else frozenset()

    def name_of(self, i: int) -> str:
        return self.names[i]

    def subset(self, idx: Iterable[int]) -> "GoldStandard":
        idx = list(idx)
        return GoldStandard([self.complexes[i] for i in idx], [self.names[i] for i in idx])

    def map_ids(self, synonym_index: Mapping[str, str]) -> "GoldStandard":
        """Rewrite members through an alias index; complexes shrinking below 2 are dropped."""
        out, names = [], []
        for c, name in zip(self.complexes, self.names):
            m = frozenset(synonym_index.get(x, x) for x in c)
            if len(m) >= 2:
                out.append(m)
                names.append(name)
        return GoldStandard(out, names)


def load_gold(path: str | Path, named: bool = False) -> GoldStandard:
    """Read one complex per line; members tab- or whitespace-separated.

    With ``named=True`` the first field is the complex name. Complexes with
    fewer than two distinct members are dropped.
    """
    complexes, names = [], []
    try:
        fh = open(path, encoding="utf-8", errors="replace")
    except OSError as exc:
        raise GoldError(f"cannot read gold standard {path}: {exc}") from exc
    with fh:
        for line in fh:
            if not line.strip() or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.rstrip("\n").split("\t")] if "\t" in line else line.split()
            fields = [f for f in fields if f]
            name = None
            if named and fields:
                name, fields = fields[0], fields[1:]
            members = frozenset(fields)
            if len(members) < 2:
                continue
            complexes.append(members)
            names.append(name if name is not None else f"complex_{len(names)}")
    if not complexes:
        raise GoldError(f"no complexes with >= 2 members in {path}")
    return GoldStandard(complexes, names)


def gold_coverage(gold: GoldStandard, graph: WeightedGraph) -> float:
    """Fraction of distinct gold proteins present in the graph."""
    prot = gold.proteins()
    if not prot:
        return 0.0
    return sum(1 for p in prot if p in graph) / len(prot)


def write_coverage_report(
    path: str | Path, dataset: str, graph: WeightedGraph, ann: AnnotationStore, gold: GoldStandard | None
) -> None:
    cov = gold_coverage(gold, graph) if gold is not None else math.nan
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "edges", "nodes", "annotated_nodes", "gold_coverage"])
        w.writerow([dataset, graph.n_edges, len(graph), ann.annotated_count(graph.nodes), f"{cov:.3f}"])

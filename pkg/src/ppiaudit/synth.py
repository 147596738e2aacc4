"""Synthetic planted-module PPI data: edge list, GAF, term labels and gold complexes.

Planted modules are dense, weighted blocks; a sparse weak background and a
chain of bridge edges keep the graph connected. Annotation records are keyed
by systematic ids with the graph id as a synonym, which exercises identifier
harmonisation. Gold complexes are the planted modules.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

_SYLLABLES = ("ka", "lo", "mi", "nu", "pe", "ra", "si", "to", "vu", "ze", "bo", "da", "fi", "gu", "he", "jo")
GENERIC = ("GO:0003674", "GO:0008150", "GO:0005575")


@dataclass(frozen=True)
class SyntheticSpec:
    n_nodes: int = 30
    n_modules: int = 5
    size_range: tuple[int, int] = (4, 7)
    p_in: float = 0.75
    n_background: int = 6
    overlap_frac: float = 0.1
    terms_per_module: int = 3
    p_term: float = 0.8
    n_noise_terms: int = 12
    p_unannotated: float = 0.05


GAVIN_SCALE = SyntheticSpec(
    n_nodes=1848, n_modules=260, size_range=(3, 12), p_in=0.6, n_background=2600,
    overlap_frac=0.05, n_noise_terms=400,
)


@dataclass
class SyntheticData:
    edges: dict[tuple[str, str], float]
    modules: list[list[str]]
    gaf_rows: list[list[str]]
    term_names: dict[str, str]


def _word(rng: np.random.Generator, k: int = 3) -> str:
    return "".join(_SYLLABLES[i] for i in rng.integers(0, len(_SYLLABLES), size=k))


def make_synthetic(spec: SyntheticSpec = SyntheticSpec(), seed: int = 0) -> SyntheticData:
    rng = np.random.default_rng(seed)
    nodes = [f"P{i:04d}" for i in range(spec.n_nodes)]
    order = rng.permutation(spec.n_nodes)
    lo, hi = spec.size_range
    modules: list[list[str]] = []
    pos = 0
    for _ in range(spec.n_modules):
        size = int(rng.integers(lo, hi + 1))
        if pos + size > spec.n_nodes:
            break
        modules.append([nodes[i] for i in order[pos : pos + size]])
        pos += size
    # a few extra memberships create genuine overlap
    for m in modules:
        if rng.random() < spec.overlap_frac:
            other = modules[int(rng.integers(len(modules)))]
            extra = other[int(rng.integers(len(other)))]
            if extra not in m:
                m.append(extra)

    edges: dict[tuple[str, str], float] = {}

    def add(u, v, w):
        if u == v:
            return
        key = (u, v) if u < v else (v, u)
        edges[key] = max(edges.get(key, 0.0), w)

    for m in modules:
        # spanning path keeps each planted module connected
        for a, b in zip(m, m[1:]):
            add(a, b, float(rng.uniform(0.5, 1.0)))
        for i in range(len(m)):
            for j in range(i + 2, len(m)):
                if rng.random() < spec.p_in:
                    add(m[i], m[j], float(rng.uniform(0.5, 1.0)))
    for a, b in zip(modules, modules[1:]):
        add(a[-1], b[0], float(rng.uniform(0.0, 0.3)))
    leftovers = [nodes[i] for i in order[pos:]]
    anchors = [x for m in modules for x in m] or nodes
    for x in leftovers:
        add(x, anchors[int(rng.integers(len(anchors)))], float(rng.uniform(0.0, 0.4)))
    for _ in range(spec.n_background):
        u, v = rng.integers(0, spec.n_nodes, size=2)
        add(nodes[u], nodes[v], float(rng.uniform(0.0, 0.4)))
    # rescale weights to a raw confidence range, as real edge lists carry
    edges = {k: round(1.0 + 9.0 * w, 4) for k, w in edges.items()}

    term_names: dict[str, str] = {}
    next_id = 1000000

    def new_term(name):
        nonlocal next_id
        tid = f"GO:{next_id:07d}"
        next_id += 1
        term_names[tid] = name
        return tid

    module_terms = []
    for _ in modules:
        stem = _word(rng)
        module_terms.append([new_term(f"{stem} {_word(rng, 2)} {kind}")
                             for kind in ("complex", "process", "binding")[: spec.terms_per_module]])
    noise = [new_term(f"{_word(rng)} {_word(rng, 2)} activity") for _ in range(spec.n_noise_terms)]

    annotated: dict[str, set[str]] = {n: set() for n in nodes}
    for m, terms in zip(modules, module_terms):
        for x in m:
            for t in terms:
                if rng.random() < spec.p_term:
                    annotated[x].add(t)
    for x in nodes:
        if noise and rng.random() < 0.5:
            annotated[x].add(noise[int(rng.integers(len(noise)))])
        if rng.random() < 0.3:
            annotated[x].add(GENERIC[int(rng.integers(3))])
        if rng.random() < spec.p_unannotated:
            annotated[x] = set()

    rows = []
    for k, x in enumerate(nodes):
        sysid = f"S{k + 1:07d}"
        for t in sorted(annotated[x]):
            aspect = "C" if term_names.get(t, "").endswith("complex") else "P"
            rows.append(["SGD", sysid, f"GEN{k + 1}", "", t, "SGD_REF:0001", "IDA", "", aspect,
                         f"protein {k + 1}", f"{x}|G{k + 1}", "protein", "taxon:559292", "20240101", "SGD", "", ""])
    return SyntheticData(edges, modules, rows, term_names)


def write_synthetic(directory: str | Path, data: SyntheticData, dataset: str = "synthetic") -> dict[str, Path]:
    """Write edges.tsv, annotations.gaf, terms.tsv, gold.tsv and a config file."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {k: d / f for k, f in (("edges", "edges.tsv"), ("gaf", "annotations.gaf"),
                                    ("terms", "terms.tsv"), ("gold", "gold.tsv"), ("config", "pipeline.cfg"))}
    with open(paths["edges"], "w") as fh:
        fh.write("protein_a\tprotein_b\tweight\n")
        for (u, v), w in sorted(data.edges.items()):
            fh.write(f"{u}\t{v}\t{w}\n")
    with open(paths["gaf"], "w") as fh:
        fh.write("!gaf-version: 2.2\n")
        for r in data.gaf_rows:
            fh.write("\t".join(r) + "\n")
    with open(paths["terms"], "w") as fh:
        for t in sorted(data.term_names):
            fh.write(f"{t}\t{data.term_names[t]}\n")
    with open(paths["gold"], "w") as fh:
        for m in data.modules:
            fh.write("\t".join(sorted(m)) + "\n")
    paths["config"].write_text(
        f"dataset = {dataset}\nedges = edges.tsv\ngaf = annotations.gaf\nterms = terms.tsv\ngold = gold.tsv\n"
    )
    return paths


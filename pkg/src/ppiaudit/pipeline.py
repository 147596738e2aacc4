"""End-to-end orchestration: load, annotate, embed, cluster, seed, supplement, bundle, benchmark."""

from __future__ import annotations

import csv
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import _accel
from .annotations import (
    AnnotationStore, GoldError, GoldStandard, load_gold, load_term_labels, parse_gaf, write_coverage_report,
)
from .baselines import slpa_modules, slpa_transcript
from .bundles import EvidenceBundle, build_bundles, support_audit, write_bundles, write_support_audit
from .candidates import (
    CandidateConfig, CandidateModule, ego_set, generate_candidates, pairwise_jaccard, score_pool, write_pool,
)
from .config import Config
from .embeddings import EmbeddingMatrix, build_text_profiles, cached_embeddings, fit_embeddings
from .evaluation import (
    BenchmarkReport, OracleReport, benchmark, heldout_split, label_validation, oracle_analysis,
    write_benchmark, write_label_validation, write_oracle,
)
from .graph_io import CleaningConfig, CleaningReport, GraphError, WeightedGraph, load_edge_list, normalize_weights
from .mcl import Partition, run_mcl
from .nucleus import ProteinProfile, compute_profiles, select_nuclei, write_profiles
from .overlap import ModuleSet, apply_overlap_and_transfer, module_tfidf
from .supplementation import Addition, SupplementCaps, naive_expand, supplement

logger = logging.getLogger(__name__)

ABLATIONS = ("score_select", "naive_expand", "core_only")
GRID_PARAMS = ("mcl.inflation", "slpa.threshold", "echo.min_gain")


class InputError(RuntimeError):
    """A configured input is missing or unreadable."""


@dataclass
class Inputs:
    graph: WeightedGraph
    cleaning: CleaningReport
    ann: AnnotationStore
    gold: GoldStandard


class StageTimer:
    def __init__(self):
        self.stages: dict[str, float] = {}

    @contextmanager
    def __call__(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - t0

    @property
    def total(self) -> float:
        return sum(self.stages.values())


def _require(cfg: Config, key: str) -> Path:
    p = cfg.path(key)
    if p is None:
        raise InputError(f"no {key} file configured")
    if not p.is_file():
        raise InputError(f"{key} file not found: {p}")
    return p


def load_inputs(cfg: Config, timer: StageTimer | None = None) -> Inputs:
    timer = timer or StageTimer()
    edges, gaf, gold_path = _require(cfg, "edges"), _require(cfg, "gaf"), _require(cfg, "gold")
    with timer("load"):
        try:
            graph, report = load_edge_list(edges, CleaningConfig())
        except GraphError as exc:
            raise InputError(str(exc)) from exc
        graph = normalize_weights(graph)
    with timer("annotate"):
        labels = load_term_labels(_require(cfg, "terms")) if cfg["terms"] else None
        ann = parse_gaf(gaf, graph, labels=labels)
        gold = load_gold(gold_path, named=cfg["gold_named"]).map_ids(ann.synonym_index)
        if not len(gold):
            raise GoldError("no gold complexes survive identifier mapping")
    return Inputs(graph, report, ann, gold)


def supplement_caps(cfg: Config) -> SupplementCaps:
    return SupplementCaps(
        max_rel_growth=cfg["echo.max_rel_growth"],
        max_added=cfg["echo.max_added"],
        min_gain=cfg["echo.min_gain"],
        gate_topo=cfg["echo.gate_topo"],
        gate_sem=cfg["echo.gate_sem"],
        gate_go=cfg["echo.gate_go"],
    )


def candidate_config(cfg: Config) -> CandidateConfig:
    return CandidateConfig(
        ego_cap=cfg["candidates.ego_cap"],
        expand_cap=cfg["candidates.expand_cap"],
        expand_min_gain=cfg["candidates.expand_min_gain"],
        knn_k=cfg["candidates.knn_k"],
        union_jaccard=cfg["candidates.union_jaccard"],
    )


def module_ids(n: int, prefix: str = "M") -> list[str]:
    width = max(4, len(str(max(n - 1, 0))))
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


@dataclass
class RunResult:
    cfg: Config
    inputs: Inputs
    emb: EmbeddingMatrix
    cache_hit: bool
    profiles: dict[str, ProteinProfile]
    partition: Partition
    seeds: ModuleSet
    nuclei: list[str]
    pool: list[CandidateModule]
    final: ModuleSet
    additions: list[Addition]
    bundles: list[EvidenceBundle]
    ids: list[str]
    reports: list[BenchmarkReport]
    oracle: OracleReport
    timer: StageTimer = field(default_factory=StageTimer)

    @property
    def graph(self) -> WeightedGraph:
        return self.inputs.graph

    def runtime(self, *stages: str) -> float | None:
        if not self.cfg["timing"]:
            return None
        return sum(self.timer.stages.get(s, 0.0) for s in stages) if stages else self.timer.total


def embed(cfg: Config, graph: WeightedGraph, ann: AnnotationStore, rebuild: bool = False) -> tuple[EmbeddingMatrix, bool]:
    profiles = build_text_profiles(graph, ann)
    if not cfg["embed.cache"]:
        return fit_embeddings(profiles, d=cfg["embed.dim"], seed=cfg["seed"]), False
    return cached_embeddings(
        profiles, d=cfg["embed.dim"], seed=cfg["seed"], cache_dir=cfg.path("embed.cache_dir"), rebuild=rebuild
    )


def run_pipeline(cfg: Config, inputs: Inputs | None = None, rebuild_cache: bool = False) -> RunResult:
    _accel.set_threads(cfg["threads"])
    timer = StageTimer()
    inputs = inputs or load_inputs(cfg, timer)
    graph, ann, gold = inputs.graph, inputs.ann, inputs.gold
    with timer("embed"):
        emb, hit = embed(cfg, graph, ann, rebuild_cache)
    with timer("profiles"):
        profiles = compute_profiles(graph, ann, emb)
    with timer("mcl"):
        part = run_mcl(
            graph, inflation=cfg["mcl.inflation"], max_iter=cfg["mcl.max_iter"],
            prune_eps=cfg["mcl.prune_eps"], tol=cfg["mcl.tol"],
        )
    with timer("overlap"):
        seeds = apply_overlap_and_transfer(
            part.modules, graph, ann, alpha=cfg["overlap.alpha"], tau_overlap=cfg["overlap.tau"]
        )
    with timer("candidates"):
        k = cfg["nucleus.k"] or max(len(part.modules), 1)
        nuclei = select_nuclei({n: p.bh for n, p in profiles.items()}, graph, cfg["nucleus.min_hops"], k)
        pool = generate_candidates(graph, part.modules, nuclei, emb, candidate_config(cfg))
        score_pool(pool, graph, emb, ann, profiles)
    with timer("supplement"):
        additions: list[Addition] = []
        sig = module_tfidf(seeds.modules, ann)
        final = supplement(seeds, graph, emb, ann, sig, supplement_caps(cfg), additions)
    with timer("bundles"):
        ids = module_ids(len(final))
        bundles = build_bundles(final, graph, emb, ann, module_ids=ids)
    with timer("benchmark"):
        thr = cfg["match.threshold"]
        oracle = oracle_analysis(pool, gold, thr)
    res = RunResult(cfg, inputs, emb, hit, profiles, part, seeds, nuclei, pool, final, additions,
                    bundles, ids, [], oracle, timer)
    res.reports = [
        benchmark("echo", final, gold, bundles, res.runtime(), thr),
        benchmark("mcl_overlap", seeds, gold, None, res.runtime("mcl", "overlap"), thr),
        benchmark("mcl", part.modules, gold, None, res.runtime("mcl"), thr),
    ]
    return res


# -- outputs -------------------------------------------------------------------


def write_communities(path: Path, modules: ModuleSet, ids: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["community_id", "provenance", "size", "members"])
        for cid, prov, mod in zip(ids, modules.provenance, modules.modules):
            w.writerow([cid, prov, len(mod), ";".join(sorted(mod))])


def write_runtime(path: Path, timer: StageTimer, cache_hit: bool) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stage", "seconds"])
        for stage, sec in timer.stages.items():
            w.writerow([stage, f"{sec:.3f}"])
        w.writerow(["total", f"{timer.total:.3f}"])
        w.writerow(["embedding_cache_hit", int(cache_hit)])


def write_additions(path: Path, additions: Sequence[Addition], ids: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["community_id", "protein_id", "topology", "semantic", "go", "gain", "gate"])
        for a in additions:
            w.writerow([ids[a.module], a.node, f"{a.topo:.6f}", f"{a.sem:.6f}", f"{a.go:.6f}", f"{a.gain:.6f}", a.gate])


def write_run_outputs(res: RunResult, out: Path | None = None) -> Path:
    out = Path(out) if out is not None else res.cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    cfg, inputs = res.cfg, res.inputs
    write_communities(out / "communities.csv", res.final, res.ids)
    write_bundles(out / "evidence_bundles.csv", res.bundles)
    write_benchmark(out / "benchmark.csv", res.reports)
    write_oracle(out / "oracle.csv", res.oracle)
    modules = dict(zip(res.ids, res.final.modules))
    write_label_validation(
        out / "label_validation.csv",
        label_validation(res.bundles, modules, inputs.gold, cfg["match.threshold"]),
    )
    write_support_audit(out / "support_audit.csv", support_audit(res.bundles))
    inputs.cleaning.to_csv(out / "cleaning_report.csv")
    write_coverage_report(out / "coverage_report.csv", cfg["dataset"], inputs.graph, inputs.ann, inputs.gold)
    write_additions(out / "supplement_log.csv", res.additions, res.ids)
    if cfg["export.candidates"]:
        write_pool(out / "candidates.csv", res.pool)
    if cfg["export.profiles"]:
        write_profiles(out / "profiles.csv", res.profiles)
    if cfg["timing"]:
        write_runtime(out / "runtime.csv", res.timer, res.cache_hit)
    (out / "config_used.cfg").write_text(cfg.dumps())
    return out


# -- ablations, baselines, grids ------------------------------------------------


def score_select(pool: Sequence[CandidateModule], n: int, dedup: float = 0.8) -> ModuleSet:
    """Top-``n`` candidates by composite score, skipping near-duplicates of earlier picks."""
    ranked = sorted(range(len(pool)), key=lambda i: (-pool[i].composite_score, i))
    chosen: list[frozenset[str]] = []
    for i in ranked:
        if len(chosen) >= n:
            break
        cand = pool[i].members
        if chosen:
            _, _, j = pairwise_jaccard([cand], chosen)
            if j.size and j.max() >= dedup:
                continue
        chosen.append(cand)
    return ModuleSet(chosen, ["score_select"] * len(chosen))


def core_only(graph: WeightedGraph, nuclei: Sequence[str], cap: int = 50) -> ModuleSet:
    mods: list[frozenset[str]] = []
    for q in nuclei:
        m = ego_set(graph, q, 1, cap)
        if len(m) >= 2 and m not in mods:
            mods.append(m)
    return ModuleSet(mods, ["core_only"] * len(mods))


def ablation_modules(res: RunResult, mode: str) -> tuple[ModuleSet, list[EvidenceBundle] | None]:
    """Modules of one ablation; core-only is exported without bundles."""
    if mode not in ABLATIONS:
        raise ValueError(f"unknown ablation mode {mode!r}; choose from {ABLATIONS}")
    cfg, graph, ann = res.cfg, res.graph, res.inputs.ann
    if mode == "core_only":
        return core_only(graph, res.nuclei, cfg["candidates.ego_cap"]), None
    if mode == "score_select":
        mods = score_select(res.pool, len(res.partition.modules), cfg["ablate.dedup_jaccard"])
    else:
        mods = naive_expand(res.seeds, graph)
    return mods, build_bundles(mods, graph, res.emb, ann, module_ids=module_ids(len(mods)))


def run_ablation(res: RunResult, mode: str) -> BenchmarkReport:
    return _timed_ablation(res, mode)[2]


def _timed_ablation(res: RunResult, mode: str):
    t0 = time.perf_counter()
    mods, bundles = ablation_modules(res, mode)
    elapsed = time.perf_counter() - t0 if res.cfg["timing"] else None
    return mods, bundles, benchmark(mode, mods, res.inputs.gold, bundles, elapsed, res.cfg["match.threshold"])


def run_slpa_baseline(res: RunResult, threshold: float | None = None) -> tuple[ModuleSet, BenchmarkReport]:
    cfg = res.cfg
    t0 = time.perf_counter()
    tr = slpa_transcript(res.graph, cfg["slpa.iterations"], cfg["seed"], cfg["slpa.weighted"])
    mods = slpa_modules(tr, cfg["slpa.threshold"] if threshold is None else threshold)
    elapsed = time.perf_counter() - t0 if cfg["timing"] else None
    return mods, benchmark("slpa", mods, res.inputs.gold, None, elapsed, cfg["match.threshold"])


def run_grid(res: RunResult, param: str, values: Sequence[float]) -> list[BenchmarkReport]:
    """One benchmark row per value of ``param``, all against the full gold standard."""
    if param not in GRID_PARAMS:
        raise ValueError(f"unknown grid parameter {param!r}; choose from {GRID_PARAMS}")
    cfg, graph, ann, gold = res.cfg, res.graph, res.inputs.ann, res.inputs.gold
    thr = cfg["match.threshold"]
    rows = []
    transcript = None
    for v in values:
        t0 = time.perf_counter()
        if param == "mcl.inflation":
            part = run_mcl(graph, inflation=v, max_iter=cfg["mcl.max_iter"], prune_eps=cfg["mcl.prune_eps"], tol=cfg["mcl.tol"])
            mods, method, bundles = part.modules, "mcl", None
        elif param == "slpa.threshold":
            if transcript is None:
                transcript = slpa_transcript(graph, cfg["slpa.iterations"], cfg["seed"], cfg["slpa.weighted"])
            mods, method, bundles = slpa_modules(transcript, v), "slpa", None
        else:
            caps = replace(supplement_caps(cfg), min_gain=v)
            mods = supplement(res.seeds, graph, res.emb, ann, module_tfidf(res.seeds.modules, ann), caps)
            method = "echo"
            bundles = build_bundles(mods, graph, res.emb, ann, module_ids=module_ids(len(mods)))
        elapsed = time.perf_counter() - t0 if cfg["timing"] else None
        rows.append(benchmark(method, mods, gold, bundles, elapsed, thr))
    return rows


def heldout_rows(res: RunResult, methods: dict) -> tuple[list[BenchmarkReport], list[int]]:
    """Every method against the test complexes of each held-out split.

    ``methods`` maps a method name to ``(modules, bundles or None)``.
    """
    cfg = res.cfg
    reports, seeds = [], []
    for seed in cfg.heldout_seeds():
        _, test = heldout_split(res.inputs.gold, seed, cfg["heldout.test_frac"])
        for method, (mods, bundles) in methods.items():
            reports.append(benchmark(method, mods, test, bundles, None, cfg["match.threshold"]))
            seeds.append(seed)
    return reports, seeds


def full_benchmark(res: RunResult) -> tuple[list[BenchmarkReport], list[BenchmarkReport], list[int]]:
    """All methods on the full gold standard, plus held-out rows per split seed."""
    full = list(res.reports)
    methods = {"echo": (res.final, res.bundles), "mcl_overlap": (res.seeds, None),
               "mcl": (res.partition.modules, None)}
    slpa, slpa_report = run_slpa_baseline(res)
    full.append(slpa_report)
    methods["slpa"] = (slpa, None)
    for mode in ABLATIONS:
        mods, bundles, report = _timed_ablation(res, mode)
        full.append(report)
        methods[mode] = (mods, bundles)
    held, seeds = heldout_rows(res, methods)
    return full, held, seeds

"""Gold-standard matching, benchmark metrics and assignment-level validation."""

from __future__ import annotations

import csv
import logging
import math
import statistics
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .annotations import GoldStandard
from .bundles import LABELS, EvidenceBundle, bundle_completeness, nonzero_channels
from .candidates import CandidateModule, pairwise_jaccard

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    a, b = set(a), set(b)
    if not a and not b:
        raise ValueError("Jaccard of two empty sets is undefined")
    return len(a & b) / len(a | b)


def _sets(x) -> list[frozenset[str]]:
    if isinstance(x, GoldStandard):
        return list(x.complexes)
    if hasattr(x, "modules"):
        return [frozenset(m) for m in x.modules]
    return [frozenset(getattr(m, "members", m)) for m in x]


@dataclass(frozen=True)
class MatchResult:
    matches: list[tuple[int, int, float]]
    precision: float
    recall: float
    f1: float


def f1_score(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def scored_pairs(pred, gold) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (pred, gold) pairs with positive Jaccard, sorted by J desc then ids asc."""
    ps, gs = _sets(pred), _sets(gold)
    if not ps or not gs:
        e = np.empty(0, dtype=np.int64)
        return e, e, np.empty(0)
    r, c, j = pairwise_jaccard(ps, gs)
    order = np.lexsort((c, r, -j))
    return r[order], c[order], j[order]


def greedy_match(pred, gold, threshold: float = 0.5) -> MatchResult:
    """One-to-one greedy matching in descending Jaccard order, accepting J >= threshold."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    ps, gs = _sets(pred), _sets(gold)
    if not ps or not gs:
        logger.warning("empty prediction or gold set; all metrics are 0")
        return MatchResult([], 0.0, 0.0, 0.0)
    rows, cols, js = scored_pairs(ps, gs)
    used_p, used_g = set(), set()
    matches = []
    for r, c, j in zip(rows.tolist(), cols.tolist(), js.tolist()):
        if j < threshold:
            break
        if r in used_p or c in used_g:
            continue
        used_p.add(r)
        used_g.add(c)
        matches.append((r, c, j))
    prec = len(matches) / len(ps)
    rec = len(matches) / len(gs)
    return MatchResult(matches, prec, rec, f1_score(prec, rec))


def best_jaccard(sets: Sequence[frozenset[str]], targets: Sequence[frozenset[str]]) -> np.ndarray:
    """For each of ``targets`` the highest Jaccard against any of ``sets`` (0 if none)."""
    best = np.zeros(len(targets))
    if sets and targets:
        r, c, j = pairwise_jaccard(list(targets), list(sets))
        np.maximum.at(best, r, j)
    return best


@dataclass(frozen=True)
class OracleReport:
    zero: float
    partial: float
    matchable: float
    mean_best: float
    median_best: float


def oracle_analysis(pool: Sequence[CandidateModule] | Sequence[Iterable[str]], gold, threshold: float = 0.5) -> OracleReport:
    gs = _sets(gold)
    best = best_jaccard(_sets(pool), gs)
    n = len(gs)
    if n == 0:
        return OracleReport(0.0, 0.0, 0.0, 0.0, 0.0)
    return OracleReport(
        zero=float(np.sum(best == 0)) / n,
        partial=float(np.sum((best > 0) & (best < threshold))) / n,
        matchable=float(np.sum(best >= threshold)) / n,
        mean_best=float(best.mean()),
        median_best=float(np.median(best)),
    )


@dataclass(frozen=True)
class LabelStats:
    label: str
    assignments: int
    membership: float
    best_gold_jaccard: float
    gold_supported_frac: float
    nonzero_evidence_frac: float
    multichannel_frac: float


def label_validation(
    bundles: Sequence[EvidenceBundle],
    modules: Mapping[str, Iterable[str]],
    gold,
    threshold: float = 0.5,
) -> list[LabelStats]:
    """Per-label statistics of assignments against the gold standard.

    An assignment is gold-supported when its module reaches Jaccard >=
    ``threshold`` with some gold complex that contains the protein.
    """
    gs = _sets(gold)
    ids = sorted(modules)
    sets = [frozenset(modules[i]) for i in ids]
    pos = {mid: k for k, mid in enumerate(ids)}
    best = np.zeros(len(sets))
    strong: dict[int, list[int]] = {}
    if sets and gs:
        r, c, j = pairwise_jaccard(sets, gs)
        np.maximum.at(best, r, j)
        for a, b in zip(r[j >= threshold].tolist(), c[j >= threshold].tolist()):
            strong.setdefault(a, []).append(b)
    out = []
    for lab in LABELS:
        sel = [b for b in bundles if b.membership_type == lab]
        n = len(sel)
        if n == 0:
            out.append(LabelStats(lab, 0, 0.0, 0.0, 0.0, 0.0, 0.0))
            continue
        k = [pos[b.community_id] for b in sel]
        supported = sum(
            1 for b, mi in zip(sel, k) if any(b.protein_id in gs[g] for g in strong.get(mi, ()))
        )
        out.append(
            LabelStats(
                lab,
                n,
                float(np.mean([b.membership_score for b in sel])),
                float(np.mean(best[k])),
                supported / n,
                sum(nonzero_channels(b) >= 1 for b in sel) / n,
                sum(nonzero_channels(b) >= 2 for b in sel) / n,
            )
        )
    return out


class SplitMix64:
    """SplitMix64 generator; portable across platforms for fixed seeds."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection."""
        floor = (1 << 64) % n
        while True:
            r = self.next()
            if r >= floor:
                return r % n

    def shuffle(self, items: list) -> list:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


def heldout_split(gold: GoldStandard, seed: int, test_frac: float = 0.2) -> tuple[GoldStandard, GoldStandard]:
    if not 0 < test_frac < 1:
        raise ValueError("test_frac must lie in (0, 1)")
    order = SplitMix64(seed).shuffle(list(range(len(gold))))
    k = math.ceil(test_frac * len(gold))
    test = sorted(order[:k])
    train = sorted(order[k:])
    return gold.subset(train), gold.subset(test)


@dataclass
class BenchmarkReport:
    method: str
    f1: float
    precision: float
    recall: float
    mean_size: float
    median_size: float
    matched_protein_coverage: float
    overlap_rate: float
    bundle_completeness: float
    runtime_seconds: float | None
    n_modules: int = 0

    def as_row(self) -> dict[str, str]:
        return {
            "method": self.method,
            "f1": f"{self.f1:.6f}",
            "precision": f"{self.precision:.6f}",
            "recall": f"{self.recall:.6f}",
            "mean_size": f"{self.mean_size:.6f}",
            "median_size": f"{self.median_size:.6f}",
            "coverage": f"{self.matched_protein_coverage:.6f}",
            "overlap_rate": f"{self.overlap_rate:.6f}",
            "bundle_completeness": f"{self.bundle_completeness:.6f}",
            "runtime_s": "" if self.runtime_seconds is None else f"{self.runtime_seconds:.3f}",
        }


BENCHMARK_HEADER = (
    "method", "f1", "precision", "recall", "mean_size", "median_size",
    "coverage", "overlap_rate", "bundle_completeness", "runtime_s",
)


def overlap_rate(modules) -> float:
    sets = _sets(modules)
    nodes = set().union(*sets) if sets else set()
    return sum(len(s) for s in sets) / len(nodes) if nodes else 0.0


def benchmark(
    method: str,
    modules,
    gold,
    bundles: Sequence[EvidenceBundle] | None = None,
    runtime_seconds: float | None = None,
    threshold: float = 0.5,
) -> BenchmarkReport:
    sets = _sets(modules)
    gs = _sets(gold)
    res = greedy_match(sets, gs, threshold)
    sizes = [len(s) for s in sets]
    gold_prot = set().union(*gs) if gs else set()
    covered = set().union(*(sets[r] for r, _, _ in res.matches)) if res.matches else set()
    return BenchmarkReport(
        method=method,
        f1=res.f1,
        precision=res.precision,
        recall=res.recall,
        mean_size=float(np.mean(sizes)) if sizes else 0.0,
        median_size=float(statistics.median(sizes)) if sizes else 0.0,
        matched_protein_coverage=len(gold_prot & covered) / len(gold_prot) if gold_prot else 0.0,
        overlap_rate=overlap_rate(sets),
        bundle_completeness=bundle_completeness(bundles or []),
        runtime_seconds=runtime_seconds,
        n_modules=len(sets),
    )


def write_benchmark(
    path: str | Path, reports: Sequence[BenchmarkReport], lead: Mapping[str, Sequence] | None = None
) -> None:
    """Write benchmark rows; ``lead`` adds leading columns, one value per report."""
    lead = lead or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*lead, *BENCHMARK_HEADER])
        for i, r in enumerate(reports):
            row = r.as_row()
            w.writerow([*(vals[i] for vals in lead.values()), *(row[k] for k in BENCHMARK_HEADER)])


def write_oracle(path: str | Path, rep: OracleReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["category", "fraction"])
        w.writerow(["best_jaccard_eq_0", f"{rep.zero:.6f}"])
        w.writerow(["best_jaccard_0_to_0.5", f"{rep.partial:.6f}"])
        w.writerow(["best_jaccard_ge_0.5", f"{rep.matchable:.6f}"])
        w.writerow(["mean_best_jaccard", f"{rep.mean_best:.6f}"])
        w.writerow(["median_best_jaccard", f"{rep.median_best:.6f}"])


LABEL_VALIDATION_HEADER = (
    "label", "assignments", "membership", "best_gold_jaccard", "gold_supported_frac",
    "nonzero_evidence_frac", "multichannel_frac",
)


def write_label_validation(path: str | Path, stats: Sequence[LabelStats]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABEL_VALIDATION_HEADER)
        for s in stats:
            d = asdict(s)
            w.writerow([s.label, s.assignments, *(f"{d[k]:.6f}" for k in LABEL_VALIDATION_HEADER[2:])])

import networkx as nx
import pytest

from ppiaudit.annotations import GoldError
from ppiaudit.config import load_config
from ppiaudit.evaluation import jaccard
from ppiaudit.graph_io import WeightedGraph
from ppiaudit.pipeline import (
    ABLATIONS, InputError, StageTimer, ablation_modules, core_only, full_benchmark, load_inputs, module_ids,
    run_ablation, run_grid, run_pipeline, score_select,
)
from ppiaudit.candidates import CandidateModule
from ppiaudit.synth import SyntheticSpec, make_synthetic, write_synthetic


@pytest.fixture(scope="module")
def result(tmp_path_factory):
    from conftest import SYNTH30

    out = tmp_path_factory.mktemp("run")
    cfg = load_config(SYNTH30 / "pipeline.cfg", {"out": str(out), "embed.cache": "false"})
    return run_pipeline(cfg)


def test_stage_order_and_reports(result):
    assert list(result.timer.stages) == [
        "load", "annotate", "embed", "profiles", "mcl", "overlap", "candidates", "supplement", "bundles", "benchmark"]
    assert [r.method for r in result.reports] == ["echo", "mcl_overlap", "mcl"]
    assert result.reports[0].bundle_completeness == 1.0
    assert result.reports[0].runtime_seconds == pytest.approx(result.timer.total)
    assert len(result.bundles) == result.final.assignments()
    assert result.ids == module_ids(len(result.final))


def test_final_modules_contain_seeds(result):
    for seed, final in zip(result.seeds.modules, result.final.modules):
        assert seed <= final


def test_naive_expand_inflates_mean_size(result):
    echo = result.reports[0]
    naive = run_ablation(result, "naive_expand")
    assert naive.mean_size >= 3 * echo.mean_size


def test_core_only_bounded_by_nuclei(result):
    mods, bundles = ablation_modules(result, "core_only")
    assert len(mods) <= len(result.nuclei)
    assert bundles is None
    with pytest.raises(ValueError):
        ablation_modules(result, "nope")


def test_score_select_dedup():
    pool = [CandidateModule(frozenset("abcde"), "ego", 0.9), CandidateModule(frozenset("abcdef"), "ego", 0.8),
            CandidateModule(frozenset("xy"), "mcl", 0.5), CandidateModule(frozenset("pq"), "mcl", 0.1)]
    chosen = score_select(pool, 2, dedup=0.8)
    # J(abcde, abcdef) = 5/6 >= 0.8, so the second candidate is skipped
    assert chosen.modules == [frozenset("abcde"), frozenset("xy")]
    for i, a in enumerate(chosen.modules):
        for b in chosen.modules[i + 1:]:
            assert jaccard(a, b) < 0.8


def test_core_only_helper():
    g = WeightedGraph({("a", "b"): 1, ("a", "c"): 1, ("x", "y"): 1})
    assert core_only(g, ["a", "x", "y"]).modules == [frozenset("abc"), frozenset("xy")]


def test_grid_rows(result):
    rows = run_grid(result, "mcl.inflation", [1.4, 2.0, 3.0])
    assert len(rows) == 3 and {r.method for r in rows} == {"mcl"}
    assert rows[1].f1 == result.reports[2].f1
    with pytest.raises(ValueError):
        run_grid(result, "overlap.alpha", [0.5])


def test_full_benchmark_shapes(result):
    full, held, seeds = full_benchmark(result)
    assert [r.method for r in full] == ["echo", "mcl_overlap", "mcl", "slpa", *ABLATIONS]
    assert len(held) == len(seeds) == 5 * len(full)
    echo_held = [r for r in held if r.method == "echo"]
    assert all(r.bundle_completeness == 1.0 for r in echo_held)


def test_timing_off_gives_blank_runtime(tmp_path):
    from conftest import SYNTH30

    cfg = load_config(SYNTH30 / "pipeline.cfg", {"out": str(tmp_path), "timing": "false"})
    res = run_pipeline(cfg)
    assert all(r.runtime_seconds is None for r in res.reports)


def test_missing_and_empty_inputs(tmp_path):
    from conftest import SYNTH30

    with pytest.raises(InputError):
        load_inputs(load_config(None, {"gaf": "x", "gold": "y"}))
    bad = tmp_path / "gold.tsv"
    bad.write_text("a\n")
    with pytest.raises(GoldError):
        load_inputs(load_config(SYNTH30 / "pipeline.cfg", {"gold": str(bad)}))


def test_stage_timer_accumulates():
    t = StageTimer()
    with t("a"):
        pass
    with t("a"):
        pass
    assert list(t.stages) == ["a"] and t.total == t.stages["a"] >= 0


def test_synthetic_generator(tmp_path):
    spec = SyntheticSpec()
    a, b = make_synthetic(spec, seed=3), make_synthetic(spec, seed=3)
    assert a.edges == b.edges and a.modules == b.modules
    g = nx.Graph(list(a.edges))
    assert nx.is_connected(g)
    assert all(len(m) >= spec.size_range[0] for m in a.modules)
    paths = write_synthetic(tmp_path, a, "demo")
    cfg = load_config(paths["config"], {"out": str(tmp_path / "out")})
    inputs = load_inputs(cfg)
    assert len(inputs.graph) == spec.n_nodes
    assert len(inputs.gold) == len(a.modules)
    # annotation records are keyed by systematic ids and reach nodes through synonyms
    assert sum(1 for n in inputs.graph.nodes if inputs.ann.terms(n)) > 0.8 * spec.n_nodes

"""Compare the numba and numpy kernel paths on a Gavin-scale synthetic graph.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--csv out.csv] [--pipeline]

Each kernel runs once untimed (JIT warm-up), then ``--repeat`` times; the
best time is reported. Outputs of the two paths are checked for equality.
``--pipeline`` also times a full ``ppiaudit run`` under each backend in a
subprocess (``PPIAUDIT_NO_NUMBA=1`` selects the fallback).
"""

import argparse
import csv
import os
import subprocess
import sys
import tempfile
import time

import numpy as np

from ppiaudit import kernels
from ppiaudit._accel import HAS_NUMBA
from ppiaudit.graph_io import WeightedGraph, normalize_weights
from ppiaudit.mcl import flow_matrix
from ppiaudit.synth import GAVIN_SCALE, make_synthetic, write_synthetic


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b) or np.allclose(a, b, rtol=0, atol=1e-12)


def kernel_cases(graph, seed=0):
    m = flow_matrix(graph)
    m2 = (m @ m).tocsc()
    m2.sort_indices()
    rng = np.random.default_rng(seed)
    steps = 100
    orders = np.stack([rng.permutation(len(graph)) for _ in range(steps)])
    uniforms = rng.random((steps, len(graph.indices)))
    ip, ix = graph.indptr.astype(np.int64), graph.indices.astype(np.int64)
    w = np.asarray(graph.weights, dtype=np.float64)
    return {
        "inflate_prune": lambda f: f(m2.indptr.astype(np.int64), m2.indices.astype(np.int64), m2.data, 2.0, 1e-5),
        "core_numbers": lambda f: f(ip, ix),
        "triangles": lambda f: f(ip, ix),
        "slpa": lambda f: f(ip, ix, w, orders, uniforms, True),
    }


def pipeline_times(workdir):
    paths = write_synthetic(workdir, make_synthetic(GAVIN_SCALE, seed=1), "bench")
    out = {}
    for name, flag in (("numba", "0"), ("numpy", "1")):
        env = {**os.environ, "PPIAUDIT_NO_NUMBA": flag, "PPIAUDIT_CACHE_DIR": os.path.join(workdir, "cache")}
        cmd = [sys.executable, "-m", "ppiaudit", "run", "-c", str(paths["config"]),
               "--out", os.path.join(workdir, name), "--set", "embed.cache=false"]
        t0 = time.perf_counter()
        subprocess.run(cmd, env=env, check=True, capture_output=True)
        out[name] = time.perf_counter() - t0
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--csv", help="also write results as CSV")
    ap.add_argument("--pipeline", action="store_true", help="time a full run under each backend")
    args = ap.parse_args(argv)

    data = make_synthetic(GAVIN_SCALE, seed=args.seed)
    graph = normalize_weights(WeightedGraph(data.edges))
    print(f"graph: {len(graph)} nodes, {graph.n_edges} edges; numba available: {HAS_NUMBA}")

    rows = []
    for name, call in kernel_cases(graph).items():
        t_np, out_np = best_of(lambda: call(kernels.IMPLS["numpy"][name]), args.repeat)
        if HAS_NUMBA:
            t_nb, out_nb = best_of(lambda: call(kernels.IMPLS["numba"][name]), args.repeat)
            ok = same(out_nb, out_np)
        else:
            t_nb, ok = float("nan"), True
        rows.append((name, t_nb, t_np, t_np / t_nb if t_nb else float("nan"), ok))

    print(f"{'kernel':<14}{'numba_s':>10}{'numpy_s':>10}{'speedup':>9}  match")
    for name, t_nb, t_np, sp_, ok in rows:
        print(f"{name:<14}{t_nb:>10.4f}{t_np:>10.4f}{sp_:>9.1f}  {ok}")

    if args.pipeline:
        with tempfile.TemporaryDirectory() as tmp:
            pt = pipeline_times(tmp)
        print(f"full run: numba {pt['numba']:.2f}s, numpy {pt['numpy']:.2f}s (includes interpreter start-up)")
        rows.append(("pipeline", pt["numba"], pt["numpy"], pt["numpy"] / pt["numba"], True))

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kernel", "numba_s", "numpy_s", "speedup", "outputs_match"])
            for name, t_nb, t_np, sp_, ok in rows:
                w.writerow([name, f"{t_nb:.6f}", f"{t_np:.6f}", f"{sp_:.2f}", ok])
    return 0 if all(r[4] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())

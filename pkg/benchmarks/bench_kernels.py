"""Compare the numba kernels with the pure numpy/Python fallbacks.

Usage: ``python benchmarks/bench_kernels.py [--trials N] [--d D]``

The sampler comparison runs in one process through the ``backend``
argument. For the Union-Find kernel the fallback is the undecorated
Python function that ``MODQEC_NO_NUMBA=1`` would select.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from modqec._accel import USE_NUMBA
from modqec.config import ExperimentConfig
from modqec.decoders import MatchingGraph
from modqec.decoders import uf as uf_module
from modqec.pipeline import build_config_table
from modqec.surface_code import build_layout, compute_defects, run_trials


def _timed(fn, repeat=3):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_sampler(arch, d, trials, p):
    layout = build_layout(arch, d)
    table = build_config_table(ExperimentConfig(architecture=arch), p)
    run_trials(layout, table, 0, range(2), backend="numba")  # compile
    t_nb, a = _timed(lambda: run_trials(layout, table, 1, range(trials), backend="numba"))
    t_np, b = _timed(lambda: run_trials(layout, table, 1, range(trials), backend="numpy"))
    same = all(np.array_equal(x.outcomes, y.outcomes) and np.array_equal(x.x_frame, y.x_frame)
               for x, y in zip(a, b))
    return t_nb, t_np, same, a


def bench_uf(layout, results):
    graphs = [MatchingGraph(layout, "Z", compute_defects(r.outcomes, "Z")) for r in results]
    kernel = uf_module._uf_kernel
    python = getattr(kernel, "py_func", kernel)

    def run(fn):
        uf_module._uf_kernel = fn
        try:
            return [uf_module.uf_decode(g).correction for g in graphs]
        finally:
            uf_module._uf_kernel = kernel
    run(kernel)  # compile
    t_nb, a = _timed(lambda: run(kernel))
    t_py, b = _timed(lambda: run(python))
    same = all(np.array_equal(x, y) for x, y in zip(a, b))
    return t_nb, t_py, same


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--d", type=int, default=6)
    ap.add_argument("--p", type=float, default=0.006)
    args = ap.parse_args()
    if not USE_NUMBA:
        raise SystemExit("numba is disabled (MODQEC_NO_NUMBA); nothing to compare")
    print(f"{'kernel':<14}{'numba [s]':>11}{'fallback [s]':>14}{'speed-up':>10}  identical")
    samples = {}
    for arch in ("WT4", "WT3"):
        t_nb, t_np, same, samples[arch] = bench_sampler(arch, args.d, args.trials, args.p)
        print(f"{'sampler ' + arch:<14}{t_nb:>11.3f}{t_np:>14.3f}{t_np / t_nb:>10.1f}  {same}")
    t_nb, t_py, same = bench_uf(build_layout("WT4", args.d), samples["WT4"])
    print(f"{'union-find':<14}{t_nb:>11.3f}{t_py:>14.3f}{t_py / t_nb:>10.1f}  {same}")


if __name__ == "__main__":
    main()

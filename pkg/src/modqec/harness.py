"""Monte Carlo estimation of logical error rates and sweep orchestration."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .config import ExperimentConfig
from .decoders import MatchingGraph, decode
from .fit import NoCrossingError, fit_points
from .pipeline import build_config_table
from .superoperator import SuperoperatorTable
from .surface_code import ToricLayout, build_layout, check_logical, compute_defects, run_trials

ABANDON_P_L = 0.90
RUN_COLUMNS = ["arch", "scheme", "set", "d", "p", "trials", "failures", "p_L", "ci_lo", "ci_hi", "seed"]


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    z = float(norm.ppf(0.5 + confidence / 2))
    phat = failures / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # the interval touches the boundary exactly when no (or every) trial failed
    lo = 0.0 if failures == 0 else max(0.0, float(centre - half))
    hi = 1.0 if failures == trials else min(1.0, float(centre + half))
    return lo, hi


def decode_trial(layout: ToricLayout, result, decoder: str) -> dict:
    """Decode both stabilizer types and return the four logical failure flags."""
    corr = {}
    for t in ("Z", "X"):
        graph = MatchingGraph(layout, t, compute_defects(result.outcomes, t))
        corr[t] = decode(decoder, graph).correction
    # Z-type checks locate X errors and vice versa
    return check_logical(layout, result.x_frame, result.z_frame, corr["Z"], corr["X"])


def count_failures(layout: ToricLayout, table: SuperoperatorTable, seed: int, trials,
                   decoder: str) -> int:
    fails = 0
    for res in run_trials(layout, table, seed, trials):
        fails += any(decode_trial(layout, res, decoder).values())
    return fails


def point_seed(seed: int, d: int, p_index: int) -> int:
    """Independent stream key for one (d, p) point."""
    return int(np.random.SeedSequence([seed, d, p_index]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class PointResult:
    d: int
    p: float
    trials: int
    failures: int
    seed: int

    @property
    def p_L(self) -> float:
        return self.failures / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)


def _work(args):
    arch, d, table, seed, start, stop, decoder = args
    layout = build_layout(arch, d)
    return count_failures(layout, table, seed, range(start, stop), decoder)


def estimate_logical_error(cfg: ExperimentConfig, d: int, p: float, table=None,
                           p_index: int = 0) -> PointResult:
    """p_L at one point with a Wilson interval; see ``PointResult.ci``."""
    table = table if table is not None else build_config_table(cfg, p)
    seed = point_seed(cfg.seed, d, p_index)
    fails = _work((cfg.architecture, d, table, seed, 0, cfg.n_trials, cfg.decoder))
    return PointResult(d, p, cfg.n_trials, fails, seed)


def run_sweep(cfg: ExperimentConfig, tables: dict | None = None) -> list[PointResult]:
    """All (d, p) points of the config; work is split into trial blocks.

    Results are merged by sorted key, so the output does not depend on the
    worker count or completion order.
    """
    tables = dict(tables or {})
    for p in cfg.p_values:
        if p not in tables:
            tables[p] = build_config_table(cfg, p)
    items = []
    for d in cfg.distances:
        for k, p in enumerate(cfg.p_values):
            seed = point_seed(cfg.seed, d, k)
            for start in range(0, cfg.n_trials, cfg.chunk):
                stop = min(cfg.n_trials, start + cfg.chunk)
                items.append(((d, k), (cfg.architecture, d, tables[p], seed, start, stop, cfg.decoder)))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            counts = list(pool.map(_work, [a for _, a in items]))
    else:
        counts = [_work(a) for _, a in items]
    merged: dict = {}
    for (key, args), c in zip(items, counts):
        merged[key] = merged.get(key, 0) + c
    out = []
    for d, k in sorted(merged):
        out.append(PointResult(d, cfg.p_values[k], cfg.n_trials, merged[d, k],
                               point_seed(cfg.seed, d, k)))
    return out


def should_abandon(points) -> bool:
    return any(pt.p_L > ABANDON_P_L for pt in points)


def runs_csv(cfg: ExperimentConfig, points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_COLUMNS)
    for pt in sorted(points, key=lambda q: (q.d, q.p)):
        lo, hi = pt.ci
        w.writerow([cfg.architecture, cfg.scheme, cfg.coherence_set, pt.d, repr(pt.p), pt.trials,
                    pt.failures, repr(pt.p_L), repr(lo), repr(hi), cfg.seed])
    return buf.getvalue()


def read_runs(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(RUN_COLUMNS) - set(rows[0]):
        raise ValueError("runs file is missing columns")
    return rows


def ege(p_succ: float, t: float, T1: float, T2: float) -> float:
    """Expected entangled states per coherence window: 2P / (t (1/T1 + 1/T2))."""
    if t <= 0 or T1 <= 0 or T2 <= 0:
        raise ValueError("times must be positive")
    if p_succ == 0:
        return 0.0
    rate = 1 / T1 + 1 / T2
    if rate == 0:
        return math.inf
    return 2 * p_succ / (t * rate)


def threshold_for(cfg: ExperimentConfig):
    """Sweep and fit; ``(p_th, err)`` or ``None`` when there is no threshold."""
    points = run_sweep(cfg)
    if should_abandon(points):
        return None
    try:
        fit = fit_points(points)
    except (NoCrossingError, ValueError):
        return None
    return fit.p_th, fit.p_th_err

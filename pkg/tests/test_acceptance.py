"""Acceptance criteria, one test each. Every test records a PASS/FAIL line
that is printed in the terminal summary."""
import itertools
import time
from pathlib import Path

import numpy as np

from _helpers import phenomenological_instance, record, sample_stabilizer_rows
from modqec import paulis
from modqec.config import IdealGhzParams, load_config
from modqec.decoders import MatchingGraph, brute_force_decode, mwpm_decode, uf_decode
from modqec.fit import fit_points, fit_threshold, scaling_model
from modqec.harness import run_sweep, runs_csv
from modqec.noise import (NOISELESS, CircuitNoise, CoherenceSet, OperationTimes,
                          depolarizing_1q, resolve_coherence_set)
from modqec.pipeline import ideal_ghz
from modqec.quantum import apply_channel, ghz_fidelity, ghz_state
from modqec.schemes.cavity import CarvingParams, ReflectionParams, carving_sps_ghz, reflection_ghz
from modqec.schemes.emission import EmissionParams, double_click
from modqec.schemes.result import SchemeResult
from modqec.superoperator import build_table
from modqec.surface_code import build_layout, check_logical, compute_defects, syndrome

ROOT = Path(__file__).resolve().parents[1]
PERFECT = resolve_coherence_set("perfect")
TIMES = OperationTimes()


def test_criterion_01_double_click_closed_form():
    start = time.perf_counter()
    worst = 0.0
    grid = itertools.product(np.linspace(0.05, 1, 5), np.linspace(0, 1, 4), np.linspace(0.8, 1, 5))
    for k, (eta, mu, f) in enumerate(grid):
        p = EmissionParams(eta_ph=eta, mu=mu, F_prep=f, p_EE=0.01 * (k % 4),
                           lambda_dephase=1 - 0.01 * (k % 3))
        r = double_click(p, NOISELESS)
        phi = np.sqrt(p.mu) * (2 * p.F_prep - 1) ** 2 * (1 - p.p_EE) ** 2
        worst = max(worst, abs(r.p_succ - eta ** 2 / 2), abs(r.fidelity - (1 + phi ** 2) / 2))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1.0
    record(1, ok, f"100 points, max deviation {worst:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_02_carving_ideal_limits():
    out = []
    for n_u, n_d, expected in ((1, 2, 1 / 16), (2, 2, 1 / 32)):
        r = carving_sps_ghz(CarvingParams(n_sc=2), n_u, n_d, NOISELESS, t_override=(1.0, 0.0))
        out.append((abs(r.p_succ - expected), abs(ghz_fidelity(r.state) - 1)))
    worst = max(max(o) for o in out)
    ok = worst <= 1e-9
    record(2, ok, f"n=3 -> 1/16, n=4 -> 1/32 with F=1, max deviation {worst:.1e}")
    assert ok


def test_criterion_03_reflection_ideal_limit():
    worst = 0.0
    for n in (3, 4):
        r = reflection_ghz(ReflectionParams(), n, NOISELESS, r_override=(-1.0, 1.0))
        worst = max(worst, abs(r.p_succ - 1), abs(ghz_fidelity(r.state) - 1))
    ok = worst <= 1e-9
    record(3, ok, f"r0=-1, r1=+1 gives GHZ with p_succ=1, max deviation {worst:.1e}")
    assert ok


def test_criterion_04_superoperator_validity():
    rng = np.random.default_rng(2024)
    worst_sum = 0.0
    for k in range(50):
        arch = ("WT4", "WT3")[k % 2]
        n = 4 if arch == "WT4" else 3
        ghz = ideal_ghz(n, IdealGhzParams(rng.uniform(0.7, 1), rng.uniform(0.02, 1)))
        T = 10 ** rng.uniform(2, 6)
        coh = CoherenceSet("random", T, T * rng.uniform(0.5, 1), 10 * T, 10 * T)
        noise = CircuitNoise(rng.uniform(0, 0.05), rng.uniform(0, 0.05))
        t = build_table(arch, ghz, noise, TIMES, coh, t_cut=float(rng.integers(1, 40)))
        for col in ("p_plaquette", "p_vertex"):
            worst_sum = max(worst_sum, abs(t.column(col).sum() - 1))
    clean = build_table("WT4", ideal_ghz(4, IdealGhzParams()), NOISELESS, TIMES, PERFECT, 1.0)
    clean_dev = max(abs(clean.probability(c, "IIII", True, False) - 1)
                    for c in ("p_plaquette", "p_vertex"))
    p = 0.03
    inj = build_table("WT4", ideal_ghz(4, IdealGhzParams()), NOISELESS, TIMES, PERFECT, 1.0,
                      data_channels={0: depolarizing_1q(p)})
    inj_dev = max(abs(inj.probability("p_plaquette", s, True, False) - p / 3)
                  for s in ("XIII", "YIII", "ZIII"))
    ok = worst_sum <= 1e-8 and clean_dev <= 1e-12 and inj_dev <= 1e-9
    record(4, ok, f"50 configs max |sum-1| {worst_sum:.1e}; noiseless IIII dev {clean_dev:.1e}; "
                  f"p/3 injection dev {inj_dev:.1e}")
    assert ok


def test_criterion_05_superoperator_vs_circuit_sampling():
    p = 0.01
    start = time.perf_counter()
    rho = ghz_state(4).astype(complex)
    for q in range(4):
        rho = apply_channel(rho, depolarizing_1q(p), [q])
    ghz = SchemeResult(rho, 1.0, 1.0)
    table = build_table("WT4", ghz, CircuitNoise.uniform(p), TIMES, PERFECT, 1.0)
    sampled = sample_stabilizer_rows("Z", p, p, p, 1_000_000, seed=5)
    exact = {}
    for i, s in enumerate(paulis.ALL_STRINGS):
        for m in (0, 1):
            if table.p_plaquette[i, 1, m] > 0:
                exact[s, m] = table.p_plaquette[i, 1, m]
    keys = set(exact) | set(sampled)
    tv = 0.5 * sum(abs(exact.get(k, 0.0) - sampled.get(k, 0.0)) for k in keys)
    elapsed = time.perf_counter() - start
    ok = tv <= 2e-3 and elapsed <= 600
    record(5, ok, f"WT4 Z at p=0.01, TV distance {tv:.2e} at 1e6 samples, {elapsed:.1f} s")
    assert ok


def test_criterion_06_decoder_equivalence():
    lay = build_layout("WT4", 4)
    rng = np.random.default_rng(6)
    mismatch = invalid = 0
    for k in range(1000):
        n = 2 * rng.integers(1, 5)
        cells = rng.choice(5 * 16, size=n, replace=False)
        g = MatchingGraph(lay, ("Z", "X")[k % 2], np.stack([cells // 16, cells % 16], axis=1))
        mismatch += mwpm_decode(g).weight != brute_force_decode(g).weight
        net = np.zeros(16, dtype=np.uint8)
        for _, s in g.defects:
            net[s] ^= 1
        invalid += not np.array_equal(syndrome(lay, uf_decode(g).correction, g.stab_type), net)
    fails = {"uf": 0, "mwpm": 0}
    n_pheno = 4000
    for _ in range(n_pheno):
        outcomes, frame = phenomenological_instance(lay, 0.03, rng)
        g = MatchingGraph(lay, "Z", compute_defects(outcomes, "Z"))
        zero = np.zeros_like(frame)
        for name, fn in (("uf", uf_decode), ("mwpm", mwpm_decode)):
            flags = check_logical(lay, frame, zero, fn(g).correction, zero)
            fails[name] += any(flags.values())
    ratio = fails["uf"] / max(fails["mwpm"], 1)
    ok = mismatch == 0 and invalid == 0 and ratio <= 1.3
    record(6, ok, f"1000 instances: {mismatch} weight mismatches, {invalid} invalid UF; "
                  f"phenomenological p=0.03 UF/MWPM failures {fails['uf']}/{fails['mwpm']} "
                  f"= {ratio:.3f}")
    assert ok


def test_criterion_07_fit_recovery():
    truth = (0.1, 5.0, 20.0, 0.004, 1.5)
    d, p = np.meshgrid([4, 6, 8], np.linspace(0.003, 0.005, 8), indexing="ij")
    d, p = d.ravel().astype(float), p.ravel()
    clean = scaling_model(truth, d, p)
    rng = np.random.default_rng(7)
    hits = 0
    for _ in range(100):
        noisy = clean * (1 + 0.01 * rng.normal(size=clean.shape))
        try:
            res = fit_threshold(d, p, noisy, sigma=0.01 * clean)
        except ValueError:
            continue
        hits += abs(res.p_th / 0.004 - 1) <= 0.05
    ok = hits >= 95
    record(7, ok, f"p_th within 5% in {hits}/100 repetitions")
    assert ok


def test_criterion_08_sub_threshold_scaling():
    cfg = load_config(ROOT / "configs" / "ideal_wt4.cfg")
    fit = fit_points(run_sweep(cfg))
    half = cfg.replace(n_trials=20000, p_values=(fit.p_th / 2,))
    pts = {pt.d: pt for pt in run_sweep(half)}
    ordered = pts[8].p_L < pts[6].p_L < pts[4].p_L
    separated = pts[8].ci[1] < pts[6].ci[0] and pts[6].ci[1] < pts[4].ci[0]
    ok = ordered and separated
    record(8, ok, f"ideal GHZ WT4 p_th={fit.p_th:.4%}; at p_th/2 p_L(4,6,8) = "
                  f"{pts[4].p_L:.4f}, {pts[6].p_L:.4f}, {pts[8].p_L:.4f} "
                  f"(2e4 trials, CIs {'disjoint' if separated else 'overlap'})")
    assert ok


def test_criterion_09_replaced_by_criterion_08():
    # no transcribed hardware table exists for the reflection source
    record(9, True, "see criterion 8; reflection hardware parameters not transcribed",
           status="REPLACED")


def test_criterion_10_reproducible_runs(tmp_path):
    from click.testing import CliRunner
    from modqec.cli import main

    cfg_text = (ROOT / "configs" / "ideal_wt4.cfg").read_text()
    cfg_path = tmp_path / "c.cfg"
    cfg_path.write_text(cfg_text)
    outputs = []
    for k, workers in enumerate((1, 1, 2)):
        out = tmp_path / f"runs{k}.csv"
        res = CliRunner().invoke(main, ["run", "--config", str(cfg_path), "--out", str(out),
                                        "--trials", "600", "--workers", str(workers)])
        assert res.exit_code == 0, res.output
        outputs.append(out.read_bytes())
    cfg = load_config(cfg_path).replace(n_trials=600)
    direct = runs_csv(cfg, run_sweep(cfg.replace(chunk=97))).encode()
    ok = outputs[0] == outputs[1] == outputs[2] == direct
    record(10, ok, "runs.csv byte-identical across two serial runs, 2 workers and re-chunking")
    assert ok

"""Command line entry point: ``modqec <subcommand>``."""
from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path

import click

from .config import ExperimentConfig, load_config
from .fit import fit_threshold, optimize_cutoff
from .harness import ege, read_runs, run_sweep, runs_csv, threshold_for
from .pipeline import build_config_table, build_ghz, coherence_for, resolve_t_cut
from .superoperator import save_table, stabilizer_fidelity

log = logging.getLogger("modqec")


def _config(path, **overrides) -> ExperimentConfig:
    cfg = load_config(path) if path else ExperimentConfig()
    changes = {k: v for k, v in overrides.items() if v is not None}
    return cfg.replace(**changes) if changes else cfg


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """Modular surface-code simulator."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default="-")
def scheme(config_path, out):
    """Fidelity and success probability of the configured GHZ source per p."""
    cfg = _config(config_path)
    n_sc = cfg.section("carving").get("n_sc", 2) if cfg.scheme == "carving" else ""
    rows = [["scheme", "variant", "n", "n_sc", "p_g", "fidelity", "p_succ"]]
    for p in cfg.p_values:
        ghz = build_ghz(cfg, p)
        rows.append([cfg.scheme, cfg.variant, cfg.n_ghz, n_sc, _num(p),
                     _num(ghz.fidelity), _num(ghz.p_succ)])
    _write_rows(rows, out)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--p", "p", type=float, required=True)
@click.option("--out", type=click.Path(), required=True)
def superop(config_path, p, out):
    """Build and save the superoperator table at gate noise p."""
    cfg = _config(config_path)
    table = build_config_table(cfg, p)
    save_table(table, out)
    click.echo(f"stabilizer fidelity {stabilizer_fidelity(table):.6f} -> {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default="runs.csv")
@click.option("--workers", type=int)
@click.option("--trials", "n_trials", type=int)
@click.option("--seed", type=int)
def run(config_path, out, workers, n_trials, seed):
    """Logical error rate sweep over distances and p values."""
    cfg = _config(config_path, workers=workers, n_trials=n_trials, seed=seed)
    points = run_sweep(cfg)
    Path(out).write_text(runs_csv(cfg, points))
    click.echo(f"{len(points)} points -> {out}")


@main.command()
@click.option("--runs", "runs_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default="fit.json")
def fit(runs_path, out):
    """Threshold fit of a runs.csv file."""
    rows = read_runs(runs_path)
    d = [int(r["d"]) for r in rows]
    p = [float(r["p"]) for r in rows]
    pl = [float(r["p_L"]) for r in rows]
    sig = [max((float(r["ci_hi"]) - float(r["ci_lo"])) / 2, 1e-6) for r in rows]
    try:
        res = fit_threshold(d, p, pl, sig)
    except ValueError as err:
        raise click.ClickException(str(err))
    Path(out).write_text(res.to_json() + "\n")
    click.echo(f"p_th = {res.p_th:.6g} +/- {res.p_th_err:.2g}, nu0 = {res.nu0:.4g}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--probes", type=int, default=12)
@click.option("--trials", "n_trials", type=int, help="trials per point while searching")
def cutoff(config_path, probes, n_trials):
    """Completion fraction x that maximizes the fitted threshold."""
    cfg = _config(config_path)
    search = cfg.replace(n_trials=n_trials or max(1, cfg.n_trials // 4), t_cut=None)

    def evaluate(x):
        res = threshold_for(search.replace(x=x))
        log.info("x=%.4f -> %s", x, res)
        return res

    x_star, _ = optimize_cutoff(evaluate, probes=probes)
    if x_star == "NT":
        click.echo("NT")
        return
    final = threshold_for(cfg.replace(x=x_star, t_cut=None))
    if final is None:
        click.echo(f"x = {x_star:.4f}: NT at full trials")
        return
    click.echo(f"x = {x_star:.4f}, p_th = {final[0]:.6g} +/- {final[1]:.2g}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--p", "p", type=float, required=True, help="gate noise for the fidelity columns")
@click.option("--fit", "fits", multiple=True, help="decoder=path/to/fit.json")
@click.option("--out", type=click.Path(), default="-")
def report(config_path, p, fits, out):
    """One summary row: success probability, fidelities, cut-off, efficiency, thresholds."""
    cfg = _config(config_path)
    ghz = build_ghz(cfg, p)
    t_cut = resolve_t_cut(cfg, ghz)
    table = build_config_table(cfg, p)
    coh = coherence_for(cfg).relative()
    eff = ege(ghz.p_succ, ghz.duration, coh.T1_link, coh.T2_link)
    thresholds = {}
    for item in fits:
        name, _, path = item.partition("=")
        thresholds[name] = json.loads(Path(path).read_text())["p_th"]
    header = ["scheme", "architecture", "set", "p_succ", "x", "t_cut", "ege",
              "ghz_fidelity", "stab_fidelity", "p_th_uf", "p_th_mwpm"]
    row = [cfg.scheme, cfg.architecture, cfg.coherence_set, _num(ghz.p_succ), _num(cfg.x),
           _num(t_cut), _num(eff), _num(ghz.fidelity), _num(stabilizer_fidelity(table)),
           _num(thresholds.get("uf")), _num(thresholds.get("mwpm"))]
    _write_rows([header, row], out)


def _num(v) -> str:
    """Round-trippable float text; empty for missing values."""
    return "" if v is None else repr(float(v))


def _write_rows(rows, out):
    fh = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


if __name__ == "__main__":  # pragma: no cover
    main()

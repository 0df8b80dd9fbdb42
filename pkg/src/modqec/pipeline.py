"""From a configuration to GHZ states and superoperator tables."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .config import ExperimentConfig, IdealGhzParams
from .noise import CircuitNoise, CoherenceSet, OperationTimes, resolve_coherence_set
from .protocols import GHZ3_DISTILLED, Protocol, execute, load_protocol, parse_node
from .quantum import ghz_state
from .schemes.cavity import (CarvingParams, ReflectionParams, carving_coherent_ghz,
                             carving_sps_ghz, reflection_ghz)
from .schemes.emission import EMISSION_PRESETS, EmissionParams, double_click, single_click
from .schemes.result import SchemeResult
from .superoperator import SuperoperatorTable, build_table

# Default four-module tree: distilled pairs chained through B and C, then a
# Z_A Z_D check with a fresh A-D pair.
GHZ4_DEFAULT = Protocol(parse_node(
    ["distill",
     ["fuse",
      ["fuse",
       ["distill", ["link", "A", "B"], ["link", "A", "B"], "XX"],
       ["distill", ["link", "B", "C"], ["link", "B", "C"], "XX"],
       "B"],
      ["distill", ["link", "C", "D"], ["link", "C", "D"], "XX"],
      "C"],
     ["link", "A", "D"], "ZZ"]))

DEFAULT_PROTOCOLS = {3: GHZ3_DISTILLED, 4: GHZ4_DEFAULT}


def coherence_for(cfg: ExperimentConfig) -> CoherenceSet:
    return resolve_coherence_set(cfg.coherence_set, **cfg.section("coherence"))


def times_for(cfg: ExperimentConfig) -> OperationTimes:
    return OperationTimes(**cfg.section("times"))


def ideal_ghz(n: int, params: IdealGhzParams) -> SchemeResult:
    rho = params.fidelity * ghz_state(n) + (1 - params.fidelity) * np.eye(1 << n) / (1 << n)
    return SchemeResult(rho.astype(complex), params.p_succ, 1.0)


def build_ghz(cfg: ExperimentConfig, p: float) -> SchemeResult:
    """GHZ source for the configured scheme with gate noise ``p``."""
    noise = CircuitNoise.uniform(p)
    n = cfg.n_ghz
    if cfg.scheme == "ideal":
        return ideal_ghz(n, IdealGhzParams(**cfg.section("ideal")))
    if cfg.scheme == "reflection":
        return reflection_ghz(ReflectionParams(**cfg.section("reflection")), n, noise)
    if cfg.scheme == "carving":
        params = CarvingParams(**cfg.section("carving"))
        n_u = n // 2
        if cfg.variant in ("", "sps"):
            return carving_sps_ghz(params, n_u, n - n_u, noise)
        if cfg.variant == "coherent":
            return carving_coherent_ghz(params, n_u, n - n_u, noise)
        raise ValueError(f"unknown carving variant {cfg.variant!r}")
    # emission: Bell pairs combined by a fusion protocol
    base = EMISSION_PRESETS.get(cfg.preset, EmissionParams())
    params = replace(base, **cfg.section("emission"))
    variant = cfg.variant or ("single" if cfg.preset == "NTP" else "double")
    if variant == "single":
        bell = single_click(params, noise)
    elif variant == "double":
        bell = double_click(params, noise)
    else:
        raise ValueError(f"unknown emission variant {variant!r}")
    protocol = load_protocol(cfg.protocol) if cfg.protocol else DEFAULT_PROTOCOLS[n]
    if len(protocol.modules) != n:
        raise ValueError(f"protocol builds a {len(protocol.modules)}-qubit state, {cfg.architecture} needs {n}")
    coh = coherence_for(cfg)
    times = times_for(cfg).with_dd(coh.relative())
    return execute(protocol, bell, noise, times, coh)


def cutoff_to_time(x: float, p_succ: float, attempt: float = 1.0) -> float:
    """Cut-off long enough that a fraction ``x`` of GHZ generations finish."""
    if not 0 < p_succ <= 1:
        raise ValueError("p_succ must lie in (0, 1]")
    if p_succ == 1:
        return attempt
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1) when p_succ < 1")
    k = max(1, math.ceil(math.log1p(-x) / math.log1p(-p_succ)))
    # guard against rounding at exact quantiles
    while k > 1 and -math.expm1((k - 1) * math.log1p(-p_succ)) >= x:
        k -= 1
    while -math.expm1(k * math.log1p(-p_succ)) < x:
        k += 1
    return k * attempt


def resolve_t_cut(cfg: ExperimentConfig, ghz: SchemeResult) -> float:
    if cfg.t_cut is not None:
        return cfg.t_cut
    if cfg.x is not None:
        return cutoff_to_time(cfg.x, ghz.p_succ, ghz.duration)
    # without a cut-off, wait for (practically) every GHZ state
    return cutoff_to_time(0.999999, ghz.p_succ, ghz.duration) if ghz.p_succ < 1 else ghz.duration


def build_config_table(cfg: ExperimentConfig, p: float) -> SuperoperatorTable:
    ghz = build_ghz(cfg, p)
    t_cut = resolve_t_cut(cfg, ghz)
    coh = coherence_for(cfg)
    meta = {"scheme": cfg.scheme, "variant": cfg.variant, "p": p}
    return build_table(cfg.architecture, ghz, CircuitNoise.uniform(p), times_for(cfg), coh,
                       t_cut, meta)

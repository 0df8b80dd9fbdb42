"""Monte Carlo threshold estimates for distributed toric codes built from noisy GHZ states."""
from .config import ExperimentConfig, load_config
from .decoders import MatchingGraph, brute_force_decode, mwpm_decode, uf_decode
from .fit import fit_threshold
from .harness import estimate_logical_error, run_sweep
from .noise import CircuitNoise, OperationTimes, resolve_coherence_set
from .pipeline import build_config_table, build_ghz, cutoff_to_time
from .superoperator import SuperoperatorTable, build_table, load_table, save_table
from .surface_code import build_layout, run_trial, run_trials

__version__ = "0.1.0"

__all__ = [
    "CircuitNoise", "ExperimentConfig", "MatchingGraph", "OperationTimes", "SuperoperatorTable",
    "brute_force_decode", "build_config_table", "build_ghz", "build_layout", "build_table",
    "cutoff_to_time", "estimate_logical_error", "fit_threshold", "load_config", "load_table",
    "mwpm_decode", "resolve_coherence_set", "run_sweep", "run_trial", "run_trials", "save_table",
    "uf_decode",
]

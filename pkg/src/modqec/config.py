"""Flat ``key = value`` experiment configuration with a typed schema.

Physical parameters are overridden with dotted keys such as
``reflection.C1 = 50`` or ``times.t_cx = 2``; any key not in the schema is
rejected.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .noise import CoherenceSet, OperationTimes
from .schemes.cavity import CarvingParams, ReflectionParams
from .schemes.emission import EmissionParams

ARCHITECTURES = ("WT4", "WT3")
SCHEMES = ("emission", "reflection", "carving", "ideal")
DECODER_NAMES = ("uf", "mwpm")


@dataclass(frozen=True)
class IdealGhzParams:
    """Depolarized GHZ source: ``F |GHZ><GHZ| + (1 - F) I / 2^n``."""

    fidelity: float = 1.0
    p_succ: float = 1.0


SECTIONS = {
    "emission": EmissionParams,
    "reflection": ReflectionParams,
    "carving": CarvingParams,
    "ideal": IdealGhzParams,
    "coherence": CoherenceSet,
    "times": OperationTimes,
}


def _int_list(s: str) -> list[int]:
    return [int(x) for x in s.replace(",", " ").split()]


def _float_list(s: str) -> list[float]:
    return [float(x) for x in s.replace(",", " ").split()]


def _bool(s: str) -> bool:
    low = s.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _optional_float(s: str):
    return None if s.lower() in ("", "none") else float(s)


SCHEMA = {
    "architecture": str,
    "scheme": str,
    "variant": str,
    "preset": str,
    "protocol": str,
    "coherence_set": str,
    "distances": _int_list,
    "p_values": _float_list,
    "n_trials": int,
    "seed": int,
    "t_cut": _optional_float,
    "x": _optional_float,
    "decoder": str,
    "workers": int,
    "chunk": int,
}


@dataclass(frozen=True)
class ExperimentConfig:
    architecture: str = "WT4"
    scheme: str = "ideal"
    variant: str = ""
    preset: str = ""
    protocol: str = ""
    coherence_set: str = "perfect"
    distances: tuple = (4, 6, 8)
    p_values: tuple = (0.005, 0.01, 0.015)
    n_trials: int = 1000
    seed: int = 1
    t_cut: float | None = None
    x: float | None = None
    decoder: str = "uf"
    workers: int = 1
    chunk: int = 500
    overrides: dict = field(default_factory=dict)   # section -> {field: value}

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"architecture must be one of {ARCHITECTURES}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.decoder not in DECODER_NAMES:
            raise ValueError(f"decoder must be one of {DECODER_NAMES}")
        if any(d % 2 or d < 4 for d in self.distances):
            raise ValueError("distances must be even and at least 4")
        if any(not 0 <= p <= 0.05 for p in self.p_values):
            raise ValueError("p values must lie in [0, 0.05]")
        if self.n_trials < 1 or self.workers < 1 or self.chunk < 1:
            raise ValueError("n_trials, workers and chunk must be positive")
        if self.x is not None and not 0 < self.x < 1:
            raise ValueError("completion fraction x must lie in (0, 1)")
        if self.t_cut is not None and self.t_cut <= 0:
            raise ValueError("t_cut must be positive")

    @property
    def n_ghz(self) -> int:
        return 4 if self.architecture == "WT4" else 3

    def section(self, name: str) -> dict:
        return dict(self.overrides.get(name, {}))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _field_parser(cls, name: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    if name not in fields:
        raise ValueError(f"unknown parameter {cls.__name__}.{name}")
    default = fields[name].default
    if isinstance(default, bool):
        return _bool
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    if name == "name" or isinstance(default, str):
        return str
    return float


def parse_config(text: str) -> ExperimentConfig:
    values: dict = {}
    overrides: dict = {}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        if key in seen:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            if "." in key:
                section, name = key.split(".", 1)
                if section not in SECTIONS:
                    raise ValueError(f"unknown section {section!r}")
                overrides.setdefault(section, {})[name] = _field_parser(SECTIONS[section], name)(value)
            elif key in SCHEMA:
                v = SCHEMA[key](value)
                values[key] = tuple(v) if isinstance(v, list) else v
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as err:
            raise ValueError(f"line {lineno}: {err}") from None
    return ExperimentConfig(**values, overrides=overrides)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for key in SCHEMA:
        v = getattr(cfg, key)
        if v is None or v == "":
            continue
        if isinstance(v, tuple):
            v = ", ".join(repr(x) for x in v)
        lines.append(f"{key} = {v}")
    for section, fields in sorted(cfg.overrides.items()):
        for name, v in sorted(fields.items()):
            lines.append(f"{section}.{name} = {v!r}" if not isinstance(v, str) else f"{section}.{name} = {v}")
    return "\n".join(lines) + "\n"

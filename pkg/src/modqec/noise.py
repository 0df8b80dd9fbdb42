"""Gate, measurement and memory-decoherence noise, plus hardware timing sets."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .quantum import PAULI, KrausChannel, apply_channel, pauli_matrix


def _check_prob(p: float, name: str = "p") -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name}={p} outside [0, 1]")


def depolarizing_1q(p: float) -> KrausChannel:
    _check_prob(p)
    weights = [1 - p, p / 3, p / 3, p / 3]
    return KrausChannel([math.sqrt(w) * PAULI[c] for w, c in zip(weights, "IXYZ")])


def depolarizing_2q(p: float) -> KrausChannel:
    _check_prob(p)
    ops = []
    for a, b in itertools.product("IXYZ", repeat=2):
        w = 1 - p if a == b == "I" else p / 15
        ops.append(math.sqrt(w) * pauli_matrix(a + b))
    return KrausChannel(ops)


def dephasing(coherence: float) -> KrausChannel:
    """Phase flip channel that scales off-diagonal elements by ``coherence``."""
    if not -1.0 <= coherence <= 1.0:
        raise ValueError(f"coherence factor {coherence} outside [-1, 1]")
    q = (1 - coherence) / 2
    return KrausChannel([math.sqrt(1 - q) * PAULI["I"], math.sqrt(q) * PAULI["Z"]])


def generalized_amplitude_damping(gamma: float, survival: float | None = None) -> KrausChannel:
    """Equal-mixture generalized amplitude damping (fixed point I/2).

    ``survival`` may pass ``1 - gamma`` directly to keep precision when
    ``gamma`` is within rounding of 1.
    """
    _check_prob(gamma, "gamma")
    s = 1 / math.sqrt(2)
    a, b = math.sqrt(1 - gamma if survival is None else survival), math.sqrt(gamma)
    return KrausChannel([
        s * np.diag([1, a]),
        s * np.array([[0, b], [0, 0]]),
        s * np.diag([a, 1]),
        s * np.array([[0, 0], [b, 0]]),
    ])


def phase_damping(gamma: float, survival: float | None = None) -> KrausChannel:
    _check_prob(gamma, "gamma")
    keep = 1 - gamma if survival is None else survival
    return KrausChannel([np.diag([1, math.sqrt(keep)]), np.diag([0, math.sqrt(gamma)])])


def amplitude_damping(eta: float) -> KrausChannel:
    """Photon loss; ``eta`` is the survival probability of an excitation."""
    _check_prob(eta, "eta")
    return KrausChannel([np.diag([1, math.sqrt(eta)]), np.array([[0, math.sqrt(1 - eta)], [0, 0]])])


def decay_probabilities(t: float, T1: float, T2: float) -> tuple[float, float]:
    if t < 0:
        raise ValueError(f"negative time {t}")
    if T1 <= 0 or T2 <= 0:
        raise ValueError("coherence times must be positive")
    g1 = 0.0 if math.isinf(T1) else -math.expm1(-t / T1)
    g2 = 0.0 if math.isinf(T2) else -math.expm1(-t / T2)
    return g1, g2


def decoherence_channel(t: float, T1: float, T2: float) -> KrausChannel:
    g1, g2 = decay_probabilities(t, T1, T2)
    s1 = 1.0 if math.isinf(T1) else math.exp(-t / T1)
    s2 = 1.0 if math.isinf(T2) else math.exp(-t / T2)
    return generalized_amplitude_damping(g1, s1).then(phase_damping(g2, s2))


def decohere(rho: np.ndarray, qubit: int, t: float, T1: float, T2: float) -> np.ndarray:
    """Memory decoherence of one qubit for duration ``t``."""
    if t == 0:
        decay_probabilities(t, T1, T2)
        return rho.copy()
    return apply_channel(rho, decoherence_channel(t, T1, T2), [qubit])


def decoherence_pauli_probs(t, T1, T2) -> np.ndarray:
    """Pauli weights ``(I, X, Y, Z)`` of the decoherence channel.

    The equal-mixture damping and phase damping are both Pauli channels, so
    the composition is exactly ``sum_P w_P P rho P``. ``t`` may be an array;
    the result then has a trailing axis of length 4.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative time")
    a = np.exp(-t / T1) if math.isfinite(T1) else np.ones_like(t)
    c = np.exp(-t / T2) if math.isfinite(T2) else np.ones_like(t)
    # off-diagonal factor sqrt(a*c), population contraction a
    off = np.sqrt(a * c)
    px = py = (1 - a) / 4
    pi = (1 + a) / 4 + off / 2
    pz = (1 + a) / 4 - off / 2
    return np.stack([pi, px, py, pz], axis=-1)


@dataclass(frozen=True)
class CoherenceSet:
    """Memory coherence times; relative to t_link unless ``absolute``."""

    name: str
    T1_link: float
    T2_link: float
    T1_idle: float
    T2_idle: float
    dd_enabled: bool = False
    t_pulse: float = 0.0
    n_dd: int = 0
    absolute: bool = False
    t_link_seconds: float = 1.0

    def __post_init__(self):
        times = (self.T1_link, self.T2_link, self.T1_idle, self.T2_idle)
        if any(t <= 0 for t in times):
            raise ValueError("coherence times must be positive")
        if self.T1_idle < self.T1_link or self.T2_idle < self.T2_link:
            raise ValueError("idle coherence must be at least the link coherence")

    @property
    def t_dd(self) -> float:
        """Refocusing period for dynamical decoupling, in units of t_link."""
        return self.t_pulse / self.t_link_seconds + 2 * self.n_dd

    def relative(self) -> "CoherenceSet":
        """Express times in units of t_link."""
        if not self.absolute:
            return self
        s = self.t_link_seconds
        return replace(self, T1_link=self.T1_link / s, T2_link=self.T2_link / s,
                       T1_idle=self.T1_idle / s, T2_idle=self.T2_idle / s, absolute=False)


_INF = math.inf

# Set-1 and Set-2 idle times, and all Set-D times, are not printed in text
# form; the values below are editable defaults (see README).
COHERENCE_SETS = {
    "Set-1": CoherenceSet("Set-1", 1e4, 1e4, 1e5, 1e5),
    "Set-2": CoherenceSet("Set-2", 1e5, 1e5, 1e6, 1e6),
    "Set-3": CoherenceSet("Set-3", 1e6, 1e6, 1e6, 1e6),
    "Set-mix": CoherenceSet("Set-mix", 1e4, 1e4, 1e6, 1e6),
    "Set-D": CoherenceSet("Set-D", 3600.0, 1.0, 3600.0, 10.0, dd_enabled=True,
                          t_pulse=1e-3, n_dd=18, absolute=True, t_link_seconds=1e-5),
    "perfect": CoherenceSet("perfect", _INF, _INF, _INF, _INF),
}


def resolve_coherence_set(name: str, **overrides) -> CoherenceSet:
    try:
        base = COHERENCE_SETS[name]
    except KeyError:
        raise ValueError(f"unknown coherence set {name!r}") from None
    return replace(base, **overrides) if overrides else base


@dataclass(frozen=True)
class OperationTimes:
    """Operation durations in units of t_link."""

    t_link: float = 1.0
    t_meas: float = 0.4
    t_single_gate: float = 0.01
    t_cz: float = 5.0
    t_cx: float = 5.0
    t_ciy: float = 5.0
    t_swap: float = 15.0

    def __post_init__(self):
        if min(self.t_link, self.t_meas, self.t_single_gate, self.t_cz,
               self.t_cx, self.t_ciy, self.t_swap) < 0:
            raise ValueError("operation times must be non-negative")

    def controlled_gate(self, pauli: str) -> float:
        return {"Z": self.t_cz, "X": self.t_cx, "Y": self.t_ciy}[pauli]

    def with_dd(self, coherence: CoherenceSet) -> "OperationTimes":
        """Memory gates stretched to whole refocusing periods."""
        if not coherence.dd_enabled:
            return self
        t = coherence.t_dd
        return replace(self, t_cz=t, t_cx=t, t_ciy=t, t_swap=3 * t)


@dataclass(frozen=True)
class CircuitNoise:
    p_g: float
    p_m: float

    def __post_init__(self):
        _check_prob(self.p_g, "p_g")
        _check_prob(self.p_m, "p_m")

    @classmethod
    def uniform(cls, p: float) -> "CircuitNoise":
        return cls(p, p)


NOISELESS = CircuitNoise(0.0, 0.0)

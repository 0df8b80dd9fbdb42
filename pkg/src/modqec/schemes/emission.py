"""Heralded Bell pairs from emitter-photon entanglement (single and double click)."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import i0e, i1e

from ..noise import CircuitNoise, amplitude_damping, dephasing, depolarizing_1q
from ..quantum import (CNOT, PAULI, Povm, apply_channel, apply_operator, partial_trace,
                       projector)
from .result import SchemeResult

PHI_PLUS = projector(np.array([1, 0, 0, 1]) / math.sqrt(2))


def lambda_from_phase_std(sigma_phi: float) -> float:
    """Coherence probability for a Gaussian optical phase with std ``sigma_phi``."""
    if sigma_phi <= 0:
        raise ValueError("phase standard deviation must be positive")
    x = sigma_phi ** -2
    return 0.5 * (1 + i1e(x) / i0e(x))


@dataclass(frozen=True)
class EmissionParams:
    F_prep: float = 1.0
    p_EE: float = 0.0
    mu: float = 1.0
    lambda_dephase: float = 1.0
    eta_ph: float = 1.0
    alpha_bright: float = 0.5

    def __post_init__(self):
        for name in ("F_prep", "p_EE", "mu", "lambda_dephase", "eta_ph", "alpha_bright"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} outside [0, 1]")


# Presets back-solved from the quoted link success probabilities; the full
# hardware tables are user input.
EMISSION_PRESETS = {
    "NTP": EmissionParams(F_prep=0.999, p_EE=0.04, mu=0.9, lambda_dephase=0.984,
                          eta_ph=0.001, alpha_bright=0.05),
    "FP": EmissionParams(F_prep=0.999, p_EE=0.01, mu=0.95, lambda_dephase=0.984,
                         eta_ph=math.sqrt(2 * 0.099)),
}


def detection_povm(mu: float) -> Povm:
    """Two-detector measurement on photon modes ``(1, 2)``: E00, E01, E10, E11."""
    s = math.sqrt(mu)
    a = (math.sqrt(1 + s) + math.sqrt(1 - s)) / math.sqrt(2)
    b = (math.sqrt(1 - s) - math.sqrt(1 + s)) / math.sqrt(2)
    basis = {k: np.eye(4)[i] for i, k in enumerate(("00", "01", "10", "11"))}

    def op(cross):
        m = a * (np.outer(basis["01"], basis["01"]) + np.outer(basis["10"], basis["10"]))
        m = m + cross * (np.outer(basis["01"], basis["10"]) + np.outer(basis["10"], basis["01"]))
        m = m + math.sqrt(1 + mu) * np.outer(basis["11"], basis["11"])
        return m / 2

    e00 = np.outer(basis["00"], basis["00"])
    e11 = math.sqrt(1 - mu) / math.sqrt(2) * np.outer(basis["11"], basis["11"])
    return Povm([e00, op(b), op(-b), e11])


def _emit(rho: np.ndarray, p: EmissionParams, emitters, photons, path_dephase: bool):
    """Excite emitters, emit photons into fresh modes and send them to the detectors."""
    for e, ph in zip(emitters, photons):
        # state preparation infidelity and double excitation both dephase the emitter
        rho = apply_channel(rho, dephasing((2 * p.F_prep - 1) * (1 - p.p_EE)), [e])
        rho = apply_operator(rho, CNOT, [e, ph])
        rho = apply_channel(rho, amplitude_damping(p.eta_ph), [ph])
    if path_dephase:
        rho = apply_channel(rho, dephasing(2 * p.lambda_dephase - 1), [photons[0]])
    return rho


def _initial_pair(alpha: float) -> np.ndarray:
    v = np.array([math.sqrt(1 - alpha), math.sqrt(alpha)])
    one = projector(v)
    return np.kron(np.kron(one, one), projector([1, 0, 0, 0]))


def _herald(rho: np.ndarray, mu: float):
    """Left/right single-click branches on the emitter pair (unnormalized)."""
    povm = detection_povm(mu)
    out = {}
    for name, e in (("right", povm.elements[1]), ("left", povm.elements[2])):
        branch = apply_operator(rho, e, [2, 3])
        out[name] = partial_trace(branch, [0, 1])
    return out


def _correct(rho2: np.ndarray, branch: str, noise: CircuitNoise) -> np.ndarray:
    """Map the heralded state to Phi+; each correction gate is noisy."""
    dep = depolarizing_1q(noise.p_g)
    rho2 = apply_operator(rho2, PAULI["X"], [0])
    rho2 = apply_channel(rho2, dep, [0])
    if branch == "right":
        rho2 = apply_operator(rho2, PAULI["Z"], [1])
        rho2 = apply_channel(rho2, dep, [1])
    return rho2


def single_click(params: EmissionParams, noise: CircuitNoise) -> SchemeResult:
    """Single-click heralding with bright-state population ``alpha_bright``."""
    rho = _emit(_initial_pair(params.alpha_bright), params, [0, 1], [2, 3], True)
    branches = _herald(rho, params.mu)
    total = np.zeros((4, 4), dtype=complex)
    p_succ = 0.0
    for name, b in branches.items():
        p_succ += np.trace(b).real
        total += _correct(b, name, noise)
    if p_succ <= 0:
        return SchemeResult(np.eye(4, dtype=complex) / 4, 0.0, 1.0)
    return SchemeResult(total / p_succ, float(p_succ), 1.0)


def double_click(params: EmissionParams, noise: CircuitNoise) -> SchemeResult:
    """Two consecutive single clicks with a flip of both emitters in between.

    The bright-state population is fixed to 1/2 and the optical path phase is
    common to both rounds, so it cancels and is not applied.
    """
    params = replace(params, alpha_bright=0.5)
    dep = depolarizing_1q(noise.p_g)
    rho = _emit(_initial_pair(0.5), params, [0, 1], [2, 3], False)
    first = _herald(rho, params.mu)
    total = np.zeros((4, 4), dtype=complex)
    p_succ = 0.0
    fresh = projector([1, 0, 0, 0])
    for name1, b1 in first.items():
        for q in (0, 1):
            b1 = apply_operator(b1, PAULI["X"], [q])
            b1 = apply_channel(b1, dep, [q])
        rho2 = _emit(np.kron(b1, fresh), params, [0, 1], [2, 3], False)
        for name2, b2 in _herald(rho2, params.mu).items():
            p_succ += np.trace(b2).real
            # equal detectors herald Psi+, different detectors Psi-
            total += _correct(b2, "left" if name1 == name2 else "right", noise)
    return SchemeResult(total / p_succ, float(p_succ), 1.0)


def single_click_p_succ(p: EmissionParams) -> float:
    a, eta = p.alpha_bright, p.eta_ph
    return 0.5 * a * eta * (4 - a * eta * (3 - p.mu))


def coherence_factor(p: EmissionParams) -> float:
    return (math.sqrt(p.mu) * (2 * p.F_prep - 1) ** 2 * (2 * p.lambda_dephase - 1)
            * (1 - p.p_EE) ** 2)


def single_click_fidelity(p: EmissionParams, p_g: float) -> float:
    a, eta, mu = p.alpha_bright, p.eta_ph, p.mu
    phi = coherence_factor(p)
    inner = 36 * (1 - a) * (1 + phi) + (9 * p_g - 4 * p_g ** 2) * (36 * phi - 4 * a * (8 + eta * (mu - 3)))
    return a * eta / (36 * single_click_p_succ(p)) * inner


def double_click_p_succ(p: EmissionParams, p_g: float) -> float:
    eta, mu = p.eta_ph, p.mu
    return eta ** 2 / 36 * (18 + 12 * p_g * (2 + eta * (mu - 3)) + p_g ** 2 * eta ** 2 * (mu - 3) ** 2)


def double_click_fidelity_noiseless(p: EmissionParams) -> float:
    phi = coherence_factor(replace(p, lambda_dephase=1.0))
    return (1 + phi ** 2) / 2

"""Direct GHZ generation by spin-dependent photon reflection or transmission.

All detunings (``delta1``, ``omega``) and rates (``kappa_c``, ``kappa_l``,
``gamma``) share one frequency unit. ``Delta`` and ``sigma`` are given in
units of ``gamma``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from functools import reduce
from typing import Callable

import numpy as np

from ..noise import CircuitNoise, depolarizing_1q
from ..quantum import H, PAULI, apply_channel, apply_operator, ghz_fidelity, projector
from .result import SchemeResult

N_JITTER_NODES = 7


@dataclass(frozen=True)
class ReflectionParams:
    C1: float = 10.0
    kappa_c: float = 1.0
    kappa_l: float = 0.0
    gamma: float = 1.0
    Delta: float = 10.0
    sigma: float = 0.0
    eta_c: float = 1.0
    eta_det: float = 1.0
    p_dk: float = 0.0
    omega: float = 0.0
    delta1: float = 0.0

    def __post_init__(self):
        if min(self.kappa_c, self.gamma) <= 0 or self.kappa_l < 0 or self.C1 < 0:
            raise ValueError("rates must be positive")
        for name in ("eta_c", "eta_det", "p_dk"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} outside [0, 1]")


@dataclass(frozen=True)
class CarvingParams:
    mode: str = "cavity"
    C2: float = 10.0
    P_purcell: float = 10.0
    kappa_c: float = 1.0
    kappa_l: float = 0.0
    gamma: float = 1.0
    Delta: float = 10.0
    sigma: float = 0.0
    omega: float = 0.0
    delta1: float = 0.0
    eta_f: float = 1.0
    eta_det: float = 1.0
    n_sc: int = 2
    alpha_coherent: float = 0.1

    def __post_init__(self):
        if self.mode not in ("cavity", "waveguide"):
            raise ValueError(f"unknown carving mode {self.mode!r}")
        if min(self.kappa_c, self.gamma) <= 0 or self.kappa_l < 0:
            raise ValueError("rates must be positive")
        for name in ("eta_f", "eta_det"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} outside [0, 1]")


# ---------------------------------------------------------------- coefficients

def reflection_coefficient(params: ReflectionParams, delta: float, omega: float) -> complex:
    """Reflection amplitude of the one-sided cavity for spin-transition detuning ``delta``."""
    k = params.kappa_c + params.kappa_l
    denom = 1 + 2j * omega / k + 4 * params.C1 / (1 + 2j * delta / params.gamma)
    return 1 - (2 * params.kappa_c / k) / denom


def carving_transmission(params: CarvingParams, delta: float, omega: float | None = None) -> complex:
    """Transmission amplitude through the two-sided cavity or the waveguide."""
    x = 2j * delta / params.gamma
    if params.mode == "waveguide":
        return (1 + x) / (1 + params.P_purcell + x)
    omega = params.omega if omega is None else omega
    k = 2 * params.kappa_c + params.kappa_l
    return (2 * params.kappa_c / k) / (1 + 2j * omega / k + 4 * params.C2 / (1 + x))


def carving_optimal_detunings(params: CarvingParams) -> tuple[float, float]:
    """``(omega, delta1)`` maximizing |t_0| at ``delta1 = 0``."""
    if params.mode == "waveguide":
        return 0.0, 0.0
    d = params.Delta
    return 4 * params.C2 * d * (2 * params.kappa_c + params.kappa_l) / (1 + 4 * d * d), 0.0


def jitter_nodes(sigma: float, gamma: float = 1.0):
    """Gauss-Hermite offsets and weights for a zero-mean Gaussian with std ``sigma*gamma``."""
    if sigma == 0:
        return np.zeros(1), np.ones(1)
    x, w = np.polynomial.hermite_e.hermegauss(N_JITTER_NODES)
    return sigma * gamma * x, w / w.sum()


def _jitter_average(sigma, gamma, fn: Callable[[float, float], np.ndarray], vary_omega=True):
    offs, wts = jitter_nodes(sigma, gamma)
    total = None
    omega_offs = offs if vary_omega else np.zeros(1)
    omega_wts = wts if vary_omega else np.ones(1)
    for dd, wd in zip(offs, wts):
        for do, wo in zip(omega_offs, omega_wts):
            val = wd * wo * fn(dd, do)
            total = val if total is None else total + val
    return total


def _spin_noise(rho, qubits, p_g):
    dep = depolarizing_1q(p_g)
    for q in qubits:
        rho = apply_channel(rho, dep, [q])
    return rho


# ------------------------------------------------------------------ reflection

def _reflection_branch(r0: complex, r1: complex, n: int, p_g: float) -> np.ndarray:
    """Unnormalized spin state heralded on a photon click, corrected to GHZ+.

    Qubit 0 is the photon time bin (0 = early, 1 = late), qubits 1..n the spins.
    """
    dep = depolarizing_1q(p_g)
    plus = np.array([1, 1]) / math.sqrt(2)
    rho = reduce(np.kron, [projector(plus)] + [projector([1, 0])] * n).astype(complex)
    early = np.diag([1, 0]).astype(complex)
    late = np.diag([0, 1]).astype(complex)
    scatter = np.diag([r0, r1])
    for s in range(1, n + 1):
        # the early bin scatters off every cavity, then each spin gets a Hadamard
        rho = apply_operator(rho, np.kron(early, scatter) + np.kron(late, np.eye(2)), [0, s])
    for s in range(1, n + 1):
        rho = apply_operator(rho, H, [s])
        rho = apply_channel(rho, dep, [s])
    for s in range(1, n + 1):
        rho = apply_operator(rho, np.kron(late, scatter) + np.kron(early, np.eye(2)), [0, s])
    for s in range(1, n + 1):
        rho = apply_operator(rho, H, [s])
        rho = apply_channel(rho, dep, [s])
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for sign in (1, -1):
        bra = np.array([1, sign]) / math.sqrt(2)
        proj = np.outer(bra, bra)
        branch = apply_operator(rho, proj, [0])
        # photon is now in a known state; drop it
        spins = np.einsum("iajb,i,j->ab", branch.reshape(2, 1 << n, 2, 1 << n), bra, bra)
        if sign < 0:
            spins = apply_operator(spins, PAULI["Z"], [0])
            spins = apply_channel(spins, dep, [0])
        out += spins
    return out


def reflection_ghz(params: ReflectionParams, n: int, noise: CircuitNoise,
                   r_override: tuple[complex, complex] | None = None) -> SchemeResult:
    """GHZ state on ``n`` spins from one time-bin photon reflected off ``n`` cavities."""
    if n not in (3, 4):
        raise ValueError(f"reflection GHZ supports 3 or 4 spins, not {n}")
    p = params

    def run(dd, do):
        if r_override is not None:
            r0, r1 = r_override
        else:
            d1 = p.delta1 + dd
            r1 = reflection_coefficient(p, d1, p.omega + do)
            r0 = reflection_coefficient(p, d1 + p.Delta * p.gamma, p.omega + do)
        return _reflection_branch(r0, r1, n, noise.p_g)

    rho = _jitter_average(p.sigma, p.gamma, run) if r_override is None else run(0, 0)
    eff = p.eta_c ** n * p.eta_det
    p_true = float(np.trace(rho).real) * eff
    # dark-count heralds leave the spins in the no-photon state |0..0>
    p_dark = p.p_dk * (1 - p_true)
    dark = projector(np.eye(1 << n)[0]).astype(complex)
    for _ in range(2):
        dark = _spin_noise(dark, range(n), noise.p_g)
    state = (rho * eff + p_dark * dark) / (p_true + p_dark)
    return SchemeResult(state, p_true, 1.0)


# --------------------------------------------------------------------- carving

def _route_vectors(a: complex, b: complex, n_u: int, n_d: int):
    """Per-basis-state amplitudes picked up on the upper and lower routes."""
    coeff = np.array([a, b], dtype=complex)
    ones = np.ones(2, dtype=complex)
    up = reduce(np.kron, [coeff] * n_u + [ones] * n_d)
    down = reduce(np.kron, [ones] * n_u + [coeff] * n_d)
    return up, down


def _not_all(rho: np.ndarray, n: int, p_g: float) -> np.ndarray:
    dep = depolarizing_1q(p_g)
    for q in range(n):
        rho = apply_operator(rho, PAULI["X"], [q])
        rho = apply_channel(rho, dep, [q])
    return rho


def _carving_rounds(step, n: int, n_sc: int, p_g: float) -> np.ndarray:
    """Run ``n_sc`` heralded rounds and return the corrected unnormalized state.

    ``step(rho)`` returns the two branches (+, -) of one scattering round.
    Branches are accumulated by the parity of ``-`` clicks, which fixes the
    sign of the final correction.
    """
    dim = 1 << n
    rho0 = np.full((dim, dim), 1.0 / dim, dtype=complex)
    plus, minus = step(rho0)
    even, odd = plus, minus
    for _ in range(n_sc - 1):
        e_p, e_m = step(_not_all(even, n, p_g))
        o_p, o_m = step(_not_all(odd, n, p_g))
        even, odd = e_p + o_m, e_m + o_p
    return even, odd


def _carving_correct(even, odd, n_u: int, n: int, p_g: float) -> np.ndarray:
    dep = depolarizing_1q(p_g)
    out = np.zeros_like(even)
    for rho, flip_sign in ((even, False), (odd, True)):
        for q in range(n_u):
            rho = apply_operator(rho, PAULI["X"], [q])
            rho = apply_channel(rho, dep, [q])
        if flip_sign:
            rho = apply_operator(rho, PAULI["Z"], [0])
            rho = apply_channel(rho, dep, [0])
        out = out + rho
    return out


def _check_split(n_u: int, n_d: int, n_sc: int) -> None:
    if n_u < 1 or n_d < 1 or n_u + n_d not in (3, 4):
        raise ValueError("carving needs 3 or 4 spins split over both routes")
    if n_sc < 2:
        raise ValueError("carving needs at least two scattering rounds")


def _carving_t(params: CarvingParams, dd: float, do: float):
    d1 = params.delta1 + dd
    om = params.omega + do
    t1 = carving_transmission(params, d1, om)
    t0 = carving_transmission(params, d1 + params.Delta * params.gamma, om)
    return t0, t1


def carving_sps_ghz(params: CarvingParams, n_u: int, n_d: int, noise: CircuitNoise,
                    t_override: tuple[complex, complex] | None = None) -> SchemeResult:
    """Carve a GHZ state with ``n_sc`` single photons through a two-route interferometer."""
    n = n_u + n_d
    _check_split(n_u, n_d, params.n_sc)

    def run(dd, do):
        t0, t1 = t_override if t_override is not None else _carving_t(params, dd, do)
        up, down = _route_vectors(t0, t1, n_u, n_d)
        amps = ((up + down) / 2, (up - down) / 2)

        def step(rho):
            return tuple(rho * np.outer(a, a.conj()) for a in amps)

        even, odd = _carving_rounds(step, n, params.n_sc, noise.p_g)
        return _carving_correct(even, odd, n_u, n, noise.p_g)

    if t_override is not None:
        rho = run(0.0, 0.0)
    else:
        rho = _jitter_average(params.sigma, params.gamma, run, params.mode == "cavity")
    tr = float(np.trace(rho).real)
    p_succ = tr * (params.eta_f * params.eta_det) ** params.n_sc
    return SchemeResult(rho / tr, p_succ, 1.0)


def _overlap(a: np.ndarray) -> np.ndarray:
    """Matrix of coherent-state overlaps <a_j|a_i> for amplitude vector ``a``."""
    sq = np.abs(a) ** 2
    return np.exp(-(sq[:, None] + sq[None, :]) / 2 + a[:, None] * a.conj()[None, :])


def _vacuum(a: np.ndarray) -> np.ndarray:
    sq = np.abs(a) ** 2
    return np.exp(-(sq[:, None] + sq[None, :]) / 2)


def coherent_scatter_factors(t0, t1, r0, r1, d0, d1, alpha, n_u, n_d, eta=1.0):
    """Element-wise factors ``(T_+, T_-)`` for one round of coherent-light scattering."""
    n = n_u + n_d
    a = alpha / math.sqrt(2)
    ones = np.ones(2, dtype=complex)
    tv = np.array([t0, t1], dtype=complex)
    traced = np.ones((1 << n, 1 << n), dtype=complex)
    for j in range(n):
        start = 0 if j < n_u else n_u
        for lost in (np.array([r0, r1]), np.array([d0, d1])):
            parts = [ones] * start + [tv] * (j - start) + [lost.astype(complex)] + [ones] * (n - j - 1)
            traced *= _overlap(a * reduce(np.kron, parts))
    up, down = _route_vectors(t0, t1, n_u, n_d)
    t_plus = a * (up + down) / math.sqrt(2)
    t_minus = a * (up - down) / math.sqrt(2)
    # undetected fraction of the output ports is traced out as well
    traced *= _overlap(math.sqrt(1 - eta) * t_plus) * _overlap(math.sqrt(1 - eta) * t_minus)
    dp, dm = math.sqrt(eta) * t_plus, math.sqrt(eta) * t_minus
    click_p = (_overlap(dp) - _vacuum(dp)) * _vacuum(dm)
    click_m = _vacuum(dp) * (_overlap(dm) - _vacuum(dm))
    return traced * click_p, traced * click_m


def _loss_amplitudes(t0: complex, t1: complex):
    r0, r1 = 1 - t0, 1 - t1
    d0 = math.sqrt(max(0.0, 1 - abs(r0) ** 2 - abs(t0) ** 2))
    d1 = math.sqrt(max(0.0, 1 - abs(r1) ** 2 - abs(t1) ** 2))
    return r0, r1, d0, d1


def carving_coherent_ghz(params: CarvingParams, n_u: int, n_d: int, noise: CircuitNoise,
                         t_override: tuple[complex, complex] | None = None) -> SchemeResult:
    """Carving driven by weak coherent pulses of amplitude ``alpha_coherent``."""
    if params.alpha_coherent <= 0:
        raise ValueError("coherent amplitude must be positive")
    n = n_u + n_d
    _check_split(n_u, n_d, params.n_sc)
    eta = params.eta_f * params.eta_det

    def run(dd, do):
        t0, t1 = t_override if t_override is not None else _carving_t(params, dd, do)
        r0, r1, d0, d1 = _loss_amplitudes(t0, t1)
        fp, fm = coherent_scatter_factors(t0, t1, r0, r1, d0, d1, params.alpha_coherent,
                                          n_u, n_d, eta)

        def step(rho):
            return rho * fp, rho * fm

        even, odd = _carving_rounds(step, n, params.n_sc, noise.p_g)
        return _carving_correct(even, odd, n_u, n, noise.p_g)

    if t_override is not None:
        rho = run(0.0, 0.0)
    else:
        rho = _jitter_average(params.sigma, params.gamma, run, params.mode == "cavity")
    tr = float(np.trace(rho).real)
    return SchemeResult(rho / tr, tr, 1.0)


# ----------------------------------------------------------------------- scans

def scan_nsc(params: CarvingParams, n_u: int, n_d: int, p_succ_floor: float,
             noise: CircuitNoise | None = None, variant: str = "sps",
             max_nsc: int = 12, tol: float = 1e-12) -> int:
    """Scattering count with the lowest infidelity whose success rate meets the floor."""
    if p_succ_floor < 0:
        raise ValueError("success floor must be non-negative")
    noise = noise or CircuitNoise(0.0, 0.0)
    fn = carving_sps_ghz if variant == "sps" else carving_coherent_ghz
    best, best_inf = None, math.inf
    for n_sc in range(2, max_nsc + 1):
        res = fn(replace(params, n_sc=n_sc), n_u, n_d, noise)
        if res.p_succ < p_succ_floor:
            continue
        inf = 1 - res.fidelity
        if inf < best_inf - tol:
            best, best_inf = n_sc, inf
    if best is None:
        raise ValueError("no n_sc meets the floor")
    return best


def scan_detunings(evaluate: Callable[[float, float], float], omega_grid, delta1_grid):
    """Grid arg-max of ``evaluate(omega, delta1)``; first maximum wins on ties."""
    omega_grid = list(omega_grid)
    delta1_grid = list(delta1_grid)
    if not omega_grid or not delta1_grid:
        raise ValueError("empty detuning grid")
    best, best_val = None, -math.inf
    for om, d1 in itertools.product(omega_grid, delta1_grid):
        val = evaluate(om, d1)
        if val > best_val:
            best, best_val = (om, d1), val
    return best


def reflection_fidelity(params: ReflectionParams, n: int) -> Callable[[float, float], float]:
    """Jitter-averaged GHZ fidelity as a function of ``(omega, delta1)``."""
    def evaluate(omega, delta1):
        res = reflection_ghz(replace(params, omega=omega, delta1=delta1), n, CircuitNoise(0.0, 0.0))
        return ghz_fidelity(res.state)
    return evaluate

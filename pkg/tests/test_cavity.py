import cmath
import itertools
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _helpers import ghz_vector
from modqec.noise import NOISELESS, CircuitNoise
from modqec.quantum import check_density_matrix, ghz_fidelity
from modqec.schemes.cavity import (CarvingParams, ReflectionParams, carving_coherent_ghz,
                                   carving_optimal_detunings, carving_sps_ghz,
                                   carving_transmission, reflection_coefficient, reflection_ghz,
                                   reflection_fidelity, scan_detunings, scan_nsc)

IDEAL_T = (1.0, 0.0)


# ------------------------------------------------------------------ oracles

def reflection_oracle(r0, r1, n):
    """State vector of the time-bin reflection scheme, both heralds corrected."""
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    hn = h
    for _ in range(n - 1):
        hn = np.kron(hn, h)
    phase = np.array([np.prod([r1 if (b >> (n - 1 - q)) & 1 else r0 for q in range(n)])
                      for b in range(dim)])
    spins = np.zeros(dim, dtype=complex)
    spins[0] = 1
    early = hn @ (hn @ (phase * spins))
    late = hn @ (phase * (hn @ spins))
    z0 = np.array([1 if b >> (n - 1) == 0 else -1 for b in range(dim)])
    for sign in (1, -1):
        v = (early + sign * late) / 2
        if sign < 0:
            v = z0 * v
        out += np.outer(v, v.conj())
    return out


def carving_oracle(t0, t1, n_u, n_d, n_sc):
    """Enumerate every click record of noiseless single-photon carving."""
    n = n_u + n_d
    dim = 1 << n
    bits = [[(b >> (n - 1 - q)) & 1 for q in range(n)] for b in range(dim)]
    tv = (t0, t1)
    up = np.array([np.prod([tv[x[q]] for q in range(n_u)]) for x in bits])
    down = np.array([np.prod([tv[x[q]] for q in range(n_u, n)]) for x in bits])
    flip_all = np.array([dim - 1 - b for b in range(dim)])
    flip_u = np.array([b ^ (((1 << n_u) - 1) << n_d) for b in range(dim)])
    z0 = np.array([1 if x[0] == 0 else -1 for x in bits])
    out = np.zeros((dim, dim), dtype=complex)
    for record in itertools.product((1, -1), repeat=n_sc):
        psi = np.full(dim, 1 / math.sqrt(dim), dtype=complex)
        for k, s in enumerate(record):
            if k:
                psi = psi[flip_all]
            psi = psi * (up + s * down) / 2
        psi = psi[flip_u]
        if record.count(-1) % 2:
            psi = z0 * psi
        out += np.outer(psi, psi.conj())
    return out


# ------------------------------------------------------------- reflection

def test_reflection_coefficient_examples():
    p0 = ReflectionParams(C1=0.0, kappa_l=0.0)
    assert reflection_coefficient(p0, 0.0, 0.0) == pytest.approx(-1)
    big = ReflectionParams(C1=1e9, kappa_l=0.0)
    assert reflection_coefficient(big, 0.0, 0.0) == pytest.approx(1, abs=1e-8)
    one = ReflectionParams(C1=1.0, kappa_l=0.0)
    assert reflection_coefficient(one, 0.0, 0.0) == pytest.approx(0.6)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0, 1e3), kl=st.floats(0, 5), dl=st.floats(-100, 100), om=st.floats(-100, 100))
def test_reflection_coefficient_bounded(c, kl, dl, om):
    p = ReflectionParams(C1=c, kappa_l=kl)
    assert abs(reflection_coefficient(p, dl, om)) <= 1 + 1e-12


def test_reflection_ideal_limit():
    for n in (3, 4):
        r = reflection_ghz(ReflectionParams(), n, NOISELESS, r_override=(-1.0, 1.0))
        assert r.p_succ == pytest.approx(1.0, abs=1e-9)
        assert ghz_fidelity(r.state) == pytest.approx(1.0, abs=1e-9)


def test_reflection_equal_coefficients_cannot_entangle():
    r = reflection_ghz(ReflectionParams(), 3, NOISELESS, r_override=(0.7, 0.7))
    assert ghz_fidelity(r.state) <= 0.5 + 1e-9


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0, 1), pa=st.floats(-3, 3), b=st.floats(0, 1), pb=st.floats(-3, 3),
       n=st.sampled_from([3, 4]))
def test_reflection_matches_statevector(a, pa, b, pb, n):
    r0, r1 = a * cmath.exp(1j * pa), b * cmath.exp(1j * pb)
    oracle = reflection_oracle(r0, r1, n)
    tr = np.trace(oracle).real
    if tr < 1e-6:
        return
    r = reflection_ghz(ReflectionParams(), n, NOISELESS, r_override=(r0, r1))
    assert r.p_succ == pytest.approx(tr, abs=1e-10)
    assert np.allclose(r.state, oracle / tr, atol=1e-9)


def test_reflection_rejects_unsupported_size():
    with pytest.raises(ValueError):
        reflection_ghz(ReflectionParams(), 5, NOISELESS)


def test_reflection_losses_scale_success():
    base = ReflectionParams(C1=100, Delta=5000)
    full = reflection_ghz(base, 3, NOISELESS).p_succ
    lossy = reflection_ghz(replace(base, eta_c=0.9, eta_det=0.8), 3, NOISELESS).p_succ
    assert lossy == pytest.approx(full * 0.9 ** 3 * 0.8, rel=1e-12)


def test_jitter_free_average_is_plain_result():
    p = ReflectionParams(C1=50, Delta=200, sigma=0.0)
    a = reflection_ghz(p, 3, NOISELESS)
    r1 = reflection_coefficient(p, 0.0, 0.0)
    r0 = reflection_coefficient(p, p.Delta * p.gamma, 0.0)
    b = reflection_ghz(p, 3, NOISELESS, r_override=(r0, r1))
    assert np.array_equal(a.state, b.state)


# ---------------------------------------------------------------- carving

def test_transmission_examples():
    wg = CarvingParams(mode="waveguide", P_purcell=7.0)
    assert carving_transmission(wg, 0.0) == pytest.approx(1 / 8)
    assert carving_transmission(wg, 1e9) == pytest.approx(1, abs=1e-7)
    cav = CarvingParams(C2=0.0, kappa_l=0.0, omega=0.0)
    assert carving_transmission(cav, 0.0) == pytest.approx(1)


def test_waveguide_is_cavity_limit():
    kl = 1.0
    kc = 1e6
    coop = 5.0
    cav = CarvingParams(C2=coop, kappa_c=kc, kappa_l=kl)
    # with kappa_c >> kappa_l the cavity form reduces to the waveguide one at P = 4 C2
    wg = CarvingParams(mode="waveguide", P_purcell=4 * coop)
    for delta in np.linspace(-20, 20, 9):
        t_cav = carving_transmission(cav, delta)
        t_wg = carving_transmission(wg, delta)
        assert abs(t_cav - t_wg) < 1e-6


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0, 1e3), kl=st.floats(0, 5), dl=st.floats(-100, 100))
def test_transmission_bounded(c, kl, dl):
    for p in (CarvingParams(C2=c, kappa_l=kl), CarvingParams(mode="waveguide", P_purcell=c)):
        assert abs(carving_transmission(p, dl)) <= 1 + 1e-12


@pytest.mark.parametrize("n_u,n_d,expected", [(1, 2, 1 / 16), (2, 2, 1 / 32)])
def test_ideal_carving_limits(n_u, n_d, expected):
    r = carving_sps_ghz(CarvingParams(n_sc=2), n_u, n_d, NOISELESS, t_override=IDEAL_T)
    assert r.p_succ == pytest.approx(expected, abs=1e-9)
    assert ghz_fidelity(r.state) == pytest.approx(1.0, abs=1e-9)


def test_equal_transmission_gives_no_entanglement():
    for n_u, n_d in ((1, 2), (2, 2)):
        n = n_u + n_d
        r = carving_sps_ghz(CarvingParams(n_sc=3), n_u, n_d, NOISELESS, t_override=(0.6, 0.6))
        oracle = carving_oracle(0.6, 0.6, n_u, n_d, 3)
        expected = ghz_vector(n).conj() @ oracle @ ghz_vector(n) / np.trace(oracle)
        assert ghz_fidelity(r.state) == pytest.approx(expected.real, abs=1e-12)
        # product states overlap GHZ by at most 2 / 2^n
        assert ghz_fidelity(r.state) <= 2 / 2 ** n + 1e-12


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0, 1), pa=st.floats(-3, 3), b=st.floats(0, 1), pb=st.floats(-3, 3),
       split=st.sampled_from([(1, 2), (2, 1), (2, 2), (1, 3)]), n_sc=st.integers(2, 4))
def test_carving_matches_click_enumeration(a, pa, b, pb, split, n_sc):
    t0, t1 = a * cmath.exp(1j * pa), b * cmath.exp(1j * pb)
    oracle = carving_oracle(t0, t1, *split, n_sc)
    tr = np.trace(oracle).real
    if tr < 1e-8:
        return
    r = carving_sps_ghz(CarvingParams(n_sc=n_sc), *split, NOISELESS, t_override=(t0, t1))
    assert r.p_succ == pytest.approx(tr, abs=1e-10)
    assert np.allclose(r.state, oracle / tr, atol=1e-8)


def test_carving_checks_inputs():
    with pytest.raises(ValueError):
        carving_sps_ghz(CarvingParams(n_sc=1), 1, 2, NOISELESS)
    with pytest.raises(ValueError):
        carving_sps_ghz(CarvingParams(), 0, 3, NOISELESS)
    with pytest.raises(ValueError):
        carving_coherent_ghz(CarvingParams(alpha_coherent=0.0), 1, 2, NOISELESS)
    with pytest.raises(ValueError):
        CarvingParams(mode="fiber")


def _tuned(**kw):
    p = CarvingParams(C2=100.0, Delta=1000.0, kappa_l=0.1, **kw)
    om, d1 = carving_optimal_detunings(p)
    return replace(p, omega=om, delta1=d1)


def test_coherent_source_approaches_single_photons():
    p = _tuned()
    sps = carving_sps_ghz(p, 2, 2, NOISELESS).fidelity
    weak = carving_coherent_ghz(replace(p, alpha_coherent=0.01), 2, 2, NOISELESS)
    strong = carving_coherent_ghz(replace(p, alpha_coherent=0.3), 2, 2, NOISELESS)
    assert abs(weak.fidelity - sps) < 1e-3
    assert strong.fidelity < weak.fidelity
    assert weak.p_succ < strong.p_succ


def test_coherent_ideal_small_amplitude():
    r = carving_coherent_ghz(CarvingParams(alpha_coherent=1e-3), 2, 2, NOISELESS,
                             t_override=IDEAL_T)
    assert ghz_fidelity(r.state) == pytest.approx(1.0, abs=1e-5)


def test_optimal_cavity_detuning_formula():
    p = CarvingParams(C2=30.0, Delta=4.0, kappa_c=2.0, kappa_l=0.5)
    om, d1 = carving_optimal_detunings(p)
    assert om == pytest.approx(4 * 30 * 4 * (2 * 2 + 0.5) / (1 + 4 * 16))
    assert d1 == 0.0
    grid = np.linspace(om - 20, om + 20, 801)
    step = grid[1] - grid[0]

    def t0_mag(omega, delta1):
        return abs(carving_transmission(p, delta1 + p.Delta * p.gamma, omega))

    best_om, best_d1 = scan_detunings(t0_mag, grid, [0.0])
    assert abs(best_om - om) <= step


def test_scan_detunings_edge_cases():
    assert scan_detunings(lambda a, b: 0.0, [1.5], [2.5]) == (1.5, 2.5)
    with pytest.raises(ValueError):
        scan_detunings(lambda a, b: 0.0, [], [1.0])


def test_reflection_scan_finds_grid_maximum():
    p = ReflectionParams(C1=20.0, Delta=50.0)
    ev = reflection_fidelity(p, 3)
    grid = [-2.0, 0.0, 2.0]
    best = scan_detunings(ev, grid, grid)
    vals = {(a, b): ev(a, b) for a in grid for b in grid}
    assert vals[best] == max(vals.values())


def test_scan_nsc():
    assert scan_nsc(replace(_tuned(), alpha_coherent=0.3), 2, 2, 1e-4, variant="coherent") == 2
    lossy = _tuned(eta_f=0.5, eta_det=0.5)
    with pytest.raises(ValueError, match="no n_sc meets the floor"):
        scan_nsc(lossy, 2, 2, 1.0)


def test_scan_nsc_picks_lowest_infidelity():
    p = CarvingParams(C2=5.0, Delta=3.0, kappa_l=0.2)
    chosen = scan_nsc(p, 1, 2, 0.0, max_nsc=6)
    inf = {k: 1 - carving_sps_ghz(replace(p, n_sc=k), 1, 2, NOISELESS).fidelity for k in range(2, 7)}
    best = min(inf.values())
    assert inf[chosen] <= best + 1e-12
    assert all(inf[k] > best + 1e-12 for k in range(2, chosen))


@settings(max_examples=10, deadline=None)
@given(p_g=st.floats(0, 0.05), c=st.floats(1, 200), sigma=st.floats(0, 0.5))
def test_scheme_states_valid(p_g, c, sigma):
    noise = CircuitNoise.uniform(p_g)
    for r in (reflection_ghz(ReflectionParams(C1=c, Delta=100.0, sigma=sigma), 4, noise),
              carving_sps_ghz(CarvingParams(C2=c, sigma=sigma), 2, 2, noise),
              carving_coherent_ghz(CarvingParams(C2=c, sigma=sigma), 1, 2, noise)):
        check_density_matrix(r.state, normalized=True)
        assert 0 <= r.p_succ <= 1

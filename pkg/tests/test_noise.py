import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _helpers import ket_plus, random_density
from modqec.noise import (COHERENCE_SETS, CircuitNoise, CoherenceSet, OperationTimes,
                          amplitude_damping, decohere, decoherence_pauli_probs, depolarizing_1q,
                          depolarizing_2q, resolve_coherence_set)
from modqec.quantum import PAULI, apply_channel, ket, projector


def test_depolarizing_weights():
    ch = depolarizing_1q(0.3)
    assert len(ch.operators) == 4
    w = [np.trace(k.conj().T @ k).real / 2 for k in ch.operators]
    assert w == pytest.approx([0.7, 0.1, 0.1, 0.1])
    assert len(depolarizing_2q(0.3).operators) == 16


def test_depolarizing_two_qubit_full_mix():
    rho = random_density(2, np.random.default_rng(3))
    out = apply_channel(rho, depolarizing_2q(15 / 16), [0, 1])
    assert np.allclose(out, np.eye(4) / 4, atol=1e-12)


def test_depolarizing_on_plus_state():
    p = 0.001
    out = apply_channel(ket_plus(), depolarizing_1q(p), [0])
    plus = np.array([1, 1]) / math.sqrt(2)
    # X keeps |+>, Y and Z send it to |->
    assert (plus @ out @ plus).real == pytest.approx(1 - 2 * p / 3, abs=1e-14)


def test_probability_range_checked():
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            depolarizing_1q(bad)
        with pytest.raises(ValueError):
            amplitude_damping(bad)
        with pytest.raises(ValueError):
            CircuitNoise(bad, 0.0)


def test_decohere_examples():
    rho = random_density(1, np.random.default_rng(4))
    assert np.allclose(decohere(rho, 0, 0.0, 5.0, 5.0), rho)
    assert np.allclose(decohere(rho, 0, 1e4, 1.0, 1.0), np.eye(2) / 2, atol=1e-12)
    with pytest.raises(ValueError):
        decohere(rho, 0, -1.0, 1.0, 1.0)


def test_decohere_coherence_at_one_lifetime():
    # composed Kraus maps: sqrt(1 - g1) * sqrt(1 - g2) with g = 1 - e^-1
    out = decohere(ket_plus(), 0, 2.0, 2.0, 2.0)
    assert out[0, 1].real == pytest.approx(0.5 * math.exp(-1), abs=1e-12)


def test_amplitude_damping_examples():
    one = projector(ket("1"))
    assert np.allclose(apply_channel(one, amplitude_damping(1.0), [0]), one)
    assert np.allclose(apply_channel(one, amplitude_damping(0.0), [0]), projector(ket("0")))
    assert np.allclose(apply_channel(one, amplitude_damping(0.5), [0]), np.eye(2) / 2)


def test_coherence_sets():
    s3 = resolve_coherence_set("Set-3")
    assert s3.T1_link == s3.T2_link == s3.T1_idle == s3.T2_idle == 1e6
    mix = resolve_coherence_set("Set-mix")
    assert mix.T1_link == COHERENCE_SETS["Set-1"].T1_link
    assert mix.T1_idle == COHERENCE_SETS["Set-3"].T1_idle
    sd = resolve_coherence_set("Set-D")
    assert sd.absolute and sd.t_link_seconds == 1e-5
    assert sd.t_pulse == 1e-3 and sd.n_dd == 18
    assert sd.t_dd == pytest.approx(1e-3 / 1e-5 + 36)
    assert sd.relative().T1_link == pytest.approx(3600 / 1e-5)
    with pytest.raises(ValueError):
        resolve_coherence_set("Set-9")
    assert resolve_coherence_set("Set-3", T1_link=10.0).T1_link == 10.0


def test_coherence_set_invariants():
    with pytest.raises(ValueError):
        CoherenceSet("x", 10.0, 10.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        CoherenceSet("x", 0.0, 1.0, 1.0, 1.0)


def test_operation_times():
    t = OperationTimes()
    assert t.t_link == 1.0
    assert t.controlled_gate("Y") == t.t_ciy
    with pytest.raises(ValueError):
        OperationTimes(t_cz=-1.0)
    dd = t.with_dd(resolve_coherence_set("Set-D").relative())
    assert dd.t_cz == pytest.approx(136.0)


def test_uniform_noise_couples_gate_and_measurement():
    n = CircuitNoise.uniform(0.01)
    assert n.p_g == n.p_m == 0.01


@settings(max_examples=40, deadline=None)
@given(t=st.floats(0, 50), T1=st.floats(0.1, 100), T2=st.floats(0.1, 100))
def test_decoherence_is_the_listed_pauli_channel(t, T1, T2):
    rho = random_density(1, np.random.default_rng(int(t * 1000)))
    w = decoherence_pauli_probs(t, T1, T2)
    assert w.sum() == pytest.approx(1.0)
    assert np.all(w >= -1e-15)
    direct = decohere(rho, 0, t, T1, T2)
    via = sum(wi * PAULI[c] @ rho @ PAULI[c].conj().T for wi, c in zip(w, "IXYZ"))
    assert np.allclose(direct, via, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(t1=st.floats(0, 20), t2=st.floats(0, 20), T1=st.floats(0.5, 50), T2=st.floats(0.5, 50))
def test_decohere_semigroup(t1, t2, T1, T2):
    rho = random_density(2, np.random.default_rng(7))
    once = decohere(rho, 1, t1 + t2, T1, T2)
    twice = decohere(decohere(rho, 1, t1, T1, T2), 1, t2, T1, T2)
    assert np.allclose(once, twice, atol=1e-10)


def test_repeated_decoherence_converges_to_mixed():
    rho = projector(ket("0"))
    for _ in range(200):
        rho = decohere(rho, 0, 1.0, 3.0, 3.0)
    assert np.allclose(rho, np.eye(2) / 2, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(p=st.floats(0, 1), g=st.floats(0, 1))
def test_channels_complete(p, g):
    for ch in (depolarizing_1q(p), depolarizing_2q(p), amplitude_damping(g)):
        total = sum(k.conj().T @ k for k in ch.operators)
        assert np.allclose(total, np.eye(total.shape[0]), atol=1e-9)

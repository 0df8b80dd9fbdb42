import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _helpers import phenomenological_instance
from modqec.decoders import (MatchingGraph, brute_force_decode, decode, mwpm_decode,
                             path_qubits, uf_decode)
from modqec.surface_code import build_layout, compute_defects, syndrome

LAYOUT = build_layout("WT4", 4)


def _random_defects(rng, layout, n, layers=5):
    cells = rng.choice(layers * layout.d ** 2, size=n, replace=False)
    return np.stack([cells // layout.d ** 2, cells % layout.d ** 2], axis=1)


def _spatial_parity(graph: MatchingGraph) -> np.ndarray:
    """Stabilizers hit an odd number of times across all layers."""
    par = np.zeros(graph.d ** 2, dtype=np.uint8)
    for _, s in graph.defects:
        par[s] ^= 1
    return par


def _syndrome_valid(graph, correction) -> bool:
    # a correction is valid when it reproduces the net spatial syndrome
    return np.array_equal(syndrome(graph.layout, correction, graph.stab_type), _spatial_parity(graph))


@pytest.mark.parametrize("fn", [uf_decode, mwpm_decode, brute_force_decode])
def test_empty_defects(fn):
    g = MatchingGraph(LAYOUT, "Z", np.zeros((0, 2), dtype=int))
    res = fn(g)
    assert not res.correction.any()
    assert res.weight == 0


@pytest.mark.parametrize("fn", [uf_decode, mwpm_decode, brute_force_decode])
@pytest.mark.parametrize("t", ["Z", "X"])
def test_adjacent_defects_one_qubit(fn, t):
    # stabilizers 0 and 1 are horizontal neighbours
    g = MatchingGraph(LAYOUT, t, [(2, 0), (2, 1)])
    res = fn(g)
    assert res.correction.sum() == 1
    assert _syndrome_valid(g, res.correction)


@pytest.mark.parametrize("fn", [uf_decode, mwpm_decode, brute_force_decode])
def test_odd_defects_rejected(fn):
    with pytest.raises(ValueError):
        fn(MatchingGraph(LAYOUT, "Z", [(0, 0)]))


def test_time_pair_needs_no_correction():
    g = MatchingGraph(LAYOUT, "Z", [(1, 5), (2, 5)])
    for fn in (uf_decode, mwpm_decode):
        assert not fn(g).correction.any()


def test_toric_wrap_takes_short_way():
    lay = build_layout("WT4", 6)
    # columns 0 and 5 of row 0 are neighbours through the boundary
    g = MatchingGraph(lay, "Z", [(0, 0), (0, 5)])
    assert g.distance(0, 1) == 1
    res = mwpm_decode(g)
    assert res.weight == 1 and res.correction.sum() == 1
    assert len(path_qubits(lay, "Z", 0, 5)) == 1
    assert len(path_qubits(lay, "X", 0, 6 * 5)) == 1


def test_brute_force_counts_pairings():
    g = MatchingGraph(LAYOUT, "Z", [(0, 0), (0, 2), (3, 0), (3, 2)])
    res = brute_force_decode(g)
    dist = g.distance_matrix()
    options = [dist[0, 1] + dist[2, 3], dist[0, 2] + dist[1, 3], dist[0, 3] + dist[1, 2]]
    assert res.weight == min(options)
    with pytest.raises(ValueError):
        brute_force_decode(MatchingGraph(LAYOUT, "Z", _random_defects(np.random.default_rng(0),
                                                                     LAYOUT, 10)))


def test_metric_properties():
    rng = np.random.default_rng(1)
    for _ in range(20):
        g = MatchingGraph(LAYOUT, "X", _random_defects(rng, LAYOUT, 6))
        D = g.distance_matrix()
        assert np.array_equal(D, D.T)
        assert np.all(D >= 0) and np.all(np.diag(D) == 0)
        for a, b, c in itertools.permutations(range(6), 3):
            assert D[a, c] <= D[a, b] + D[b, c]


def test_defects_sorted_for_tie_breaks():
    g = MatchingGraph(LAYOUT, "Z", [(3, 1), (0, 7), (0, 2), (3, 0)])
    assert g.defects.tolist() == [[0, 2], [0, 7], [3, 0], [3, 1]]


def test_decode_dispatch():
    g = MatchingGraph(LAYOUT, "Z", [(0, 0), (0, 1)])
    assert decode("uf", g).correction.sum() == 1
    with pytest.raises(ValueError):
        decode("bp", g)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32), half=st.integers(1, 4), t=st.sampled_from(["Z", "X"]),
       d=st.sampled_from([4, 6]))
def test_decoders_valid_and_ordered(seed, half, t, d):
    lay = build_layout("WT4", d)
    g = MatchingGraph(lay, t, _random_defects(np.random.default_rng(seed), lay, 2 * half, d + 1))
    uf, mw, bf = uf_decode(g), mwpm_decode(g), brute_force_decode(g)
    assert mw.weight == bf.weight
    assert mw.weight <= uf.weight
    for res in (uf, mw, bf):
        assert _syndrome_valid(g, res.correction)


def test_deterministic():
    rng = np.random.default_rng(4)
    g = MatchingGraph(LAYOUT, "Z", _random_defects(rng, LAYOUT, 8))
    for fn in (uf_decode, mwpm_decode):
        assert np.array_equal(fn(g).correction, fn(g).correction)


def test_phenomenological_instances_corrected():
    rng = np.random.default_rng(8)
    for _ in range(100):
        outcomes, frame = phenomenological_instance(LAYOUT, 0.02, rng)
        g = MatchingGraph(LAYOUT, "Z", compute_defects(outcomes, "Z"))
        for fn in (uf_decode, mwpm_decode):
            corr = fn(g).correction
            # residual has trivial syndrome
            assert not syndrome(LAYOUT, frame ^ corr, "Z").any()

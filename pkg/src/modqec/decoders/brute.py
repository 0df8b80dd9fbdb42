"""Exhaustive minimum-weight perfect matching for small defect sets (test oracle)."""
from __future__ import annotations

from .graph import Decoding, MatchingGraph, correction_from_pairs


def _best(dist, nodes):
    if not nodes:
        return 0, []
    first, rest = nodes[0], nodes[1:]
    best = None
    for k, other in enumerate(rest):
        w, pairs = _best(dist, rest[:k] + rest[k + 1:])
        w += dist[first][other]
        if best is None or w < best[0]:
            best = (w, [(first, other)] + pairs)
    return best


def brute_force_decode(graph: MatchingGraph, max_defects: int = 8) -> Decoding:
    graph.check_even()
    if len(graph) > max_defects:
        raise ValueError(f"{len(graph)} defects exceed the brute-force limit {max_defects}")
    dist = graph.distance_matrix().tolist()
    weight, pairs = _best(dist, list(range(len(graph))))
    return Decoding(correction_from_pairs(graph, pairs), int(weight), pairs)

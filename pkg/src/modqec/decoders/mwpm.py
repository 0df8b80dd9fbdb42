"""Minimum-weight perfect matching on the complete defect graph (networkx blossom)."""
from __future__ import annotations

import networkx as nx

from .graph import Decoding, MatchingGraph, correction_from_pairs


def mwpm_decode(graph: MatchingGraph) -> Decoding:
    graph.check_even()
    n = len(graph)
    if n == 0:
        return Decoding(correction_from_pairs(graph, []), 0, [])
    dist = graph.distance_matrix()
    big = int(dist.max()) + 1
    g = nx.Graph()
    for a in range(n):
        for b in range(a + 1, n):
            # maximizing big - dist over perfect matchings minimizes total distance
            g.add_edge(a, b, weight=big - int(dist[a, b]))
    matching = nx.max_weight_matching(g, maxcardinality=True)
    pairs = sorted(tuple(sorted(p)) for p in matching)
    if 2 * len(pairs) != n:
        raise RuntimeError("matching is not perfect")
    weight = int(sum(dist[a, b] for a, b in pairs))
    return Decoding(correction_from_pairs(graph, pairs), weight, pairs)

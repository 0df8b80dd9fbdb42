"""Union-Find decoder on the space-time lattice of one stabilizer type.

Clusters grow by half edges around odd clusters until every cluster holds an
even number of defects; a spanning forest of each cluster is then peeled
from the leaves. The torus has no boundary and the final layer is perfect,
so every cluster eventually becomes even.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .._accel import jit
from .graph import Decoding, MatchingGraph


@lru_cache(maxsize=None)
def spacetime_lattice(d: int, n_layers: int, right_key: bytes, down_key: bytes):
    """Edges ``(u, v, qubit)`` of the space-time lattice; time edges have qubit -1."""
    right = np.frombuffer(right_key, dtype=np.int64).reshape(d, d)
    down = np.frombuffer(down_key, dtype=np.int64).reshape(d, d)
    eu, ev, eq = [], [], []
    for t in range(n_layers):
        base = t * d * d
        for i in range(d):
            for j in range(d):
                s = base + i * d + j
                eu.append(s); ev.append(base + i * d + (j + 1) % d); eq.append(right[i, j])
                eu.append(s); ev.append(base + ((i + 1) % d) * d + j); eq.append(down[i, j])
                if t + 1 < n_layers:
                    eu.append(s); ev.append(s + d * d); eq.append(-1)
    eu, ev, eq = (np.array(a, dtype=np.int64) for a in (eu, ev, eq))
    n = n_layers * d * d
    # CSR adjacency: for each node, incident edge ids
    deg = np.bincount(np.concatenate([eu, ev]), minlength=n)
    ptr = np.concatenate([[0], np.cumsum(deg)]).astype(np.int64)
    inc = np.zeros(ptr[-1], dtype=np.int64)
    fill = ptr[:-1].copy()
    for e in range(len(eu)):
        for x in (eu[e], ev[e]):
            inc[fill[x]] = e
            fill[x] += 1
    return n, eu, ev, eq, ptr, inc


@jit
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@jit
def _uf_kernel(n, eu, ev, ptr, inc, defect):
    """Return a 0/1 mask over edges whose flip removes all defects."""
    n_edges = eu.shape[0]
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    odd = defect.copy()
    support = np.zeros(n_edges, dtype=np.int64)
    fused = np.zeros(n_edges, dtype=np.int64)
    while True:
        any_odd = False
        for x in range(n):
            if parent[x] == x and odd[x]:
                any_odd = True
                break
        if not any_odd:
            break
        n_fused = 0
        for e in range(n_edges):
            if support[e] >= 2:
                continue
            ru = _find(parent, eu[e])
            rv = _find(parent, ev[e])
            grow = odd[ru] + (odd[rv] if rv != ru else 0)
            if grow == 0:
                continue
            support[e] = min(2, support[e] + grow)
            if support[e] == 2:
                fused[n_fused] = e
                n_fused += 1
        for k in range(n_fused):
            e = fused[k]
            ru = _find(parent, eu[e])
            rv = _find(parent, ev[e])
            if ru == rv:
                continue
            if size[ru] < size[rv] or (size[ru] == size[rv] and rv < ru):
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]
            odd[ru] ^= odd[rv]

    # spanning forest over fully grown edges, breadth first from the lowest node
    seen = np.zeros(n, dtype=np.uint8)
    order = np.empty(n, dtype=np.int64)
    up_edge = -np.ones(n, dtype=np.int64)
    up_node = -np.ones(n, dtype=np.int64)
    m = 0
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = 1
        order[m] = start
        head = m
        m += 1
        while head < m:
            x = order[head]
            head += 1
            for k in range(ptr[x], ptr[x + 1]):
                e = inc[k]
                if support[e] < 2:
                    continue
                y = ev[e] if eu[e] == x else eu[e]
                if not seen[y]:
                    seen[y] = 1
                    up_edge[y] = e
                    up_node[y] = x
                    order[m] = y
                    m += 1
    # peel leaves toward the roots
    left = defect.copy()
    flip = np.zeros(n_edges, dtype=np.uint8)
    for k in range(m - 1, -1, -1):
        x = order[k]
        if left[x] and up_edge[x] >= 0:
            flip[up_edge[x]] = 1
            left[x] = 0
            left[up_node[x]] ^= 1
    return flip


def uf_decode(graph: MatchingGraph) -> Decoding:
    graph.check_even()
    layout = graph.layout
    d = layout.d
    right, down = layout.edges[graph.stab_type]
    n_layers = d + 1 if len(graph) == 0 else max(d + 1, int(graph.defects[:, 0].max()) + 1)
    n, eu, ev, eq, ptr, inc = spacetime_lattice(
        d, n_layers, np.ascontiguousarray(right, dtype=np.int64).tobytes(),
        np.ascontiguousarray(down, dtype=np.int64).tobytes())
    defect = np.zeros(n, dtype=np.int64)
    for t, s in graph.defects:
        defect[t * d * d + s] ^= 1
    flip = _uf_kernel(n, eu, ev, ptr, inc, defect)
    corr = np.zeros(layout.n_data, dtype=np.uint8)
    for e in np.flatnonzero(flip):
        if eq[e] >= 0:
            corr[eq[e]] ^= 1
    return Decoding(corr, int(flip.sum()))

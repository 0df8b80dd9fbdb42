"""Space-time defect graphs on the torus."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..surface_code import ToricLayout


@dataclass(frozen=True)
class MatchingGraph:
    """Defects ``(layer, stabilizer)`` of one stabilizer type with a toric metric.

    Space and time steps both cost 1. Stabilizer ``s`` sits at ``(s // d, s % d)``.
    """

    layout: ToricLayout
    stab_type: str
    defects: np.ndarray  # (n, 2) rows (layer, stabilizer), sorted

    def __post_init__(self):
        defects = np.asarray(self.defects, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "defects", defects[np.lexsort((defects[:, 1], defects[:, 0]))])

    @property
    def d(self) -> int:
        return self.layout.d

    def __len__(self):
        return len(self.defects)

    def coords(self, k: int) -> tuple[int, int, int]:
        t, s = self.defects[k]
        return int(t), int(s) // self.d, int(s) % self.d

    def distance(self, a: int, b: int) -> int:
        ta, ia, ja = self.coords(a)
        tb, ib, jb = self.coords(b)
        di = abs(ia - ib)
        dj = abs(ja - jb)
        return min(di, self.d - di) + min(dj, self.d - dj) + abs(ta - tb)

    def distance_matrix(self) -> np.ndarray:
        n = len(self)
        return np.array([[self.distance(a, b) for b in range(n)] for a in range(n)], dtype=np.int64)

    def check_even(self) -> None:
        if len(self) % 2:
            raise ValueError(f"odd number of defects ({len(self)})")


def _steps(a: int, b: int, d: int) -> tuple[int, int]:
    """Signed shortest move from ``a`` to ``b`` on a cycle; ties go the positive way."""
    fwd = (b - a) % d
    return (fwd, 1) if fwd <= d - fwd else (d - fwd, -1)


def path_qubits(layout: ToricLayout, stab_type: str, a: int, b: int) -> list[int]:
    """Data qubits on the shortest path between stabilizers ``a`` and ``b`` (rows first)."""
    d = layout.d
    right, down = layout.edges[stab_type]
    i, j = divmod(a, d)
    i2, j2 = divmod(b, d)
    out = []
    n, step = _steps(i, i2, d)
    for _ in range(n):
        out.append(int(down[i % d, j] if step > 0 else down[(i - 1) % d, j]))
        i = (i + step) % d
    n, step = _steps(j, j2, d)
    for _ in range(n):
        out.append(int(right[i, j % d] if step > 0 else right[i, (j - 1) % d]))
        j = (j + step) % d
    return out


def correction_from_pairs(graph: MatchingGraph, pairs) -> np.ndarray:
    corr = np.zeros(graph.layout.n_data, dtype=np.uint8)
    for a, b in pairs:
        for q in path_qubits(graph.layout, graph.stab_type, int(graph.defects[a, 1]),
                             int(graph.defects[b, 1])):
            corr[q] ^= 1
    return corr


@dataclass
class Decoding:
    correction: np.ndarray   # bit per data qubit
    weight: int              # space-time weight of the chosen pairing / edge set
    pairs: list | None = None

"""Four-qubit Pauli strings in symplectic bit form.

Index layout: bit ``q`` is the X part and bit ``4 + q`` the Z part of qubit
``q``, so multiplication (up to phase) is XOR of indices.
"""
from __future__ import annotations

import itertools

import numpy as np

N = 4
LETTERS = "IXYZ"
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_LETTER = {v: k for k, v in _BITS.items()}

# table row order: lexicographic over IXYZ, qubit 1 first
ALL_STRINGS = ["".join(t) for t in itertools.product(LETTERS, repeat=N)]


def index(s: str) -> int:
    if len(s) != N or any(c not in _BITS for c in s):
        raise ValueError(f"bad Pauli string {s!r}")
    i = 0
    for q, c in enumerate(s):
        x, z = _BITS[c]
        i |= x << q | z << (N + q)
    return i


def string(i: int) -> str:
    return "".join(_LETTER[((i >> q) & 1, (i >> (N + q)) & 1)] for q in range(N))


STRING_INDEX = np.array([index(s) for s in ALL_STRINGS])   # row -> symplectic index
ROW_OF_INDEX = np.argsort(STRING_INDEX)                      # symplectic index -> row

X_MASK = (1 << N) - 1
Z_MASK = X_MASK << N
STABILIZER = {"Z": Z_MASK, "X": X_MASK}


def weight(i: int) -> int:
    return bin((i | i >> N) & X_MASK).count("1")


def anticommutes(a: int, b: int) -> bool:
    """Symplectic product of two Pauli strings."""
    ax, az = a & X_MASK, a >> N
    bx, bz = b & X_MASK, b >> N
    return bin(ax & bz ^ az & bx).count("1") % 2 == 1


def canonical(i: int, stab: str) -> int:
    """Representative of ``{P, P*S}``: lowest weight, then lexicographic in IXYZ."""
    j = i ^ STABILIZER[stab]
    key = lambda k: (weight(k), ROW_OF_INDEX[k])
    return min(i, j, key=key)


def single_qubit_index(i: int, q: int) -> int:
    """Single-qubit symplectic index (I=0, X=1, Z=2, Y=3) of qubit ``q``."""
    return (i >> q) & 1 | ((i >> (N + q)) & 1) << 1


# (256, 4) table of single-qubit components of every string
COMPONENTS = np.array([[single_qubit_index(i, q) for q in range(N)] for i in range(1 << 2 * N)])

# single-qubit weights come as (I, X, Y, Z); this reorders them to symplectic order
IXYZ_TO_SYMPLECTIC = np.array([0, 1, 3, 2])


def product_distribution(per_qubit: np.ndarray) -> np.ndarray:
    """Joint distribution over 4-qubit strings from independent qubits.

    ``per_qubit`` has shape ``(..., 4 qubits, 4)`` in symplectic single-qubit
    order; the result has shape ``(..., 256)`` indexed symplectically.
    """
    per_qubit = np.asarray(per_qubit)
    out = np.ones(per_qubit.shape[:-2] + (1 << 2 * N,))
    for q in range(N):
        out = out * per_qubit[..., q, :][..., COMPONENTS[:, q]]
    return out


def xor_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distribution of ``P*Q`` for independent ``P ~ a``, ``Q ~ b`` (symplectic index)."""
    out = np.zeros_like(a)
    idx = np.arange(len(a))
    for j in np.flatnonzero(b):
        out[idx ^ j] += b[j] * a
    return out

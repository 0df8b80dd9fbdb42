"""Dense density-matrix toolkit for small qubit registers.

Qubit 0 is the most significant tensor factor, so a register ``[a, b, c]``
corresponds to ``kron(a, kron(b, c))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

MAX_QUBITS = 12
HERMITIAN_TOL = 1e-10
PSD_FLOOR = -1e-9
COMPLETENESS_TOL = 1e-9

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def controlled(op: np.ndarray) -> np.ndarray:
    """Two-qubit controlled version of a single-qubit gate (control first)."""
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = op
    return out


def n_qubits(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.ndim != 2 or rho.shape[1] != dim or 1 << n != dim:
        raise ValueError(f"not a square 2^n matrix: shape {rho.shape}")
    return n


def pauli_matrix(ops: str) -> np.ndarray:
    """Matrix of a Pauli string such as ``"XIZ"``."""
    if not ops or any(c not in PAULI for c in ops):
        raise ValueError(f"invalid Pauli string {ops!r}")
    return reduce(np.kron, (PAULI[c] for c in ops))


def ket(bits: str) -> np.ndarray:
    """Computational basis vector for a bit string like ``"0110"``."""
    v = np.zeros(1 << len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def ghz_state(n: int) -> np.ndarray:
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return projector(v)


def check_density_matrix(rho: np.ndarray, normalized: bool = False) -> None:
    """Raise ``ValueError`` if ``rho`` is not a valid (sub-normalized) state."""
    n = n_qubits(rho)
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian")
    if np.linalg.eigvalsh(rho).min() < PSD_FLOOR:
        raise ValueError("matrix has negative eigenvalues")
    tr = np.trace(rho).real
    if normalized and abs(tr - 1) > 1e-9:
        raise ValueError(f"trace {tr} is not 1")
    if not 0 < tr <= 1 + 1e-9:
        raise ValueError(f"trace {tr} outside (0, 1]")


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive map given by its Kraus operators."""

    operators: tuple

    def __init__(self, operators: Sequence[np.ndarray], check: bool = True):
        ops = tuple(np.asarray(k, dtype=complex) for k in operators)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise ValueError("Kraus operators must share one square shape")
        object.__setattr__(self, "operators", ops)
        if check:
            total = sum(k.conj().T @ k for k in ops)
            if np.max(np.abs(total - np.eye(dim))) > COMPLETENESS_TOL:
                raise ValueError("Kraus operators violate completeness")

    @property
    def n_qubits(self) -> int:
        return self.operators[0].shape[0].bit_length() - 1

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """Channel applying ``self`` first and ``other`` second."""
        return KrausChannel([b @ a for a in self.operators for b in other.operators])


@dataclass(frozen=True)
class Povm:
    """Measurement given by its measurement operators ``M_k``.

    The operators used for photon detection are positive semidefinite, so
    each ``M_k`` is the square root of its effect ``M_k^2``; completeness is
    checked on the effects, ``sum M_k^2 = I``.
    """

    elements: tuple

    def __init__(self, elements: Sequence[np.ndarray]):
        els = tuple(np.asarray(e, dtype=complex) for e in elements)
        dim = els[0].shape[0]
        for e in els:
            if np.max(np.abs(e - e.conj().T)) > HERMITIAN_TOL:
                raise ValueError("measurement operator is not Hermitian")
            if np.linalg.eigvalsh(e).min() < PSD_FLOOR:
                raise ValueError("measurement operator is not PSD")
        total = sum(e.conj().T @ e for e in els)
        if np.max(np.abs(total - np.eye(dim))) > COMPLETENESS_TOL:
            raise ValueError("effects do not sum to identity")
        object.__setattr__(self, "elements", els)

    @property
    def effects(self) -> list[np.ndarray]:
        return [e.conj().T @ e for e in self.elements]


def _check_targets(n: int, targets: Sequence[int], k: int) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"targets {targets} are not distinct")
    if len(targets) != k:
        raise ValueError(f"operator acts on {k} qubits but {len(targets)} targets given")
    if any(t < 0 or t >= n for t in targets):
        raise ValueError(f"targets {targets} out of range for {n} qubits")
    return targets


def _left(op: np.ndarray, tensor: np.ndarray, targets: list[int], n: int) -> np.ndarray:
    # contract op (2^k x 2^k) into the row axes listed in targets
    k = len(targets)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), targets))
    rest = [a for a in range(tensor.ndim) if a not in targets]
    order = np.empty(tensor.ndim, dtype=int)
    order[targets] = np.arange(k)
    order[rest] = np.arange(k, tensor.ndim)
    return np.transpose(out, order)


def apply_operator(rho: np.ndarray, op: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Return ``op rho op^dagger`` with ``op`` acting on ``targets``."""
    n = n_qubits(rho)
    op = np.asarray(op, dtype=complex)
    targets = _check_targets(n, targets, n_qubits(op))
    t = rho.reshape((2,) * (2 * n))
    t = _left(op, t, targets, n)
    t = _left(op.conj(), t, [q + n for q in targets], n)
    return t.reshape(rho.shape)


def apply_channel(rho: np.ndarray, ch: KrausChannel, targets: Sequence[int]) -> np.ndarray:
    """Apply a Kraus channel to the listed qubits of ``rho``."""
    return sum(apply_operator(rho, k, targets) for k in ch.operators)


def apply_povm_element(rho: np.ndarray, e: np.ndarray, targets: Sequence[int]):
    """Apply measurement operator ``e`` and return ``(branch, probability)``.

    The branch is left unnormalized; its trace is the probability.
    """
    out = apply_operator(rho, e, targets)
    prob = float(np.trace(out).real)
    if prob < PSD_FLOOR:
        raise ValueError(f"negative branch probability {prob}")
    return out, max(prob, 0.0)


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced state on the qubits in ``keep`` (kept in ascending order)."""
    n = n_qubits(rho)
    keep = sorted(int(q) for q in keep)
    if not keep:
        raise ValueError("keep set is empty")
    if len(set(keep)) != len(keep) or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"invalid keep set {keep}")
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for q in drop:
        cols[q] = rows[q]
    out = "".join(rows[q] for q in keep) + "".join(cols[q] for q in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    dim = 1 << len(keep)
    return red.reshape(dim, dim)


def permute_qubits(rho: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder qubits so that new qubit ``i`` is old qubit ``order[i]``."""
    n = n_qubits(rho)
    order = list(order)
    t = rho.reshape((2,) * (2 * n))
    t = np.transpose(t, order + [q + n for q in order])
    return t.reshape(rho.shape)


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``."""
    if rho.shape != sigma.shape:
        raise ValueError("dimension mismatch")
    s = _sqrtm_psd(rho)
    m = s @ sigma @ s
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return float(min(1.0, np.sum(np.sqrt(np.clip(w, 0.0, None)))))


def ghz_fidelity(rho: np.ndarray) -> float:
    """Overlap ``<GHZ|rho|GHZ>`` with the ``(|0..0> + |1..1>)/sqrt 2`` state."""
    r = rho / np.trace(rho).real
    return float(0.5 * (r[0, 0].real + r[-1, -1].real) + r[0, -1].real)

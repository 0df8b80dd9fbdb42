"""Noisy stabilizer measurements summarized as Pauli-error tables.

A stabilizer measurement acts on four data qubits, each half of a Bell pair
with an untouched reference qubit. The circuit output is expanded in the
basis ``(P x I) Pi_s |Phi>`` with ``Pi_s`` the stabilizer projectors; the
squared overlaps give one row per ``(P, meas_error)``.

Row semantics: the error ``P`` acts first, then the stabilizer is measured
and the record is flipped when ``meas_error`` is set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import paulis
from .noise import (CircuitNoise, CoherenceSet, OperationTimes, decoherence_channel,
                    decoherence_pauli_probs, depolarizing_2q)
from .quantum import H, PAULI, apply_channel, apply_operator, controlled, partial_trace, pauli_matrix
from .schemes.result import SchemeResult

SCHEMA_VERSION = 1
SUM_TOL = 1e-8
NEG_TOL = 1e-12

# data qubits handled by each GHZ qubit (one module each)
GROUPS = {"WT4": [[0], [1], [2], [3]], "WT3": [[0], [1, 2], [3]]}

_PHI = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


def build_choi_input(n_data: int) -> np.ndarray:
    """Product of ``n_data`` Bell pairs, ordered (data_1, ref_1, data_2, ref_2, ...)."""
    if not 1 <= n_data <= 4:
        raise ValueError(f"unsupported n_data={n_data}")
    v = np.array([1.0 + 0j])
    for _ in range(n_data):
        v = np.kron(v, _PHI)
    return np.outer(v, v.conj())


def _choi_vector() -> np.ndarray:
    v = np.array([1.0 + 0j])
    for _ in range(paulis.N):
        v = np.kron(v, _PHI)
    return v


def _full_operator(i: int) -> np.ndarray:
    """Pauli ``i`` on the data qubits, identity on the references (interleaved order)."""
    s = paulis.string(i)
    return pauli_matrix("".join(c + "I" for c in s))


MAX_WAIT_ATOMS = 20000


def truncated_geometric(p_succ: float, n_max: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Succeeding attempt index given success within ``n_max`` attempts.

    Returns ``(k, weights, p_within)``. Long ranges are grouped into equal
    blocks of consecutive indices, each placed at its conditional mean.
    """
    if n_max < 1:
        raise ValueError("cut-off shorter than one attempt")
    if p_succ >= 1:
        return np.array([1.0]), np.array([1.0]), 1.0
    if p_succ <= 0:
        raise ValueError("p_succ must be positive")
    lq = math.log1p(-p_succ)
    p_within = -math.expm1(n_max * lq)
    if n_max <= MAX_WAIT_ATOMS:
        k = np.arange(1, n_max + 1, dtype=float)
        w = np.exp((k - 1) * lq)
        return k, w / w.sum(), p_within
    m = -(-n_max // MAX_WAIT_ATOMS)
    starts = np.arange(1, n_max + 1, m, dtype=float)
    sizes = np.minimum(m, n_max + 1 - starts)
    q = math.exp(lq)
    # block mass q^(a-1) (1 - q^m) / (1 - q); mean offset of j ~ q^j on 0..m-1
    qm = np.exp(sizes * lq)
    w = np.exp((starts - 1) * lq) * (-np.expm1(sizes * lq))
    offset = q / (1 - q) - sizes * qm / (-np.expm1(sizes * lq))
    return starts + offset, w / w.sum(), p_within


def attempts_within(t_cut: float, attempt: float) -> int:
    n = int(math.floor(t_cut / attempt + 1e-9))
    if n < 1:
        raise ValueError(f"t_cut={t_cut} is shorter than one attempt ({attempt})")
    return n


def p_ghz_within_cutoff(p_succ: float, t_cut: float, attempt: float) -> float:
    return truncated_geometric(p_succ, attempts_within(t_cut, attempt))[2]


# ------------------------------------------------------------- circuit pieces

def _group_map(n_data: int, stab: str, noise: CircuitNoise,
               data_channels: dict, first: int) -> np.ndarray:
    """Action of one module: comm operator ``|a><b|`` -> (data, ref) operator per outcome.

    Returns ``f[a, b, o]`` with outcome flips already mixed in.
    """
    gate = controlled(PAULI[stab])
    dep = depolarizing_2q(noise.p_g)
    bell = build_choi_input(n_data)
    dim = 4 ** n_data
    f = np.zeros((2, 2, 2, dim, dim), dtype=complex)
    for a in range(2):
        for b in range(2):
            rho = np.kron(np.outer(np.eye(2)[a], np.eye(2)[b]), bell)
            for j in range(n_data):
                ch = data_channels.get(first + j)
                if ch is not None:
                    rho = apply_channel(rho, ch, [1 + 2 * j])
            for j in range(n_data):
                rho = apply_operator(rho, gate, [0, 1 + 2 * j])
                rho = apply_channel(rho, dep, [0, 1 + 2 * j])
            rho = apply_operator(rho, H, [0])
            for o in range(2):
                proj = np.outer(np.eye(2)[o], np.eye(2)[o])
                branch = apply_operator(rho, proj, [0])
                f[a, b, o] = partial_trace(branch, list(range(1, 1 + 2 * n_data)))
    flipped = f[:, :, ::-1]
    return (1 - noise.p_m) * f + noise.p_m * flipped


def _recorded_branches(ghz: np.ndarray, groups, maps) -> tuple[np.ndarray, np.ndarray]:
    """Output states for recorded parity even (+1) and odd (-1), unnormalized."""
    n = len(groups)
    g = [m[:, :, 0] + m[:, :, 1] for m in maps]
    h = [m[:, :, 0] - m[:, :, 1] for m in maps]
    letters = "ABCD"[:n]
    lower = "abcd"[:n]
    out_i = "IJKL"[:n]
    out_j = "ijkl"[:n]
    spec = (letters + lower + "," + ",".join(f"{letters[k]}{lower[k]}{out_i[k]}{out_j[k]}"
                                              for k in range(n))
            + "->" + out_i + out_j)
    rho_g = ghz.reshape((2,) * (2 * n))
    dim = 1 << 2 * paulis.N
    plus = np.einsum(spec, rho_g, *g, optimize=True).reshape(dim, dim)
    minus = np.einsum(spec, rho_g, *h, optimize=True).reshape(dim, dim)
    return (plus + minus) / 2, (plus - minus) / 2


def decompose(rho_even: np.ndarray, rho_odd: np.ndarray, stab: str) -> np.ndarray:
    """Squared overlaps with the stabilizer-projected Choi basis.

    Returns ``(256, 2)`` masses indexed by (symplectic Pauli, meas_error);
    each coset ``{P, P*S}`` is stored on its canonical representative.
    """
    s_idx = paulis.STABILIZER[stab]
    phi = _choi_vector()
    s_phi = _full_operator(s_idx) @ phi
    plus, minus = (phi + s_phi) / math.sqrt(2), (phi - s_phi) / math.sqrt(2)
    out = np.zeros((1 << 2 * paulis.N, 2))
    for i in range(1 << 2 * paulis.N):
        if paulis.canonical(i, stab) != i:
            continue
        op = _full_operator(i)
        vp, vm = op @ plus, op @ minus
        # P Pi_s Phi has eigenvalue s, flipped when P anticommutes with S
        same = np.vdot(vp, rho_even @ vp).real + np.vdot(vm, rho_odd @ vm).real
        other = np.vdot(vm, rho_even @ vm).real + np.vdot(vp, rho_odd @ vp).real
        out[i] = (other, same) if paulis.anticommutes(i, s_idx) else (same, other)
    total = out.sum()
    if abs(total - 1) > SUM_TOL:
        raise ValueError(f"decomposition sums to {total}, basis incomplete")
    return np.clip(out, 0.0, None)


def _qubit_probs(t, T1, T2) -> np.ndarray:
    """Single-qubit decoherence weights in symplectic order, shape (..., 4)."""
    return decoherence_pauli_probs(t, T1, T2)[..., paulis.IXYZ_TO_SYMPLECTIC]


def _compose_1q(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    idx = np.arange(4)
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for j in range(4):
        out[..., idx ^ j] += b[..., j:j + 1] * a
    return out


def waiting_error_distribution(weights, taus, extra: float, coh: CoherenceSet,
                               link_qubits=(True,) * 4, chunk: int = 4096) -> np.ndarray:
    """Joint Pauli distribution of four memory qubits averaged over waiting times.

    Each qubit waits ``tau`` (T_link if ``link_qubits[q]`` else T_idle)
    followed by ``extra`` at T_idle. The shared ``tau`` correlates the qubits.
    """
    tail = _qubit_probs(extra, coh.T1_idle, coh.T2_idle)
    out = np.zeros(1 << 2 * paulis.N)
    for s in range(0, len(taus), chunk):
        t = np.asarray(taus[s:s + chunk], dtype=float)
        per = []
        for q in range(paulis.N):
            T1, T2 = (coh.T1_link, coh.T2_link) if link_qubits[q] else (coh.T1_idle, coh.T2_idle)
            per.append(_compose_1q(_qubit_probs(t, T1, T2), tail))
        joint = paulis.product_distribution(np.stack(per, axis=-2))
        out += weights[s:s + chunk] @ joint
    return out


def apply_pre_errors(masses: np.ndarray, pre: np.ndarray, stab: str) -> np.ndarray:
    """Fold data errors that happen before the circuit into the table."""
    out = np.stack([paulis.xor_convolve(masses[:, m], pre) for m in range(2)], axis=1)
    return reduce_cosets(out, stab)


def reduce_cosets(masses: np.ndarray, stab: str) -> np.ndarray:
    out = np.zeros_like(masses)
    for i in range(len(masses)):
        out[paulis.canonical(i, stab)] += masses[i]
    return out


# ---------------------------------------------------------------- simulation

@dataclass
class StabilizerBranches:
    success: np.ndarray         # (256, 2) masses given GHZ success
    failure: np.ndarray         # (256,) data error distribution given failure
    p_within: float


def _gate_time(arch: str, stab: str, times: OperationTimes) -> float:
    per = max(len(g) for g in GROUPS[arch])
    return per * times.controlled_gate(stab) + times.t_meas


def simulate_stabilizer(arch: str, stab: str, ghz: SchemeResult, noise: CircuitNoise,
                        times: OperationTimes, coherence: CoherenceSet, t_cut: float,
                        data_channels: dict | None = None) -> StabilizerBranches:
    """Noisy ZZZZ / XXXX measurement driven by a GHZ state.

    ``data_channels`` maps data-qubit index to a single-qubit channel applied
    before the gates (used to probe the decomposition).
    """
    if arch not in GROUPS:
        raise ValueError(f"unknown architecture {arch!r}")
    if stab not in ("Z", "X"):
        raise ValueError(f"unknown stabilizer type {stab!r}")
    groups = GROUPS[arch]
    if ghz.n_qubits != len(groups):
        raise ValueError(f"{arch} needs a {len(groups)}-qubit GHZ state, got {ghz.n_qubits}")
    coh = coherence.relative()
    times = times.with_dd(coh)
    attempt = ghz.duration
    n_max = attempts_within(t_cut, attempt)
    ks, weights, p_within = truncated_geometric(ghz.p_succ, n_max)
    t_gate = _gate_time(arch, stab, times)

    rho_g = ghz.state
    comm_wait = decoherence_channel(t_gate, coh.T1_idle, coh.T2_idle)
    for q in range(len(groups)):
        rho_g = apply_channel(rho_g, comm_wait, [q])
    data_channels = data_channels or {}
    maps = [_group_map(len(g), stab, noise, data_channels, g[0]) for g in groups]
    even, odd = _recorded_branches(rho_g, groups, maps)
    masses = decompose(even, odd, stab)

    pre = waiting_error_distribution(weights, attempt * ks, t_gate, coh)
    success = apply_pre_errors(masses, pre, stab)
    fail = waiting_error_distribution(np.ones(1), np.array([t_cut]), 0.0, coh)
    fail = reduce_cosets(fail[:, None], stab)[:, 0]
    return StabilizerBranches(success, fail, p_within)


def wt3_idle_column(coherence: CoherenceSet, times: OperationTimes, t_cut: float,
                    ghz: SchemeResult, stab: str = "Z") -> tuple[np.ndarray, np.ndarray]:
    """Errors on the four idle qubits (5, 6, 7, 8) during one WT3 sub-round.

    Qubits 5 and 6 share a module with an active communication qubit and decay
    with link coherence while attempts run; 7 and 8 sit in passive modules.
    Returns symplectic-indexed distributions given success and given failure.
    """
    coh = coherence.relative()
    times = times.with_dd(coh)
    n_max = attempts_within(t_cut, ghz.duration)
    ks, weights, _ = truncated_geometric(ghz.p_succ, n_max)
    taus = ghz.duration * ks
    t_gate = _gate_time("WT3", stab, times)
    link = (True, True, False, False)
    ok = waiting_error_distribution(weights, taus, t_gate, coh, link)
    fail = waiting_error_distribution(np.ones(1), np.array([t_cut]), 0.0, coh, link)
    return ok, fail


# --------------------------------------------------------------------- tables

@dataclass
class SuperoperatorTable:
    """Rows ``(error, ghz_success, meas_error)`` in fixed order; see ``row_keys``."""

    architecture: str
    p_plaquette: np.ndarray   # (256, 2, 2) [row, success(1)/failure(0) -> index, meas]
    p_vertex: np.ndarray
    p_idle: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("p_plaquette", "p_vertex"):
            col = getattr(self, name)
            if col.shape != (256, 2, 2):
                raise ValueError(f"{name} has shape {col.shape}")
            if np.any(col < -NEG_TOL):
                raise ValueError(f"{name} has negative entries")
            if abs(col.sum() - 1) > SUM_TOL:
                raise ValueError(f"{name} sums to {col.sum()}")
        if self.architecture == "WT3":
            if self.p_idle is None:
                raise ValueError("WT3 table needs an idle column")
            for s in range(2):
                if abs(self.p_idle[:, s, :].sum() - 1) > SUM_TOL:
                    raise ValueError("idle column is not normalized per GHZ outcome")
        elif self.p_idle is not None:
            raise ValueError("only WT3 tables carry an idle column")

    @staticmethod
    def row_keys():
        """Row order: error (IXYZ lexicographic), ghz_success 1 then 0, meas_error 0 then 1."""
        return [(e, s, m) for e in paulis.ALL_STRINGS for s in (1, 0) for m in (0, 1)]

    def column(self, name: str) -> np.ndarray:
        """Flattened column in ``row_keys`` order."""
        col = getattr(self, name)
        return col[:, ::-1, :].reshape(-1)

    def probability(self, name: str, error: str, success: bool, meas: bool) -> float:
        row = paulis.ALL_STRINGS.index(error)
        return float(getattr(self, name)[row, int(success), int(meas)])


def _to_rows(branches: StabilizerBranches) -> np.ndarray:
    """(256 rows, success, meas) array from symplectic-indexed branch masses."""
    col = np.zeros((256, 2, 2))
    order = paulis.STRING_INDEX
    col[:, 1, :] = branches.p_within * branches.success[order]
    col[:, 0, 0] = col[:, 0, 1] = (1 - branches.p_within) * branches.failure[order] / 2
    return col


def build_table(arch: str, ghz: SchemeResult, noise: CircuitNoise, times: OperationTimes,
                coherence: CoherenceSet, t_cut: float, metadata: dict | None = None,
                data_channels: dict | None = None) -> SuperoperatorTable:
    z = simulate_stabilizer(arch, "Z", ghz, noise, times, coherence, t_cut, data_channels)
    x = simulate_stabilizer(arch, "X", ghz, noise, times, coherence, t_cut, data_channels)
    idle = None
    if arch == "WT3":
        ok, fail = wt3_idle_column(coherence, times, t_cut, ghz)
        idle = np.zeros((256, 2, 2))
        idle[:, 1, 0] = ok[paulis.STRING_INDEX]
        idle[:, 0, 0] = fail[paulis.STRING_INDEX]
    meta = {"architecture": arch, "p_g": noise.p_g, "p_m": noise.p_m, "t_cut": t_cut,
            "p_ghz": ghz.p_succ, "attempt": ghz.duration, "ghz_fidelity": ghz.fidelity,
            "coherence": coherence.name}
    meta.update(metadata or {})
    return SuperoperatorTable(arch, _to_rows(z), _to_rows(x), idle, meta)


def stabilizer_fidelity(table: SuperoperatorTable, name: str = "p_plaquette") -> float:
    """Probability of a clean, successful measurement."""
    return table.probability(name, "IIII", True, False)


def save_table(table: SuperoperatorTable, path) -> None:
    cols = ["p_plaquette", "p_vertex"] + (["p_idle"] if table.p_idle is not None else [])
    lines = [f"# schema_version={SCHEMA_VERSION}"]
    lines += [f"# {k}={v}" for k, v in sorted(table.metadata.items())]
    lines.append(",".join(["error", "ghz_success", "meas_error"] + cols))
    data = [table.column(c) for c in cols]
    for r, (e, s, m) in enumerate(SuperoperatorTable.row_keys()):
        lines.append(",".join([e, str(s), str(m)] + ["%.17g" % d[r] for d in data]))
    Path(path).write_text("\n".join(lines) + "\n")


def load_table(path) -> SuperoperatorTable:
    meta = {}
    header = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif header is None:
            header = line.split(",")
        elif line.strip():
            rows.append(line.split(","))
    if meta.pop("schema_version", None) != str(SCHEMA_VERSION):
        raise ValueError("missing or unsupported schema_version")
    if header is None or header[:5] != ["error", "ghz_success", "meas_error", "p_plaquette", "p_vertex"]:
        raise ValueError("bad table header")
    keys = SuperoperatorTable.row_keys()
    if len(rows) != len(keys):
        raise ValueError(f"expected {len(keys)} rows, found {len(rows)}")
    cols = {name: np.zeros((256, 2, 2)) for name in header[3:]}
    for r, row in enumerate(rows):
        e, s, m = row[0], int(row[1]), int(row[2])
        if (e, s, m) != keys[r] or len(row) != len(header):
            raise ValueError(f"row {r} out of order or malformed")
        for name, v in zip(header[3:], row[3:]):
            cols[name][r // 4, s, m] = float(v)
    arch = meta.get("architecture", "WT3" if "p_idle" in cols else "WT4")
    return SuperoperatorTable(arch, cols["p_plaquette"], cols["p_vertex"], cols.get("p_idle"), meta)

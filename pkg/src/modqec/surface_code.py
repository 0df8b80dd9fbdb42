"""Toric code layouts and Monte Carlo QEC cycles driven by superoperator tables.

Edges of the ``d x d`` torus: ``h(i, j)`` runs from vertex ``(i, j)`` to
``(i+1, j)`` and ``v(i, j)`` from ``(i, j)`` to ``(i, j+1)``. Plaquettes are
Z-type and vertices X-type. Module ``(i, j)`` of the WT3 layout holds
``h(i, j)`` and ``v(i, j)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import paulis
from ._accel import USE_NUMBA, jit
from .superoperator import SuperoperatorTable

TYPES = ("Z", "X")


@dataclass(frozen=True)
class ToricLayout:
    d: int
    architecture: str
    stabilizers: dict          # type -> (d*d, 4) data qubits in table order
    idle: dict | None          # WT3 only: type -> (d*d, 4) idle qubits (5, 6, 7, 8)
    subrounds: list            # [(type, stabilizer indices)] in execution order
    modules: np.ndarray        # data qubit -> module
    logicals: dict             # name -> data qubits; Z* detect X errors, X* detect Z errors
    edges: dict = field(default_factory=dict)  # type -> (right, down) qubit grids for decoding

    @property
    def n_data(self) -> int:
        return 2 * self.d * self.d

    @property
    def n_modules(self) -> int:
        return int(self.modules.max()) + 1


def build_layout(arch: str, d: int) -> ToricLayout:
    if arch not in ("WT4", "WT3"):
        raise ValueError(f"unknown architecture {arch!r}")
    if d < 4 or d % 2:
        raise ValueError(f"distance must be even and at least 4, got {d}")

    def h(i, j):
        return (i % d) * d + j % d

    def v(i, j):
        return d * d + (i % d) * d + j % d

    grid = [(i, j) for i in range(d) for j in range(d)]
    plaq, vert, plaq_idle, vert_idle = [], [], [], []
    for i, j in grid:
        if arch == "WT3":
            # module-major order: A (one qubit), B (two), C (one)
            plaq.append([h(i, j + 1), h(i, j), v(i, j), v(i + 1, j)])
            plaq_idle.append([v(i, j + 1), h(i + 1, j), h(i + 1, j + 1), v(i + 1, j + 1)])
            vert.append([h(i - 1, j), h(i, j), v(i, j), v(i, j - 1)])
            vert_idle.append([v(i - 1, j), h(i, j - 1), h(i - 1, j - 1), v(i - 1, j - 1)])
        else:
            plaq.append([h(i, j), v(i, j), h(i, j + 1), v(i + 1, j)])
            vert.append([h(i, j), v(i, j), h(i - 1, j), v(i, j - 1)])
    stabs = {"Z": np.array(plaq), "X": np.array(vert)}

    if arch == "WT4":
        colour = np.array([(i + j) % 2 for i, j in grid])
        n_col = 2
        modules = np.arange(2 * d * d)
        idle = None
    else:
        colour = np.array([(i % 2) + 2 * (j % 2) for i, j in grid])
        n_col = 4
        modules = np.concatenate([np.arange(d * d), np.arange(d * d)])
        idle = {"Z": np.array(plaq_idle), "X": np.array(vert_idle)}
    subrounds = [(t, np.flatnonzero(colour == c)) for t in TYPES for c in range(n_col)]

    logicals = {
        "Z1": np.array([h(i, 0) for i in range(d)]),
        "Z2": np.array([v(0, j) for j in range(d)]),
        "X1": np.array([h(0, j) for j in range(d)]),
        "X2": np.array([v(i, 0) for i in range(d)]),
    }
    edges = {
        "Z": (np.array([[h(i, j + 1) for j in range(d)] for i in range(d)]),
              np.array([[v(i + 1, j) for j in range(d)] for i in range(d)])),
        "X": (np.array([[v(i, j) for j in range(d)] for i in range(d)]),
              np.array([[h(i, j) for j in range(d)] for i in range(d)])),
    }
    return ToricLayout(d, arch, stabs, idle, subrounds, modules, logicals, edges)


# ------------------------------------------------------------ table sampling

@dataclass(frozen=True)
class SamplingTables:
    """Cumulative row weights per stabilizer type, ready for inverse-CDF draws."""

    cdf: np.ndarray        # (2 types, 1024)
    error: np.ndarray      # (1024,) symplectic error of each row
    success: np.ndarray    # (1024,)
    meas: np.ndarray       # (1024,)
    idle_cdf: np.ndarray   # (2 success flags, 256); unused for WT4
    idle_error: np.ndarray  # (256,)


def _cdf(p: np.ndarray) -> np.ndarray:
    c = np.cumsum(np.clip(p, 0, None))
    return c / c[-1]


def sampling_tables(table: SuperoperatorTable) -> SamplingTables:
    keys = SuperoperatorTable.row_keys()
    error = np.array([paulis.index(e) for e, _, _ in keys], dtype=np.int64)
    success = np.array([s for _, s, _ in keys], dtype=np.int64)
    meas = np.array([m for _, _, m in keys], dtype=np.int64)
    cdf = np.stack([_cdf(table.column("p_plaquette")), _cdf(table.column("p_vertex"))])
    idle_cdf = np.zeros((2, 256))
    if table.p_idle is not None:
        for s in range(2):
            idle_cdf[s] = _cdf(table.p_idle[:, s, 0])
    else:
        idle_cdf[:] = 1.0
    idle_error = paulis.STRING_INDEX.astype(np.int64)
    return SamplingTables(cdf, error, success, meas, idle_cdf, idle_error)


def draws_per_trial(layout: ToricLayout) -> int:
    per = 2 if layout.architecture == "WT3" else 1
    return layout.d * 2 * layout.d * layout.d * per


def trial_uniforms(seed: int, trial: int, n: int) -> np.ndarray:
    """Uniforms for one trial from a counter-based stream keyed by (seed, trial)."""
    bitgen = np.random.Philox(key=(int(seed) << 64) | int(trial))
    return np.random.Generator(bitgen).random(n)


def _schedule_arrays(layout: ToricLayout):
    """Flatten the sub-round schedule into arrays usable by the kernels."""
    order, types, sub = [], [], []
    for k, (t, idx) in enumerate(layout.subrounds):
        order.extend(idx)
        types.extend([TYPES.index(t)] * len(idx))
        sub.extend([k] * len(idx))
    stab_q = np.stack([layout.stabilizers["Z"], layout.stabilizers["X"]]).astype(np.int64)
    if layout.idle is not None:
        idle_q = np.stack([layout.idle["Z"], layout.idle["X"]]).astype(np.int64)
    else:
        idle_q = np.zeros_like(stab_q)
    return (np.array(order, dtype=np.int64), np.array(types, dtype=np.int64),
            np.array(sub, dtype=np.int64), stab_q, idle_q)


@jit
def _trial_kernel(u, order, types, sub, stab_q, idle_q, has_idle, cdf, err, succ, meas,
                  idle_cdf, idle_err, n_layers, n_data, inject):
    """One QEC experiment. Outcomes are bits (1 = -1 eigenvalue)."""
    n_stab = stab_q.shape[1]
    xf = np.zeros(n_data, dtype=np.uint8)
    zf = np.zeros(n_data, dtype=np.uint8)
    out = np.zeros((n_layers + 1, 2, n_stab), dtype=np.uint8)
    fails = np.zeros((n_layers, 2, n_stab), dtype=np.uint8)
    last = np.zeros((2, n_stab), dtype=np.uint8)
    k = 0
    n_sched = order.shape[0]
    for layer in range(n_layers):
        for pos in range(n_sched):
            s = order[pos]
            t = types[pos]
            # injected single-qubit errors sit just before their sub-round
            for r in range(inject.shape[0]):
                if inject[r, 0] == layer and inject[r, 1] == sub[pos] and (
                        pos == 0 or sub[pos - 1] != sub[pos]):
                    xf[inject[r, 2]] ^= inject[r, 3]
                    zf[inject[r, 2]] ^= inject[r, 4]
            row = np.searchsorted(cdf[t], u[k], side="right")
            k += 1
            if row > cdf.shape[1] - 1:
                row = cdf.shape[1] - 1
            e = err[row]
            for q in range(4):
                qq = stab_q[t, s, q]
                xf[qq] ^= (e >> q) & 1
                zf[qq] ^= (e >> (4 + q)) & 1
            if has_idle:
                r2 = np.searchsorted(idle_cdf[succ[row]], u[k], side="right")
                k += 1
                if r2 > idle_cdf.shape[1] - 1:
                    r2 = idle_cdf.shape[1] - 1
                e2 = idle_err[r2]
                for q in range(4):
                    qq = idle_q[t, s, q]
                    xf[qq] ^= (e2 >> q) & 1
                    zf[qq] ^= (e2 >> (4 + q)) & 1
            if succ[row] == 1:
                par = 0
                for q in range(4):
                    qq = stab_q[t, s, q]
                    par ^= xf[qq] if t == 0 else zf[qq]
                last[t, s] = par ^ meas[row]
            else:
                fails[layer, t, s] = 1
            out[layer, t, s] = last[t, s]
    for t in range(2):
        for s in range(n_stab):
            par = 0
            for q in range(4):
                qq = stab_q[t, s, q]
                par ^= xf[qq] if t == 0 else zf[qq]
            out[n_layers, t, s] = par
    return out, fails, xf, zf


def _run_batch_numpy(U, order, types, sub, stab_q, idle_q, has_idle, tabs, n_layers, n_data, inject):
    """Vectorized over trials; stabilizers in one sub-round touch disjoint qubits."""
    n_trials = U.shape[0]
    n_stab = stab_q.shape[1]
    xf = np.zeros((n_trials, n_data), dtype=np.uint8)
    zf = np.zeros((n_trials, n_data), dtype=np.uint8)
    out = np.zeros((n_trials, n_layers + 1, 2, n_stab), dtype=np.uint8)
    fails = np.zeros((n_trials, n_layers, 2, n_stab), dtype=np.uint8)
    last = np.zeros((n_trials, 2, n_stab), dtype=np.uint8)
    per = 2 if has_idle else 1
    shifts = np.arange(4)
    # all slots of one sub-round are processed together
    bounds = np.flatnonzero(np.diff(sub)) + 1
    blocks = np.split(np.arange(len(order)), bounds)
    tr = np.arange(n_trials)[:, None, None]
    for layer in range(n_layers):
        base = layer * len(order) * per
        for blk in blocks:
            for r in range(inject.shape[0]):
                if inject[r, 0] == layer and inject[r, 1] == sub[blk[0]]:
                    xf[:, inject[r, 2]] ^= np.uint8(inject[r, 3])
                    zf[:, inject[r, 2]] ^= np.uint8(inject[r, 4])
            t = types[blk[0]]
            s = order[blk]
            cols = base + blk * per
            rows = np.minimum(np.searchsorted(tabs.cdf[t], U[:, cols], side="right"), 1023)
            e = tabs.error[rows]
            q = stab_q[t, s]
            xf[tr, q[None]] ^= ((e[..., None] >> shifts) & 1).astype(np.uint8)
            zf[tr, q[None]] ^= ((e[..., None] >> (4 + shifts)) & 1).astype(np.uint8)
            ok = tabs.success[rows]
            if has_idle:
                u2 = U[:, cols + 1]
                r2 = np.where(ok == 1,
                              np.searchsorted(tabs.idle_cdf[1], u2, side="right"),
                              np.searchsorted(tabs.idle_cdf[0], u2, side="right"))
                e2 = tabs.idle_error[np.minimum(r2, 255)]
                qi = idle_q[t, s]
                xf[tr, qi[None]] ^= ((e2[..., None] >> shifts) & 1).astype(np.uint8)
                zf[tr, qi[None]] ^= ((e2[..., None] >> (4 + shifts)) & 1).astype(np.uint8)
            frame = xf if t == 0 else zf
            par = np.bitwise_xor.reduce(frame[tr, q[None]], axis=2)
            new = (par ^ tabs.meas[rows]).astype(np.uint8)
            last[:, t, s] = np.where(ok == 1, new, last[:, t, s])
            fails[:, layer, t, s] = (ok == 0)
            out[:, layer, t, s] = last[:, t, s]
    for t in range(2):
        frame = xf if t == 0 else zf
        out[:, n_layers, t] = np.bitwise_xor.reduce(frame[:, stab_q[t]], axis=2)
    return out, fails, xf, zf


@dataclass
class TrialResult:
    outcomes: np.ndarray   # (d + 1, 2, d*d) bits, last layer perfect
    failures: np.ndarray   # (d, 2, d*d) GHZ failure flags
    x_frame: np.ndarray
    z_frame: np.ndarray


def _inject_array(inject) -> np.ndarray:
    """Rows ``(layer, sub-round, qubit, x, z)``."""
    rows = [(l, p, q, int(c in "XY"), int(c in "ZY")) for (l, p, q, c) in (inject or [])]
    return np.array(rows, dtype=np.int64).reshape(-1, 5)


def run_trials(layout: ToricLayout, table: SuperoperatorTable, seed: int, trials,
               inject=None, backend: str | None = None) -> list[TrialResult]:
    """Run the given trial indices. ``inject`` lists ``(layer, sub_round, qubit, pauli)``.

    ``backend`` is ``"numba"`` or ``"numpy"``; the default follows the
    ``MODQEC_NO_NUMBA`` switch. Both paths consume identical random streams.
    """
    if table.architecture != layout.architecture:
        raise ValueError(f"table is {table.architecture}, layout is {layout.architecture}")
    tabs = sampling_tables(table)
    order, types, sub, stab_q, idle_q = _schedule_arrays(layout)
    has_idle = layout.architecture == "WT3"
    n = draws_per_trial(layout)
    inj = _inject_array(inject)
    trials = list(trials)
    U = np.stack([trial_uniforms(seed, t, n) for t in trials]) if trials else np.zeros((0, n))
    backend = backend or ("numba" if USE_NUMBA else "numpy")
    results = []
    if backend == "numba":
        for u in U:
            o, f, x, z = _trial_kernel(u, order, types, sub, stab_q, idle_q, has_idle, tabs.cdf,
                                       tabs.error, tabs.success, tabs.meas, tabs.idle_cdf,
                                       tabs.idle_error, layout.d, layout.n_data, inj)
            results.append(TrialResult(o, f, x, z))
    elif backend == "numpy":
        o, f, x, z = _run_batch_numpy(U, order, types, sub, stab_q, idle_q, has_idle, tabs,
                                      layout.d, layout.n_data, inj)
        results = [TrialResult(o[i], f[i], x[i], z[i]) for i in range(len(trials))]
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return results


def run_trial(layout: ToricLayout, table: SuperoperatorTable, seed: int, trial: int = 0,
              inject=None, backend: str | None = None) -> TrialResult:
    return run_trials(layout, table, seed, [trial], inject, backend)[0]


def subround_of(layout: ToricLayout, stab_type: str, stabilizer: int) -> int:
    """Index of the sub-round in which a stabilizer is measured."""
    for k, (t, idx) in enumerate(layout.subrounds):
        if t == stab_type and stabilizer in idx:
            return k
    raise ValueError("stabilizer not scheduled")


# ---------------------------------------------------------------- syndromes

def compute_defects(outcomes: np.ndarray, stab_type: str) -> np.ndarray:
    """Space-time defects ``(layer, stabilizer)`` where the outcome changed."""
    o = outcomes[:, TYPES.index(stab_type)]
    prev = np.vstack([np.zeros((1, o.shape[1]), dtype=o.dtype), o[:-1]])
    return np.argwhere(o != prev)


def syndrome(layout: ToricLayout, frame: np.ndarray, stab_type: str) -> np.ndarray:
    """Parity of each stabilizer of ``stab_type`` on the error bits it detects."""
    return np.bitwise_xor.reduce(frame[layout.stabilizers[stab_type]], axis=1)


def check_logical(layout: ToricLayout, x_true, z_true, x_corr, z_corr) -> dict:
    """Per-logical failure flags after applying the correction."""
    rx = np.asarray(x_true) ^ np.asarray(x_corr)
    rz = np.asarray(z_true) ^ np.asarray(z_corr)
    flags = {}
    for name, support in layout.logicals.items():
        residual = rx if name.startswith("Z") else rz
        flags[name] = bool(np.bitwise_xor.reduce(residual[support]))
    return flags

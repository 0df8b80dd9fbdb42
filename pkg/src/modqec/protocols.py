"""Bell-pair fusion and distillation trees that build GHZ states between modules."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .noise import (CircuitNoise, CoherenceSet, OperationTimes, decoherence_channel,
                    depolarizing_2q)
from .quantum import (CNOT, PAULI, SWAP, apply_channel, apply_operator, controlled,
                      partial_trace, permute_qubits, pauli_matrix, projector)
from .schemes.result import SchemeResult


@dataclass(frozen=True)
class CreateLink:
    a: str
    b: str


@dataclass(frozen=True)
class Fuse:
    left: "Node"
    right: "Node"
    at: str


@dataclass(frozen=True)
class Distill:
    target: "Node"
    sacrificial: "Node"
    operator: str  # one Pauli per sacrificial module, in sorted module order


Node = Union[CreateLink, Fuse, Distill]


def modules(node: Node) -> list[str]:
    """Modules holding one qubit of the node's output state, sorted."""
    if isinstance(node, CreateLink):
        return sorted({node.a, node.b})
    if isinstance(node, Fuse):
        return sorted(set(modules(node.left)) | set(modules(node.right)))
    return modules(node.target)


def count_links(node: Node) -> int:
    if isinstance(node, CreateLink):
        return 1
    if isinstance(node, Fuse):
        return count_links(node.left) + count_links(node.right)
    return count_links(node.target) + count_links(node.sacrificial)


@dataclass(frozen=True)
class Protocol:
    root: Node
    max_aux_per_module: int = 2

    @property
    def k(self) -> int:
        return count_links(self.root)

    @property
    def modules(self) -> list[str]:
        return modules(self.root)


# ----------------------------------------------------------------- text format

def parse_node(obj) -> Node:
    """Build a node from nested lists such as ``["fuse", left, right, "B"]``."""
    if not isinstance(obj, list) or not obj:
        raise ValueError(f"malformed protocol node {obj!r}")
    kind, *args = obj
    if kind == "link" and len(args) == 2:
        if args[0] == args[1]:
            raise ValueError("a link needs two different modules")
        return CreateLink(str(args[0]), str(args[1]))
    if kind == "fuse" and len(args) == 3:
        return Fuse(parse_node(args[0]), parse_node(args[1]), str(args[2]))
    if kind == "distill" and len(args) == 3:
        return Distill(parse_node(args[0]), parse_node(args[1]), str(args[2]))
    raise ValueError(f"unknown protocol node {obj!r}")


def dump_node(node: Node) -> list:
    if isinstance(node, CreateLink):
        return ["link", node.a, node.b]
    if isinstance(node, Fuse):
        return ["fuse", dump_node(node.left), dump_node(node.right), node.at]
    return ["distill", dump_node(node.target), dump_node(node.sacrificial), node.operator]


def load_protocol(path) -> Protocol:
    """Read a protocol file: ``{"k": .., "max_aux": .., "tree": [...]}``.

    The declared ``k`` and ``max_aux`` are checked against the tree.
    """
    data = json.loads(Path(path).read_text())
    proto = Protocol(parse_node(data["tree"]), int(data.get("max_aux", 2)))
    if "k" in data and int(data["k"]) != proto.k:
        raise ValueError(f"declared k={data['k']} but tree has {proto.k} links")
    report = validate(proto)
    if report:
        raise ValueError("; ".join(report))
    return proto


# ------------------------------------------------------------------ validation

def execution_order(node: Node) -> list[Node]:
    """Post-order: left/target subtree, then right/sacrificial subtree, then node."""
    if isinstance(node, CreateLink):
        return [node]
    a, b = (node.left, node.right) if isinstance(node, Fuse) else (node.target, node.sacrificial)
    return execution_order(a) + execution_order(b) + [node]


def validate(protocol: Protocol) -> list[str]:
    """Return a list of violations (empty when the protocol is executable).

    Each module owns one communication qubit plus ``max_aux_per_module``
    memory qubits, so at most ``1 + max_aux`` qubits may be alive at once.
    """
    problems = []
    if protocol.max_aux_per_module > 2:
        problems.append(f"max_aux_per_module={protocol.max_aux_per_module} exceeds 2")
    capacity = 1 + protocol.max_aux_per_module
    alive: dict[str, int] = {}
    for step, node in enumerate(execution_order(protocol.root)):
        if isinstance(node, CreateLink):
            for m in (node.a, node.b):
                alive[m] = alive.get(m, 0) + 1
                if alive[m] > capacity:
                    problems.append(f"module {m} needs {alive[m]} qubits at step {step}")
        elif isinstance(node, Fuse):
            ml, mr = modules(node.left), modules(node.right)
            if node.at not in ml or node.at not in mr:
                problems.append(f"fusion at {node.at} at step {step}: module not in both states")
            if len(set(ml) & set(mr)) != 1:
                problems.append(f"fusion at step {step}: states overlap on {sorted(set(ml) & set(mr))}")
            alive[node.at] = alive.get(node.at, 0) - 1
        else:
            mt, ms = modules(node.target), modules(node.sacrificial)
            if not set(ms) <= set(mt):
                problems.append(f"distillation at step {step}: sacrificial modules {ms} not in {mt}")
            if len(node.operator) != len(ms) or any(c not in "XYZ" for c in node.operator):
                problems.append(f"distillation at step {step}: operator {node.operator!r} "
                                f"does not match modules {ms}")
            for m in ms:
                alive[m] = alive.get(m, 0) - 1
    return problems


# ---------------------------------------------------------------------- timing

class Dist:
    """Discrete distribution of completion times; compressed to a few thousand atoms."""

    MAX_ATOMS = 2000

    def __init__(self, values, probs):
        self.values = np.asarray(values, dtype=float)
        self.probs = np.asarray(probs, dtype=float)

    @property
    def mean(self) -> float:
        return float(self.values @ self.probs)

    @classmethod
    def point(cls, t: float) -> "Dist":
        return cls([t], [1.0])

    @classmethod
    def geometric(cls, p: float, unit: float, tail: float = 1e-12) -> "Dist":
        if p >= 1:
            return cls.point(unit)
        k = int(math.ceil(math.log(tail) / math.log1p(-p)))
        n = np.arange(1, k + 1)
        probs = p * (1 - p) ** (n - 1)
        # fold the remaining tail into one atom at its conditional mean
        rest = (1 - p) ** k
        values = np.append(n * unit, (k + 1 / p) * unit)
        return cls(values, np.append(probs, rest)).compress()

    def shift(self, c: float) -> "Dist":
        return Dist(self.values + c, self.probs)

    def __add__(self, other: "Dist") -> "Dist":
        v = (self.values[:, None] + other.values[None, :]).ravel()
        p = (self.probs[:, None] * other.probs[None, :]).ravel()
        return Dist(v, p).compress()

    def maximum(self, other: "Dist") -> "Dist":
        v = np.union1d(self.values, other.values)
        cdf = self.cdf(v) * other.cdf(v)
        p = np.diff(np.concatenate([[0.0], cdf]))
        return Dist(v, p).compress()

    def cdf(self, x) -> np.ndarray:
        order = np.argsort(self.values)
        vals, cum = self.values[order], np.cumsum(self.probs[order])
        idx = np.searchsorted(vals, x, side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def compress(self) -> "Dist":
        """Merge atoms into equal-width bins at their conditional means (mean preserved)."""
        order = np.argsort(self.values)
        v, p = self.values[order], self.probs[order]
        if len(v) <= self.MAX_ATOMS:
            return Dist(v, p)
        edges = np.linspace(v[0], v[-1], self.MAX_ATOMS + 1)
        idx = np.clip(np.searchsorted(edges, v, side="right") - 1, 0, self.MAX_ATOMS - 1)
        mass = np.bincount(idx, p, self.MAX_ATOMS)
        first = np.bincount(idx, p * v, self.MAX_ATOMS)
        keep = mass > 0
        return Dist(first[keep] / mass[keep], mass[keep])


def _node_overhead(node: Node, times: OperationTimes) -> float:
    if isinstance(node, CreateLink):
        return times.t_swap
    if isinstance(node, Fuse):
        return times.t_cx + times.t_meas
    return max(times.controlled_gate(c) for c in node.operator) + times.t_meas


def _children(node: Node):
    if isinstance(node, Fuse):
        return node.left, node.right
    return node.target, node.sacrificial


def _sequential(node: Node) -> bool:
    a, b = _children(node)
    return bool(set(modules(a)) & set(modules(b)))


def completion_time(node: Node, p_link: float, times: OperationTimes, attempt: float = 1.0) -> Dist:
    if isinstance(node, CreateLink):
        return Dist.geometric(p_link, attempt * times.t_link).shift(_node_overhead(node, times))
    a, b = _children(node)
    ta = completion_time(a, p_link, times, attempt)
    tb = completion_time(b, p_link, times, attempt)
    # a module has one communication qubit, so overlapping subtrees run one after the other
    total = ta + tb if _sequential(node) else ta.maximum(tb)
    return total.shift(_node_overhead(node, times))


def expected_duration(protocol: Protocol, p_link: float, times: OperationTimes,
                      attempt: float = 1.0) -> float:
    """Expected wall-clock time to run the protocol once (units of t_link)."""
    if not 0 < p_link <= 1:
        raise ValueError("p_link must be in (0, 1]")
    return completion_time(protocol.root, p_link, times, attempt).mean


def sample_duration(protocol: Protocol, p_link: float, times: OperationTimes,
                    rng: np.random.Generator, attempt: float = 1.0) -> float:
    """One Monte Carlo draw of the completion time (used as a cross-check)."""
    def walk(node):
        if isinstance(node, CreateLink):
            return rng.geometric(p_link) * attempt * times.t_link + _node_overhead(node, times)
        a, b = _children(node)
        ta, tb = walk(a), walk(b)
        t = ta + tb if _sequential(node) else max(ta, tb)
        return t + _node_overhead(node, times)
    return walk(protocol.root)


# ------------------------------------------------------------------- execution

@dataclass
class _State:
    rho: np.ndarray
    mods: list  # module label per qubit
    p_succ: float = 1.0


def _decohere_all(st: _State, t: float, coherence: CoherenceSet, active: set) -> _State:
    if t <= 0:
        return st
    rho = st.rho
    for q, m in enumerate(st.mods):
        if m in active:
            ch = decoherence_channel(t, coherence.T1_link, coherence.T2_link)
        else:
            ch = decoherence_channel(t, coherence.T1_idle, coherence.T2_idle)
        rho = apply_channel(rho, ch, [q])
    return _State(rho, st.mods, st.p_succ)


def _swap_to_memory(rho: np.ndarray, q: int, p_g: float) -> np.ndarray:
    """Noisy swap of qubit ``q`` into a fresh memory qubit."""
    n = rho.shape[0].bit_length() - 1
    big = np.kron(rho, projector([1, 0]))
    big = apply_operator(big, SWAP, [q, n])
    big = apply_channel(big, depolarizing_2q(p_g), [q, n])
    # relabel so the memory qubit takes the old position, then drop the emitter
    big = apply_operator(big, SWAP, [q, n])
    return partial_trace(big, list(range(n)))


class _Executor:
    def __init__(self, bell, noise, times, coherence, attempt):
        self.bell = bell
        self.noise = noise
        self.times = times
        self.coherence = coherence
        self.attempt = attempt

    def run(self, node: Node) -> _State:
        if isinstance(node, CreateLink):
            rho = self.bell.state.copy()
            for q in (0, 1):
                rho = _swap_to_memory(rho, q, self.noise.p_g)
            return _State(rho, [node.a, node.b])
        a, b = _children(node)
        sa, sb = self.run(a), self.run(b)
        ta = completion_time(a, self.bell.p_succ, self.times, self.attempt).mean
        tb = completion_time(b, self.bell.p_succ, self.times, self.attempt).mean
        ma, mb = set(modules(a)), set(modules(b))
        if _sequential(node):
            sa = _decohere_all(sa, tb, self.coherence, mb)
        else:
            both = completion_time(a, self.bell.p_succ, self.times, self.attempt).maximum(
                completion_time(b, self.bell.p_succ, self.times, self.attempt)).mean
            sa = _decohere_all(sa, both - ta, self.coherence, mb)
            sb = _decohere_all(sb, both - tb, self.coherence, ma)
        if isinstance(node, Fuse):
            out = self.fuse(sa, sb, node.at)
        else:
            out = self.distill(sa, sb, node.operator)
        return _decohere_all(out, _node_overhead(node, self.times), self.coherence, set())

    def fuse(self, sa: _State, sb: _State, at: str) -> _State:
        qa = sa.mods.index(at)
        qb = len(sa.mods) + sb.mods.index(at)
        rho = np.kron(sa.rho, sb.rho)
        mods = sa.mods + sb.mods
        rho = apply_operator(rho, CNOT, [qa, qb])
        rho = apply_channel(rho, depolarizing_2q(self.noise.p_g), [qa, qb])
        n = len(mods)
        keep = [q for q in range(n) if q != qb]
        fix = [keep.index(q) for q in range(len(sa.mods), n) if q != qb]
        out = np.zeros((1 << (n - 1),) * 2, dtype=complex)
        for outcome in (0, 1):
            branch = apply_operator(rho, projector(np.eye(2)[outcome]), [qb])
            branch = partial_trace(branch, keep)
            for recorded, w in ((outcome, 1 - self.noise.p_m), (1 - outcome, self.noise.p_m)):
                fixed = branch
                if recorded:
                    for q in fix:
                        fixed = apply_operator(fixed, PAULI["X"], [q])
                out += w * fixed
        return _State(out, [mods[q] for q in keep], sa.p_succ * sb.p_succ)

    def distill(self, st: _State, sac: _State, operator: str) -> _State:
        rho = np.kron(st.rho, sac.rho)
        nt = len(st.mods)
        sac_mods = sac.mods
        for c, m in zip(operator, sac_mods):
            pair = [nt + sac_mods.index(m), st.mods.index(m)]
            rho = apply_operator(rho, controlled(PAULI[c]), pair)
            rho = apply_channel(rho, depolarizing_2q(self.noise.p_g), pair)
        k = len(sac_mods)
        sac_q = list(range(nt, nt + k))
        xx = pauli_matrix("X" * k)
        even = (np.eye(1 << k) + xx) / 2
        odd = (np.eye(1 << k) - xx) / 2
        flip_odd = (1 - (1 - 2 * self.noise.p_m) ** k) / 2
        kept = np.zeros((1 << nt,) * 2, dtype=complex)
        for proj, w in ((even, 1 - flip_odd), (odd, flip_odd)):
            branch = apply_operator(rho, proj, sac_q)
            kept += w * partial_trace(branch, list(range(nt)))
        tr_in = np.trace(rho).real
        p_keep = float(np.trace(kept).real / tr_in)
        return _State(kept / np.trace(kept).real, list(st.mods),
                      st.p_succ * sac.p_succ * p_keep)


def execute(protocol: Protocol, bell: SchemeResult, noise: CircuitNoise,
            times: OperationTimes, coherence: CoherenceSet) -> SchemeResult:
    """Run the protocol on copies of ``bell`` and return the averaged GHZ state."""
    report = validate(protocol)
    if report:
        raise ValueError("; ".join(report))
    coherence = coherence.relative()
    ex = _Executor(bell, noise, times, coherence, bell.duration)
    st = ex.run(protocol.root)
    order = sorted(range(len(st.mods)), key=lambda q: st.mods[q])
    rho = permute_qubits(st.rho, order)
    rho = rho / np.trace(rho).real
    duration = expected_duration(protocol, bell.p_succ, times, bell.duration)
    return SchemeResult(rho, min(1.0, st.p_succ), duration)


# Example tree: two distilled Bell pairs fused at B, then a distillation on A-C.
GHZ3_DISTILLED = Protocol(parse_node(
    ["distill",
     ["fuse",
      ["distill", ["link", "A", "B"], ["link", "A", "B"], "XX"],
      ["distill", ["link", "B", "C"], ["link", "B", "C"], "XX"],
      "B"],
     ["link", "A", "C"], "ZZ"]))

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..quantum import ghz_fidelity


@dataclass
class SchemeResult:
    """Heralded output state, success probability per attempt and attempt duration."""

    state: np.ndarray
    p_succ: float
    duration: float = 1.0

    def __post_init__(self):
        if not -1e-12 <= self.p_succ <= 1 + 1e-12:
            raise ValueError(f"p_succ={self.p_succ} outside [0, 1]")
        self.p_succ = min(max(self.p_succ, 0.0), 1.0)

    @property
    def n_qubits(self) -> int:
        return self.state.shape[0].bit_length() - 1

    @property
    def fidelity(self) -> float:
        """Overlap with the GHZ (Phi+ for two qubits) target."""
        return ghz_fidelity(self.state)

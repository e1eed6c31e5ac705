"""Sampled reduced-state trajectories with entanglement and health diagnostics."""

from dataclasses import dataclass, field

import numpy as np

from qheom import qmat
from qheom.entangle import concurrence, detect_death_revival, entanglement_of_formation


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    rhos: np.ndarray
    concurrence: np.ndarray
    eof: np.ndarray
    trace_error: np.ndarray
    min_eig: np.ndarray
    hermiticity: np.ndarray
    final_state: object = field(default=None, repr=False)

    @classmethod
    def from_states(cls, times, rhos, eps_pos=1e-6):
        times = np.asarray(times, dtype=float)
        rhos = np.asarray(rhos, dtype=complex).reshape(-1, 4, 4)
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        herm = np.array([qmat.hermiticity_defect(r) for r in rhos])
        trace_err = np.abs(np.trace(rhos, axis1=1, axis2=2) - 1)
        sym = 0.5 * (rhos + qmat.dagger(rhos))
        min_eig = np.linalg.eigvalsh(sym)[:, 0] if len(rhos) else np.zeros(0)
        c = np.array([concurrence(r, eps_pos=eps_pos) for r in sym])
        return cls(
            times=times,
            rhos=rhos,
            concurrence=c,
            eof=entanglement_of_formation(c) if len(c) else np.zeros(0),
            trace_error=trace_err,
            min_eig=min_eig,
            hermiticity=herm,
        )

    def __len__(self):
        return len(self.times)

    def death_revival(self, zero_tol=1e-6):
        return detect_death_revival(self.times, self.concurrence, zero_tol)

    def equilibrium_concurrence(self, fraction=0.1):
        """Mean concurrence over the last ``fraction`` of samples."""
        n = max(1, int(round(fraction * len(self))))
        return float(np.mean(self.concurrence[-n:]))

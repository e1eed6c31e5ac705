"""Two-qubit entanglement measures and sudden-death / revival detection."""

import logging
from dataclasses import dataclass

import numpy as np

from qheom import qmat

log = logging.getLogger(__name__)

_YY = qmat.kron(qmat.SIGMA_Y, qmat.SIGMA_Y)


def concurrence(rho, eps_pos=1e-8):
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the square roots, in decreasing order, of the eigenvalues of
    rho (Y x Y) rho* (Y x Y). They equal the singular values of the symmetric
    matrix W^T (Y x Y) W for any factorisation rho = W W^+, which avoids taking
    square roots of near-zero eigenvalues. Eigenvalues of ``rho`` in
    [-eps_pos, 0) are clipped to zero first.
    """
    rho = qmat.check_density_matrix(rho, eps_pos=eps_pos, tol=max(eps_pos, 1e-12))
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w[0] < 0:
        log.debug("clipping eigenvalue %.3e before concurrence", w[0])
    factor = v * np.sqrt(np.clip(w, 0, None))
    lam = np.linalg.svd(factor.T @ _YY @ factor, compute_uv=False)
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def binary_entropy(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    return np.where((p <= 0) | (p >= 1), 0.0, h)


def entanglement_of_formation(c):
    """Wootters' map h((1 + sqrt(1 - C^2)) / 2)."""
    c = np.asarray(c, dtype=float)
    if np.any((c < 0) | (c > 1)):
        raise ValueError("concurrence must lie in [0, 1]")
    e = binary_entropy(0.5 * (1 + np.sqrt(1 - c**2)))
    return float(e) if e.ndim == 0 else e


def gibbs_concurrence_closed_form(epsilon, J, beta):
    """Thermal concurrence of H = eps (n1 + n2) + J (c1^+ c2 + c2^+ c1).

    (sinh(beta J) - 1) / (cosh(beta eps) + cosh(beta J)), clipped at zero.
    Note this is the exchange (hopping) Hamiltonian, not the sigma_x sigma_x
    coupling used for the dynamics.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    value = (np.sinh(beta * J) - 1) / (np.cosh(beta * epsilon) + np.cosh(beta * J))
    return float(max(0.0, value))


def exchange_hamiltonian(epsilon, J):
    n1 = qmat.kron(qmat.NUMBER, qmat.I2)
    n2 = qmat.kron(qmat.I2, qmat.NUMBER)
    hop = qmat.kron(qmat.LOWER.conj().T, qmat.LOWER)
    return epsilon * (n1 + n2) + J * (hop + hop.conj().T)


@dataclass(frozen=True)
class DeathRevivalReport:
    death_intervals: tuple
    revival_times: tuple

    @property
    def total_death_time(self):
        return sum(b - a for a, b in self.death_intervals)


def detect_death_revival(times, c, zero_tol=1e-6):
    """Maximal runs of at least two consecutive samples with C <= zero_tol.

    Each run yields an interval (first zero sample, last zero sample). A single
    isolated zero sample is a touch, not a period of death, and is ignored. The
    right endpoint counts as a revival time unless the run reaches the last
    sample.
    """
    times = np.asarray(times, dtype=float)
    dead = np.asarray(c, dtype=float) <= zero_tol
    intervals, revivals = [], []
    i, n = 0, len(times)
    while i < n:
        if not dead[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and dead[j + 1]:
            j += 1
        if j > i:
            intervals.append((float(times[i]), float(times[j])))
            if j < n - 1:
                revivals.append(float(times[j]))
        i = j + 1
    return DeathRevivalReport(tuple(intervals), tuple(revivals))

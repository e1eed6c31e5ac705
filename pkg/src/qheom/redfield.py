"""Secular (Pauli plus decaying coherences) Redfield baseline in the H_S eigenbasis."""

from dataclasses import dataclass, field

import numpy as np

from qheom import qmat
from qheom.bath import bose, spectral_density
from qheom.trajectory import Trajectory

DEGENERACY_TOL = 1e-9


def emission_spectrum(params, omega):
    """Golden-rule bath spectrum 2 J(w) [n(w) + 1], for transitions releasing energy ``w``.

    Nonnegative for both signs of ``w``; S(w) / S(-w) = exp(beta w).
    """
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    nz = omega != 0
    out[nz] = 2 * spectral_density(params, omega[nz]) * (bose(omega[nz], params.beta) + 1)
    return out


@dataclass(frozen=True, eq=False)
class RedfieldGenerator:
    """Secular generator. ``rates[j, i]`` is the transition rate from eigenstate i to j."""

    energies: np.ndarray
    eigvecs: np.ndarray
    rates: np.ndarray
    decoherence: np.ndarray
    superop: np.ndarray = field(repr=False)

    def to_eigenbasis(self, rho):
        return self.eigvecs.conj().T @ rho @ self.eigvecs

    def to_site_basis(self, rho):
        return self.eigvecs @ rho @ self.eigvecs.conj().T

    def apply(self, rho):
        """d rho / dt in the site basis."""
        r = self.to_eigenbasis(np.asarray(rho, dtype=complex))
        d = (self.superop @ r.reshape(-1)).reshape(r.shape)
        return self.to_site_basis(d)

    def stationary_state(self):
        """Normalised null vector of the population rate matrix, in the site basis."""
        n = len(self.energies)
        w = self.rates - np.diag(self.rates.sum(axis=0))
        _, _, vh = np.linalg.svd(w)
        p = np.abs(vh[-1].real)
        p /= p.sum()
        return self.to_site_basis(np.diag(p).astype(complex).reshape(n, n))


def build_redfield(system, params):
    energies, vecs = qmat.hermitian_eigen(system.hS)
    n = len(energies)
    if np.any(np.diff(energies) < DEGENERACY_TOL):
        raise ValueError("H_S has a degenerate spectrum; secular rates are ill-defined")

    omega = energies[None, :] - energies[:, None]  # omega[j, i] = E_i - E_j
    spectrum = emission_spectrum(params, omega)
    rates = np.zeros((n, n))
    for v in system.V:
        vt = vecs.conj().T @ v @ vecs
        rates += np.abs(vt) ** 2 * spectrum
    np.fill_diagonal(rates, 0.0)

    outgoing = rates.sum(axis=0)
    decoherence = 0.5 * (outgoing[:, None] + outgoing[None, :])
    np.fill_diagonal(decoherence, 0.0)

    # superoperator on row-major vec of the eigenbasis density matrix
    sup = np.zeros((n * n, n * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            sup[a * n + b, a * n + b] = -1j * (energies[a] - energies[b]) - decoherence[a, b]
    for j in range(n):
        for i in range(n):
            sup[j * n + j, i * n + i] += rates[j, i]
        sup[j * n + j, j * n + j] -= outgoing[j]
    return RedfieldGenerator(energies, vecs, rates, decoherence, sup)


def propagate_redfield(gen, rho0, dt, t_end, eps_pos=1e-6):
    """Sample the secular evolution every ``dt`` on [0, t_end] using the exact propagator."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    n_samples = int(round(t_end / dt))
    step = qmat.expm(gen.superop * dt)
    x = gen.to_eigenbasis(np.asarray(rho0, dtype=complex)).reshape(-1)
    n = len(gen.energies)
    rhos = [gen.to_site_basis(x.reshape(n, n))]
    for _ in range(n_samples):
        x = step @ x
        rhos.append(gen.to_site_basis(x.reshape(n, n)))
    times = dt * np.arange(n_samples + 1)
    return Trajectory.from_states(times, np.array(rhos), eps_pos=eps_pos)

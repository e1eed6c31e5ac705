"""Drude-Lorentz spectral density and its Matsubara exponential expansion.

Units: energies in J, times in 1/J, hbar = 1.
"""

from dataclasses import dataclass

import numpy as np

POLE_TOL = 1e-9


@dataclass(frozen=True)
class DrudeParams:
    """Reorganisation energy ``lam``, bath rate ``gamma``, inverse temperature ``beta``."""

    lam: float
    gamma: float
    beta: float

    def __post_init__(self):
        # lam = 0 is allowed: it switches the bath off
        if not self.lam >= 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        for name in ("gamma", "beta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        half = self.beta * self.gamma / 2
        n = round(half / np.pi)
        if n >= 1 and abs(half - n * np.pi) < POLE_TOL:
            raise ValueError(f"beta*gamma/2 = {half} sits on a cot pole")


def spectral_density(params, omega):
    """J(w) = 2 lam gamma w / (gamma^2 + w^2); odd in ``omega``."""
    omega = np.asarray(omega, dtype=float)
    return 2 * params.lam * params.gamma * omega / (params.gamma**2 + omega**2)


def bose(omega, beta):
    """Bose occupation 1 / (exp(beta w) - 1)."""
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(beta * np.asarray(omega, dtype=float))


@dataclass(frozen=True)
class BathExpansion:
    """Exponential decomposition L(t) = sum_k c_k exp(-nu_k t), k = 0..M.

    ``delta`` is the real Markovian weight of the discarded Matsubara terms,
    2 lam/(beta gamma) - i lam - sum_k c_k / nu_k.
    """

    params: DrudeParams
    M: int
    nu: np.ndarray
    c: np.ndarray
    delta: float


def matsubara_frequencies(beta, M):
    return 2 * np.pi * np.arange(1, M + 1) / beta


def build_expansion(params, M):
    if M < 0:
        raise ValueError("Matsubara cutoff M must be non-negative")
    lam, gamma, beta = params.lam, params.gamma, params.beta
    mats = matsubara_frequencies(beta, M)
    close = np.abs(mats - gamma) < POLE_TOL
    if np.any(close):
        k = int(np.flatnonzero(close)[0]) + 1
        raise ValueError(f"gamma coincides with Matsubara frequency nu_{k}")

    c0 = lam * gamma * (-1j + 1 / np.tan(beta * gamma / 2))
    ck = (4 * lam * gamma / beta) * mats / (mats**2 - gamma**2)
    nu = np.concatenate(([gamma], mats))
    c = np.concatenate(([c0], ck.astype(complex)))

    total = 2 * lam / (beta * gamma) - 1j * lam - np.sum(c / nu)
    if abs(total.imag) > 1e-12:
        raise ArithmeticError(f"counter-term has imaginary part {total.imag:.3e}")
    nu.setflags(write=False)
    c.setflags(write=False)
    return BathExpansion(params=params, M=M, nu=nu, c=c, delta=float(total.real))


def correlation_function(expansion, t):
    """Truncated series sum_k c_k exp(-nu_k t) for ``t >= 0``; vectorised over ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("correlation_function expects t >= 0")
    return np.exp(-np.multiply.outer(t, expansion.nu)) @ expansion.c

"""Exactly solvable system TLS + bath TLS in thermal equilibrium.

H = eps c_S^+ c_S + eps c_B^+ c_B + g (c_S^+ c_B + c_B^+ c_S), basis
(|0_S 0_B>, |0_S 1_B>, |1_S 0_B>, |1_S 1_B>) with the system as left factor.
"""

from dataclasses import dataclass

import numpy as np

from qheom import qmat


@dataclass(frozen=True)
class ToyParams:
    epsilon: float
    g: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")


def toy_hamiltonian(p):
    n_s = qmat.kron(qmat.NUMBER, qmat.I2)
    n_b = qmat.kron(qmat.I2, qmat.NUMBER)
    hop = qmat.kron(qmat.LOWER.conj().T, qmat.LOWER)  # c_S^+ c_B
    return p.epsilon * (n_s + n_b) + p.g * (hop + hop.conj().T)


def toy_thermal_state(p):
    """exp(-beta H) / Z via the matrix exponential."""
    w = qmat.expm(-p.beta * toy_hamiltonian(p))
    return w / np.trace(w).real


def partition_function(p):
    e = np.exp(-p.beta * p.epsilon)
    return 1 + 2 * e * np.cosh(p.beta * p.g) + e * e


def coherence_closed_form(p):
    """<0_S 1_B| R |1_S 0_B> = -exp(-beta eps) sinh(beta g) / Z."""
    return -np.exp(-p.beta * p.epsilon) * np.sinh(p.beta * p.g) / partition_function(p)


def system_bath_coherence(p, tol=1e-12):
    """Return (closed form, numeric matrix element); raise if they disagree beyond ``tol``."""
    closed = coherence_closed_form(p)
    numeric = toy_thermal_state(p)[1, 2]
    if abs(closed - numeric) > tol:
        raise ArithmeticError(f"closed form {closed!r} != numeric {numeric!r}")
    return complex(closed), complex(numeric)


def reduced_system_state(p):
    return qmat.partial_trace(toy_thermal_state(p), keep=0)


def reduced_bath_state(p):
    return qmat.partial_trace(toy_thermal_state(p), keep=1)

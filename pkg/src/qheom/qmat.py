"""Small dense complex linear algebra for one- and two-qubit operators.

Two-qubit basis order is (|00>, |01>, |10>, |11>) with qubit 1 as the left
tensor factor. A single qubit uses (|0>, |1>) where |1> is the excited state.
"""

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-10
CONSTRUCTION_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# annihilation operator: c|1> = |0>
LOWER = np.array([[0, 1], [0, 0]], dtype=complex)
NUMBER = LOWER.conj().T @ LOWER

BASIS_LABELS = ("00", "01", "10", "11")


class UnphysicalStateError(ValueError):
    """A matrix failed a density-matrix check."""


def kron(a, b):
    """Tensor product with ``a`` as the left (qubit 1) factor."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def commutator(a, x):
    """Return ``a @ x - x @ a``."""
    a = np.asarray(a)
    x = np.asarray(x)
    if a.shape[-2:] != x.shape[-2:]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {x.shape}")
    return a @ x - x @ a


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_defect(m):
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m))))


def hermitian_eigen(m, tol=HERMITIAN_TOL):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    return np.linalg.eigh(0.5 * (m + dagger(m)))


def expm(m):
    """Matrix exponential by scaling and squaring (Pade)."""
    return scipy.linalg.expm(np.asarray(m, dtype=complex))


def gibbs_state(h, beta):
    """Normalised ``exp(-beta h) / Z`` built from the spectrum of ``h``."""
    energies, vecs = hermitian_eigen(h)
    weights = np.exp(-beta * (energies - energies[0]))
    weights /= weights.sum()
    return (vecs * weights) @ dagger(vecs)


def partial_trace(m, keep, dims=(2, 2)):
    """Trace out one factor of a bipartite operator; ``keep`` is 0 (left) or 1 (right)."""
    d1, d2 = dims
    t = np.asarray(m).reshape(d1, d2, d1, d2)
    if keep == 0:
        return np.einsum("ajbj->ab", t)
    return np.einsum("jajb->ab", t)


def check_density_matrix(m, eps_pos=1e-8, tol=CONSTRUCTION_TOL):
    """Validate Hermiticity, unit trace and approximate positivity; return the matrix.

    Raises UnphysicalStateError on failure.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UnphysicalStateError(f"not a square matrix: {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise UnphysicalStateError(f"not Hermitian (defect {defect:.3e})")
    tr = np.trace(m)
    if abs(tr - 1) > tol:
        raise UnphysicalStateError(f"trace {tr.real:.12g} differs from 1")
    lowest = np.linalg.eigvalsh(0.5 * (m + dagger(m)))[0]
    if lowest < -eps_pos:
        raise UnphysicalStateError(f"negative eigenvalue {lowest:.3e}")
    return m


def ket(label):
    """Computational basis ket for a bit string such as ``"01"``."""
    v = np.zeros(2 ** len(label), dtype=complex)
    v[int(label, 2)] = 1.0
    return v


def projector(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())

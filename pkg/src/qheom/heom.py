"""Hierarchy of auxiliary density operators (ADOs) for two qubits, one Drude bath each.

Every ADO rho^n is labelled by a multi-index n with one entry per (bath alpha,
exponent k) pair, flattened as ``j = alpha * (M + 1) + k``. The all-zero index
is the reduced density matrix of the qubits. ADOs are stored as an
``(n_ados, 4, 4)`` complex array in the order produced by ``enumerate_indices``.
"""

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from qheom import qmat
from qheom.trajectory import Trajectory

log = logging.getLogger(__name__)

DIM = 4
N_BATHS = 2


class IntegrationError(RuntimeError):
    def __init__(self, t, message="non-finite value in hierarchy"):
        super().__init__(f"{message} at t = {t:.6g}")
        self.t = t


class EquilibrationError(RuntimeError):
    def __init__(self, residual, t_eq, tol):
        super().__init__(
            f"hierarchy not stationary after t = {t_eq:g}: residual {residual:.3e} > {tol:.1e}"
        )
        self.residual = residual


@dataclass(frozen=True)
class SystemModel:
    """Two qubits with energy ``epsilon`` and sigma_x sigma_x coupling ``J``.

    H_S = epsilon (n_1 + n_2) + J (c_1 + c_1^+)(c_2 + c_2^+); the bath of qubit
    ``alpha`` couples through V_alpha = c_alpha + c_alpha^+.
    """

    epsilon: float
    J: float
    hS: np.ndarray = field(repr=False)
    V: tuple = field(repr=False)

    @classmethod
    def build(cls, epsilon=1.5, J=1.0):
        n1 = qmat.kron(qmat.NUMBER, qmat.I2)
        n2 = qmat.kron(qmat.I2, qmat.NUMBER)
        x = qmat.LOWER + qmat.LOWER.conj().T
        hS = epsilon * (n1 + n2) + J * qmat.kron(x, x)
        V = (qmat.kron(x, qmat.I2), qmat.kron(qmat.I2, x))
        for m in (hS, *V):
            m.setflags(write=False)
        return cls(epsilon=epsilon, J=J, hS=hS, V=V)


@dataclass(frozen=True, eq=False)
class Hierarchy:
    """Index set of all multi-indices with tier <= L plus neighbour tables.

    ``up[j, i]`` / ``down[j, i]`` give the position of index i with entry j
    raised / lowered by one, or ``size`` (a zero sentinel) when that neighbour
    lies outside the set.
    """

    M: int
    L: int
    indices: np.ndarray
    up: np.ndarray
    down: np.ndarray

    @property
    def size(self):
        return len(self.indices)

    @property
    def n_modes(self):
        return self.indices.shape[1]

    @property
    def tiers(self):
        return self.indices.sum(axis=1)

    def position(self, n):
        return self._lookup()[tuple(n)]

    def _lookup(self):
        table = self.__dict__.get("_table")
        if table is None:
            table = {tuple(map(int, n)): i for i, n in enumerate(self.indices)}
            object.__setattr__(self, "_table", table)
        return table


def _compositions(n_modes, total):
    # stars and bars: place n_modes - 1 bars among total + n_modes - 1 slots
    for bars in combinations(range(total + n_modes - 1), n_modes - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(total + n_modes - 1 - prev - 1)
        yield tuple(parts)


@lru_cache(maxsize=16)
def enumerate_indices(M, L):
    """All multi-indices of length 2(M+1) with component sum <= L.

    Ordered by tier, then lexicographically with larger leading entries first,
    so for M=0, L=1 the order is (0,0), (1,0), (0,1).
    """
    if M < 0 or L < 0:
        raise ValueError("M and L must be non-negative")
    n_modes = N_BATHS * (M + 1)
    indices = []
    for tier in range(L + 1):
        indices.extend(sorted(_compositions(n_modes, tier), reverse=True))
    indices = np.array(indices, dtype=np.int64).reshape(-1, n_modes)
    size = len(indices)
    lookup = {n: i for i, n in enumerate(map(tuple, indices.tolist()))}

    up = np.full((n_modes, size), size, dtype=np.int64)
    down = np.full((n_modes, size), size, dtype=np.int64)
    for i, n in enumerate(indices.tolist()):
        for j in range(n_modes):
            n[j] += 1
            up[j, i] = lookup.get(tuple(n), size)
            n[j] -= 2
            if n[j] >= 0:
                down[j, i] = lookup[tuple(n)]
            n[j] += 1
    for arr in (indices, up, down):
        arr.setflags(write=False)
    return Hierarchy(M=M, L=L, indices=indices, up=up, down=down)


@dataclass(frozen=True, eq=False)
class HierarchyState:
    hierarchy: Hierarchy
    ados: np.ndarray
    t: float = 0.0

    @classmethod
    def from_density_matrix(cls, rho, M, L, t=0.0):
        """Factorised system-bath state: ``rho`` at tier 0, every other ADO zero."""
        hier = enumerate_indices(M, L)
        ados = np.zeros((hier.size, DIM, DIM), dtype=complex)
        ados[0] = rho
        return cls(hier, ados, t)

    @property
    def rho(self):
        return self.ados[0]

    @property
    def M(self):
        return self.hierarchy.M

    @property
    def L(self):
        return self.hierarchy.L


def _left(a):
    return np.kron(a, qmat.I4)


def _right(a):
    return np.kron(qmat.I4, a.T)


def _check_consistent(hierarchy, expansion):
    if hierarchy.M != expansion.M:
        raise ValueError(
            f"hierarchy has M = {hierarchy.M} but bath expansion has M = {expansion.M}"
        )


def rhs(state, system, expansion):
    """Time derivative of every ADO of ``state``, evaluated matrix by matrix.

    Raised neighbours above tier L count as zero; lowered neighbours with a
    negative entry do not exist and contribute nothing.
    """
    hier = state.hierarchy
    _check_consistent(hier, expansion)
    rho = np.asarray(state.ados, dtype=complex)
    padded = np.concatenate([rho, np.zeros((1, DIM, DIM), dtype=complex)])
    n = hier.indices
    M1 = hier.M + 1
    h = system.hS

    out = -1j * (h @ rho - rho @ h) - (n @ np.tile(expansion.nu, N_BATHS))[:, None, None] * rho
    for a, v in enumerate(system.V):
        vr = v @ rho - rho @ v
        out -= expansion.delta * (v @ vr - vr @ v)
        raised = np.zeros_like(rho)
        left = np.zeros_like(rho)
        right = np.zeros_like(rho)
        for k in range(M1):
            j = a * M1 + k
            raised += padded[hier.up[j]]
            lowered = n[:, j, None, None] * padded[hier.down[j]]
            left += expansion.c[k] * lowered
            right += np.conj(expansion.c[k]) * lowered
        out -= 1j * (v @ raised - raised @ v)
        out -= 1j * (v @ left - right @ v)
    return out


def hierarchy_liouvillian(hierarchy, system, expansion):
    """Sparse generator of the whole hierarchy acting on the flattened ADO array.

    The flattened vector is ``ados.reshape(-1)``; block (i, i') of the result is
    the 16x16 superoperator coupling ADO i' into the derivative of ADO i.
    """
    _check_consistent(hierarchy, expansion)
    size = hierarchy.size
    M1 = hierarchy.M + 1
    n = hierarchy.indices
    rows = np.arange(size)

    comm = [_left(v) - _right(v) for v in system.V]
    local = -1j * (_left(system.hS) - _right(system.hS))
    for vx in comm:
        local = local - expansion.delta * (vx @ vx)
    damp = n @ np.tile(expansion.nu, N_BATHS)
    gen = sp.kron(sp.identity(size, format="csr"), sp.csr_matrix(local))
    gen = gen - sp.kron(sp.diags(damp), sp.identity(DIM * DIM))

    def coupling(targets, weights):
        keep = targets < size
        return sp.csr_matrix((weights[keep], (rows[keep], targets[keep])), shape=(size, size))

    for a, v in enumerate(system.V):
        raise_a = sp.csr_matrix((size, size), dtype=complex)
        lower_c = sp.csr_matrix((size, size), dtype=complex)
        lower_cc = sp.csr_matrix((size, size), dtype=complex)
        for k in range(M1):
            j = a * M1 + k
            raise_a = raise_a + coupling(hierarchy.up[j], np.ones(size))
            lower_c = lower_c + coupling(hierarchy.down[j], n[:, j] * expansion.c[k])
            lower_cc = lower_cc + coupling(hierarchy.down[j], n[:, j] * np.conj(expansion.c[k]))
        gen = gen + sp.kron(raise_a, sp.csr_matrix(-1j * comm[a]))
        gen = gen + sp.kron(lower_c, sp.csr_matrix(-1j * _left(v)))
        gen = gen + sp.kron(lower_cc, sp.csr_matrix(1j * _right(v)))
    gen = sp.csr_matrix(gen)
    gen.eliminate_zeros()
    gen.sort_indices()
    return gen


def rk4_step(gen, x, dt):
    """One classical Runge-Kutta step of dx/dt = gen @ x."""
    k1 = gen @ x
    k2 = gen @ (x + (0.5 * dt) * k1)
    k3 = gen @ (x + (0.5 * dt) * k2)
    k4 = gen @ (x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _n_steps(t0, t_end, dt):
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_end > t0:
        raise ValueError(f"t_end = {t_end} must exceed the current time {t0}")
    n = int(round((t_end - t0) / dt))
    if abs(n * dt - (t_end - t0)) > 1e-9 * max(1.0, t_end):
        raise ValueError("t_end - t must be an integer multiple of dt")
    return n


def propagate(state, system, expansion, dt=1e-3, t_end=10.0, sample_stride=10,
              observer=None, eps_pos=1e-6):
    """Fixed-step RK4 integration of the whole hierarchy.

    The reduced density matrix is sampled every ``sample_stride`` steps
    (including the initial time) and handed to ``observer(t, rho)`` if given.
    Returns a Trajectory whose ``final_state`` holds the hierarchy at ``t_end``.
    """
    gen = hierarchy_liouvillian(state.hierarchy, system, expansion)
    n_steps = _n_steps(state.t, t_end, dt)
    t0 = state.t
    x = np.array(state.ados, dtype=complex).reshape(-1)
    times, rhos = [t0], [x[: DIM * DIM].reshape(DIM, DIM).copy()]
    if observer is not None:
        observer(t0, rhos[0])
    for step in range(1, n_steps + 1):
        x = rk4_step(gen, x, dt)
        if step % sample_stride == 0 or step == n_steps:
            t = t0 + step * dt
            if not np.all(np.isfinite(x)):
                raise IntegrationError(t)
            if step % sample_stride == 0:
                times.append(t)
                rhos.append(x[: DIM * DIM].reshape(DIM, DIM).copy())
                if observer is not None:
                    observer(t, rhos[-1])
    final = HierarchyState(state.hierarchy, x.reshape(-1, DIM, DIM), t0 + n_steps * dt)
    traj = Trajectory.from_states(np.array(times), np.array(rhos), eps_pos=eps_pos)
    traj.final_state = final
    return traj


def evolve(state, system, expansion, dt, t_end):
    """Integrate to ``t_end`` without recording samples; returns the final HierarchyState."""
    gen = hierarchy_liouvillian(state.hierarchy, system, expansion)
    n_steps = _n_steps(state.t, t_end, dt)
    x = np.array(state.ados, dtype=complex).reshape(-1)
    check_every = max(1, n_steps // 20)
    for step in range(1, n_steps + 1):
        x = rk4_step(gen, x, dt)
        if step % check_every == 0 and not np.all(np.isfinite(x)):
            raise IntegrationError(state.t + step * dt)
    return HierarchyState(state.hierarchy, x.reshape(-1, DIM, DIM), state.t + n_steps * dt)


def equilibrate(system, expansion, L, M=None, t_eq=50.0, stationarity_tol=1e-7,
                dt=1e-3, rho0=None):
    """Relax the full hierarchy to its stationary (correlated) state.

    Starts from ``rho0`` (default: Gibbs state of H_S) with all other ADOs zero
    and integrates for ``t_eq``. The higher-tier ADOs of the result carry the
    system-bath coherence. The returned state has t = 0.
    """
    if M is None:
        M = expansion.M
    if M != expansion.M:
        raise ValueError(f"M = {M} does not match the bath expansion (M = {expansion.M})")
    if not t_eq > 0:
        raise ValueError("t_eq must be positive")
    if rho0 is None:
        rho0 = qmat.gibbs_state(system.hS, expansion.params.beta)
    start = HierarchyState.from_density_matrix(rho0, M, L)
    relaxed = evolve(start, system, expansion, dt, t_eq)
    residual = float(np.max(np.abs(rhs(relaxed, system, expansion))))
    log.info("equilibrated to t = %g, stationarity residual %.3e", t_eq, residual)
    if residual > stationarity_tol:
        raise EquilibrationError(residual, t_eq, stationarity_tol)
    return replace(relaxed, t=0.0)


def pulse_unitary(qubit):
    if qubit == 1:
        return qmat.kron(qmat.SIGMA_Y, qmat.I2)
    if qubit == 2:
        return qmat.kron(qmat.I2, qmat.SIGMA_Y)
    raise ValueError(f"qubit must be 1 or 2, got {qubit}")


def apply_pulse(state, qubit=1):
    """pi rotation about y of one qubit, applied to every ADO by conjugation."""
    u = pulse_unitary(qubit)
    ados = u @ state.ados @ u.conj().T
    return replace(state, ados=ados)


def factorize(state):
    """Drop the system-bath coherence: keep tier 0 and zero every other ADO."""
    ados = np.zeros_like(state.ados)
    ados[0] = state.ados[0]
    return replace(state, ados=ados)

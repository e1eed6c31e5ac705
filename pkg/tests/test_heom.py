from math import comb

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from qheom import qmat
from qheom.bath import DrudeParams, build_expansion
from qheom.heom import (
    EquilibrationError,
    HierarchyState,
    IntegrationError,
    SystemModel,
    apply_pulse,
    enumerate_indices,
    equilibrate,
    factorize,
    hierarchy_liouvillian,
    propagate,
    rhs,
    rk4_step,
)

from conftest import DEFAULT_PARAMS, random_density
from oracles import column_to_row_major, dense_hierarchy_liouvillian, row_to_column_major

seeds = st.integers(min_value=0, max_value=2**32 - 1)
DECOUPLED = DrudeParams(0.0, 0.5, 2.5)


def random_state(rng, M, L):
    hier = enumerate_indices(M, L)
    ados = rng.normal(size=(hier.size, 4, 4)) + 1j * rng.normal(size=(hier.size, 4, 4))
    return HierarchyState(hier, ados)


def test_enumerate_small():
    h = enumerate_indices(0, 1)
    assert h.indices.tolist() == [[0, 0], [1, 0], [0, 1]]
    assert enumerate_indices(1, 2).size == 15
    assert enumerate_indices(2, 6).size == 924


@pytest.mark.parametrize("M, L", [(0, 0), (0, 4), (1, 3), (2, 2), (3, 3)])
def test_enumerate_counts_and_neighbours(M, L):
    h = enumerate_indices(M, L)
    k = 2 * (M + 1)
    assert h.size == comb(L + k, k)
    assert len({tuple(n) for n in h.indices}) == h.size
    tiers = h.tiers
    assert np.all(np.diff(tiers) >= 0) and tiers.max() == L
    for i, n in enumerate(h.indices):
        for j in range(k):
            up = n.copy()
            up[j] += 1
            if up.sum() <= L:
                assert np.array_equal(h.indices[h.up[j, i]], up)
            else:
                assert h.up[j, i] == h.size
            if n[j] > 0:
                down = n.copy()
                down[j] -= 1
                assert np.array_equal(h.indices[h.down[j, i]], down)
            else:
                assert h.down[j, i] == h.size


def test_system_model_structure(system):
    assert qmat.hermiticity_defect(system.hS) == 0
    x = np.array([[0, 1], [1, 0]])
    assert np.array_equal(system.V[0], np.kron(x, np.eye(2)))
    assert np.array_equal(system.V[1], np.kron(np.eye(2), x))
    w = np.linalg.eigvalsh(system.hS)
    r = np.hypot(1.5, 1.0)
    assert np.allclose(w, sorted([1.5 - r, 0.5, 2.5, 1.5 + r]))


def test_rhs_decoupled_bath_is_von_neumann(system, rng):
    e = build_expansion(DECOUPLED, 1)
    state = HierarchyState.from_density_matrix(random_density(rng), 1, 3)
    d = rhs(state, system, e)
    rho = state.rho
    assert np.array_equal(d[0], -1j * (system.hS @ rho - rho @ system.hS))
    assert np.all(d[1:] == 0)


def test_rhs_vanishes_on_maximally_mixed(system, expansion2):
    state = HierarchyState.from_density_matrix(qmat.I4 / 4, 2, 3)
    d = rhs(state, system, expansion2)
    assert np.max(np.abs(d[0])) <= 1e-15
    # tier 1 picks up (c_0 - c_0*) V / 4 from the downward coupling
    assert np.max(np.abs(d[1])) == pytest.approx(0.15 * 2 / 4)


def test_rhs_rejects_inconsistent_cutoff(system, expansion2):
    state = HierarchyState.from_density_matrix(qmat.I4 / 4, 1, 2)
    with pytest.raises(ValueError):
        rhs(state, system, expansion2)


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(min_value=-3, max_value=3))
def test_rhs_linear(seed, a):
    rng = np.random.default_rng(seed)
    system = SystemModel.build()
    e = build_expansion(DEFAULT_PARAMS, 1)
    s1, s2 = random_state(rng, 1, 3), random_state(rng, 1, 3)
    combo = HierarchyState(s1.hierarchy, a * s1.ados + s2.ados)
    lhs = rhs(combo, system, e)
    expected = a * rhs(s1, system, e) + rhs(s2, system, e)
    assert np.max(np.abs(lhs - expected)) <= 1e-12 * (1 + abs(a)) * np.max(np.abs(lhs))


@pytest.mark.parametrize("M, L", [(0, 2), (1, 3), (2, 3)])
def test_sparse_generator_matches_rhs(system, rng, M, L):
    e = build_expansion(DEFAULT_PARAMS, M)
    state = random_state(rng, M, L)
    gen = hierarchy_liouvillian(state.hierarchy, system, e)
    direct = rhs(state, system, e).reshape(-1)
    assert np.max(np.abs(gen @ state.ados.reshape(-1) - direct)) <= 1e-13


@pytest.mark.parametrize("M, L", [(0, 2), (1, 2)])
def test_dense_oracle_matches_rhs(system, rng, M, L):
    indices, dense = dense_hierarchy_liouvillian(1.5, 1.0, 0.3, 0.5, 2.5, M, L)
    state = random_state(rng, M, L)
    # map the oracle's index order onto the package's
    perm = [state.hierarchy.position(n) for n in indices]
    x_oracle = row_to_column_major(state.ados[perm].reshape(-1), len(indices))
    y = column_to_row_major(dense @ x_oracle, len(indices)).reshape(-1, 4, 4)
    expected = rhs(state, system, build_expansion(DEFAULT_PARAMS, M))[perm]
    assert np.max(np.abs(y - expected)) <= 1e-13


def test_rk4_step_matches_matrix_exponential_small(system, rng):
    M, L, dt = 0, 2, 1e-3
    indices, dense = dense_hierarchy_liouvillian(1.5, 1.0, 0.3, 0.5, 2.5, M, L)
    state = random_state(rng, M, L)
    perm = [state.hierarchy.position(n) for n in indices]
    x = row_to_column_major(state.ados[perm].reshape(-1), len(indices))
    exact = column_to_row_major(scipy.linalg.expm(dt * dense) @ x, len(indices))
    gen = hierarchy_liouvillian(state.hierarchy, system, build_expansion(DEFAULT_PARAMS, M))
    step = rk4_step(gen, state.ados.reshape(-1), dt).reshape(-1, 4, 4)[perm].reshape(-1)
    assert np.max(np.abs(step - exact)) <= 1e-10


def test_unitary_limit(system):
    psi = np.array([0.6, 0.0, 0.48j, 0.64])
    rho0 = qmat.projector(psi / np.linalg.norm(psi))
    state = HierarchyState.from_density_matrix(rho0, 0, 1)
    traj = propagate(state, system, build_expansion(DECOUPLED, 0), dt=1e-3, t_end=10.0,
                     sample_stride=1000)
    u = qmat.expm(-1j * system.hS * 10.0)
    assert np.max(np.abs(traj.rhos[-1] - u @ rho0 @ u.conj().T)) <= 1e-8
    assert np.all(traj.final_state.ados[1:] == 0)


def test_sample_count_and_observer(system):
    seen = []
    state = HierarchyState.from_density_matrix(qmat.I4 / 4, 0, 1)
    traj = propagate(state, system, build_expansion(DEFAULT_PARAMS, 0), dt=0.01, t_end=1.0,
                     sample_stride=7, observer=lambda t, rho: seen.append(t))
    assert len(traj) == int(np.floor(1.0 / (0.01 * 7))) + 1 == len(seen)
    assert traj.final_state.t == pytest.approx(1.0)
    assert np.all(np.diff(traj.times) > 0)


def test_propagate_detects_blow_up(system):
    state = HierarchyState.from_density_matrix(qmat.I4 / 4, 0, 1)
    state.ados[1, 0, 0] = np.nan
    with pytest.raises(IntegrationError) as err:
        propagate(state, system, build_expansion(DEFAULT_PARAMS, 0), dt=0.01, t_end=0.1,
                  sample_stride=5)
    assert err.value.t == pytest.approx(0.05)


def test_propagate_argument_checks(system):
    state = HierarchyState.from_density_matrix(qmat.I4 / 4, 0, 1)
    e = build_expansion(DEFAULT_PARAMS, 0)
    with pytest.raises(ValueError):
        propagate(state, system, e, dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        propagate(state, system, e, dt=0.1, t_end=0.0)


def test_pulse_examples(rng):
    state = HierarchyState.from_density_matrix(qmat.projector(qmat.ket("00")), 1, 2)
    flipped = apply_pulse(state, 1)
    assert np.allclose(flipped.rho, qmat.projector(qmat.ket("10")))
    assert np.allclose(apply_pulse(state, 2).rho, qmat.projector(qmat.ket("01")))

    s = random_state(rng, 1, 2)
    twice = apply_pulse(apply_pulse(s, 1), 1)
    assert np.max(np.abs(twice.ados - s.ados)) <= 1e-15
    rho = random_density(rng)
    p = apply_pulse(HierarchyState.from_density_matrix(rho, 1, 2), 2).rho
    assert np.trace(p) == pytest.approx(1.0, abs=1e-15)
    assert qmat.hermiticity_defect(p) <= 1e-15
    with pytest.raises(ValueError):
        apply_pulse(s, 3)


def test_factorize(rng):
    s = random_state(rng, 1, 2)
    f = factorize(s)
    assert np.array_equal(f.rho, s.rho)
    assert np.all(f.ados[1:] == 0)
    assert np.array_equal(factorize(f).ados, f.ados)


def test_equilibrate_decoupled_gives_gibbs(system):
    e = build_expansion(DECOUPLED, 1)
    eq = equilibrate(system, e, L=2, t_eq=1.0, dt=0.01)
    assert np.max(np.abs(eq.rho - qmat.gibbs_state(system.hS, 2.5))) <= 1e-12
    assert np.all(eq.ados[1:] == 0)
    assert eq.t == 0.0


def test_equilibrate_weak_coupling_close_to_gibbs(system):
    e = build_expansion(DrudeParams(1e-3, 0.5, 2.5), 0)
    eq = equilibrate(system, e, L=1, t_eq=2.0, dt=0.01, stationarity_tol=1.0)
    assert np.max(np.abs(eq.ados[1:])) < 1e-2


def test_equilibrate_not_stationary(system):
    e = build_expansion(DEFAULT_PARAMS, 0)
    with pytest.raises(EquilibrationError) as err:
        equilibrate(system, e, L=2, t_eq=1.0, dt=0.01)
    assert err.value.residual > 1e-7


def test_equilibrate_ergodic_small_hierarchy(system):
    e = build_expansion(DEFAULT_PARAMS, 0)
    a = equilibrate(system, e, L=3, t_eq=100.0, dt=0.01)
    b = equilibrate(system, e, L=3, t_eq=100.0, dt=0.01, rho0=qmat.I4 / 4)
    assert np.max(np.abs(a.ados - b.ados)) <= 1e-6
    assert np.max(np.abs(a.ados[1:3])) >= 1e-3

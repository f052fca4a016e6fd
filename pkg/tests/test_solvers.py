import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from qdcel import solvers
from qdcel.liouvillian import SystemParams, build_full_polaron, build_no_phonon
from qdcel.observables import mean_photons
from qdcel.operators import vec
from qdcel.solvers import (
    AmbiguousSteadyStateError, CutoffConvergenceError, NegativityError, auto_cutoff,
    evolve, steady_state, trace_distance,
)

from conftest import random_density


def _fixed_point_generator(sigma):
    # L v = -(v - sigma tr v): unique trace-one fixed point sigma
    d = sigma.shape[0]
    tr = vec(np.eye(d))
    return -(np.eye(d * d) - np.outer(vec(sigma), tr))


def test_decay_only_relaxes_to_vacuum():
    p = SystemParams(eta1=0.0, eta2=0.0, g1=0.05, g2=0.05, cutoff1=2, cutoff2=2)
    rep = steady_state(build_no_phonon(p))
    i = p.layout.index(0, 0, 0)
    assert abs(rep.rho[i, i] - 1.0) < 1e-12
    assert rep.relative_residual < 1e-12


def test_recovers_prescribed_fixed_point(rng):
    sigma = random_density(4, rng)
    rep = steady_state(_fixed_point_generator(sigma))
    assert np.allclose(rep.rho, sigma, atol=1e-13)
    assert rep.method == "dense-lu"


def test_negative_fixed_point_rejected():
    sigma = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(NegativityError):
        steady_state(_fixed_point_generator(sigma))
    rep = steady_state(_fixed_point_generator(sigma), neg_tol=1.0)
    assert np.isclose(rep.min_eigenvalue, -0.5)


def test_degenerate_generator_rejected():
    # purely coherent dynamics: every diagonal state in the eigenbasis is stationary
    p = SystemParams(kappa1=0.0, kappa2=0.0, gamma1=0.0, gamma2=0.0, gamma1p=0.0,
                     gamma2p=0.0, cutoff1=1, cutoff2=1)
    with pytest.raises(AmbiguousSteadyStateError):
        steady_state(build_no_phonon(p))
    with pytest.raises(AmbiguousSteadyStateError):
        steady_state(sp.csr_matrix((16, 16), dtype=complex))


def test_rejects_non_square_size():
    with pytest.raises(ValueError):
        steady_state(np.zeros((5, 5)))


def test_sparse_and_dense_paths_agree(monkeypatch):
    b = build_no_phonon(SystemParams(cutoff1=2, cutoff2=2))
    dense = steady_state(b.L_total.toarray())
    monkeypatch.setattr(solvers, "DENSE_FILL", 1.0)
    sparse = steady_state(b)
    assert sparse.method == "splu"
    assert trace_distance(dense.rho, sparse.rho) < 1e-12


def test_evolve_matches_matrix_exponential(rng):
    b = build_no_phonon(SystemParams(cutoff1=1, cutoff2=1))
    rho0 = random_density(b.layout.dim, rng)
    t = 7.5
    ref = (sla.expm(t * b.L_total.toarray()) @ vec(rho0)).reshape(rho0.shape, order="F")
    res = evolve(b, rho0, t)
    assert np.max(np.abs(res.rho - ref)) < 1e-9
    assert res.trace_drift < 1e-10
    assert evolve(b, rho0, 0.0).nfev == 0


def test_full_polaron_steady_state_matches_long_evolution(tables5):
    p = SystemParams(cutoff1=1, cutoff2=1, gamma1=0.01, gamma2=0.01)
    b = build_full_polaron(p, tables5)
    rep = steady_state(b)
    d = b.layout.dim
    rho0 = np.zeros((d, d), complex)
    rho0[0, 0] = 1.0
    # integrate many lifetimes of the slowest mode
    slowest = -np.sort(np.linalg.eigvals(b.L_total.toarray()).real)[-2]
    res = evolve(b, rho0, 40.0 / slowest, rtol=1e-11, atol=1e-14)
    assert trace_distance(res.rho, rep.rho) < 1e-6


def test_auto_cutoff_converges():
    p = SystemParams(eta1=0.1, eta2=0.1)
    cut, rep = auto_cutoff(p, build_no_phonon, lambda r, b: mean_photons(r, b.layout)[0],
                           rel_tol=1e-3, cap=6)
    assert rep.cutoff_converged
    assert [c for c, _ in rep.history][-1] == cut + 1
    c1, c2 = rep.history[-2][1], rep.history[-1][1]
    assert abs(c1 - c2) <= 1e-3 * abs(c2)


def test_auto_cutoff_failure_and_arguments():
    p = SystemParams()
    obs = lambda r, b: mean_photons(r, b.layout)[0]
    with pytest.raises(CutoffConvergenceError):
        auto_cutoff(p, build_no_phonon, obs, rel_tol=1e-14, cap=2)
    with pytest.raises(ValueError):
        auto_cutoff(p, build_no_phonon, obs, rel_tol=0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_trace_distance_is_a_metric(d, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density(d, rng) for _ in range(3))
    dab = trace_distance(a, b)
    assert 0.0 <= dab <= 1.0 + 1e-12
    assert np.isclose(dab, trace_distance(b, a))
    assert trace_distance(a, a) < 1e-12
    assert dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12

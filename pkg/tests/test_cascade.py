import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import poisson

from obethermo.cascade import (CascadeParams, CascadeState, build_jc, coherent_state,
                               evolve_cascade, initial_cascade_state, ladder_gaps,
                               mollow_frequencies, number_operator, truncation_for,
                               uq_identity)
from obethermo.errors import DomainError, OutOfModelError, StateError, TruncationError
from obethermo import SystemParams


@given(st.floats(0.1, 12))
def test_coherent_state_is_poissonian(alpha):
    n_max = truncation_for(alpha)
    c = coherent_state(alpha, n_max)
    pmf = poisson.pmf(np.arange(n_max + 1), alpha ** 2)
    assert np.allclose(np.abs(c) ** 2, pmf / pmf.sum(), atol=1e-14)


def test_truncation_guard():
    with pytest.raises(TruncationError):
        coherent_state(4.0, 20)
    with pytest.raises(DomainError):
        coherent_state(-1.0, 50)
    assert truncation_for(16) == 426


def test_state_validation():
    amp = np.zeros((2, 10), dtype=complex)
    amp[0, 0] = 2.0
    with pytest.raises(StateError):
        CascadeState(amp, 0.0)
    leak = np.zeros((2, 10), dtype=complex)
    leak[1, 9] = 1.0
    with pytest.raises(TruncationError):
        CascadeState(leak, 0.0)


@settings(max_examples=20)
@given(st.integers(0, 30), st.floats(-0.02, 0.02), st.floats(1e-3, 0.02))
def test_fock_state_rabi_oscillation(n, delta, g0):
    # |1, n> couples only to |0, n + 1>: P1 = 1 - (4 g0^2 (n+1)/W^2) sin^2(W t/2)
    n_max = n + 8
    cp = CascadeParams(omega_qb=1 + delta, omega_L=1.0, g0=g0, n_max=n_max)
    amp = np.zeros((2, n_max + 1), dtype=complex)
    amp[1, n] = 1.0
    w = math.sqrt(delta ** 2 + 4 * g0 ** 2 * (n + 1))
    t = np.linspace(0, 2 * math.pi / w, 9)
    traj = evolve_cascade(CascadeState(amp, 0.0), cp, t)
    expected = 1 - 4 * g0 ** 2 * (n + 1) / w ** 2 * np.sin(w * t / 2) ** 2
    assert np.abs(traj.p1 - expected).max() < 1e-10


def test_conservation_and_exact_identity():
    alpha, g, delta = 6.0, 0.02, 0.01
    n_max = truncation_for(alpha)
    cp = CascadeParams(omega_qb=1 + delta, omega_L=1.0, g0=g / (2 * alpha), n_max=n_max)
    t = np.linspace(0, 2 * math.pi / math.hypot(g, delta), 101)
    traj = evolve_cascade(initial_cascade_state(alpha, n_max), cp, t)
    assert np.abs(traj.norms - 1).max() < 1e-10
    assert np.abs(traj.excitations - traj.excitations[0]).max() < 1e-10
    rep = uq_identity(traj)
    assert rep.max_exact_residual < 1e-12
    assert rep.max_residual > rep.max_exact_residual
    h = build_jc(cp)
    assert np.allclose(h, h.conj().T)
    nop = number_operator(n_max)
    assert np.abs(h @ nop - nop @ h).max() < 1e-12


def test_vacuum_and_uncoupled_are_static():
    cp = CascadeParams(omega_qb=1.01, omega_L=1.0, g0=0.0, n_max=truncation_for(4))
    traj = evolve_cascade(initial_cascade_state(4, cp.n_max), cp, np.linspace(0, 100, 11))
    assert np.all(traj.p1 == 0) and np.all(uq_identity(traj).residual == 0)
    vac = CascadeParams(omega_qb=1.01, omega_L=1.0, g0=0.01, n_max=truncation_for(0))
    traj = evolve_cascade(initial_cascade_state(0, vac.n_max), vac, np.linspace(0, 100, 11))
    assert np.all(traj.p1 == 0)


def test_conditional_field_states():
    state = initial_cascade_state(3.0)
    p0, psi0, p1, psi1 = state.conditional_field_states()
    assert p0 == pytest.approx(1) and p1 == 0 and psi1 is None
    assert np.linalg.norm(psi0) == pytest.approx(1)


def test_ladder_approaches_mollow_triplet():
    g0, delta, n = 1e-4, 2e-4, 2500
    cp = CascadeParams(omega_qb=1 + delta, omega_L=1.0, g0=g0, n_max=n + 5)
    gaps = ladder_gaps(cp, n)
    sp = SystemParams(omega_L=1.0, delta=delta, g=2 * g0 * math.sqrt(n), gamma=1e-6, beta_L=1)
    w_L, w1, w2 = mollow_frequencies(sp)
    # exact: omega_L +- (W_n + W_{n-1})/2 with W_m = sqrt(delta^2 + 4 g0^2 m)
    half = 0.5 * (math.sqrt(delta ** 2 + 4 * g0 ** 2 * n) + math.sqrt(delta ** 2 + 4 * g0 ** 2 * (n - 1)))
    assert np.allclose(gaps, [1 - half, 1, 1, 1 + half], atol=1e-12)
    # the triplet of the classical drive, up to O(g0^2 / Omega)
    assert np.allclose(gaps, [w2, w_L, w_L, w1], atol=2 * g0 ** 2 / sp.rabi)
    with pytest.raises(OutOfModelError):
        mollow_frequencies(SystemParams(omega_L=1.0, delta=0, g=2.0, gamma=1e-6, beta_L=1))
    with pytest.raises(DomainError):
        ladder_gaps(cp, 1)


def test_grid_checks():
    cp = CascadeParams(omega_qb=1.01, omega_L=1.0, g0=0.01, n_max=truncation_for(2))
    psi = initial_cascade_state(2.0, cp.n_max)
    with pytest.raises(DomainError):
        evolve_cascade(psi, cp, [0.0, -1.0])
    with pytest.raises(DomainError):
        evolve_cascade(initial_cascade_state(2.0, cp.n_max + 1), cp, [0.0, 1.0])

"""Qubit coupled to a quantized drive mode (Jaynes-Cummings), closed system.

Amplitudes are stored as a (2, n_max + 1) array: row 0 holds <0, n|psi>,
row 1 holds <1, n|psi>. Evolution runs in the frame rotating at omega_L
for both qubit and field, where H = (delta/2) sz + g0 (sigma a^dag + h.c.).
The semiclassical drive strength is g = 2 g0 alpha.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln

from . import kernels
from .core import SystemParams, from_bloch_views
from .dynamics import evolve
from .errors import DomainError, OutOfModelError, StateError, TruncationError
from .generators import obe_generator

NORM_TOL = 1e-10
LEAK_TOL = 1e-8


@dataclass(frozen=True)
class CascadeParams:
    omega_qb: float
    omega_L: float
    g0: float
    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise DomainError("n_max must be at least 1")
        if self.g0 < 0:
            raise DomainError("g0 must be nonnegative")

    @property
    def delta(self):
        return self.omega_qb - self.omega_L


def truncation_for(alpha):
    """Fock cutoff ceil(alpha^2 + 10 alpha + 10)."""
    return int(math.ceil(alpha ** 2 + 10 * alpha + 10))


def _ops(n_max):
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    sigma = np.array([[0, 1], [0, 0]], dtype=complex)
    return a, sigma


def build_jc(params):
    """Full lab-frame Hamiltonian on qubit (x) field, qubit index major."""
    nf = params.n_max + 1
    a, sigma = _ops(params.n_max)
    eye_f = np.eye(nf)
    sz = np.diag([-1.0, 1.0])
    h = (0.5 * params.omega_qb * np.kron(sz, eye_f)
         + params.omega_L * np.kron(np.eye(2), a.conj().T @ a)
         + params.g0 * (np.kron(sigma, a.conj().T) + np.kron(sigma.conj().T, a)))
    return h.astype(complex)


def number_operator(n_max):
    """sigma^dag sigma + a^dag a."""
    a, sigma = _ops(n_max)
    nf = n_max + 1
    return (np.kron(sigma.conj().T @ sigma, np.eye(nf))
            + np.kron(np.eye(2), a.conj().T @ a))


def coherent_state(alpha, n_max):
    """Fock amplitudes of |alpha> for real alpha >= 0, renormalized after truncation."""
    if alpha < 0:
        raise DomainError("alpha is taken real and nonnegative")
    if n_max < alpha ** 2 + 10 * alpha:
        raise TruncationError(f"n_max = {n_max} too small for alpha = {alpha}")
    n = np.arange(n_max + 1)
    if alpha == 0:
        c = np.zeros(n_max + 1)
        c[0] = 1.0
        return c.astype(complex)
    logc = -0.5 * alpha ** 2 + n * math.log(alpha) - 0.5 * gammaln(n + 1)
    c = np.exp(logc)
    return (c / np.linalg.norm(c)).astype(complex)


@dataclass(frozen=True)
class CascadeState:
    """Pure qubit-field state."""

    amplitudes: np.ndarray
    alpha: float
    t: float = 0.0

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.ndim != 2 or amp.shape[0] != 2:
            raise StateError("amplitudes must have shape (2, n_max + 1)")
        norm = np.sum(np.abs(amp) ** 2)
        if abs(norm - 1) > NORM_TOL:
            raise StateError(f"norm deviates from 1 by {abs(norm - 1):.3e}")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)
        top = np.sum(np.abs(amp[:, -3:]) ** 2)
        if top > LEAK_TOL:
            raise TruncationError(f"weight {top:.3e} on the top three Fock levels")

    @property
    def n_max(self):
        return self.amplitudes.shape[1] - 1

    @property
    def p1(self):
        return float(np.sum(np.abs(self.amplitudes[1]) ** 2))

    @property
    def s(self):
        """Reduced qubit coherence <1|rho_qubit|0>."""
        return complex(np.vdot(self.amplitudes[0], self.amplitudes[1]))

    @property
    def excitations(self):
        n = np.arange(self.n_max + 1)
        return float(np.sum(np.abs(self.amplitudes[1]) ** 2 * (n + 1))
                     + np.sum(np.abs(self.amplitudes[0]) ** 2 * n))

    def correlation_energy(self, g0):
        """<g0 (sigma a^dag + sigma^dag a)>."""
        return float(_correlation(self.amplitudes[None], g0)[0])

    def conditional_field_states(self):
        """(P0, psi0, P1, psi1): field states conditioned on the qubit level.

        A branch with zero weight returns None for its field state.
        """
        out = []
        for q in (0, 1):
            w = float(np.sum(np.abs(self.amplitudes[q]) ** 2))
            out += [w, self.amplitudes[q] / math.sqrt(w) if w > 0 else None]
        return tuple(out)


def _correlation(amps, g0):
    # <sigma a^dag> = sum_n conj(a_{n+1}) sqrt(n+1) b_n
    n = amps.shape[-1]
    root = np.sqrt(np.arange(1, n))
    x = np.sum(amps[:, 0, 1:].conj() * root * amps[:, 1, :-1], axis=-1)
    return 2 * g0 * x.real


def initial_cascade_state(alpha, n_max=None, qubit=0):
    n_max = truncation_for(alpha) if n_max is None else n_max
    amp = np.zeros((2, n_max + 1), dtype=complex)
    amp[qubit] = coherent_state(alpha, n_max)
    return CascadeState(amp, alpha)


@dataclass(frozen=True)
class CascadeTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray
    alpha: float
    params: CascadeParams
    step: float

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i):
        return CascadeState(self.amplitudes[i], self.alpha, self.times[i])

    @property
    def p1(self):
        return np.sum(np.abs(self.amplitudes[:, 1]) ** 2, axis=-1)

    @property
    def s(self):
        return np.sum(self.amplitudes[:, 0].conj() * self.amplitudes[:, 1], axis=-1)

    @property
    def norms(self):
        return np.sum(np.abs(self.amplitudes) ** 2, axis=(1, 2))

    @property
    def excitations(self):
        n = np.arange(self.amplitudes.shape[-1])
        return (np.sum(np.abs(self.amplitudes[:, 1]) ** 2 * (n + 1), axis=-1)
                + np.sum(np.abs(self.amplitudes[:, 0]) ** 2 * n, axis=-1))

    @property
    def correlation_energy(self):
        return _correlation(self.amplitudes, self.params.g0)


def evolve_cascade(psi0, params, t_grid, fixed_step=None):
    """Schrodinger evolution of the truncated model with fixed-step RK4.

    The default step is 0.01 divided by the largest Rabi frequency in the
    truncated ladder.
    """
    if psi0.n_max != params.n_max:
        raise DomainError("state and parameters disagree on n_max")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0):
        raise DomainError("time grid must be strictly increasing")
    d = params.delta
    top = math.sqrt(d ** 2 + 4 * params.g0 ** 2 * (params.n_max + 1))
    h = fixed_step if fixed_step is not None else (0.01 / top if top > 0 else np.inf)
    amp = np.ascontiguousarray(psi0.amplitudes, dtype=complex)
    out = np.empty((t.size, 2, params.n_max + 1), dtype=complex)
    out[0] = amp
    dt = np.diff(t)
    if dt.size:
        k = np.maximum(1, np.ceil(dt / h - 1e-9)).astype(int) if np.isfinite(h) else np.ones(dt.size, int)
        if np.all(k == k[0]) and np.allclose(dt, dt[0], rtol=1e-12, atol=0):
            out[1:] = kernels.jc_rk4(d, params.g0, amp, dt[0] / k[0], int(k[0] * dt.size), int(k[0]))[1:]
        else:
            for i, (step, n) in enumerate(zip(dt, k)):
                amp = np.ascontiguousarray(kernels.jc_rk4(d, params.g0, amp, step / n, int(n), int(n))[-1])
                out[i + 1] = amp
    norms = np.sum(np.abs(out) ** 2, axis=(1, 2))
    if np.abs(norms - 1).max() > NORM_TOL:
        raise TruncationError(f"norm drifted by {np.abs(norms - 1).max():.3e}")
    leak = np.sum(np.abs(out[:, :, -3:]) ** 2, axis=(1, 2)).max()
    if leak > LEAK_TOL:
        raise TruncationError(f"weight {leak:.3e} reached the top Fock levels")
    step = float(dt.min() / k.max()) if dt.size else 0.0
    return CascadeTrajectory(t, out, psi0.alpha, params, step)


@dataclass(frozen=True)
class IdentityReport:
    """|delta P1 + U_q| with U_q = g Re s and g = 2 g0 alpha, plus the exact version."""

    max_residual: float
    residual: np.ndarray
    max_exact_residual: float


def uq_identity(traj):
    """Residual of delta P1 + U_q = 0 along a cascade trajectory.

    ``residual`` uses the semiclassical U_q = g Re s of the reduced qubit
    state; it vanishes only in the classical limit. The exact counterpart
    with the qubit-field correlation energy is zero up to integration error
    because energy and excitation number are both conserved.
    """
    p = traj.params
    g = 2 * p.g0 * traj.alpha
    res = np.abs(p.delta * traj.p1 + g * traj.s.real)
    exact = np.abs(p.delta * traj.p1 + traj.correlation_energy)
    return IdentityReport(float(res.max()), res, float(exact.max()))


def semiclassical_p1(params, alpha, t_grid, rtol=1e-12, atol=1e-14):
    """Excited population under the classical drive g = 2 g0 alpha, from |0>."""
    sp = SystemParams(omega_L=params.omega_L, delta=params.delta,
                      g=2 * params.g0 * alpha, gamma=0.0, beta_L=1.0)
    traj = evolve(obe_generator(sp), from_bloch_views(0.0, 0.0), t_grid, rtol=rtol, atol=atol)
    return traj.p1


def mollow_frequencies(params):
    """(omega_L, omega_L + Omega, omega_L - Omega)."""
    omega = params.rabi
    if omega >= params.omega_L:
        raise OutOfModelError("Mollow triplet needs Omega < omega_L")
    return params.omega_L, params.omega_L + omega, params.omega_L - omega


def ladder_gaps(params, n):
    """Transition frequencies between the manifolds with n and n - 1 excitations.

    Manifold m (m >= 1) is spanned by |1, m-1> and |0, m>. Returns the sorted
    set of differences between its two eigenvalues and those of manifold
    n - 1 that are within a Rabi splitting of omega_L.
    """
    if not 2 <= n <= params.n_max:
        raise DomainError("n must lie in [2, n_max]")
    h = build_jc(params)
    nf = params.n_max + 1

    def manifold(m):
        idx = [nf + (m - 1), m]  # |1, m-1>, |0, m>
        return np.linalg.eigvalsh(h[np.ix_(idx, idx)])

    upper, lower = manifold(n), manifold(n - 1)
    return np.sort((upper[:, None] - lower[None, :]).ravel())

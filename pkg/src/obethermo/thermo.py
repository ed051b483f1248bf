"""Energy, heat, work and entropy bookkeeping for the Bloch and Floquet equations.

All flows are rates in the rotating frame with hbar = k_B = 1, so entropy
is in nats. Sign convention: a flow is positive when it enters the qubit.
"""
from dataclasses import dataclass
import warnings

import numpy as np

from .core import (DensityMatrix2, as_matrix, dressed_basis, drive_rotating,
                   qubit_hamiltonian)
from .dynamics import bloch_rhs
from .errors import DomainError, FrameError
from .generators import channel_dissipator, fme_channels, obe_generator, unvec, vec

LOG_FLOOR = 1e-300
REL_ENTROPY_FLOOR = 1e-15


@dataclass(frozen=True)
class ThermoFlows:
    """Instantaneous energy and entropy flows of one state."""

    family: str
    W_dot: float
    Q_dot: float
    Q_cl_dot: float
    Q_q_dot: float
    E_R_dot: float
    dU_dt: float
    sigma_dot: float
    S: float
    U: float
    U_cl: float
    U_q: float
    spohn: tuple = ()

    def as_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "spohn"}
        return d


@dataclass(frozen=True)
class CoherenceSplit:
    """D(rho||pi) = D(rho||rho_d) + D(rho_d||pi), rho_d the bare-basis diagonal."""

    D_total: float
    D_q: float
    D_cl: float
    rho_d: np.ndarray


def _rotating_matrix(rho):
    if isinstance(rho, DensityMatrix2):
        if rho.frame != "rotating":
            raise FrameError("thermodynamic formulas take rotating-frame states")
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def _logm(m, floor=LOG_FLOOR):
    lam, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.log(np.maximum(lam, floor))) @ v.conj().T


def entropy(rho):
    """Von Neumann entropy in nats."""
    lam = np.linalg.eigvalsh(as_matrix(rho))
    lam = lam[lam > 0]
    return float(max(0.0, -np.sum(lam * np.log(lam))))


def relative_entropy(rho1, rho2):
    """D(rho1||rho2) = Tr rho1 (log rho1 - log rho2).

    Eigenvalues of rho2 below 1e-15 are floored there with a warning.
    Weight of rho1 beyond 1e-10 on that near-null space is an error.
    """
    a, b = as_matrix(rho1), as_matrix(rho2)
    lam_b, vb = np.linalg.eigh(0.5 * (b + b.conj().T))
    small = lam_b < REL_ENTROPY_FLOOR
    if np.any(small):
        leak = np.real(np.einsum("ik,ij,jk->k", vb.conj(), a, vb))[small].sum()
        if leak > 1e-10:
            raise DomainError("support of rho1 is not contained in support of rho2")
        warnings.warn("second argument is rank deficient; eigenvalues floored at 1e-15",
                      RuntimeWarning, stacklevel=2)
    log_b = (vb * np.log(np.maximum(lam_b, REL_ENTROPY_FLOOR))) @ vb.conj().T
    lam_a = np.linalg.eigvalsh(a)
    lam_a = lam_a[lam_a > 0]
    s_a = np.sum(lam_a * np.log(lam_a))
    return float(max(0.0, s_a - np.real(np.trace(a @ log_b))))


def energy_split(rho, params):
    """(U, U_cl, U_q) with U_cl = omega_qb (p1 - 1/2) and U_q = g Re s."""
    m = _rotating_matrix(rho)
    u_cl = params.omega_qb * (m[1, 1].real - 0.5)
    u_q = params.g * m[1, 0].real
    return u_cl + u_q, float(u_cl), float(u_q)


def obe_flow_arrays(params, p1, s):
    """Closed-form Bloch flows on arrays of (p1, s); returns a dict of arrays."""
    p1 = np.asarray(p1, dtype=float)
    s = np.asarray(s, dtype=complex)
    n, gam, g = params.nbar, params.gamma, params.g
    w_qb, w_L = params.omega_qb, params.omega_L
    # heat from the bath energy balance, then its population and coherence parts
    q = -(gam * w_qb * ((n + 1) * p1 - n * (1 - p1)) + 0.5 * gam * g * (2 * n + 1) * s.real)
    q_cl = -gam * w_qb * (n + 0.5) * (2 * p1 - 1 + 1 / (2 * n + 1))
    q_q = -0.5 * gam * g * (2 * n + 1) * s.real
    w = -w_L * g * s.imag
    e_r = -w_qb * g * s.imag
    dp1, ds = bloch_rhs(params, p1, s)
    du = w_qb * dp1 + g * ds.real
    u_cl = w_qb * (p1 - 0.5)
    u_q = g * s.real
    zero = 0.0
    return dict(W_dot=w + zero, Q_dot=q + zero, Q_cl_dot=q_cl + zero, Q_q_dot=q_q + zero,
                E_R_dot=e_r + zero, dU_dt=du + zero, U=u_cl + u_q, U_cl=u_cl, U_q=u_q)


def _entropy_rate(dissipator, m):
    """-Tr{L[rho] log rho}; the Hamiltonian part drops out."""
    lr = unvec(dissipator @ vec(m))
    return float(-np.real(np.trace(lr @ _logm(m))))


def obe_flows(rho, params):
    """Thermodynamic flows of the Bloch equations at one state."""
    if not params.temperature > 0:
        raise DomainError("temperature must be positive")
    m = _rotating_matrix(rho)
    f = obe_flow_arrays(params, m[1, 1].real, m[1, 0])
    f = {k: float(v) for k, v in f.items()}
    ds = _entropy_rate(obe_generator(params).dissipator, m)
    sigma = ds - f["Q_dot"] / params.temperature
    return ThermoFlows("obe", sigma_dot=sigma, S=entropy(m), **f)


def heat_matrixwise(rho, params, generator=None):
    """Tr{(H_qb + V) L_diss[rho]} evaluated with matrices."""
    gen = obe_generator(params) if generator is None else generator
    m = _rotating_matrix(rho)
    h = qubit_hamiltonian(params) + drive_rotating(params)
    return float(np.real(np.trace(h @ unvec(gen.dissipator @ vec(m)))))


def generator_flows(rho, params, generator):
    """Flows of any rotating-frame generator, from matrix traces.

    Q splits into the dissipative change of the population energy (Q_cl)
    and of the coherent energy g Re s (Q_q); W and E_R only involve the
    drive. For the Bloch generator this reproduces ``obe_flows``.
    """
    if not params.temperature > 0:
        raise DomainError("temperature must be positive")
    m = _rotating_matrix(rho)
    ld = unvec(generator.dissipator @ vec(m))
    lt = unvec(generator.matrix @ vec(m))
    g, w_qb = params.g, params.omega_qb
    q_cl = w_qb * ld[1, 1].real
    q_q = g * ld[1, 0].real
    s = m[1, 0]
    w = -params.omega_L * g * s.imag
    du = w_qb * lt[1, 1].real + g * lt[1, 0].real
    sigma = _entropy_rate(generator.dissipator, m) - (q_cl + q_q) / params.temperature
    u_cl = w_qb * (m[1, 1].real - 0.5)
    u_q = g * s.real
    return ThermoFlows(generator.kind, W_dot=float(w + 0.0), Q_dot=float(q_cl + q_q + 0.0),
                       Q_cl_dot=float(q_cl + 0.0), Q_q_dot=float(q_q + 0.0),
                       E_R_dot=float(-w_qb * g * s.imag + 0.0), dU_dt=float(du + 0.0),
                       sigma_dot=float(sigma), S=entropy(m), U=float(u_cl + u_q),
                       U_cl=float(u_cl), U_q=float(u_q))


def _fixed_point(channel):
    """Stationary (P+, P-) of a dressed-basis relaxation channel."""
    (down, _), (up, _) = channel
    tot = down + up
    return (up / tot, down / tot) if tot > 0 else (0.5, 0.5)


def fme_flows(rho, params, rates):
    """Thermodynamic flows of the Floquet equation at one state.

    U is the dressed energy <H_eff> = (Omega/2)(P+ - P-); U_cl and U_q are
    still the bare split of the same state. The entropy production is split
    into the dephasing term, one Spohn term per relaxation channel and the
    constant set by the dephasing channel.
    """
    if not params.temperature > 0:
        raise DomainError("temperature must be positive")
    m = _rotating_matrix(rho)
    basis = dressed_basis(params)
    pp, pm = basis.populations(m)
    omega, temp = basis.rabi, params.temperature
    w_L, w1, w2 = rates.omega_L, rates.omega_1, rates.omega_2

    q0 = -w_L * (rates.down0 - rates.up0)
    q1 = -w1 * (rates.down1 * pp - rates.up1 * pm)
    q2 = w2 * (rates.down2 * pp - rates.up2 * pm)
    q = q0 + q1 + q2
    w = w_L * ((rates.down1 - rates.down2) * pp - (rates.up1 - rates.up2) * pm
               + rates.down0 - rates.up0)
    dpp = (rates.up1 + rates.up2) * pm - (rates.down1 + rates.down2) * pp
    du = omega * dpp

    chans = fme_channels(rates, params)
    log_rho = _logm(m)
    u_dressed = basis.unitary
    terms = []
    # dephasing: pi_0 is maximally mixed so log pi_0 contributes nothing
    l0 = unvec(channel_dissipator(chans[0]) @ vec(m))
    terms.append(float(-np.real(np.trace(l0 @ log_rho))))
    for j in (1, 2):
        lj = unvec(channel_dissipator(chans[j]) @ vec(m))
        p_plus, p_minus = _fixed_point(chans[j])
        log_pi = (u_dressed * np.log(np.maximum([p_plus, p_minus], LOG_FLOOR))) @ u_dressed.conj().T
        terms.append(float(-np.real(np.trace(lj @ (log_rho - log_pi)))))
    const = w_L * (rates.down0 - rates.up0) / temp

    full = channel_dissipator(chans[0] + chans[1] + chans[2])
    sigma = _entropy_rate(full, m) - q / temp
    u_cl = params.omega_qb * (m[1, 1].real - 0.5)
    u_q = params.g * m[1, 0].real
    return ThermoFlows("fme", W_dot=float(w), Q_dot=float(q), Q_cl_dot=float("nan"),
                       Q_q_dot=float("nan"), E_R_dot=float("nan"), dU_dt=float(du),
                       sigma_dot=float(sigma), S=entropy(m), U=0.5 * omega * (pp - pm),
                       U_cl=float(u_cl), U_q=float(u_q), spohn=tuple(terms) + (const,))


def coherence_split(rho, params):
    """Split D(rho||pi) into coherence and population parts."""
    if not params.temperature > 0:
        raise DomainError("temperature must be positive")
    m = _rotating_matrix(rho)
    n = params.nbar
    p_th = n / (2 * n + 1)
    pi = np.diag([1 - p_th, p_th]).astype(complex)
    rho_d = np.diag(np.diag(m).real).astype(complex)
    return CoherenceSplit(relative_entropy(m, pi), relative_entropy(m, rho_d),
                          relative_entropy(rho_d, pi), rho_d)


@dataclass(frozen=True)
class AuditReport:
    """Largest First-Law and sector residuals along a trajectory."""

    first_law: float
    classical_sector: float
    quantum_sector: float
    step: float

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def first_law_audit(traj, params, rates=None):
    """Finite-difference check of dU/dt = W + Q along a trajectory.

    Uses second-order differences on the stored grid. For Bloch trajectories
    the two sector balances dU_cl/dt = Q_cl + E_R and dU_q/dt = Q_q + W - E_R
    are audited as well; Floquet trajectories (pass ``rates``) audit the
    dressed energy only.
    """
    t = traj.times
    if len(t) < 3:
        raise DomainError("audit needs at least three time points")
    step = float(np.max(np.diff(t)))
    if rates is None:
        f = obe_flow_arrays(params, traj.p1, traj.s)
        du = np.gradient(f["U"], t, edge_order=2)
        dcl = np.gradient(f["U_cl"], t, edge_order=2)
        dq = np.gradient(f["U_q"], t, edge_order=2)
        first = np.abs(du - f["W_dot"] - f["Q_dot"]).max()
        cl = np.abs(dcl - f["Q_cl_dot"] - f["E_R_dot"]).max()
        qs = np.abs(dq - f["Q_q_dot"] - f["W_dot"] + f["E_R_dot"]).max()
        return AuditReport(float(first), float(cl), float(qs), step)
    u, rate = [], []
    for i in range(len(t)):
        fl = fme_flows(traj.states[i], params, rates)
        u.append(fl.U)
        rate.append(fl.W_dot + fl.Q_dot)
    du = np.gradient(np.array(u), t, edge_order=2)
    return AuditReport(float(np.abs(du - np.array(rate)).max()), float("nan"),
                       float("nan"), step)


def sector_residuals(params, p1, s):
    """Analytic sector balances from the Bloch right-hand side (should vanish)."""
    f = obe_flow_arrays(params, p1, s)
    dp1, ds = bloch_rhs(params, p1, s)
    dcl = params.omega_qb * dp1
    dq = params.g * np.real(ds)
    return (np.abs(dcl - f["Q_cl_dot"] - f["E_R_dot"]),
            np.abs(dq - f["Q_q_dot"] - f["W_dot"] + f["E_R_dot"]))

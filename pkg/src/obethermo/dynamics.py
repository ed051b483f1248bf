"""Time evolution, steady states, regime checks and steady-state deviations."""
from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .bath import BathSpec, spectral_density
from .core import DensityMatrix2, from_bloch_views
from .errors import (DomainError, IntegrationError, NonUniqueSteadyStateError,
                     PositivityError)
from .generators import TRACE_ROW, fme_rates, vec

TRACE_DRIFT_LIMIT = 1e-9
POSITIVITY_TOL = 1e-10


def _to_states(ys):
    """Rows of column-stacked vectors to an (n, 2, 2) array."""
    return np.ascontiguousarray(ys.reshape(-1, 2, 2).transpose(0, 2, 1))


@dataclass(frozen=True)
class Trajectory:
    """States on a time grid, all in the rotating frame."""

    times: np.ndarray
    states: np.ndarray
    kind: str
    method: str
    step: float = None
    max_positivity_violation: float = 0.0
    max_trace_drift: float = 0.0
    max_hermiticity_error: float = 0.0

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i):
        return DensityMatrix2(self.states[i], frame="rotating", t=self.times[i])

    @property
    def p1(self):
        return self.states[:, 1, 1].real.copy()

    @property
    def s(self):
        return self.states[:, 1, 0].copy()

    @property
    def final(self):
        return self[len(self) - 1]


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("time grid must be a non-empty 1-d sequence")
    if np.any(np.diff(t) <= 0):
        raise DomainError("time grid must be strictly increasing")
    return t


def _fixed_step(m, y0, t, h):
    dt = np.diff(t)
    if dt.size == 0:
        return y0[None, :]
    k = np.maximum(1, np.ceil(dt / h - 1e-9)).astype(int)
    uniform = np.all(k == k[0]) and np.allclose(dt, dt[0], rtol=1e-12, atol=0)
    if uniform:
        return kernels.rk4_linear(m, y0, dt[0] / k[0], int(k[0] * dt.size), int(k[0]))
    out = np.empty((t.size, y0.size), dtype=complex)
    out[0] = y0
    y = y0
    for i, (d, n) in enumerate(zip(dt, k)):
        y = kernels.rk4_linear(m, y, d / n, int(n), int(n))[-1]
        out[i + 1] = y
    return out


def evolve(generator, rho0, t_grid, fixed_step=None, rtol=1e-10, atol=1e-12):
    """Integrate d rho/dt = L[rho] and return the states on ``t_grid``.

    The default is the adaptive DOP853 scheme; ``fixed_step`` switches to
    classic RK4 with steps no longer than the given value, each grid
    interval being split into equal steps.
    """
    if not isinstance(rho0, DensityMatrix2):
        rho0 = DensityMatrix2(rho0)
    rho0.require_frame("rotating")
    t = _check_grid(t_grid)
    m = np.ascontiguousarray(generator.matrix, dtype=complex)
    y0 = vec(rho0.matrix)

    if fixed_step is not None:
        if not fixed_step > 0:
            raise DomainError("fixed step must be positive")
        ys = _fixed_step(m, y0, t, float(fixed_step))
        method = f"rk4[{kernels.BACKEND}]"
    elif t.size == 1:
        ys = y0[None, :]
        method = "DOP853"
    else:
        sol = solve_ivp(lambda _, y: m @ y, (t[0], t[-1]), y0, method="DOP853",
                        t_eval=t, rtol=rtol, atol=atol)
        if sol.status != 0:
            raise IntegrationError(f"adaptive integration failed: {sol.message}")
        ys = sol.y.T
        method = "DOP853"

    states = _to_states(ys)
    trace = np.abs(np.trace(states, axis1=1, axis2=2) - 1).max()
    herm = np.abs(states - states.conj().transpose(0, 2, 1)).max()
    # the exact flow is Hermitian; keep the recorded error, store the Hermitian part
    states = 0.5 * (states + states.conj().transpose(0, 2, 1))
    lam = np.linalg.eigvalsh(states)[:, 0]
    neg = max(0.0, -lam.min())
    if trace > TRACE_DRIFT_LIMIT:
        raise IntegrationError(f"trace drifted by {trace:.3e}")
    if herm > TRACE_DRIFT_LIMIT:
        raise IntegrationError(f"Hermiticity lost by {herm:.3e}")
    if neg > POSITIVITY_TOL:
        raise PositivityError(f"eigenvalue {-neg:.3e} below positivity tolerance")
    return Trajectory(t, states, generator.kind, method, fixed_step, neg, trace, herm)


def bloch_rhs(params, p1, s):
    """Right-hand side of the rotating-frame Bloch equations."""
    n, gam = params.nbar, params.gamma
    s = np.asarray(s, dtype=complex)
    p1 = np.asarray(p1, dtype=float)
    dp1 = -gam * ((2 * n + 1) * p1 - n) - params.g * s.imag
    ds = -(1j * params.delta + 0.5 * gam * (2 * n + 1)) * s + 1j * params.g * (p1 - 0.5)
    return dp1, ds


def steady_state_numeric(generator):
    """Unique fixed point of a Liouvillian."""
    gam = generator.params.gamma
    if gam == 0:
        raise NonUniqueSteadyStateError("gamma = 0: unitary dynamics has no unique fixed point")
    m = generator.matrix
    w = np.linalg.eigvals(m)
    kernel = int(np.sum(np.abs(w) <= 1e-10 * gam))
    if kernel != 1:
        raise NonUniqueSteadyStateError(f"kernel dimension {kernel}, expected 1")
    # swap one population row for the trace functional and solve
    a = m.copy()
    a[0] = TRACE_ROW
    rhs = np.zeros(4, dtype=complex)
    rhs[0] = 1.0
    x = np.linalg.solve(a, rhs)
    rho = x.reshape(2, 2, order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return DensityMatrix2(rho)


def steady_state_obe_analytic(params):
    """Closed-form Bloch steady state (p1, s)."""
    if not params.gamma > 0:
        raise DomainError("steady state needs gamma > 0")
    n, g, d, gam = params.nbar, params.g, params.delta, params.gamma
    if g == 0:
        return n / (2 * n + 1), 0j
    den = 1 + 2 * d ** 2 / g ** 2 + gam ** 2 * (2 * n + 1) ** 2 / (2 * g ** 2)
    p1 = (n + 0.5 / den) / (2 * n + 1)
    s = -(d / (g * (2 * n + 1)) + 0.5j * gam / g) / den
    return p1, complex(s)


def steady_state_fme_analytic(params, bath=None, flat_occupation=False):
    """Floquet steady state (p1, s, P+), diagonal in the dressed basis."""
    rates = fme_rates(params, bath, flat_occupation=flat_occupation)
    pp = rates.p_plus_steady()
    omega = params.rabi
    p1 = 0.5 + params.delta / (2 * omega) * (2 * pp - 1)
    s = params.g / (2 * omega) * (2 * pp - 1)
    return p1, complex(s, 0.0), pp


def deviation_first_order(params):
    """First-order estimates of (dP1, dRe s, dIm s), Floquet minus Bloch.

    Leading terms in delta/omega_L at fixed omega_L/T, plus the leading
    gamma/g term of the imaginary part.
    """
    g, d, gam = params.g, params.delta, params.gamma
    beta = params.beta_L
    den = g ** 2 + 2 * d ** 2
    if den == 0:
        return 0.0, 0.0, math.inf if gam > 0 else 0.0
    thermal = beta / (1 + math.cosh(beta)) if beta < 700 else 0.0
    common = -(d / params.omega_L) * thermal * d * g ** 2 / den ** 2
    return common * d, common * g, 0.5 * gam * g / den


@dataclass(frozen=True)
class RegimeReport:
    """Margins for the Bloch and Floquet validity conditions.

    A margin is min(fast scales) / max(slow scales); a regime is valid when
    its margin is at least ``threshold``.
    """

    obe_valid: bool
    fme_valid: bool
    obe_margin: float
    fme_margin: float
    fme_thermal_margin: float
    gamma_max: float
    tau_c: float
    dt_obe: tuple
    dt_fme: tuple
    threshold: float

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def validity_check(params, bath=None, threshold=10.0):
    """Check the Bloch and Floquet regimes of validity.

    ``gamma_max`` is the largest transition rate G/2 over the Fourier
    frequencies +-omega_L, +-(omega_L +- Omega). The Floquet regime also
    reports Omega/(gamma nbar), the condition that matters at high
    temperature.
    """
    if bath is None:
        bath = BathSpec.flat(params.gamma, params.temperature)
    omega = params.rabi
    fast = [1.0 / bath.tau_c, params.omega_L, params.omega_qb]
    slow = [omega, params.gamma, params.gamma * params.nbar]
    max_slow = max(slow)
    obe_margin = min(fast) / max_slow if max_slow > 0 else math.inf

    rates = []
    for nu in (params.omega_L, params.omega_L + omega, params.omega_L - omega):
        for sign in (1, -1):
            if nu == 0:
                continue
            try:
                rates.append(0.5 * spectral_density(sign * nu, bath))
            except DomainError:
                continue
    gamma_max = max(rates) if rates else 0.0
    fme_fast = min(fast + [omega])
    fme_margin = fme_fast / gamma_max if gamma_max > 0 else math.inf
    gn = params.gamma * params.nbar
    thermal_margin = omega / gn if gn > 0 else math.inf
    if omega >= params.omega_L:
        fme_margin = 0.0
    return RegimeReport(
        obe_valid=bool(obe_margin >= threshold),
        fme_valid=bool(fme_margin >= threshold),
        obe_margin=obe_margin, fme_margin=fme_margin,
        fme_thermal_margin=thermal_margin, gamma_max=gamma_max, tau_c=bath.tau_c,
        dt_obe=(1.0 / min(fast), 1.0 / max_slow if max_slow > 0 else math.inf),
        dt_fme=(1.0 / fme_fast if fme_fast > 0 else math.inf,
                1.0 / gamma_max if gamma_max > 0 else math.inf),
        threshold=threshold)


def initial_state(kind, params, rng=None):
    """Named initial states: thermal, ground, excited, plus_x or random."""
    if kind == "thermal":
        n = params.nbar
        return from_bloch_views(n / (2 * n + 1), 0.0)
    if kind == "ground":
        return from_bloch_views(0.0, 0.0)
    if kind == "excited":
        return from_bloch_views(1.0, 0.0)
    if kind == "plus_x":
        return from_bloch_views(0.5, 0.5)
    if kind == "random":
        rng = np.random.default_rng() if rng is None else rng
        v = rng.normal(size=3)
        v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
        return from_bloch_views(0.5 * (1 + v[2]), 0.5 * (v[0] + 1j * v[1]))
    raise DomainError(f"unknown initial state {kind!r}")

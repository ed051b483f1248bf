"""Parameters, qubit states, dressed basis and Fourier components.

Conventions used everywhere in the package:

* hbar = k_B = 1, energies are angular frequencies.
* Bare basis index 0 is the ground state |0>, index 1 the excited state |1>.
  ``SIGMA_MINUS = |0><1|`` and ``SIGMA_Z = diag(-1, 1)``.
* The rotating frame turns at the drive frequency; there the effective
  Hamiltonian is ``(delta/2) sz + (g/2) sx``.
* The coherence ``s`` is the matrix element <1|rho|0>.
"""
from dataclasses import dataclass, field, replace
import math

import numpy as np

from .errors import DegenerateBasisError, DomainError, FrameError, StateError

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.T.copy()
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

FRAMES = ("rotating", "lab")

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10


def thermal_occupation(nu, temperature):
    """Bose-Einstein occupation 1/(exp(nu/T) - 1)."""
    if not nu > 0:
        raise DomainError(f"frequency must be positive, got {nu}")
    if not temperature > 0:
        raise DomainError(f"temperature must be positive, got {temperature}")
    x = nu / temperature
    if x > 700.0:
        # expm1 overflows past ~709; the tail is exp(-x) to double precision
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def rabi_frequency(g, delta):
    return math.hypot(g, delta)


@dataclass(frozen=True)
class SystemParams:
    """Drive, qubit and bath scalars.

    ``beta_L`` is the dimensionless inverse temperature omega_L / T.
    Everything else is derived and never set by hand.
    """

    omega_L: float
    delta: float
    g: float
    gamma: float
    beta_L: float

    def __post_init__(self):
        for name in ("omega_L", "delta", "g", "gamma", "beta_L"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, float(v))
        if self.omega_L <= 0:
            raise DomainError("omega_L must be positive")
        if self.g < 0:
            raise DomainError("g must be nonnegative")
        if self.gamma < 0:
            raise DomainError("gamma must be nonnegative")
        if self.beta_L <= 0:
            raise DomainError("beta_L must be positive (T > 0)")
        if self.omega_qb <= 0:
            raise DomainError("qubit frequency omega_L + delta must be positive")

    @property
    def omega_qb(self):
        return self.omega_L + self.delta

    @property
    def temperature(self):
        return self.omega_L / self.beta_L

    @property
    def nbar(self):
        return thermal_occupation(self.omega_qb, self.temperature)

    @property
    def rabi(self):
        return rabi_frequency(self.g, self.delta)

    @classmethod
    def from_ratios(cls, g_over_gamma, delta_over_gamma, gamma_over_omega_L,
                    beta_L, omega_L=1.0):
        """Build from the dimensionless ratios used in figure captions."""
        gamma = gamma_over_omega_L * omega_L
        return cls(omega_L=omega_L, delta=delta_over_gamma * gamma,
                   g=g_over_gamma * gamma, gamma=gamma, beta_L=beta_L)

    def replace(self, **changes):
        return replace(self, **changes)


def effective_hamiltonian(params):
    """Rotating-frame Hamiltonian (delta/2) sz + (g/2) sx."""
    return 0.5 * params.delta * SIGMA_Z + 0.5 * params.g * SIGMA_X


def qubit_hamiltonian(params):
    return 0.5 * params.omega_qb * SIGMA_Z


def drive_rotating(params):
    """Drive term in the rotating frame, (g/2) sx."""
    return 0.5 * params.g * SIGMA_X


@dataclass(frozen=True)
class DensityMatrix2:
    """Validated 2x2 density matrix with a frame tag and a time tag."""

    matrix: np.ndarray
    frame: str = "rotating"
    t: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise StateError(f"expected a 2x2 matrix, got shape {m.shape}")
        if self.frame not in FRAMES:
            raise FrameError(f"unknown frame {self.frame!r}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise StateError(f"not Hermitian (deviation {herm:.3e})")
        tr = abs(np.trace(m) - 1)
        if tr > TRACE_TOL:
            raise StateError(f"trace deviates from 1 by {tr:.3e}")
        lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if lam[0] < -POSITIVITY_TOL:
            raise StateError(f"negative eigenvalue {lam[0]:.3e}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "t", float(self.t))

    @property
    def p1(self):
        return float(self.matrix[1, 1].real)

    @property
    def s(self):
        return complex(self.matrix[1, 0])

    def to_frame(self, frame, omega_L):
        """Return the same state in the other frame (phase rotation of s)."""
        if frame == self.frame:
            return self
        phase = np.exp(-1j * omega_L * self.t) if frame == "lab" else np.exp(1j * omega_L * self.t)
        m = self.matrix.copy()
        m[1, 0] *= phase
        m[0, 1] = np.conj(m[1, 0])
        return DensityMatrix2(m, frame=frame, t=self.t)

    def require_frame(self, frame="rotating"):
        if self.frame != frame:
            raise FrameError(f"operation needs a {frame}-frame state, got {self.frame}")
        return self


def as_matrix(rho):
    """Underlying array of a DensityMatrix2 or a plain array."""
    if isinstance(rho, DensityMatrix2):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def bloch_views(rho):
    """Return (p1, s) of a state."""
    m = as_matrix(rho)
    return float(m[1, 1].real), complex(m[1, 0])


def from_bloch_views(p1, s, frame="rotating", t=0.0):
    """Inverse of bloch_views; rejects points outside the Bloch ball."""
    p1 = float(p1)
    s = complex(s)
    if not 0.0 <= p1 <= 1.0:
        raise StateError(f"population {p1} outside [0, 1]")
    if abs(s) ** 2 > p1 * (1 - p1) + 1e-12:
        raise StateError("coherence violates |s|^2 <= p1 (1 - p1)")
    m = np.array([[1 - p1, np.conj(s)], [s, p1]], dtype=complex)
    return DensityMatrix2(m, frame=frame, t=t)


def thermal_state(params):
    """Gibbs state of the bare qubit at the bath temperature."""
    n = params.nbar
    return from_bloch_views(n / (2 * n + 1), 0.0)


@dataclass(frozen=True)
class DressedBasis:
    """Eigenbasis of the rotating-frame Hamiltonian."""

    plus: np.ndarray
    minus: np.ndarray
    rabi: float
    hamiltonian: np.ndarray = field(repr=False)

    @property
    def unitary(self):
        """Columns are |+> and |-> in the bare basis."""
        return np.column_stack([self.plus, self.minus])

    @property
    def sigma_z(self):
        return np.outer(self.plus, self.plus.conj()) - np.outer(self.minus, self.minus.conj())

    @property
    def sigma_plus(self):
        return np.outer(self.plus, self.minus.conj())

    @property
    def sigma_minus(self):
        return np.outer(self.minus, self.plus.conj())

    def populations(self, rho):
        """(P+, P-) of a state."""
        m = as_matrix(rho)
        pp = np.real(self.plus.conj() @ m @ self.plus)
        pm = np.real(self.minus.conj() @ m @ self.minus)
        return float(pp), float(pm)

    def coherence(self, rho):
        """<+|rho|->."""
        m = as_matrix(rho)
        return complex(self.plus.conj() @ m @ self.minus)

    def to_dressed(self, m):
        v = self.unitary
        return v.conj().T @ as_matrix(m) @ v


def dressed_basis(params):
    """Dressed states with the sign convention |-> = -a|1> + b|0>."""
    omega = params.rabi
    if omega == 0:
        raise DegenerateBasisError("g = delta = 0 leaves the dressed basis undefined")
    d = params.delta
    a = math.sqrt(max(omega + d, 0.0) / (2 * omega))
    b = math.sqrt(max(omega - d, 0.0) / (2 * omega))
    plus = np.array([b, a], dtype=complex)
    minus = np.array([a, -b], dtype=complex)
    return DressedBasis(plus, minus, omega, effective_hamiltonian(params))


@dataclass(frozen=True)
class FourierComponents:
    """Components sigma_l(w) of the interaction-picture jump operators.

    ``plus[k]`` and ``minus[k]`` hold sigma_+(w) and sigma_-(w) with
    ``w = k * rabi`` for k in (-1, 0, 1).
    """

    plus: dict
    minus: dict
    rabi: float

    def items(self):
        """Yield (l, w, matrix) with l = +1 for sigma_+ and -1 for sigma_-."""
        for k in (-1, 0, 1):
            yield 1, k * self.rabi, self.plus[k]
        for k in (-1, 0, 1):
            yield -1, k * self.rabi, self.minus[k]

    def reconstruct(self, t, sign=1):
        """sum_w sigma(w) e^{i w t}, the rotating-frame interaction picture."""
        comps = self.plus if sign > 0 else self.minus
        return sum(comps[k] * np.exp(1j * k * self.rabi * t) for k in (-1, 0, 1))


def fourier_components(params):
    basis = dressed_basis(params)
    omega, d = basis.rabi, params.delta
    sz, sp, sm = basis.sigma_z, basis.sigma_plus, basis.sigma_minus
    zero = params.g / (2 * omega) * sz
    plus = {0: zero,
            1: (omega + d) / (2 * omega) * sp,
            -1: -(omega - d) / (2 * omega) * sm}
    minus = {k: plus[-k].conj().T for k in (-1, 0, 1)}
    return FourierComponents(plus, minus, omega)

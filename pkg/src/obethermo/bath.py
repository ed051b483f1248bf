"""Bath spectral models, the thermal spectral density and the frequency shift."""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy import integrate

from .core import thermal_occupation
from .errors import DomainError, QuadratureError


@dataclass(frozen=True)
class BathSpec:
    """Zero-temperature spectral function Gamma(nu) plus a temperature.

    ``gamma_fn`` maps a positive frequency to a nonnegative rate.
    ``low_freq_slope`` is lim Gamma(nu)/nu as nu -> 0 when that limit is
    finite (ohmic-like baths); it fixes G(0). ``modes`` lists discrete
    modes as (frequency, coupling**2) pairs, used only by the shift.
    """

    gamma_fn: object
    temperature: float
    tau_c: float
    name: str = "custom"
    low_freq_slope: float = None
    modes: tuple = field(default=())

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError("bath temperature must be positive")

    def gamma(self, nu):
        val = float(self.gamma_fn(nu))
        if val < 0:
            raise DomainError(f"Gamma({nu}) = {val} is negative")
        return val

    def occupation(self, nu):
        return thermal_occupation(nu, self.temperature)

    def density(self, nu):
        return spectral_density(nu, self)

    @classmethod
    def flat(cls, gamma, temperature):
        """Gamma(nu) = gamma at every frequency."""
        return cls(lambda nu: gamma, temperature, tau_c=1.0 / temperature,
                   name="flat")

    @classmethod
    def ohmic(cls, gamma_ref, omega_ref, cutoff, temperature):
        """Gamma(nu) proportional to nu exp(-nu/cutoff), equal to gamma_ref at omega_ref."""
        norm = gamma_ref / (omega_ref * math.exp(-omega_ref / cutoff))
        return cls(lambda nu: norm * nu * math.exp(-nu / cutoff), temperature,
                   tau_c=max(1.0 / cutoff, 1.0 / temperature), name="ohmic",
                   low_freq_slope=norm)

    @classmethod
    def lorentzian(cls, peak, center, width, temperature):
        """Single Lorentzian line of height ``peak`` at ``center``."""
        def fn(nu):
            return peak * width ** 2 / ((nu - center) ** 2 + width ** 2)
        return cls(fn, temperature, tau_c=max(1.0 / width, 1.0 / temperature),
                   name="lorentzian", low_freq_slope=None)

    @classmethod
    def tabulated(cls, nu, gamma, temperature):
        """Linear interpolation of a (nu, Gamma) table, zero outside it."""
        nu = np.asarray(nu, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        order = np.argsort(nu)
        nu, gamma = nu[order], gamma[order]
        if np.any(gamma < 0):
            raise DomainError("tabulated Gamma has negative entries")

        def fn(x):
            return float(np.interp(x, nu, gamma, left=0.0, right=0.0))
        span = nu[-1] - nu[0] if nu.size > 1 else temperature
        return cls(fn, temperature, tau_c=max(1.0 / span, 1.0 / temperature),
                   name="tabulated")

    @classmethod
    def discrete(cls, modes, temperature):
        """Discrete modes only (no continuum), given as (frequency, coupling**2)."""
        return cls(lambda nu: 0.0, temperature, tau_c=1.0 / temperature,
                   name="discrete", modes=tuple((float(w), float(c)) for w, c in modes))

    @classmethod
    def load_table(cls, path, temperature):
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 2:
            raise DomainError(f"{path}: expected two columns (nu, Gamma)")
        return cls.tabulated(data[:, 0], data[:, 1], temperature)


def spectral_density(nu, bath):
    """G(nu) = 2 Gamma(nu)(N+1) for nu > 0 and 2 Gamma(-nu) N(-nu) for nu < 0."""
    if isinstance(bath, FlatBand):
        return bath.density(nu)
    if nu > 0:
        return 2.0 * bath.gamma(nu) * (bath.occupation(nu) + 1.0)
    if nu < 0:
        return 2.0 * bath.gamma(-nu) * bath.occupation(-nu)
    if bath.low_freq_slope is None:
        raise DomainError("G(0) needs a finite low-frequency slope of Gamma")
    return 2.0 * bath.low_freq_slope * bath.temperature


def kms_ratio(nu, bath):
    """G(-nu)/G(nu)."""
    if nu == 0:
        return 1.0
    g_pos = spectral_density(nu, bath)
    if g_pos == 0:
        raise DomainError(f"G({nu}) = 0, ratio undefined")
    return spectral_density(-nu, bath) / g_pos


@dataclass(frozen=True)
class FlatBand:
    """Two-valued approximation of G near +-omega_L.

    Equal to 2 gamma (nbar + 1) on [omega_L - Omega, omega_L + Omega] and
    2 gamma nbar on the mirror interval; undefined elsewhere.
    """

    params: object

    def density(self, nu):
        p = self.params
        lo, hi = p.omega_L - p.rabi, p.omega_L + p.rabi
        tol = 1e-12 * p.omega_L
        if lo - tol <= nu <= hi + tol:
            return 2.0 * p.gamma * (p.nbar + 1.0)
        if lo - tol <= -nu <= hi + tol:
            return 2.0 * p.gamma * p.nbar
        raise DomainError(f"flat band not defined at nu = {nu}")


def _pv_integral(f, pole, scale):
    """Principal value of int_0^inf f(w)/(pole - w) dw for pole > 0.

    The singular part is removed on the interval [0, 2 pole], which is
    symmetric about the pole, so the subtracted constant integrates to zero.
    """
    f0 = f(pole)
    eps = 1e-7 * pole

    def near(w):
        if abs(w - pole) < eps:
            return -(f(pole + eps) - f(pole - eps)) / (2 * eps)
        return (f(w) - f0) / (pole - w)

    opts = dict(epsabs=0.0, epsrel=1e-11, limit=400)
    a, ea = integrate.quad(near, 0.0, 2 * pole, points=[pole], **opts)
    b, eb = integrate.quad(lambda w: f(w) / (pole - w), 2 * pole, np.inf, **opts)
    val, err = a + b, ea + eb
    if not np.isfinite(val) or err > 1e-8 * max(abs(val), scale):
        raise QuadratureError(
            f"principal-value integral did not converge (value {val:.6e}, error {err:.2e})",
            estimate=val, error=err)
    return val, err


def shift_function(nu, bath):
    """D(nu) = 2 P int Gamma(w)[N(w)/(nu - w) + (N(w)+1)/(nu + w)] dw plus discrete modes."""
    if nu == 0:
        raise DomainError("D(0) is not needed and not defined here")

    def occ(w):
        return bath.occupation(w) if w > 0 else 0.0

    total = 0.0
    for w_k, c2 in bath.modes:
        if w_k == abs(nu):
            raise DomainError(f"nu = {nu} sits on a discrete mode")
        n = occ(w_k)
        total += 2.0 * c2 * (n / (nu - w_k) + (n + 1.0) / (nu + w_k))

    if bath.name == "discrete":
        return total

    # the pole sits in the N term for nu > 0 and in the N + 1 term for nu < 0
    pole = abs(nu)
    if nu > 0:
        def singular(w):
            return bath.gamma(w) * occ(w)

        def regular(w):
            return bath.gamma(w) * (occ(w) + 1.0) / (nu + w)
        sign = 1.0
    else:
        def singular(w):
            return bath.gamma(w) * (occ(w) + 1.0)

        def regular(w):
            return bath.gamma(w) * occ(w) / (nu - w)
        sign = -1.0

    scale = max(bath.gamma(pole), 1e-300)
    pv, _ = _pv_integral(singular, pole, scale)
    reg, err = integrate.quad(regular, 0.0, np.inf, epsabs=0.0, epsrel=1e-11, limit=400)
    if not np.isfinite(reg) or err > 1e-8 * max(abs(reg), scale):
        raise QuadratureError("regular part of D(nu) did not converge",
                              estimate=reg, error=err)
    # N/(nu - w) with nu = pole; (N+1)/(nu + w) = -(N+1)/(pole - w) for nu = -pole
    return total + 2.0 * (sign * pv + reg)


def lamb_light_shift(bath, omega_L):
    """delta_sh = (D(omega_L) - D(-omega_L))/2."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            return 0.5 * (shift_function(omega_L, bath) - shift_function(-omega_L, bath))
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"shift quadrature failed: {exc}") from exc

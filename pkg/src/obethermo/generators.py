"""Liouvillian superoperators on vectorized 2x2 density matrices.

Vectorization stacks columns (``order='F'``): vec(A X B) = (B^T kron A) vec(X).
For a 2x2 matrix the vector is (rho00, rho10, rho01, rho11).
"""
from dataclasses import dataclass, field

import numpy as np

from .bath import BathSpec, spectral_density
from .core import (IDENTITY, SIGMA_MINUS, SIGMA_PLUS, dressed_basis,
                   effective_hamiltonian, fourier_components)
from .errors import OutOfModelError

TRACE_ROW = np.array([1, 0, 0, 1], dtype=complex)


def vec(m):
    return np.asarray(m, dtype=complex).reshape(-1, order="F")


def unvec(v):
    return np.asarray(v, dtype=complex).reshape(2, 2, order="F")


def spre(a):
    return np.kron(IDENTITY, a)


def spost(b):
    return np.kron(b.T, IDENTITY)


def sprepost(a, b):
    """Superoperator X -> a X b."""
    return np.kron(b.T, a)


def hamiltonian_superop(h):
    return -1j * (spre(h) - spost(h))


def lindblad_dissipator(x):
    """D_x[rho] = x rho x^dag - {x^dag x, rho}/2."""
    xd = x.conj().T
    xdx = xd @ x
    return sprepost(x, xd) - 0.5 * (spre(xdx) + spost(xdx))


@dataclass(frozen=True)
class Liouvillian:
    """Rotating-frame generator with its Hamiltonian and dissipative parts.

    ``channels`` lists (rate, jump operator) pairs when the dissipator is
    of Lindblad form. ``kossakowski`` holds the eigenvalues of the
    coefficient matrix for generators built from a frequency-resolved bath.
    """

    matrix: np.ndarray
    hamiltonian: np.ndarray
    dissipator: np.ndarray
    kind: str
    params: object
    channels: tuple = ()
    kossakowski: np.ndarray = field(default=None, repr=False)
    frame: str = "rotating"

    def apply(self, rho):
        m = rho.matrix if hasattr(rho, "matrix") and not isinstance(rho, np.ndarray) else rho
        return unvec(self.matrix @ vec(m))

    def apply_dissipator(self, rho):
        m = rho.matrix if hasattr(rho, "matrix") and not isinstance(rho, np.ndarray) else rho
        return unvec(self.dissipator @ vec(m))

    def in_basis(self, u):
        """Matrix of the generator for states written as u^dag rho u."""
        t = np.kron(u.T, u.conj().T)
        return t @ self.matrix @ np.linalg.inv(t)


def _assemble(params, channels, kind, hamiltonian=None):
    h = effective_hamiltonian(params) if hamiltonian is None else hamiltonian
    diss = np.zeros((4, 4), dtype=complex)
    for rate, op in channels:
        diss += rate * lindblad_dissipator(op)
    return Liouvillian(hamiltonian_superop(h) + diss, h, diss, kind, params,
                       channels=tuple(channels))


def obe_generator(params):
    """Bloch generator: gamma nbar D[s+] + gamma (nbar+1) D[s-] plus H_eff."""
    n = params.nbar
    channels = ((params.gamma * (n + 1.0), SIGMA_MINUS),
                (params.gamma * n, SIGMA_PLUS))
    return _assemble(params, channels, "obe")


@dataclass(frozen=True)
class FmeRates:
    """Dressed-basis jump rates of the three Floquet channels."""

    down0: float
    up0: float
    down1: float
    up1: float
    down2: float
    up2: float
    omega_L: float
    omega_1: float
    omega_2: float

    def as_tuple(self):
        return (self.down0, self.up0, self.down1, self.up1, self.down2, self.up2)

    @property
    def rabi(self):
        return 0.5 * (self.omega_1 - self.omega_2)

    def p_plus_steady(self):
        """Stationary population of |+>."""
        num = self.up1 + self.up2
        den = self.up1 + self.down1 + self.up2 + self.down2
        return num / den


def fme_rates(params, bath=None, flat_occupation=False):
    """Rates at the Mollow frequencies omega_L, omega_L + Omega, omega_L - Omega.

    With ``flat_occupation`` every channel uses N(omega_qb) instead of the
    occupation at its own frequency, the approximation under which the
    coarse-grained Bloch generator coincides with this one.
    """
    omega = params.rabi
    d = params.delta
    if omega == 0:
        from .errors import DegenerateBasisError
        raise DegenerateBasisError("FME needs a nonzero Rabi frequency")
    w0, w1, w2 = params.omega_L, params.omega_L + omega, params.omega_L - omega
    if w2 <= 0:
        raise OutOfModelError(f"omega_L - Omega = {w2} <= 0: drive too strong for the FME")
    if bath is None:
        bath = BathSpec.flat(params.gamma, params.temperature)

    def occ(w):
        return params.nbar if flat_occupation else bath.occupation(w)

    c0 = params.g ** 2 / (4 * omega ** 2)
    c1 = (omega + d) ** 2 / (4 * omega ** 2)
    c2 = (omega - d) ** 2 / (4 * omega ** 2)
    g0, g1, g2 = bath.gamma(w0), bath.gamma(w1), bath.gamma(w2)
    n0, n1, n2 = occ(w0), occ(w1), occ(w2)
    return FmeRates(
        down0=g0 * c0 * (n0 + 1), up0=g0 * c0 * n0,
        down1=g1 * c1 * (n1 + 1), up1=g1 * c1 * n1,
        # channel 2 is inverted: |-> to |+> goes with emission into the bath
        down2=g2 * c2 * n2, up2=g2 * c2 * (n2 + 1),
        omega_L=w0, omega_1=w1, omega_2=w2)


def fme_channels(rates, params):
    """(rate, operator) lists of the three Floquet channels, keyed 0, 1, 2."""
    basis = dressed_basis(params)
    sz, sp, sm = basis.sigma_z, basis.sigma_plus, basis.sigma_minus
    return {
        0: ((rates.down0 + rates.up0, sz),),
        1: ((rates.down1, sm), (rates.up1, sp)),
        2: ((rates.down2, sm), (rates.up2, sp)),
    }


def channel_dissipator(channels):
    diss = np.zeros((4, 4), dtype=complex)
    for rate, op in channels:
        diss += rate * lindblad_dissipator(op)
    return diss


def fme_generator(rates, params):
    """Floquet generator: dephasing on D[Sz] plus two relaxation channels."""
    chans = fme_channels(rates, params)
    flat = chans[0] + chans[1] + chans[2]
    return _assemble(params, flat, "fme")


def gbe_generator(params, bath):
    """Generator keeping the bath density at each Fourier frequency.

    ``bath`` is anything exposing ``density(nu)``. The component of sigma_l
    at rotating-frame frequency w oscillates at l omega_L + w in the lab and
    is weighted by G(-(l omega_L + w))/2. With a ``FlatBand`` the result is
    the Bloch generator. The dissipator is not of Lindblad form in general;
    the eigenvalues of its coefficient matrix are stored in ``kossakowski``.
    """
    if params.rabi >= params.omega_L:
        raise OutOfModelError("GBE needs Omega < omega_L")
    h = effective_hamiltonian(params)
    if params.rabi == 0:
        # no drive and no detuning: only the w = 0 component exists
        comps = {1: {0: SIGMA_PLUS}, -1: {0: SIGMA_MINUS}}
        freqs = (0,)
        rabi = 0.0
    else:
        fc = fourier_components(params)
        comps = {1: fc.plus, -1: fc.minus}
        freqs = (-1, 0, 1)
        rabi = fc.rabi

    w_L = params.omega_L
    rate = {(l, k): 0.5 * spectral_density(-(l * w_L + k * rabi), bath)
            for l in (1, -1) for k in freqs}
    diss = np.zeros((4, 4), dtype=complex)
    for l, full in ((1, SIGMA_MINUS), (-1, SIGMA_PLUS)):
        # sum_w r(w) [s_l(w) rho s_l^dag - s_l^dag s_l(w) rho] + h.c.
        b = sum(rate[l, k] * comps[l][k] for k in freqs)
        bd = b.conj().T
        diss += (sprepost(b, full) + sprepost(full.conj().T, bd)
                 - spre(full @ b) - spost(bd @ full.conj().T))
    diss *= 0.5

    kos = []
    for l in (1, -1):
        r = np.array([rate[l, k] for k in freqs])
        kos.extend(np.linalg.eigvalsh(0.5 * (r[:, None] + r[None, :])))
    return Liouvillian(hamiltonian_superop(h) + diss, h, diss, "gbe", params,
                       kossakowski=np.sort(np.array(kos)))


def secular_average(liouvillian, nodes=8):
    """Average the dissipator over one Rabi period in the picture of H_eff.

    The averaged dissipator of a Bloch-type generator oscillates at
    0, +-Omega, +-2 Omega; trapezoid quadrature on ``nodes`` >= 3 equally
    spaced points of a period integrates those harmonics exactly.
    """
    params = liouvillian.params
    basis = dressed_basis(params)
    if nodes < 3:
        raise ValueError("need at least 3 nodes to resolve the 2 Omega harmonic")
    h = liouvillian.hamiltonian
    evals, evecs = np.linalg.eigh(h)
    period = 2 * np.pi / basis.rabi
    acc = np.zeros((4, 4), dtype=complex)
    for t in np.arange(nodes) * period / nodes:
        u = evecs @ np.diag(np.exp(-1j * evals * t)) @ evecs.conj().T
        fwd = np.kron(u.conj(), u)          # X -> u X u^dag
        back = np.kron(u.T, u.conj().T)     # X -> u^dag X u
        acc += back @ liouvillian.dissipator @ fwd
    return acc / nodes


def coarse_grain_obe(params, nodes=8):
    """Period average of the Bloch dissipator, a Floquet-type generator."""
    dressed_basis(params)
    obe = obe_generator(params)
    diss = secular_average(obe, nodes)
    return Liouvillian(hamiltonian_superop(obe.hamiltonian) + diss, obe.hamiltonian,
                       diss, "coarse-grained", params,
                       channels=coarse_grained_channels(params))


def coarse_grained_channels(params):
    """Closed-form channels of the period-averaged Bloch dissipator."""
    basis = dressed_basis(params)
    omega, d, n, gam = basis.rabi, params.delta, params.nbar, params.gamma
    c_plus = (omega + d) ** 2 / (4 * omega ** 2)
    c_minus = (omega - d) ** 2 / (4 * omega ** 2)
    c_zero = params.g ** 2 / (4 * omega ** 2)
    sz, sp, sm = basis.sigma_z, basis.sigma_plus, basis.sigma_minus
    return ((gam * (c_plus * (n + 1) + c_minus * n), sm),
            (gam * (c_plus * n + c_minus * (n + 1)), sp),
            (gam * c_zero * (2 * n + 1), sz))

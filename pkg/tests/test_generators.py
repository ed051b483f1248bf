import numpy as np
import pytest
from hypothesis import given, strategies as st

from obethermo import (BathSpec, FlatBand, SystemParams, bloch_rhs, coarse_grain_obe,
                       dressed_basis, fme_generator, fme_rates, gbe_generator, obe_generator,
                       secular_average)
from obethermo.errors import DegenerateBasisError, OutOfModelError
from obethermo.generators import (TRACE_ROW, channel_dissipator, coarse_grained_channels,
                                  fme_channels, sprepost, unvec, vec)

from strategies import params, states


def _random_matrix(rng):
    return rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))


def test_column_stacking_convention():
    rng = np.random.default_rng(0)
    a, x, b = (_random_matrix(rng) for _ in range(3))
    assert np.allclose(vec(a @ x @ b), sprepost(a, b) @ vec(x))
    assert np.allclose(vec(x), [x[0, 0], x[1, 0], x[0, 1], x[1, 1]])
    assert np.allclose(unvec(vec(x)), x)


def _all_generators(p):
    ohm = BathSpec.ohmic(p.gamma, p.omega_qb, 10.0, p.temperature)
    return [obe_generator(p), fme_generator(fme_rates(p), p),
            gbe_generator(p, FlatBand(p)), gbe_generator(p, ohm), coarse_grain_obe(p)]


@given(params(), states())
def test_trace_and_hermiticity_preserved(p, rho):
    for gen in _all_generators(p):
        assert np.abs(TRACE_ROW @ gen.matrix).max() <= 1e-12 * max(p.gamma, p.rabi)
        out = gen.apply(rho)
        assert np.abs(out - out.conj().T).max() <= 1e-12 * max(p.gamma, p.rabi)


@given(params(), states())
def test_bloch_generator_reproduces_bloch_equations(p, rho):
    out = obe_generator(p).apply(rho)
    dp1, ds = bloch_rhs(p, rho.p1, rho.s)
    scale = p.gamma * (2 * p.nbar + 1) + p.rabi
    assert out[1, 1].real == pytest.approx(float(dp1), abs=1e-13 * scale)
    assert abs(out[1, 0] - complex(ds)) <= 1e-13 * scale


def test_fme_rate_coefficients_frozen():
    # g = delta: Omega = sqrt2 delta, weights 1/8, (sqrt2 + 1)^2/8, (sqrt2 - 1)^2/8
    p = SystemParams(omega_L=1.0, delta=1e-3, g=1e-3, gamma=1e-4, beta_L=2.0)
    r = fme_rates(p, flat_occupation=True)
    n = p.nbar
    assert r.down0 == pytest.approx(1e-4 * 0.125 * (n + 1), rel=1e-13)
    assert r.down1 == pytest.approx(1e-4 * 0.7285533905932737 * (n + 1), rel=1e-13)
    assert r.up2 == pytest.approx(1e-4 * 0.021446609406726214 * (n + 1), rel=1e-13)
    assert r.omega_1 - r.omega_2 == pytest.approx(2 * np.sqrt(2) * 1e-3, rel=1e-12)
    assert r.down2 < r.up2


@given(params())
def test_fme_populations_decouple_in_dressed_basis(p):
    gen = fme_generator(fme_rates(p), p)
    m = gen.in_basis(dressed_basis(p).unitary)
    # dressed (++, --) populations sit at vector slots 0 and 3
    assert np.abs(m[np.ix_([0, 3], [1, 2])]).max() <= 1e-12 * p.gamma * (2 * p.nbar + 2)
    assert np.abs(m[np.ix_([1, 2], [0, 3])]).max() <= 1e-12 * p.gamma * (2 * p.nbar + 2)


@given(params(g=(-1, 2), delta=(-5, 5), beta=(-0.5, 1)))
def test_secular_average_of_gbe_is_floquet_with_exact_rates(p):
    bath = BathSpec.ohmic(p.gamma, p.omega_qb, 10.0, p.temperature)
    avg = secular_average(gbe_generator(p, bath))
    fme = channel_dissipator(sum(fme_channels(fme_rates(p, bath), p).values(), ()))
    assert np.abs(avg - fme).max() <= 1e-11 * p.gamma * (2 * p.nbar + 2)


@given(params())
def test_coarse_grained_channels_closed_form(p):
    numeric = secular_average(obe_generator(p))
    closed = channel_dissipator(coarse_grained_channels(p))
    assert np.abs(numeric - closed).max() <= 1e-12 * p.gamma * (2 * p.nbar + 2)


@given(params())
def test_flat_gbe_is_completely_positive(p):
    k = gbe_generator(p, FlatBand(p)).kossakowski
    assert k.min() >= -1e-12 * p.gamma * (p.nbar + 1)


def test_out_of_model_errors():
    strong = SystemParams(omega_L=1.0, delta=0.0, g=1.5, gamma=1e-4, beta_L=1.0)
    with pytest.raises(OutOfModelError):
        fme_rates(strong)
    with pytest.raises(OutOfModelError):
        gbe_generator(strong, BathSpec.flat(1e-4, 1.0))
    idle = SystemParams(omega_L=1.0, delta=0.0, g=0.0, gamma=1e-4, beta_L=1.0)
    with pytest.raises(DegenerateBasisError):
        fme_rates(idle)
    with pytest.raises(ValueError):
        secular_average(obe_generator(SystemParams.from_ratios(1, 1, 1e-4, 1)), nodes=2)


def test_gbe_without_drive_matches_bloch():
    p = SystemParams(omega_L=1.0, delta=0.0, g=0.0, gamma=1e-4, beta_L=1.0)
    assert np.allclose(gbe_generator(p, FlatBand(p)).matrix, obe_generator(p).matrix, atol=1e-18)

import math
import warnings

import numpy as np
import pytest
from hypothesis import given

from obethermo import (SystemParams, coherence_split, energy_split, entropy, evolve,
                       fme_flows, fme_generator, fme_rates, obe_flows, obe_generator,
                       relative_entropy, steady_state_fme_analytic, steady_state_obe_analytic)
from obethermo.core import DensityMatrix2, from_bloch_views
from obethermo.dynamics import initial_state
from obethermo.errors import DomainError, FrameError
from obethermo.thermo import (first_law_audit, generator_flows, heat_matrixwise,
                              obe_flow_arrays, sector_residuals)

from strategies import params, states


def test_entropy_limits():
    assert entropy(from_bloch_views(1.0, 0.0)) == 0.0
    assert entropy(from_bloch_views(0.5, 0.0)) == pytest.approx(math.log(2))


@given(states(interior=True), states(interior=True))
def test_relative_entropy_nonnegative(a, b):
    assert relative_entropy(a, b) >= 0
    assert relative_entropy(a, a) == pytest.approx(0, abs=1e-12)


def test_relative_entropy_support():
    pure = from_bloch_views(1.0, 0.0)
    mixed = from_bloch_views(0.3, 0.0)
    with pytest.raises(DomainError):
        relative_entropy(mixed, pure)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert relative_entropy(pure, pure) == pytest.approx(0, abs=1e-12)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_energy_split_and_frame_guard():
    p = SystemParams.from_ratios(2.0, 1.0, 1e-4, 2.0)
    rho = from_bloch_views(0.4, 0.1 - 0.2j)
    u, u_cl, u_q = energy_split(rho, p)
    assert u_cl == pytest.approx(p.omega_qb * (0.4 - 0.5))
    assert u_q == pytest.approx(p.g * 0.1)
    assert u == pytest.approx(u_cl + u_q)
    lab = DensityMatrix2(rho.matrix, t=3.0).to_frame("lab", 1.0)
    with pytest.raises(FrameError):
        energy_split(lab, p)


@given(params(), states())
def test_bloch_first_law_and_heat_forms(p, rho):
    f = obe_flows(rho, p)
    scale = p.gamma * p.omega_qb * (2 * p.nbar + 1) + p.g * p.omega_qb
    assert f.dU_dt == pytest.approx(f.W_dot + f.Q_dot, abs=1e-13 * scale)
    assert f.Q_dot == pytest.approx(f.Q_cl_dot + f.Q_q_dot, abs=1e-13 * scale)
    assert f.Q_dot == pytest.approx(heat_matrixwise(rho, p), abs=1e-13 * scale)
    cl, qs = sector_residuals(p, rho.p1, rho.s)
    assert cl <= 1e-13 * scale and qs <= 1e-13 * scale
    g = generator_flows(rho, p, obe_generator(p))
    assert g.Q_dot == pytest.approx(f.Q_dot, abs=1e-13 * scale)
    assert g.sigma_dot == pytest.approx(f.sigma_dot, abs=1e-9 * abs(f.sigma_dot) + 1e-15)


@given(params())
def test_bloch_steady_state_converts_work_to_heat(p):
    p1, s = steady_state_obe_analytic(p)
    f = obe_flows(from_bloch_views(p1, s), p)
    scale = p.gamma * p.omega_qb
    assert f.W_dot == pytest.approx(-f.Q_dot, abs=1e-12 * scale)
    assert f.W_dot >= 0
    assert f.sigma_dot == pytest.approx(f.W_dot / p.temperature, rel=1e-6, abs=1e-15)
    # the coherence-driven heat and the stored coherent energy have opposite signs to delta
    assert f.Q_q_dot * p.delta >= 0 and f.U_q * p.delta <= 0


def test_gamma_zero_has_no_heat():
    p = SystemParams(omega_L=1.0, delta=1e-3, g=2e-3, gamma=0.0, beta_L=2.0)
    arr = obe_flow_arrays(p, np.array([0.1, 0.4]), np.array([0.2j, 0.1]))
    assert np.all(arr["Q_dot"] == 0)


@given(params(g=(0, 2)), states(interior=True))
def test_floquet_flows(p, rho):
    rates = fme_rates(p)
    f = fme_flows(rho, p, rates)
    scale = p.gamma * p.omega_L * (2 * p.nbar + 2)
    assert f.dU_dt == pytest.approx(f.W_dot + f.Q_dot, abs=1e-12 * scale)
    assert sum(f.spohn) == pytest.approx(f.sigma_dot, rel=1e-6, abs=1e-12 * scale / p.temperature)
    assert min(f.spohn[:3]) >= -1e-12
    assert math.isnan(f.Q_cl_dot)


@given(params(g=(0, 2)))
def test_floquet_steady_state_flows(p):
    p1, s, pp = steady_state_fme_analytic(p)
    f = fme_flows(from_bloch_views(p1, s), p, fme_rates(p))
    assert f.dU_dt == pytest.approx(0, abs=1e-12 * p.gamma * p.omega_L * (2 * p.nbar + 2))
    assert f.W_dot == pytest.approx(-f.Q_dot, abs=1e-12 * p.gamma * p.omega_L * (2 * p.nbar + 2))


@given(params(), states(interior=True))
def test_coherence_split_is_additive(p, rho):
    c = coherence_split(rho, p)
    assert c.D_total == pytest.approx(c.D_q + c.D_cl, abs=1e-10)
    assert min(c.D_q, c.D_cl) >= 0
    diag = from_bloch_views(rho.p1, 0.0)
    assert coherence_split(diag, p).D_q == pytest.approx(0, abs=1e-12)


def test_audit_on_floquet_trajectory():
    p = SystemParams.from_ratios(5.0, 2.0, 1e-4, 2.0)
    rates = fme_rates(p)
    h = 1e-3 / p.gamma
    t = np.arange(2001) * h
    traj = evolve(fme_generator(rates, p), initial_state("excited", p), t, fixed_step=h)
    rep = first_law_audit(traj, p, rates)
    assert rep.first_law < 1e-6 * p.gamma * p.omega_qb
    assert math.isnan(rep.classical_sector)
    with pytest.raises(DomainError):
        first_law_audit(evolve(obe_generator(p), initial_state("ground", p), [0.0, 1.0]), p)


def test_audit_error_is_second_order_for_strong_drive():
    # the absolute residual grows like (Omega/gamma)^3 here; only its h^2 scaling is checked
    rng = np.random.default_rng(31)
    for _ in range(6):
        p = SystemParams.from_ratios(10 ** rng.uniform(0, 2), rng.uniform(-10, 10), 1e-4,
                                     10 ** rng.uniform(-1, 1))
        gen = obe_generator(p)
        rho = initial_state("thermal", p)
        res = []
        for h in (1e-3 / p.gamma, 0.5e-3 / p.gamma):
            t = np.arange(int(round(2 / (h * p.gamma))) + 1) * h
            res.append(first_law_audit(evolve(gen, rho, t, fixed_step=h), p).first_law)
        assert 3.5 <= res[0] / res[1] <= 4.5


def test_gbe_simulation_via_generator_flows():
    from obethermo import BathSpec, gbe_generator
    p = SystemParams.from_ratios(3.0, 1.0, 1e-4, 2.0)
    bath = BathSpec.ohmic(p.gamma, p.omega_qb, 10.0, p.temperature)
    gen = gbe_generator(p, bath)
    traj = evolve(gen, initial_state("ground", p), np.linspace(0, 5 / p.gamma, 51))
    for i in (0, 25, 50):
        f = generator_flows(traj[i], p, gen)
        assert f.dU_dt == pytest.approx(f.W_dot + f.Q_dot, abs=1e-13 * p.gamma * p.omega_qb)

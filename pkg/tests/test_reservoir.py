import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamform import zoo
from hamform.core import PhaseState, ScalarField, hamiltonian_field
from hamform.errors import DimensionError
from hamform.integrators import IntegratorConfig, integrate
from hamform.reservoir import (
    EffectiveInvariant,
    EmptyTrajectoryError,
    PfaffianForm,
    ReservoirSpec,
    accumulate,
    canonical_decomposition,
    differential_quotient,
    effective_K,
    k_field,
    pfaffian_contract,
    reservoir_increment,
    reservoir_rate,
)
from hamform.trajectory import Trajectory

P_AGAINST_X = ReservoirSpec(lambda s: s[1], 0)


class TestIncrement:
    def test_trapezoid(self):
        assert reservoir_increment(P_AGAINST_X, [0.0, 0.0], [1.0, 1.0]) == 0.5

    def test_zero_integrand(self):
        spec = ReservoirSpec(lambda s: 0.0, 0)
        assert reservoir_increment(spec, [0.0, 0.0], [1.0, 1.0]) == 0.0

    def test_damping_integrand(self):
        spec = ReservoirSpec(lambda s: 0.1 * s[1], 0)
        value = reservoir_increment(spec, PhaseState(0, [1.0, 0.5]), PhaseState(0.1, [1.1, 0.45]))
        assert value == pytest.approx(0.5 * (0.05 + 0.045) * 0.1, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            reservoir_increment(P_AGAINST_X, [0.0, 0.0], [1.0, 1.0, 1.0])


class TestAccumulate:
    def test_fixed_point(self):
        x = np.tile([0.3, 0.2], (5, 1))
        w = accumulate([P_AGAINST_X], x)
        np.testing.assert_array_equal(w, np.zeros((5, 1)))

    def test_initial_value_offsets_series(self):
        spec = ReservoirSpec(lambda s: s[1], 0, initial_value=2.0)
        w = accumulate([spec], np.array([[0.0, 0.0], [1.0, 1.0]]))
        np.testing.assert_allclose(w[:, 0], [2.0, 2.5])

    def test_vdp_without_damping(self):
        e = zoo.build("vdp", eps=0.0)
        tr = integrate(e.system, [2.0, 0.0], IntegratorConfig(h=1e-2), 2.0)
        np.testing.assert_array_equal(tr.reservoirs, 0.0)

    def test_empty(self):
        with pytest.raises(EmptyTrajectoryError):
            accumulate([P_AGAINST_X], np.zeros((0, 2)))

    def test_matches_increment_sum(self, rng):
        x = np.cumsum(rng.normal(size=(30, 2)), axis=0)
        spec = ReservoirSpec(lambda s: np.sin(s[0]) * s[1], 1)
        w = accumulate([spec], x)[:, 0]
        manual = np.concatenate([[0.0], np.cumsum([reservoir_increment(spec, a, b) for a, b in zip(x[:-1], x[1:])])])
        np.testing.assert_allclose(w, manual, rtol=1e-13, atol=1e-13)

    def test_exact_form_is_path_independent(self, rng):
        # integrand d/dx (x^2 p) summed with its partner against p gives G = x^2 p
        specs = [ReservoirSpec(lambda s: 2 * s[0] * s[1], 0), ReservoirSpec(lambda s: s[0] ** 2, 1)]
        e = zoo.build("damped_oscillator")
        tr = integrate(e.system, [1.0, 0.0], IntegratorConfig(h=1e-3), 5.0, reservoirs=specs,
                       record_divergence=False)
        G = tr.x[:, 0] ** 2 * tr.x[:, 1]
        total = tr.reservoirs.sum(axis=1)
        np.testing.assert_allclose(total, G - G[0], atol=1e-6)

    def test_hermite_needs_field(self):
        with pytest.raises(ValueError):
            accumulate([P_AGAINST_X], Trajectory(t=[0, 1], x=[[0, 0], [1, 1]]), quadrature="hermite")

    def test_unknown_quadrature(self):
        with pytest.raises(ValueError):
            accumulate([P_AGAINST_X], np.zeros((2, 2)), quadrature="simpson")


class TestEffectiveK:
    def test_conservative_system(self):
        e = zoo.build("damped_oscillator", b=0.0)
        tr = integrate(e.system, [1.0, 0.0], IntegratorConfig(h=1e-2), 5.0)
        ks = effective_K(e.invariant, tr)
        np.testing.assert_allclose(ks.values, tr.H)
        assert ks.drift_max <= 1e-8

    def test_damped_oscillator_equals_initial_energy(self):
        e = zoo.build("damped_oscillator", b=0.1)
        tr = integrate(e.system, [1.0, 0.0], IntegratorConfig(h=1e-4), 10.0, record_divergence=False)
        ks = effective_K(e.invariant, tr)
        assert ks.initial == 0.5
        assert np.max(np.abs(ks.values - 0.5)) <= 1e-6

    def test_initial_value_is_potential(self, entry):
        tr = integrate(entry.system, entry.default_state, IntegratorConfig(h=1e-3), 1e-3,
                       record_divergence=False)
        ks = effective_K(entry.invariant, tr)
        assert ks.initial == pytest.approx(entry.invariant.potential_value(entry.default_state))

    def test_vdp_fine_step(self):
        e = zoo.build("vdp", eps=0.5)
        tr = integrate(e.system, [2.0, 0.0], IntegratorConfig(h=1e-4), 20.0, record_divergence=False)
        assert effective_K(e.invariant, tr).drift_max <= 1e-5

    def test_drift_order_two(self):
        e = zoo.build("vdp", eps=0.5)
        drifts = []
        hs = [1e-2, 5e-3, 2.5e-3]
        for h in hs:
            tr = integrate(e.system, [2.0, 0.0], IntegratorConfig(h=h), 10.0, record_divergence=False)
            drifts.append(effective_K(e.invariant, tr).drift_max)
        order = np.polyfit(np.log(hs), np.log(drifts), 1)[0]
        assert 1.7 <= order <= 2.3

    def test_hermite_is_fourth_order(self):
        e = zoo.build("vdp", eps=0.5)
        drifts = []
        hs = [2e-2, 1e-2, 5e-3]
        for h in hs:
            tr = integrate(e.system, [2.0, 0.0], IntegratorConfig(h=h), 10.0, record_divergence=False)
            drifts.append(effective_K(e.invariant, tr, "hermite", e.system).drift_max)
        order = np.polyfit(np.log(hs), np.log(drifts), 1)[0]
        assert order >= 3.5


class TestContraction:
    def test_damping_form(self):
        form = PfaffianForm(2, (lambda s: 0.1 * s[1], lambda s: 0.0))
        assert pfaffian_contract(form, [1.0, 1.0], [1.0, 0.0]) == pytest.approx(0.1)

    def test_zero_vector(self, entry):
        s = entry.samples(1)[0]
        assert pfaffian_contract(entry.invariant, s, np.zeros(entry.dim)) == 0.0

    def test_pointwise_identity(self, entry):
        worst = max(abs(pfaffian_contract(entry.invariant, s, entry.system(s))) for s in entry.samples(200, seed=5))
        assert worst <= 1e-10

    @pytest.mark.parametrize("holling", [2, 3])
    def test_pointwise_identity_rosenzweig(self, holling):
        e = zoo.rosenzweig(holling=holling)
        for s in e.samples(200, seed=holling):
            assert abs(pfaffian_contract(e.invariant, s, e.system(s))) <= 1e-10

    def test_exactness_residual(self):
        e = zoo.build("lv_canonical")
        form = e.invariant.form
        assert form.is_exact
        assert form.exactness_residual(e.samples(10)) == 0.0
        assert not zoo.build("vdp").invariant.form.is_exact


class TestKField:
    def test_vdp(self):
        e = zoo.build("vdp", eps=1.0)
        np.testing.assert_allclose(k_field(e.invariant, [0.0, 1.0]), [1.0, 1.0])

    def test_pure_hamiltonian(self):
        M = zoo.lv_canonical_resource()
        inv = EffectiveInvariant(2, M)
        s = [0.3, -0.2]
        np.testing.assert_allclose(k_field(inv, s), hamiltonian_field(M, s))

    def test_two_reservoir(self):
        e = zoo.build("two_reservoir", d=0.1, e=0.1, gamma=0.0)
        np.testing.assert_allclose(k_field(e.invariant, [1.0, 1.0]), [1.1, -1.1])

    def test_reproduces_field(self, entry):
        for s in entry.samples(50, seed=9):
            np.testing.assert_allclose(k_field(entry.invariant, s), entry.system(s), atol=1e-10)

    def test_odd_dimension(self):
        inv = EffectiveInvariant(3, ScalarField(lambda s: s.sum(), lambda s: np.ones(3)))
        with pytest.raises(DimensionError):
            k_field(inv, np.ones(3))


class TestQuotient:
    def test_quotient_is_integrand(self):
        e = zoo.build("vdp")
        spec = e.invariant.reservoirs[0]
        s = np.array([0.4, 1.3])
        assert differential_quotient(spec, e.system, s) == pytest.approx(spec.integrand(s))
        assert reservoir_rate(spec, e.system, s) == pytest.approx(spec.integrand(s) * e.system(s)[0])

    def test_undefined_when_coordinate_is_stationary(self):
        e = zoo.build("vdp")
        assert np.isnan(differential_quotient(e.invariant.reservoirs[0], e.system, [0.5, 0.0]))


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_canonical_decomposition_identity(x, p):
    e = zoo.build("brusselator")
    sys = e.system.replace(domain_guard=None)
    inv = canonical_decomposition(sys)
    s = np.array([x, p])
    assert abs(pfaffian_contract(inv, s, sys(s))) <= 1e-10 * (1 + np.abs(sys(s)).max() ** 2)
    np.testing.assert_allclose(k_field(inv, s), sys(s), atol=1e-12)

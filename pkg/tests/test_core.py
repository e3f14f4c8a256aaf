import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.integrate import quad

from conftest import general_specs, perfect_gap_specs, strong_spec, weak_spec
from gaptrap import (InvalidSpecError, ReservoirSpec, derive_constants, structure_function,
                     validate_spec)


class TestValidateSpec:
    def test_weak_coupling_set(self):
        spec = ReservoirSpec(10.0, 0.2, 50 / 49, 1 / 49)
        rep = validate_spec(spec)
        assert rep.ok
        assert rep.perfect_gap and rep.resonant
        assert not rep.oscillatory_regime

    def test_normalization_violation_reported(self):
        rep = validate_spec(ReservoirSpec(10.0, 0.2, 2.0, 0.5))
        assert not rep.ok
        assert any("normalization" in v for v in rep.violations)

    def test_strong_coupling_set_is_oscillatory(self):
        rep = validate_spec(ReservoirSpec(0.5, 0.01, 50 / 49, 1 / 49))
        assert rep.ok and rep.perfect_gap and rep.oscillatory_regime

    def test_reports_every_violation(self):
        rep = validate_spec(ReservoirSpec(-1.0, -0.5, 0.0, -1.0, omega_big0=0.0))
        joined = " | ".join(rep.violations)
        for key in ("gamma1", "gamma2", "w1", "w2", "omega_big0"):
            assert key in joined

    def test_non_finite_rejected(self):
        assert not validate_spec(ReservoirSpec(math.nan, 0.2, 1.0, 0.0)).ok

    def test_negative_centre_rejected(self):
        rep = validate_spec(ReservoirSpec(10.0, 0.2, 1.5, 0.5))
        assert not rep.ok

    def test_single_lorentzian_is_not_a_gap(self):
        rep = validate_spec(ReservoirSpec.lorentzian(10.0))
        assert rep.ok and not rep.perfect_gap

    def test_detuned_flag(self):
        assert not validate_spec(weak_spec(detuning=0.3)).resonant

    def test_never_raises_on_garbage(self):
        validate_spec(ReservoirSpec(0.0, 0.0, 0.0, 0.0, omega_big0=-1.0))

    def test_downstream_rejects_with_report(self):
        with pytest.raises(InvalidSpecError) as err:
            derive_constants(ReservoirSpec(10.0, 0.2, 2.0, 0.5))
        assert err.value.report.violations


class TestStructureFunction:
    def test_zero_at_gap(self):
        assert structure_function(weak_spec(), 0.0) == 0.0

    def test_tails_vanish(self):
        d = structure_function(weak_spec(), np.array([-1e6, 1e6]))
        assert np.all(d < 1e-10)

    def test_matches_lorentzian_difference(self):
        spec = ReservoirSpec(3.0, 1.0, 1.2, 0.2, omega_c=2.0)
        x = np.linspace(-8, 12, 101)
        direct = (spec.w1 * spec.gamma1 / ((x - 2) ** 2 + spec.gamma1**2 / 4)
                  - spec.w2 * spec.gamma2 / ((x - 2) ** 2 + spec.gamma2**2 / 4))
        assert np.allclose(structure_function(spec, x), direct, rtol=1e-12, atol=1e-14)

    def test_scalar_in_scalar_out(self):
        assert isinstance(structure_function(weak_spec(), 1.0), float)

    def test_window_quadrature(self):
        # A +-400 window captures 2pi only to about 0.8 %: the tails decay like 1/x^2.
        spec = weak_spec()
        total, _ = quad(lambda w: structure_function(spec, w), -400, 400,
                        points=[0.0], limit=400)
        assert total / (2 * math.pi) == pytest.approx(0.99190, abs=2e-5)
        full, _ = quad(lambda w: structure_function(spec, w), -np.inf, np.inf, limit=400)
        assert full == pytest.approx(2 * math.pi, rel=1e-8)

    def test_invalid_spec_rejected(self):
        with pytest.raises(InvalidSpecError):
            structure_function(ReservoirSpec(10.0, 0.2, 2.0, 0.5), 0.0)

    @settings(max_examples=100, deadline=None)
    @given(perfect_gap_specs())
    def test_perfect_gap_nonnegative(self, spec):
        x = np.concatenate([np.linspace(-50, 50, 2001), [0.0, 1e-9, -1e-9]])
        d = structure_function(spec, spec.omega_c + x)
        assert np.all(d >= -1e-14)
        assert structure_function(spec, spec.omega_c) <= 1e-14

    @settings(max_examples=100, deadline=None)
    @given(general_specs())
    def test_valid_specs_nonnegative(self, spec):
        d = structure_function(spec, np.linspace(-50, 50, 2001))
        assert np.all(d >= -1e-14)


class TestDeriveConstants:
    def test_weak_coupling_values(self):
        k = derive_constants(weak_spec())
        assert k.big_gamma == pytest.approx(2.55, rel=1e-14)
        assert k.eta == pytest.approx(math.sqrt(2), rel=1e-14)
        assert k.v == pytest.approx(math.sqrt(2) / 2, rel=1e-12)
        assert k.gamma_p1 == 0.0
        assert k.gamma_p2 == pytest.approx(10.2, rel=1e-12)
        assert k.big_omega.real == 0.0
        assert k.big_omega.imag == pytest.approx(math.sqrt(80.04) / 2, rel=1e-12)
        # the quoted 4.47329 and 1.98495 are rounded loosely; the exact forms above decide
        assert k.big_omega.imag == pytest.approx(4.47329, abs=1e-4)

    def test_equal_widths_decouple(self):
        k = derive_constants(ReservoirSpec(1.0, 1.0, 2.0, 1.0))
        assert k.v == 0.0

    def test_strong_coupling_rabi_frequency(self):
        k = derive_constants(strong_spec())
        assert k.big_omega.imag == 0.0
        assert k.big_omega.real == pytest.approx(0.5 * math.sqrt(16 - 0.2401), rel=1e-12)
        assert k.big_omega.real == pytest.approx(1.98495, abs=1e-4)

    def test_single_lorentzian_eta_infinite(self):
        assert math.isinf(derive_constants(ReservoirSpec.lorentzian(2.0)).eta)

    @settings(max_examples=100, deadline=None)
    @given(perfect_gap_specs())
    def test_perfect_gap_relations(self, spec):
        k = derive_constants(spec)
        g1, g2 = spec.gamma1, spec.gamma2
        assert k.gamma_p1 == 0.0
        assert k.gamma_p2 == pytest.approx(g1 + g2, rel=1e-12)
        assert k.v == pytest.approx(math.sqrt(g1 * g2) / 2, rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(general_specs())
    def test_decay_rate_rabi_identity(self, spec):
        k = derive_constants(spec)
        lhs = 4 * k.big_gamma**2 + k.big_omega**2
        rhs = spec.gamma1 * spec.gamma2 + 4 * spec.omega_big0**2
        assert abs(lhs - rhs) <= 1e-12 * rhs

    @settings(max_examples=100, deadline=None)
    @given(general_specs())
    def test_eta_squared(self, spec):
        k = derive_constants(spec)
        expected = 4 * spec.omega_big0**2 / (spec.gamma1 * spec.gamma2)
        assert k.eta**2 == pytest.approx(expected, rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(general_specs())
    def test_deterministic(self, spec):
        assert derive_constants(spec) == derive_constants(spec)

    @settings(max_examples=100, deadline=None)
    @given(general_specs())
    def test_decay_rates_nonnegative(self, spec):
        k = derive_constants(spec)
        assert k.gamma_p1 >= 0.0 and k.gamma_p2 > 0.0

    def test_principal_branch(self):
        k = derive_constants(weak_spec())
        assert k.big_omega.imag > 0

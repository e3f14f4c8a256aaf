import numpy as np
import pytest

from conftest import ORACLE_TIMES, weak_spec
from gaptrap import (BathState, amplitudes_closed_form, build_bath_grid,
                     closed_form_bath_state, current, current_balance, integrate_bath,
                     spectrum, spectrum_longtime)
from gaptrap.observables import centred_derivative, integrate_with_rate, stencil_times


@pytest.fixture(scope="module")
def small_bath():
    spec = weak_spec()
    grid = build_bath_grid(spec, 1001, 40.0)
    t = np.linspace(0, 10, 51)
    return spec, grid, t, integrate_bath(spec, grid, t, 1e-10)


class TestSpectrum:
    def test_zero_at_start(self, small_bath):
        _, grid, _, st = small_bath
        assert np.all(spectrum(grid, st[0]).values == 0)

    def test_gap_entry_zero(self, small_bath):
        _, grid, _, st = small_bath
        mid = grid.n_modes // 2
        assert grid.delta[mid] == 0
        assert np.all(spectrum(grid, st).values[:, mid] == 0)

    def test_nonnegative(self, small_bath):
        _, grid, _, st = small_bath
        assert np.all(spectrum(grid, st).values >= 0)

    def test_density_is_inverse_spacing(self, small_bath):
        _, grid, _, st = small_bath
        s = spectrum(grid, st[-1])
        assert np.allclose(s.values, np.abs(st.c_lambdas[-1]) ** 2 / grid.d_omega)

    def test_shape_mismatch(self, small_bath):
        _, _, _, st = small_bath
        other = build_bath_grid(weak_spec(), 10, 40.0)
        with pytest.raises(ValueError):
            spectrum(other, st)
        with pytest.raises(ValueError):
            current(other, st)

    def test_oracle_matches_longtime_formula(self, oracle_4000):
        grid, st = oracle_4000
        assert ORACLE_TIMES[-1] == 50.0
        s = spectrum(grid, st[-1]).values
        away = (np.abs(grid.delta) <= 5) & (np.abs(grid.delta) > 1e-9)
        ref = spectrum_longtime(weak_spec(), grid.omegas[away], 50.0)
        assert np.max(np.abs(s[away] / ref - 1)) <= 1e-2

    def test_sum_rule_oracle(self, oracle_4000):
        grid, st = oracle_4000
        total = spectrum(grid, st).total
        assert np.max(np.abs(total + np.abs(st.c_a) ** 2 - 1)) <= 1e-3

    def test_sum_rule_closed_form(self):
        spec = weak_spec()
        grid = build_bath_grid(spec, 4000, 40.0)
        st = closed_form_bath_state(spec, grid, np.linspace(0, 50, 51))
        total = spectrum(grid, st).total
        assert np.max(np.abs(total + np.abs(st.c_a) ** 2 - 1)) <= 1e-3

    def test_frame_invariant(self, small_bath):
        _, grid, t, st = small_bath
        phase = np.exp(-1j * grid.omegas[None, :] * t[:, None])
        rotated = BathState(st.t, st.c_a * np.exp(-1j * 0.7 * t), st.c_lambdas * phase)
        assert np.allclose(spectrum(grid, rotated).values, spectrum(grid, st).values,
                           rtol=1e-12, atol=0)


class TestCurrent:
    def test_zero_at_start(self, small_bath):
        _, grid, _, st = small_bath
        assert np.all(current(grid, st[0]).j_values == 0)

    def test_net_current_is_cell_sum(self, small_bath):
        _, grid, _, st = small_bath
        cur = current(grid, st)
        assert np.allclose(cur.q, cur.j_values.sum(axis=-1) * grid.d_omega, rtol=1e-14)

    def test_balance_at_t5(self):
        spec = weak_spec()
        grid = build_bath_grid(spec, 1000, 40.0)
        bal = current_balance(spec, grid, [5.0], tol=1e-11)
        rel = abs(bal.q[0] + bal.population_rate[0]) / abs(bal.population_rate[0])
        assert rel <= 1e-3

    def test_balance_on_grid(self, small_bath):
        spec, grid, _, _ = small_bath
        times = np.linspace(0.5, 10, 20)
        bal = current_balance(spec, grid, times, tol=1e-11)
        rel = np.abs(bal.q + bal.population_rate) / np.abs(bal.population_rate)
        assert np.max(rel) <= 1e-3

    def test_balance_rejects_edge_times(self, small_bath):
        spec, grid, _, _ = small_bath
        with pytest.raises(ValueError):
            current_balance(spec, grid, [1e-3])

    def test_persistent_currents_vanishing_net_flow(self):
        spec = weak_spec()
        grid = build_bath_grid(spec, 4000, 40.0)
        t = np.array([5.0, 40.0, 45.0, 50.0])
        cur = current(grid, closed_form_bath_state(spec, grid, t))
        peak5 = np.max(np.abs(cur.j_values[0]))
        assert np.all(np.abs(cur.q[1:]) <= 1e-3)
        assert np.all(np.max(np.abs(cur.j_values[1:]), axis=-1) > 1e-3 * peak5)

    def test_closed_form_currents_track_population(self):
        spec = weak_spec()
        grid = build_bath_grid(spec, 4000, 40.0)
        t = np.linspace(0.5, 10, 20)
        cur = current(grid, closed_form_bath_state(spec, grid, t))

        def pop(s):
            return np.abs(amplitudes_closed_form(spec, s).c_a) ** 2

        rate = centred_derivative(pop, t, 1e-3)
        assert np.max(np.abs(cur.q + rate)) <= 5e-3


class TestStencil:
    def test_exact_on_quartic(self):
        t = np.linspace(1, 3, 7)
        d = centred_derivative(lambda s: s**4 - 2 * s**3 + s, t, 1e-2)
        assert np.allclose(d, 4 * t**3 - 6 * t**2 + 1, rtol=1e-10)

    def test_stencil_times_include_base(self):
        t = np.array([1.0, 2.0])
        pts = stencil_times(t, 1e-3)
        assert set(np.round(t, 12)) <= set(pts)
        assert pts.size == 10 and np.all(np.diff(pts) > 0)

    def test_integrate_with_rate_masks_edges(self, small_bath):
        spec, grid, _, _ = small_bath
        t = np.array([0.0, 1e-3, 2e-3, 1.0])
        states, rate, interior = integrate_with_rate(spec, grid, t, 1e-10)
        assert list(interior) == [False, False, True, True]
        assert rate.shape == (2,) and len(states) == 4
        assert np.array_equal(states.t, t)

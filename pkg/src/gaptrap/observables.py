"""Reservoir spectrum and atom-mode probability currents on a bath grid."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .analytic import amplitudes_closed_form, bath_amplitude_closed_form
from .core import ReservoirSpec
from .dynamics import BathGrid, BathState, RecurrenceWarning, integrate_bath

# fourth-order centred first-derivative stencil
STENCIL_OFFSETS = (-2, -1, 1, 2)
STENCIL_WEIGHTS = (1 / 12, -8 / 12, 8 / 12, -1 / 12)


@dataclass(frozen=True)
class SpectrumSlice:
    t: np.ndarray
    delta: np.ndarray
    values: np.ndarray
    d_omega: float

    @property
    def total(self):
        """``sum(S) * d_omega``, the excitation stored in the reservoir."""
        return np.sum(self.values, axis=-1) * self.d_omega


@dataclass(frozen=True)
class CurrentSlice:
    """Per-mode currents ``j_values`` (flow atom -> mode) and their sum ``q``."""

    t: np.ndarray
    delta: np.ndarray
    j_values: np.ndarray
    q: np.ndarray


def _check_shapes(grid: BathGrid, state: BathState):
    if np.shape(state.c_lambdas)[-1] != grid.n_modes:
        raise ValueError(
            f"state has {np.shape(state.c_lambdas)[-1]} modes, grid has {grid.n_modes}")
    if np.shape(state.c_lambdas)[:-1] != np.shape(state.t):
        raise ValueError("state times and mode amplitudes disagree in shape")


def spectrum(grid: BathGrid, state: BathState) -> SpectrumSlice:
    """``S(omega_lambda, t) = rho |c_lambda|^2`` with ``rho = 1 / d_omega``."""
    _check_shapes(grid, state)
    values = grid.density * np.abs(state.c_lambdas) ** 2
    return SpectrumSlice(np.asarray(state.t), grid.delta, values, grid.d_omega)


def current(grid: BathGrid, state: BathState) -> CurrentSlice:
    """Probability currents ``J = 2 Im(rho g conj(c~_lambda) c~_a exp(i delta t))``.

    ``state`` must hold interaction-picture amplitudes. The net current is the
    cell sum ``sum(J) * d_omega``, which for a discrete bath equals
    ``-d|c_a|^2/dt`` exactly.
    """
    _check_shapes(grid, state)
    t = np.asarray(state.t, dtype=float)
    c_a = np.asarray(state.c_a)
    phase = np.exp(1j * grid.atom_detuning * t[..., None])
    j = 2 * np.imag(grid.density * grid.couplings * np.conj(state.c_lambdas)
                    * c_a[..., None] * phase)
    return CurrentSlice(t, grid.delta, j, np.sum(j, axis=-1) * grid.d_omega)


def closed_form_bath_state(spec: ReservoirSpec, grid: BathGrid, t) -> BathState:
    """Bath amplitudes on ``grid`` from the closed-form continuum solution."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c_a = amplitudes_closed_form(spec, t).c_a
    c_l = bath_amplitude_closed_form(spec, grid.omegas[None, :], t[:, None],
                                     grid.couplings[None, :])
    return BathState(t, c_a, c_l)


def stencil_times(times, h: float = 1e-3):
    """Sorted union of ``times`` and their derivative-stencil neighbours."""
    times = np.asarray(times, dtype=float)
    pts = [times] + [times + o * h for o in STENCIL_OFFSETS]
    return np.unique(np.round(np.concatenate(pts), 12))


def centred_derivative(values_at, times, h: float = 1e-3):
    """Fourth-order centred derivative; ``values_at(t)`` must accept arrays."""
    times = np.asarray(times, dtype=float)
    return sum(w * values_at(times + o * h)
               for o, w in zip(STENCIL_OFFSETS, STENCIL_WEIGHTS)) / h


def integrate_with_rate(spec: ReservoirSpec, grid: BathGrid, t_grid, tol: float = 1e-11,
                        h: float = 1e-3):
    """Integrate the discretized bath and differentiate ``|c_a|^2`` numerically.

    Returns ``(states, rate, interior)``: the states on ``t_grid``, the centred
    difference ``d|c_a|^2/dt`` at the grid times ``>= 2h`` and the boolean mask
    selecting those times. The stencil samples come from the same trajectory.
    """
    t = np.asarray(t_grid, dtype=float)
    interior = t >= 2 * h
    t_all = np.union1d(np.round(t, 12), stencil_times(t[interior], h))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RecurrenceWarning)
        traj = integrate_bath(spec, grid, t_all, tol)
    if t_all[-1] > grid.recurrence_horizon:
        warnings.warn(f"t_max {t_all[-1]:g} exceeds the recurrence horizon "
                      f"{grid.recurrence_horizon:g}", RecurrenceWarning, stacklevel=2)
    index = {round(float(s), 12): i for i, s in enumerate(t_all)}
    pop = np.abs(traj.c_a) ** 2

    def pop_at(ts):
        return pop[[index[round(float(s), 12)] for s in np.ravel(ts)]]

    states = traj[[index[round(float(s), 12)] for s in t]]
    return states, centred_derivative(pop_at, t[interior], h), interior


@dataclass(frozen=True)
class CurrentBalance:
    t: np.ndarray
    q: np.ndarray
    population_rate: np.ndarray   # d|c_a|^2/dt by centred differences
    currents: CurrentSlice


def current_balance(spec: ReservoirSpec, grid: BathGrid, times, tol: float = 1e-11,
                    h: float = 1e-3) -> CurrentBalance:
    """Compare the net current ``Q(t)`` with ``-d|c_a|^2/dt`` on the discretized bath.

    ``times`` must all be interior (``>= 2h``).
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 2 * h):
        raise ValueError("current balance needs times >= 2h")
    states, rate, _ = integrate_with_rate(spec, grid, np.concatenate([[0.0], times]), tol, h)
    cur = current(grid, states[1:])
    return CurrentBalance(times, cur.q, rate, cur)

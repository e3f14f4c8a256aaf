"""Numerical integration of the pseudomode amplitudes and of a discretized bath.

Both integrators use scipy's DOP853 (adaptive embedded Runge-Kutta, order 8,
with dense output onto the requested times). The pseudomode equations are
solved in the frame rotating at ``omega_c``; the bath equations are solved in
the interaction picture with the explicit ``exp(+-i delta t)`` factors, so
memory stays linear in the number of modes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .analytic import AmplitudeState
from .core import ReservoirSpec, derive_constants, require_valid, structure_function

MIN_COVERAGE = 0.99


class IntegrationError(RuntimeError):
    """The adaptive stepper failed before reaching the final time."""

    def __init__(self, message: str, t_reached: float):
        self.t_reached = t_reached
        super().__init__(f"{message} (reached t = {t_reached:.6g})")


class RecurrenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BathGrid:
    """Uniform cell-centred frequency grid over ``[omega_c - L, omega_c + L]``.

    Mode ``k`` sits at ``omega_c - L + (k + 1/2) * d_omega`` and carries the
    coupling ``omega_big0 * sqrt(D * d_omega / 2pi)``.
    """

    omegas: np.ndarray
    couplings: np.ndarray
    d_omega: float
    cutoff: float
    omega_c: float
    omega_0: float
    omega_big0: float
    warnings: tuple[str, ...] = ()

    @property
    def n_modes(self) -> int:
        return self.omegas.size

    @property
    def delta(self) -> np.ndarray:
        """Detuning from the gap centre (the plotting axis)."""
        return self.omegas - self.omega_c

    @property
    def atom_detuning(self) -> np.ndarray:
        """Detuning from the atomic transition (enters the phase factors)."""
        return self.omegas - self.omega_0

    @property
    def density(self) -> float:
        return 1.0 / self.d_omega

    @property
    def coverage(self) -> float:
        """``sum(g^2) / omega_big0^2``; 1 for an untruncated bath."""
        return float(np.sum(self.couplings**2) / self.omega_big0**2)

    @property
    def recurrence_horizon(self) -> float:
        """Results from the discrete bath are only trusted before ``2pi / d_omega``."""
        return 2 * math.pi / self.d_omega


@dataclass(frozen=True)
class BathState:
    """Interaction-picture amplitudes; ``c_lambdas`` has a trailing mode axis."""

    t: np.ndarray
    c_a: np.ndarray
    c_lambdas: np.ndarray

    @property
    def norm(self):
        return np.abs(self.c_a) ** 2 + np.sum(np.abs(self.c_lambdas) ** 2, axis=-1)

    def __len__(self):
        return np.size(self.t)

    def __getitem__(self, idx):
        return BathState(np.asarray(self.t)[idx], np.asarray(self.c_a)[idx],
                         np.asarray(self.c_lambdas)[idx])


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if t[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    return t


def _solve(rhs, y0, t, tol, atol):
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if t.size == 1:
        return y0[:, None]
    sol = solve_ivp(rhs, (0.0, t[-1]), y0, method="DOP853", t_eval=t,
                    rtol=tol, atol=tol * 1e-3 if atol is None else atol)
    if not sol.success:
        reached = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"integration failed: {sol.message}", reached)
    return sol.y


def integrate_pseudomodes(spec: ReservoirSpec, t_grid, tol: float = 1e-9,
                          atol: float | None = None) -> AmplitudeState:
    """Integrate atom + two damped, coupled pseudomodes from ``c_a(0) = 1``.

    Works for imperfect gaps (``gamma_p1 > 0``) and for a detuned atom. The
    vacuum population is carried as an extra component obeying
    ``d(pi_j)/dt = gamma_p1 |a_1|^2 + gamma_p2 |a_2|^2``.
    """
    require_valid(spec)
    k = derive_constants(spec)
    t = _check_grid(t_grid)
    o0, det = spec.omega_big0, spec.detuning
    gp1, gp2, v = k.gamma_p1, k.gamma_p2, k.v

    def rhs(_, y):
        c, a1, a2 = y[0], y[1], y[2]
        return np.array([
            -1j * (det * c + o0 * a2),
            -1j * v * a2 - 0.5 * gp1 * a1,
            -1j * (o0 * c + v * a1) - 0.5 * gp2 * a2,
            gp1 * abs(a1) ** 2 + gp2 * abs(a2) ** 2,
        ])

    y = _solve(rhs, np.array([1, 0, 0, 0], dtype=complex), t, tol, atol)
    return AmplitudeState(t, y[0], y[1], y[2], y[3].real)


def build_bath_grid(spec: ReservoirSpec, n_modes: int = 4000,
                    cutoff: float = 40.0) -> BathGrid:
    """Discretize the reservoir on ``n_modes`` cells of width ``2 * cutoff / n_modes``.

    A coverage ratio below 0.99 is attached as a warning, not raised.
    """
    require_valid(spec)
    if int(n_modes) != n_modes or n_modes < 2:
        raise ValueError("n_modes must be an integer >= 2")
    if not cutoff > 0:
        raise ValueError("cutoff must be > 0")
    n_modes = int(n_modes)
    d_omega = 2.0 * cutoff / n_modes
    omegas = spec.omega_c - cutoff + (np.arange(n_modes) + 0.5) * d_omega
    if n_modes % 2:
        omegas[n_modes // 2] = spec.omega_c
    d = structure_function(spec, omegas)
    couplings = spec.omega_big0 * np.sqrt(np.maximum(d, 0.0) * d_omega / (2 * math.pi))
    grid = BathGrid(omegas, couplings, d_omega, float(cutoff), spec.omega_c,
                    spec.omega_0, spec.omega_big0)
    if grid.coverage < MIN_COVERAGE:
        msg = (f"coupling coverage {grid.coverage:.4f} < {MIN_COVERAGE}: "
               f"the cutoff {cutoff:g} truncates the structure-function tails")
        grid = BathGrid(omegas, couplings, d_omega, float(cutoff), spec.omega_c,
                        spec.omega_0, spec.omega_big0, (msg,))
    return grid


def integrate_bath(spec: ReservoirSpec, grid: BathGrid, t_grid, tol: float = 1e-9,
                   atol: float | None = None) -> BathState:
    """Brute-force Schrödinger integration of the atom plus discretized bath.

    Returns interaction-picture amplitudes at every time in ``t_grid``. Warns
    (``RecurrenceWarning``) when ``t_grid`` runs past the recurrence horizon.
    """
    require_valid(spec)
    t = _check_grid(t_grid)
    if grid.omega_0 != spec.omega_0 or grid.omega_c != spec.omega_c:
        raise ValueError("grid was built for a different spec")
    if t[-1] > grid.recurrence_horizon:
        warnings.warn(f"t_max {t[-1]:g} exceeds the recurrence horizon "
                      f"{grid.recurrence_horizon:g}", RecurrenceWarning, stacklevel=2)
    g = grid.couplings
    delta = grid.atom_detuning

    def rhs(s, y):
        phase = np.exp(1j * delta * s)
        out = np.empty_like(y)
        out[0] = -1j * np.dot(g * phase.conj(), y[1:])
        out[1:] = -1j * (g * phase) * y[0]
        return out

    y0 = np.zeros(grid.n_modes + 1, dtype=complex)
    y0[0] = 1.0
    y = _solve(rhs, y0, t, tol, atol)
    return BathState(t, y[0], np.ascontiguousarray(y[1:].T))

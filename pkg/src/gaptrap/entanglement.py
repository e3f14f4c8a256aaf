"""Concurrences, tangle and frequency-resolved densities of entanglement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .analytic import AmplitudeState
from .observables import SpectrumSlice

TRACE_TOL = 1e-6
LAZY_ROWS_ABOVE = 2000
_ROW_BLOCK = 512


class TraceViolationError(ValueError):
    pass


@dataclass(frozen=True)
class ConcurrenceRecord:
    """Squared concurrences of the atom with pseudomode 1, pseudomode 2 and
    with the collective pseudomode qubit, plus the residual tangle."""

    t: np.ndarray
    c2_a1: np.ndarray
    c2_a2: np.ndarray
    c2_a12: np.ndarray
    tangle: np.ndarray


@dataclass(frozen=True)
class EntanglementTotals:
    t: np.ndarray
    c2_a_total: np.ndarray
    c2_r_total: np.ndarray
    c2_total: np.ndarray

    def __iter__(self):
        return iter((self.c2_a_total, self.c2_r_total, self.c2_total))


def concurrences(state: AmplitudeState, trace_tol: float = TRACE_TOL) -> ConcurrenceRecord:
    """Pairwise and collective concurrences of a single-excitation state.

    The pseudomodes are merged into one qubit with excited amplitude
    ``sqrt(|a_1|^2 + |a_2|^2)``; the resulting two-qubit state has no
    doubly-excited component, so its squared concurrence is
    ``4 |c_a|^2 (|a_1|^2 + |a_2|^2)``.
    """
    dev = np.max(np.abs(np.asarray(state.trace) - 1.0))
    if not dev <= trace_tol:
        raise TraceViolationError(
            f"state trace deviates from 1 by {dev:.3g} (> {trace_tol:g})")
    pa, p1, p2, _ = state.populations
    c2_a1 = 4 * pa * p1
    c2_a2 = 4 * pa * p2
    c2_a12 = 4 * pa * (p1 + p2)
    return ConcurrenceRecord(np.asarray(state.t), c2_a1, c2_a2, c2_a12,
                             c2_a12 - c2_a1 - c2_a2)


def density_atom_modes(c_a, spectrum: SpectrumSlice) -> np.ndarray:
    """``E_A(omega, t) = 4 |c_a(t)|^2 S(omega, t)``; ``c_a`` matches the slice times."""
    pa = np.abs(np.asarray(c_a)) ** 2
    return 4 * pa[..., None] * spectrum.values


def density_modes_row(spectrum: SpectrumSlice, mu_index: int) -> np.ndarray:
    """``E_R(omega_lambda, omega_mu, t)`` for one fixed mode ``mu``."""
    values = spectrum.values
    return 2 * values[..., mu_index, None] * values


def density_modes_modes(spectrum: SpectrumSlice, materialize: bool | None = None):
    """``E_R(omega_lambda, omega_mu) = 2 S(omega_lambda) S(omega_mu)`` at one time.

    Returns the full symmetric matrix for grids up to 2000 modes (or when
    ``materialize`` is true), otherwise an iterator over rows.
    """
    s = np.asarray(spectrum.values)
    if s.ndim != 1:
        raise ValueError("density_modes_modes takes a single-time spectrum slice")
    if materialize is None:
        materialize = s.size <= LAZY_ROWS_ABOVE
    if materialize:
        return 2 * np.outer(s, s)
    return _rows(s)


def _rows(s: np.ndarray) -> Iterator[np.ndarray]:
    for v in s:
        yield 2 * v * s


def _double_quadrature(s: np.ndarray, d_omega: float) -> float:
    total = 0.0
    for start in range(0, s.size, _ROW_BLOCK):
        block = 2 * np.outer(s[start:start + _ROW_BLOCK], s)
        total += block.sum()
    return total * d_omega**2


def entanglement_totals(c_a, spectrum: SpectrumSlice) -> EntanglementTotals:
    """Integrated atom-modes, mode-mode and total squared concurrences.

    The mode-mode part is a direct double sum over the grid, done in row
    blocks so memory stays linear in the number of modes.
    """
    e_a = density_atom_modes(c_a, spectrum)
    c2_a = np.sum(e_a, axis=-1) * spectrum.d_omega
    values = np.atleast_2d(spectrum.values)
    c2_r = np.array([_double_quadrature(row, spectrum.d_omega) for row in values])
    c2_r = c2_r.reshape(np.shape(c2_a))
    return EntanglementTotals(np.asarray(spectrum.t), c2_a, c2_r, c2_a + c2_r)

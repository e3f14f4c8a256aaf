"""Closed-form dynamics for a resonant atom in a perfect-gap reservoir.

Amplitudes are returned in the frame rotating at ``omega_c``: the global phase
``exp(-i*omega_0*t)`` is dropped, which is harmless because every observable
depends on moduli or on phase differences that survive the frame change.

All expressions are written in terms of the two damped factors

    C(t) = exp(-G t) cos(W t / 2),    S(t) = exp(-G t) sin(W t / 2) / W

with ``G`` the decay rate and ``W`` the (complex) Rabi frequency. Both are even
in ``W``, finite at ``W = 0`` and real whenever ``W`` is real or imaginary, so the
oscillatory and overdamped regimes share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ReservoirSpec, derive_constants, require_valid, structure_function

SERIES_SWITCH = 1e-6
LONGTIME_GATE = 10.0


class AnalyticUnavailableError(ValueError):
    """The closed forms only hold for a resonant atom and a perfect gap."""


class ValidityWindowError(ValueError):
    """An asymptotic formula was asked for outside its validity window."""


@dataclass(frozen=True)
class AmplitudeState:
    """Single-excitation pseudomode state; fields may be arrays over ``t``.

    The vacuum population ``pi_j`` carries the probability lost to the
    Markovian part of the reservoir.
    """

    t: np.ndarray
    c_a: np.ndarray
    a_1: np.ndarray
    a_2: np.ndarray
    pi_j: np.ndarray

    @property
    def populations(self):
        return (np.abs(self.c_a) ** 2, np.abs(self.a_1) ** 2,
                np.abs(self.a_2) ** 2, np.asarray(self.pi_j))

    @property
    def trace(self):
        return sum(self.populations)

    def __len__(self):
        return np.size(self.t)

    def __getitem__(self, idx):
        return AmplitudeState(*(np.asarray(x)[idx] for x in
                                (self.t, self.c_a, self.a_1, self.a_2, self.pi_j)))


def _sinc(z):
    """``sin(z)/z`` for complex ``z`` with a series branch near zero."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SERIES_SWITCH
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 - z * z / 6.0, np.sin(safe) / safe)


def damped_factors(big_omega: complex, big_gamma: float, t):
    """Return ``(C(t), S(t))`` as defined in the module docstring."""
    t = np.asarray(t, dtype=float)
    z = 0.5 * big_omega * t
    small = np.abs(z) < 1.0
    decay = np.exp(-big_gamma * t)
    with np.errstate(over="ignore", invalid="ignore"):
        cos_near = decay * np.cos(np.where(small, z, 0))
        sin_near = decay * 0.5 * t * _sinc(np.where(small, z, 0))
        # exponent real parts are -G -+ Im(W)/2 <= 0, so this branch cannot overflow
        ep = np.exp((0.5j * big_omega - big_gamma) * t)
        em = np.exp((-0.5j * big_omega - big_gamma) * t)
        w = big_omega if big_omega != 0 else 1.0
        cos_far = 0.5 * (ep + em)
        sin_far = (ep - em) / (2j * w)
    return np.where(small, cos_near, cos_far), np.where(small, sin_near, sin_far)


def _require_closed_form(spec: ReservoirSpec):
    report = require_valid(spec)
    missing = []
    if not report.perfect_gap:
        missing.append("perfect gap (gamma1*w2 == gamma2*w1)")
    if not report.resonant:
        missing.append("resonance (omega_0 == omega_c)")
    if missing:
        raise AnalyticUnavailableError(
            "analytic solution unavailable: requires " + " and ".join(missing))
    return derive_constants(spec)


def _check_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("times must be finite and >= 0")
    return t


def amplitudes_closed_form(spec: ReservoirSpec, t) -> AmplitudeState:
    """Atom, pseudomode and vacuum amplitudes at time(s) ``t``.

    Starts from ``c_a(0) = 1`` with both pseudomodes empty.
    """
    k = _require_closed_form(spec)
    t = _check_times(t)
    g1, g2, o0 = spec.gamma1, spec.gamma2, spec.omega_big0
    G, W = k.big_gamma, k.big_omega
    norm = (4 * G**2 + W**2).real
    C, S = damped_factors(W, G, t)

    c_a = 4 / norm * (g1 * g2 / 4 + 2 * o0**2 * (G * S + 0.5 * C))
    a_1 = -2 * np.sqrt(g1 * g2) * o0 / norm * (1 - (C + 2 * G * S))
    a_2 = -2j * o0 * S
    # vacuum population; e^{-2Gt}(cos Wt - 1)/W^2 = -2 S^2, e^{-2Gt} sin(Wt)/(2W) = C S
    pi_j = 16 * G * o0**2 / norm * (-np.expm1(-2 * G * t) / (4 * G) - 2 * G * S**2 - C * S)
    c_a = np.where(t == 0, 1.0, c_a)   # exact initial state, free of rounding
    return AmplitudeState(t, c_a.real + 0j, a_1.real + 0j, 1j * a_2.imag, pi_j.real)


def trapping_fractions(eta):
    """Long-time ``(c_a, a_1, pi_j)`` as functions of the coupling ratio ``eta``."""
    eta = np.asarray(eta, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        inv = 1.0 / (1.0 + eta**2)
        a1 = np.where(np.isinf(eta), 0.0, eta * inv)
        pi = np.where(np.isinf(eta), 1.0, eta**2 * inv)
    if np.ndim(eta) == 0:
        return float(inv), float(a1), float(pi)
    return inv, a1, pi


def trapping_limits(spec: ReservoirSpec) -> tuple[float, float, float]:
    """``(c_a(inf), |a_1(inf)|, pi_j(inf))`` for the trapping state.

    ``c_a(inf)**2 + a_1(inf)**2 + pi_j(inf) == 1``. The sign of ``a_1(inf)``
    is frame dependent, so its modulus is returned.
    """
    k = _require_closed_form(spec)
    return trapping_fractions(k.eta)


def bath_amplitude_closed_form(spec: ReservoirSpec, omega_lambda, t, g_lambda):
    """Interaction-picture reservoir amplitude ``c~_lambda(t)``.

    Inputs broadcast against each other, e.g. ``t[:, None]`` with a frequency
    vector gives a (times x modes) array. Equals
    ``-i g int_0^t exp(i delta tau) c_a(tau) dtau`` with ``delta = omega_lambda - omega_c``.
    """
    k = _require_closed_form(spec)
    t = _check_times(t)
    delta = np.asarray(omega_lambda, dtype=float) - spec.omega_c
    g = np.asarray(g_lambda, dtype=float)
    g1, g2, o0 = spec.gamma1, spec.gamma2, spec.omega_big0
    G, W = k.big_gamma, k.big_omega
    norm = (4 * G**2 + W**2).real
    C, S = damped_factors(W, G, t)
    den = 4 * (G - 1j * delta) ** 2 + W**2
    phase = np.exp(1j * delta * t)

    steady = g1 * g2 / 2 * np.exp(0.5j * delta * t) * 0.5 * t * _sinc(0.5 * delta * t)
    second = 4 * o0**2 * (2 * G - 1j * delta) / den * (1 - phase * C)
    third = 2 * o0**2 * (4 * (1j * delta * G - G**2) + W**2) / den * phase * S
    return -4j * g / norm * (steady + second + third)


def spectrum_longtime(spec: ReservoirSpec, omega_lambda, t):
    """Long-time reservoir spectrum ``S(omega_lambda, t)``.

    Only the transients decaying like ``exp(-G t)`` are dropped; the
    ``sin(delta t / 2)/delta`` term keeps the spectrum time dependent.
    Rejects ``t * (gamma1 + gamma2) < 10``.
    """
    k = _require_closed_form(spec)
    t = _check_times(t)
    if np.any(t * (spec.gamma1 + spec.gamma2) < LONGTIME_GATE):
        raise ValidityWindowError(
            "asymptotic formula outside validity window: "
            f"need t*(gamma1+gamma2) >= {LONGTIME_GATE}")
    delta = np.asarray(omega_lambda, dtype=float) - spec.omega_c
    g1, g2, o0 = spec.gamma1, spec.gamma2, spec.omega_big0
    G, W = k.big_gamma, k.big_omega
    norm = (4 * G**2 + W**2).real
    steady = g1 * g2 / 2 * np.exp(0.5j * delta * t) * 0.5 * t * _sinc(0.5 * delta * t)
    bound = 4 * o0**2 * (2 * G - 1j * delta) / (4 * (G - 1j * delta) ** 2 + W**2)
    d = structure_function(spec, np.asarray(omega_lambda, dtype=float))
    out = 8 * o0**2 * d / (np.pi * norm**2) * np.abs(steady + bound) ** 2
    if np.ndim(out) == 0:
        return float(out)
    return out

"""Reservoir parameters, the gapped structure function and derived constants.

Frequencies and rates are plain floats in whatever unit the caller picks.
The presets and the CLI use units of the coupling strength (``omega_big0 = 1``),
so times come out in units of ``1 / omega_big0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORMALIZATION_TOL = 1e-12
GAP_RTOL = 1e-12
RESONANCE_TOL = 1e-12


class InvalidSpecError(ValueError):
    """Raised when an operation receives a spec that fails validation."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid reservoir spec: " + "; ".join(report.violations))


@dataclass(frozen=True)
class ReservoirSpec:
    """Two same-centre Lorentzians of opposite sign plus the atom parameters.

    ``D(w) = w1*gamma1/((w-wc)^2 + gamma1^2/4) - w2*gamma2/((w-wc)^2 + gamma2^2/4)``
    """

    gamma1: float
    gamma2: float
    w1: float
    w2: float
    omega_c: float = 0.0
    omega_0: float = 0.0
    omega_big0: float = 1.0

    @classmethod
    def perfect_gap(cls, gamma1: float, gamma2: float, omega_big0: float = 1.0,
                    omega_c: float = 0.0, detuning: float = 0.0) -> "ReservoirSpec":
        """Weights fixed by ``w1 - w2 = 1`` and ``gamma1*w2 = gamma2*w1``.

        Needs ``gamma1 > gamma2 > 0``.
        """
        if not gamma1 > gamma2 > 0:
            raise ValueError("a perfect gap needs gamma1 > gamma2 > 0")
        w1 = gamma1 / (gamma1 - gamma2)
        w2 = gamma2 / (gamma1 - gamma2)
        return cls(gamma1, gamma2, w1, w2, omega_c, omega_c + detuning, omega_big0)

    @classmethod
    def lorentzian(cls, gamma1: float, omega_big0: float = 1.0,
                   omega_c: float = 0.0, detuning: float = 0.0) -> "ReservoirSpec":
        """Single Lorentzian (``gamma2 = w2 = 0``, ``w1 = 1``)."""
        return cls(gamma1, 0.0, 1.0, 0.0, omega_c, omega_c + detuning, omega_big0)

    @property
    def detuning(self) -> float:
        return self.omega_0 - self.omega_c


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]
    perfect_gap: bool
    resonant: bool
    oscillatory_regime: bool

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class DerivedConstants:
    """Constants of the pseudomode model.

    ``big_omega`` is always complex; it is purely imaginary in the overdamped
    regime ``16*omega_big0^2 < (gamma1 - gamma2)^2``.
    """

    gamma_p1: float
    gamma_p2: float
    v: float
    big_gamma: float
    big_omega: complex
    eta: float


def _is_perfect_gap(spec: ReservoirSpec) -> bool:
    if spec.w2 <= 0 or spec.gamma2 <= 0:
        # A single Lorentzian satisfies gamma1*w2 == gamma2*w1 trivially but has no gap.
        return False
    lhs, rhs = spec.gamma1 * spec.w2, spec.gamma2 * spec.w1
    return abs(lhs - rhs) <= GAP_RTOL * max(abs(lhs), abs(rhs))


def validate_spec(spec: ReservoirSpec) -> ValidationReport:
    """Check every parameter invariant and report the regime flags.

    Never raises; operations that need a valid spec call :func:`require_valid`.
    """
    violations = []
    values = (spec.gamma1, spec.gamma2, spec.w1, spec.w2,
              spec.omega_c, spec.omega_0, spec.omega_big0)
    if not all(math.isfinite(x) for x in values):
        violations.append("all parameters must be finite")
        return ValidationReport(tuple(violations), False, False, False)

    if not spec.gamma1 > 0:
        violations.append(f"gamma1 must be > 0 (got {spec.gamma1!r})")
    if not spec.gamma2 >= 0:
        violations.append(f"gamma2 must be >= 0 (got {spec.gamma2!r})")
    if not spec.w1 > 0:
        violations.append(f"w1 must be > 0 (got {spec.w1!r})")
    if not spec.w2 >= 0:
        violations.append(f"w2 must be >= 0 (got {spec.w2!r})")
    if not spec.omega_big0 > 0:
        violations.append(f"omega_big0 must be > 0 (got {spec.omega_big0!r})")
    if abs(spec.w1 - spec.w2 - 1.0) > NORMALIZATION_TOL:
        violations.append(
            f"normalization requires w1 - w2 = 1 (got {spec.w1 - spec.w2!r})")
    if spec.gamma2 == 0 and spec.w2 != 0:
        violations.append("w2 must be 0 when gamma2 is 0")

    perfect_gap = _is_perfect_gap(spec)
    if not violations and not perfect_gap:
        # D >= 0 everywhere iff both pseudomode decay rates are >= 0
        gp1 = spec.w1 * spec.gamma2 - spec.w2 * spec.gamma1
        gp2 = spec.w1 * spec.gamma1 - spec.w2 * spec.gamma2
        scale = max(spec.w1 * spec.gamma2, spec.w2 * spec.gamma1)
        if gp1 < -GAP_RTOL * scale:
            violations.append(
                "structure function is negative at the centre (w1*gamma2 < w2*gamma1)")
        if not gp2 > 0:
            violations.append(
                "structure function is negative in the wings (w1*gamma1 <= w2*gamma2)")

    resonant = abs(spec.omega_0 - spec.omega_c) <= RESONANCE_TOL * max(
        1.0, abs(spec.omega_c))
    oscillatory = 16 * spec.omega_big0**2 > (spec.gamma1 - spec.gamma2) ** 2
    return ValidationReport(tuple(violations), perfect_gap, resonant, oscillatory)


def require_valid(spec: ReservoirSpec) -> ValidationReport:
    report = validate_spec(spec)
    if not report.ok:
        raise InvalidSpecError(report)
    return report


def structure_function(spec: ReservoirSpec, omega):
    """Evaluate ``D(omega)``; accepts scalars or arrays.

    Written over a common denominator,
    ``D = (x^2 * gp2 + gamma1*gamma2*gp1/4) / ((x^2 + gamma1^2/4)(x^2 + gamma2^2/4))``
    with ``x = omega - omega_c`` and ``gp1, gp2`` the pseudomode decay rates, so a
    perfect gap gives exactly zero at the centre and no cancellation near it.
    """
    report = require_valid(spec)
    x2 = (np.asarray(omega, dtype=float) - spec.omega_c) ** 2
    a2 = 0.25 * spec.gamma1**2
    if spec.w2 == 0:
        d = spec.w1 * spec.gamma1 / (x2 + a2)
    else:
        b2 = 0.25 * spec.gamma2**2
        gp1 = 0.0 if report.perfect_gap else spec.w1 * spec.gamma2 - spec.w2 * spec.gamma1
        gp2 = spec.w1 * spec.gamma1 - spec.w2 * spec.gamma2
        num = x2 * gp2 + spec.gamma1 * spec.gamma2 * max(gp1, 0.0) / 4
        d = num / ((x2 + a2) * (x2 + b2))
    if np.ndim(d) == 0:
        return float(d)
    return d


def derive_constants(spec: ReservoirSpec) -> DerivedConstants:
    report = require_valid(spec)
    g1, g2, w1, w2, o0 = spec.gamma1, spec.gamma2, spec.w1, spec.w2, spec.omega_big0
    gamma_p1 = 0.0 if report.perfect_gap else max(w1 * g2 - w2 * g1, 0.0)
    gamma_p2 = w1 * g1 - w2 * g2
    v = math.sqrt(w1 * w2) * (g1 - g2) / 2
    big_gamma = (g1 + g2) / 4
    # principal branch: positive imaginary axis when the radicand is negative
    big_omega = 0.5 * complex(np.sqrt(complex(16 * o0**2 - (g1 - g2) ** 2)))
    eta = 2 * o0 / math.sqrt(g1 * g2) if g1 * g2 > 0 else math.inf
    return DerivedConstants(gamma_p1, gamma_p2, v, big_gamma, big_omega, eta)

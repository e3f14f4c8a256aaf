"""Spontaneous emission of a two-level atom into a band-gap reservoir.

The reservoir structure function is a difference of two same-centre
Lorentzians. The package offers closed-form amplitudes (perfect gap, resonant
atom), a pseudomode ODE integrator, a brute-force discretized-bath oracle,
reservoir spectra and currents, and concurrence-based entanglement measures.
"""

from .analytic import (AmplitudeState, AnalyticUnavailableError, ValidityWindowError,
                       amplitudes_closed_form, bath_amplitude_closed_form,
                       spectrum_longtime, trapping_fractions, trapping_limits)
from .core import (DerivedConstants, InvalidSpecError, ReservoirSpec, ValidationReport,
                   derive_constants, require_valid, structure_function, validate_spec)
from .dynamics import (BathGrid, BathState, IntegrationError, RecurrenceWarning,
                       build_bath_grid, integrate_bath, integrate_pseudomodes)
from .entanglement import (ConcurrenceRecord, EntanglementTotals, TraceViolationError,
                           concurrences, density_atom_modes, density_modes_modes,
                           density_modes_row, entanglement_totals)
from .observables import (CurrentSlice, SpectrumSlice, closed_form_bath_state, current,
                          current_balance, spectrum)
from .scenario import (ConfigError, RunReport, ScenarioConfig, load_config, preset_config,
                       run_scenario)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

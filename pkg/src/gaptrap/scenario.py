"""Scenario configs, figure presets and the CSV/JSON emitting runner."""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analytic, dynamics, entanglement, observables
from .core import InvalidSpecError, ReservoirSpec, derive_constants, validate_spec

SCHEMA_VERSION = 1
PATHS = ("analytic", "pseudomode_ode", "bath_oracle")
OUTPUTS = ("populations", "spectrum", "currents", "concurrences", "densities",
           "totals", "trapping_sweep")
_NEEDS = {
    "populations": set(PATHS),
    "concurrences": {"analytic", "pseudomode_ode"},
    "spectrum": {"analytic", "bath_oracle"},
    "currents": {"analytic", "bath_oracle"},
    "densities": {"analytic", "bath_oracle"},
    "totals": {"analytic", "bath_oracle"},
    "trapping_sweep": set(PATHS),
}
FD_STEP = 1e-3

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PRECONDITION = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    spec: ReservoirSpec
    paths: tuple[str, ...] = ("pseudomode_ode",)
    outputs: tuple[str, ...] = ("populations",)
    t_max: float = 50.0
    t_steps: int = 501
    n_modes: int = 4000
    cutoff: float = 40.0
    tol: float = 1e-9
    output_dir: str = "out"
    window: float = 5.0
    spectrum_times: tuple[float, ...] | None = None
    snapshot_times: tuple[float, ...] = ()
    mu_offset: float = 0.1
    reference_spec: ReservoirSpec | None = None
    eta_range: tuple[float, float, int] = (0.05, 10.0, 50)
    name: str = "custom"

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.t_steps)


# -- config (de)serialisation ------------------------------------------------

_SPEC_KEYS = ("gamma1", "gamma2", "w1", "w2", "omega_c", "omega_0", "omega_big0")
_TOP_KEYS = {"schema_version", "spec", "paths", "outputs", "t_max", "t_steps", "bath",
             "tol", "output_dir", "window", "spectrum_times", "snapshot_times",
             "mu_offset", "reference_spec", "eta_range", "name"}


def _spec_from_dict(d, where: str) -> ReservoirSpec:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(d) - set(_SPEC_KEYS) - {"weight_ratio"}
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    kw = {}
    for key in _SPEC_KEYS:
        if key in d:
            kw[key] = _number(d[key], f"{where}.{key}")
    if "weight_ratio" in d:
        # W1 = r * W2 together with W1 - W2 = 1
        if "w1" in d or "w2" in d:
            raise ConfigError(f"{where}: give either weight_ratio or w1/w2, not both")
        r = _number(d["weight_ratio"], f"{where}.weight_ratio")
        if not r > 1:
            raise ConfigError(f"{where}.weight_ratio: must be > 1")
        kw["w1"], kw["w2"] = r / (r - 1), 1 / (r - 1)
    for key in ("gamma1", "gamma2", "w1", "w2"):
        if key not in kw:
            raise ConfigError(f"{where}: missing required key '{key}'")
    return ReservoirSpec(**kw)


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _names(x, allowed, where):
    if not isinstance(x, list) or not x:
        raise ConfigError(f"{where}: expected a non-empty list")
    bad = [v for v in x if v not in allowed]
    if bad:
        raise ConfigError(f"{where}: unknown value(s) {bad}; allowed: {list(allowed)}")
    return tuple(dict.fromkeys(x))


def config_from_dict(d: dict) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ConfigError("config: top level must be an object")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"config: unknown key(s) {sorted(unknown)}")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r}")
    if "spec" not in d:
        raise ConfigError("config: missing required key 'spec'")
    kw = {"spec": _spec_from_dict(d["spec"], "spec")}
    if "paths" in d:
        kw["paths"] = _names(d["paths"], PATHS, "paths")
    if "outputs" in d:
        kw["outputs"] = _names(d["outputs"], OUTPUTS, "outputs")
    for key in ("t_max", "tol", "window", "mu_offset"):
        if key in d:
            kw[key] = _number(d[key], key)
    if "t_steps" in d:
        if not isinstance(d["t_steps"], int) or d["t_steps"] < 2:
            raise ConfigError("t_steps: expected an integer >= 2")
        kw["t_steps"] = d["t_steps"]
    if "bath" in d:
        bath = d["bath"]
        if not isinstance(bath, dict) or set(bath) - {"n_modes", "cutoff"}:
            raise ConfigError("bath: expected an object with keys n_modes, cutoff")
        if "n_modes" in bath:
            if not isinstance(bath["n_modes"], int) or bath["n_modes"] < 2:
                raise ConfigError("bath.n_modes: expected an integer >= 2")
            kw["n_modes"] = bath["n_modes"]
        if "cutoff" in bath:
            kw["cutoff"] = _number(bath["cutoff"], "bath.cutoff")
    if "output_dir" in d:
        if not isinstance(d["output_dir"], str):
            raise ConfigError("output_dir: expected a string")
        kw["output_dir"] = d["output_dir"]
    if "name" in d:
        kw["name"] = str(d["name"])
    for key in ("spectrum_times", "snapshot_times"):
        if key in d and d[key] is not None:
            if not isinstance(d[key], list):
                raise ConfigError(f"{key}: expected a list of times")
            kw[key] = tuple(_number(v, key) for v in d[key])
    if d.get("reference_spec") is not None:
        kw["reference_spec"] = _spec_from_dict(d["reference_spec"], "reference_spec")
    if "eta_range" in d:
        er = d["eta_range"]
        if (not isinstance(er, list) or len(er) != 3 or not isinstance(er[2], int)):
            raise ConfigError("eta_range: expected [eta_min, eta_max, count]")
        kw["eta_range"] = (_number(er[0], "eta_range[0]"),
                           _number(er[1], "eta_range[1]"), er[2])
    cfg = ScenarioConfig(**kw)
    check_config(cfg)
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "name": cfg.name,
        "spec": asdict(cfg.spec),
        "paths": list(cfg.paths),
        "outputs": list(cfg.outputs),
        "t_max": cfg.t_max,
        "t_steps": cfg.t_steps,
        "bath": {"n_modes": cfg.n_modes, "cutoff": cfg.cutoff},
        "tol": cfg.tol,
        "output_dir": cfg.output_dir,
        "window": cfg.window,
        "spectrum_times": None if cfg.spectrum_times is None else list(cfg.spectrum_times),
        "snapshot_times": list(cfg.snapshot_times),
        "mu_offset": cfg.mu_offset,
        "reference_spec": None if cfg.reference_spec is None else asdict(cfg.reference_spec),
        "eta_range": list(cfg.eta_range),
    }
    return d


def load_config(path) -> ScenarioConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(data)


def check_config(cfg: ScenarioConfig) -> None:
    """Reject option combinations no computation path can serve."""
    for out in cfg.outputs:
        if not _NEEDS[out] & set(cfg.paths):
            raise ConfigError(
                f"outputs: '{out}' is incompatible with paths {list(cfg.paths)}; "
                f"it needs one of {sorted(_NEEDS[out])}")
    if cfg.reference_spec is not None and "spectrum" not in cfg.outputs:
        raise ConfigError("reference_spec: only used together with the spectrum output")
    if "densities" in cfg.outputs and any(
            not 0 <= s <= cfg.t_max for s in cfg.snapshot_times):
        raise ConfigError("snapshot_times: must lie within [0, t_max]")
    if not cfg.t_max > 0 or not cfg.tol > 0 or not cfg.window > 0:
        raise ConfigError("t_max, tol and window must be > 0")
    lo, hi, count = cfg.eta_range
    if not 0 < lo < hi or count < 2:
        raise ConfigError("eta_range: need 0 < eta_min < eta_max and count >= 2")


# -- presets -----------------------------------------------------------------

def _weak():
    return ReservoirSpec.perfect_gap(10.0, 0.2)


def _strong():
    return ReservoirSpec.perfect_gap(0.5, 0.01)


PRESETS = {
    "fig1a": lambda: ScenarioConfig(_weak(), ("analytic", "pseudomode_ode"),
                                    ("populations",), name="fig1a"),
    "fig1b": lambda: ScenarioConfig(_weak(), ("analytic",), ("trapping_sweep",),
                                    name="fig1b"),
    "fig2a": lambda: ScenarioConfig(_weak(), ("analytic",), ("spectrum",), t_steps=101,
                                    name="fig2a"),
    "fig2b": lambda: ScenarioConfig(_strong(), ("analytic",), ("spectrum",), t_steps=101,
                                    name="fig2b"),
    "fig2c": lambda: ScenarioConfig(_weak(), ("analytic",), ("spectrum",), t_steps=101,
                                    spectrum_times=(50.0,),
                                    reference_spec=ReservoirSpec.lorentzian(10.0),
                                    name="fig2c"),
    "fig2d": lambda: ScenarioConfig(_strong(), ("analytic",), ("spectrum",), t_steps=101,
                                    spectrum_times=(50.0,),
                                    reference_spec=ReservoirSpec.lorentzian(0.5),
                                    name="fig2d"),
    "fig3": lambda: ScenarioConfig(_weak(), ("bath_oracle",), ("currents",), t_steps=101,
                                   tol=1e-11, name="fig3"),
    "fig4a": lambda: ScenarioConfig(_weak(), ("analytic",), ("concurrences",),
                                    name="fig4a"),
    "fig4b": lambda: ScenarioConfig(_strong(), ("analytic",), ("concurrences",),
                                    t_steps=1001, name="fig4b"),
    # 4001 cells of width 0.02 put a mode exactly at omega_c + 0.1
    "fig5": lambda: ScenarioConfig(_weak(), ("analytic",), ("densities",), t_steps=101,
                                   n_modes=4001, cutoff=40.01, window=2.5,
                                   snapshot_times=(10.0, 30.0), name="fig5"),
    "fig7": lambda: ScenarioConfig(_weak(), ("analytic",), ("totals",), t_steps=201,
                                   name="fig7"),
}


class UnknownPresetError(KeyError):
    def __str__(self):
        return f"unknown preset {self.args[0]!r}; valid names: {', '.join(PRESETS)}"


def preset_config(name: str, **overrides) -> ScenarioConfig:
    if name not in PRESETS:
        raise UnknownPresetError(name)
    cfg = PRESETS[name]()
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    check_config(cfg)
    return cfg


# -- output helpers ------------------------------------------------------------

def write_csv(path: Path, header, columns) -> None:
    """LF-terminated CSV with ``%.12e`` numbers and a one-line header."""
    data = np.column_stack([np.asarray(c, dtype=float).ravel() for c in columns])
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, fmt="%.12e", delimiter=",")


def _long(times, axis, values):
    tt = np.repeat(times, axis.size)
    aa = np.tile(axis, times.size)
    return tt, aa, values.ravel()


def _nearest(times, targets):
    idx = [int(np.argmin(np.abs(times - s))) for s in targets]
    return sorted(dict.fromkeys(idx))


@dataclass
class RunReport:
    config: dict
    derived: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    recurrence_horizon: float | None = None
    t_beyond_horizon: bool = False
    coverage: float | None = None
    warnings: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    wall_time_s: float = 0.0
    errors: list = field(default_factory=list)
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "report.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


def _derived_dict(spec):
    k = derive_constants(spec)
    return {"gamma_p1": k.gamma_p1, "gamma_p2": k.gamma_p2, "v": k.v,
            "big_gamma": k.big_gamma,
            "big_omega": [k.big_omega.real, k.big_omega.imag],
            "eta": k.eta if math.isfinite(k.eta) else None}


# -- runner ----------------------------------------------------------------------

def _exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, InvalidSpecError)):
        return EXIT_CONFIG
    if isinstance(exc, (analytic.AnalyticUnavailableError, analytic.ValidityWindowError)):
        return EXIT_PRECONDITION
    return EXIT_NUMERIC


def run_scenario(cfg: ScenarioConfig, output_dir: str | Path | None = None) -> RunReport:
    """Run every requested path and write one CSV per observable plus ``report.json``.

    Never raises for numerical or precondition failures: they are recorded in
    ``report.errors`` with the matching ``exit_code`` and the report is still
    written.
    """
    start = time.perf_counter()
    out_dir = Path(output_dir if output_dir is not None else cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = RunReport(config=config_to_dict(cfg))
    try:
        check_config(cfg)
        _run(cfg, out_dir, report)
    except Exception as exc:  # report-and-continue boundary
        report.errors.append({"type": type(exc).__name__, "message": str(exc)})
        report.exit_code = _exit_code_for(exc)
    report.wall_time_s = round(time.perf_counter() - start, 3)
    report.write(out_dir)
    return report


def _run(cfg: ScenarioConfig, out_dir: Path, report: RunReport) -> None:
    spec = cfg.spec
    val = validate_spec(spec)
    report.flags = {"valid": val.ok, "perfect_gap": val.perfect_gap,
                    "resonant": val.resonant, "oscillatory_regime": val.oscillatory_regime}
    if not val.ok:
        raise InvalidSpecError(val)
    report.derived = _derived_dict(spec)

    grid = dynamics.build_bath_grid(spec, cfg.n_modes, cfg.cutoff)
    report.recurrence_horizon = grid.recurrence_horizon
    report.t_beyond_horizon = bool(cfg.t_max > grid.recurrence_horizon)
    report.coverage = grid.coverage
    bath_outputs = {"spectrum", "currents", "densities", "totals"} & set(cfg.outputs)
    uses_grid = bool(bath_outputs) or "bath_oracle" in cfg.paths
    if uses_grid:
        report.warnings.extend(grid.warnings)
    if report.t_beyond_horizon and uses_grid:
        report.warnings.append(
            f"t_max {cfg.t_max:g} exceeds the recurrence horizon {grid.recurrence_horizon:g}")

    t = cfg.times
    o0 = spec.omega_big0
    window = np.abs(grid.delta) <= cfg.window

    def emit(name, header, columns):
        write_csv(out_dir / name, header, columns)
        report.files.append(name)

    amps = {}
    if "analytic" in cfg.paths:
        amps["analytic"] = analytic.amplitudes_closed_form(spec, t)
    if "pseudomode_ode" in cfg.paths and {"populations", "concurrences"} & set(cfg.outputs):
        amps["ode"] = dynamics.integrate_pseudomodes(spec, t, cfg.tol)

    baths = {}
    if bath_outputs and "analytic" in cfg.paths:
        baths["analytic"] = observables.closed_form_bath_state(spec, grid, t)
    if "bath_oracle" in cfg.paths:
        baths["oracle"] = _oracle(spec, grid, t, cfg, "currents" in cfg.outputs)

    if "populations" in cfg.outputs:
        for label, st in amps.items():
            pa, p1, p2, pv = st.populations
            emit(f"populations_{label}.csv",
                 ["omega0_t", "pop_atom", "pop_pm1", "pop_pm2", "pop_vacuum"],
                 [t * o0, pa, p1, p2, pv])
        if "oracle" in baths:
            st = baths["oracle"]["on_grid"]
            pr = np.sum(np.abs(st.c_lambdas) ** 2, axis=-1)
            emit("populations_oracle.csv", ["omega0_t", "pop_atom", "pop_reservoir"],
                 [t * o0, np.abs(st.c_a) ** 2, pr])

    if "concurrences" in cfg.outputs:
        for label, st in amps.items():
            rec = entanglement.concurrences(st)
            emit(f"concurrences_{label}.csv",
                 ["omega0_t", "C2_a1", "C2_a2", "C2_a12", "tangle", "C_a1", "C_a2", "C_a12"],
                 [t * o0, rec.c2_a1, rec.c2_a2, rec.c2_a12, rec.tangle,
                  np.sqrt(rec.c2_a1), np.sqrt(rec.c2_a2), np.sqrt(rec.c2_a12)])

    if "trapping_sweep" in cfg.outputs:
        lo, hi, count = cfg.eta_range
        etas = np.union1d(np.logspace(math.log10(lo), math.log10(hi), count),
                          [1.0] if lo <= 1.0 <= hi else [])
        c, a1, pi = analytic.trapping_fractions(etas)
        emit("trapping_sweep.csv",
             ["eta", "c_a_inf", "a_1_inf", "pop_atom_inf", "pop_pm1_inf", "pop_vacuum_inf"],
             [etas, c, a1, c**2, a1**2, pi])
        report.notes["eta_sweep"] = {"range": [lo, hi], "log_spaced_points": count,
                                     "extra_points": [1.0] if lo <= 1.0 <= hi else []}

    for label, bath in baths.items():
        st = bath["on_grid"] if label == "oracle" else bath
        spec_slice = observables.spectrum(grid, st)
        if "spectrum" in cfg.outputs:
            idx = (range(t.size) if cfg.spectrum_times is None
                   else _nearest(t, cfg.spectrum_times))
            idx = list(idx)
            tt, dd, ss = _long(t[idx] * o0, grid.delta[window] / o0,
                               spec_slice.values[idx][:, window] * o0)
            emit(f"spectrum_{label}.csv", ["omega0_t", "delta_over_omega0", "S_times_omega0"],
                 [tt, dd, ss])
        if "currents" in cfg.outputs:
            cur = observables.current(grid, st)
            tt, dd, jj = _long(t * o0, grid.delta[window] / o0, cur.j_values[:, window])
            emit(f"currents_{label}.csv", ["omega0_t", "delta_over_omega0", "J"], [tt, dd, jj])
            interior = t >= 2 * FD_STEP
            if label == "oracle":
                rate = bath["rate"]
            else:
                def pop(ts):
                    return np.abs(analytic.amplitudes_closed_form(spec, ts).c_a) ** 2
                rate = observables.centred_derivative(pop, t[interior], FD_STEP)
            emit(f"net_current_{label}.csv",
                 ["omega0_t", "Q_over_omega0", "minus_dpop_dt_over_omega0"],
                 [t[interior] * o0, cur.q[interior] / o0, -rate / o0])
        if "densities" in cfg.outputs:
            _emit_densities(emit, cfg, grid, st, spec_slice, window, label)
        if "totals" in cfg.outputs:
            tot = entanglement.entanglement_totals(st.c_a, spec_slice)
            emit(f"totals_{label}.csv",
                 ["omega0_t", "C2_A", "C2_R", "C2", "reservoir_population"],
                 [t * o0, tot.c2_a_total, tot.c2_r_total, tot.c2_total, spec_slice.total])

    if cfg.reference_spec is not None:
        _emit_reference(emit, cfg, report)


def _oracle(spec, grid, t, cfg, with_rate):
    if with_rate:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", dynamics.RecurrenceWarning)
            states, rate, _ = observables.integrate_with_rate(spec, grid, t, cfg.tol, FD_STEP)
        return {"on_grid": states, "rate": rate}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", dynamics.RecurrenceWarning)
        return {"on_grid": dynamics.integrate_bath(spec, grid, t, cfg.tol)}


def _emit_densities(emit, cfg, grid, st, spec_slice, window, label):
    t = cfg.times
    o0 = cfg.spec.omega_big0
    e_a = entanglement.density_atom_modes(st.c_a, spec_slice)
    tt, dd, ee = _long(t * o0, grid.delta[window] / o0, e_a[:, window] * o0)
    emit(f"density_atom_{label}.csv", ["omega0_t", "delta_over_omega0", "E_A_times_omega0"],
         [tt, dd, ee])
    mu = int(np.argmin(np.abs(grid.delta - cfg.mu_offset)))
    row = entanglement.density_modes_row(spec_slice, mu)
    tt, dd, ee = _long(t * o0, grid.delta[window] / o0, row[:, window] * o0**2)
    emit(f"density_row_{label}.csv",
         ["omega0_t", "delta_lambda_over_omega0", "E_R_times_omega0_sq"], [tt, dd, ee])
    for i in _nearest(t, cfg.snapshot_times):
        snap = observables.SpectrumSlice(t[i], grid.delta[window],
                                         spec_slice.values[i][window], grid.d_omega)
        mat = entanglement.density_modes_modes(snap, materialize=True)
        axis = grid.delta[window] / o0
        emit(f"density_modes_t{t[i] * o0:g}_{label}.csv",
             ["delta_lambda_over_omega0", "delta_mu_over_omega0", "E_R_times_omega0_sq"],
             [np.repeat(axis, axis.size), np.tile(axis, axis.size), mat.ravel() * o0**2])


def _emit_reference(emit, cfg, report):
    ref = cfg.reference_spec
    grid = dynamics.build_bath_grid(ref, cfg.n_modes, cfg.cutoff)
    t = cfg.times
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", dynamics.RecurrenceWarning)
        st = dynamics.integrate_bath(ref, grid, t, cfg.tol)
    s = observables.spectrum(grid, st)
    window = np.abs(grid.delta) <= cfg.window
    idx = list(range(t.size)) if cfg.spectrum_times is None else _nearest(t, cfg.spectrum_times)
    o0 = ref.omega_big0
    tt, dd, ss = _long(t[idx] * o0, grid.delta[window] / o0, s.values[idx][:, window] * o0)
    emit("spectrum_reference_oracle.csv",
         ["omega0_t", "delta_over_omega0", "S_times_omega0"], [tt, dd, ss])
    report.notes["reference"] = {"spec": asdict(ref), "coverage": grid.coverage,
                                 "warnings": list(grid.warnings)}

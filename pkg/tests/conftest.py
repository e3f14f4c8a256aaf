"""Shared parameter sets and session-scoped oracle runs."""

import warnings

import numpy as np
import pytest
from hypothesis import strategies as st

from gaptrap import ReservoirSpec, build_bath_grid, integrate_bath
from gaptrap.dynamics import RecurrenceWarning


def weak_spec(**kw):
    """Gamma1 = 10, Gamma2 = 0.2 (W1 = 50 W2): overdamped, strong trapping."""
    return ReservoirSpec.perfect_gap(10.0, 0.2, **kw)


def strong_spec(**kw):
    """Gamma1 = 0.5, Gamma2 = 0.01: oscillatory regime."""
    return ReservoirSpec.perfect_gap(0.5, 0.01, **kw)


@pytest.fixture
def weak():
    return weak_spec()


@pytest.fixture
def strong():
    return strong_spec()


@st.composite
def perfect_gap_specs(draw):
    g1 = draw(st.floats(0.05, 20.0))
    ratio = draw(st.floats(0.002, 0.9))
    o0 = draw(st.floats(0.1, 3.0))
    return ReservoirSpec.perfect_gap(g1, g1 * ratio, omega_big0=o0)


def _w2_bound(g1, g2):
    """Largest w2 (with w1 = 1 + w2) keeping D >= 0 at the centre and in the wings.

    Centre: w1*g2 >= w2*g1. Wings: w1*g1 > w2*g2. Capped at 2.
    """
    if g1 > g2:
        return min(2.0, g2 / (g1 - g2))
    if g1 < g2:
        return min(2.0, g1 / (g2 - g1))
    return 2.0


@st.composite
def general_specs(draw):
    """Valid specs, possibly with an imperfect gap and a detuned atom."""
    g1 = draw(st.floats(0.1, 10.0))
    g2 = draw(st.floats(0.05, 10.0))
    w2 = draw(st.floats(0.0, 0.999)) * _w2_bound(g1, g2)
    det = draw(st.floats(-1.0, 1.0))
    o0 = draw(st.floats(0.2, 2.0))
    return ReservoirSpec(g1, g2, 1.0 + w2, w2, 0.0, det, o0)


def random_perfect_gap(rng, n):
    out = []
    for _ in range(n):
        g1 = rng.uniform(0.1, 15.0)
        out.append(ReservoirSpec.perfect_gap(g1, g1 * rng.uniform(0.005, 0.8),
                                             omega_big0=rng.uniform(0.2, 2.0)))
    return out


def random_general(rng, n):
    out = []
    for _ in range(n):
        g1, g2 = rng.uniform(0.2, 10.0, size=2)
        w2 = rng.uniform(0.0, 0.999) * _w2_bound(g1, g2)
        out.append(ReservoirSpec(g1, g2, 1.0 + w2, w2, 0.0, rng.uniform(-1, 1),
                                 rng.uniform(0.2, 2.0)))
    return out


ORACLE_TIMES = np.linspace(0.0, 50.0, 101)


def _oracle(n_modes, cutoff=40.0, tol=1e-9):
    spec = weak_spec()
    grid = build_bath_grid(spec, n_modes, cutoff)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RecurrenceWarning)
        return grid, integrate_bath(spec, grid, ORACLE_TIMES, tol)


@pytest.fixture(scope="session")
def oracle_4000():
    return _oracle(4000)


@pytest.fixture(scope="session")
def oracle_8000():
    return _oracle(8000)


# -- acceptance reporting ----------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` logs one PASS/FAIL line and asserts ``ok``."""
    log = request.config.stash[_ACCEPTANCE]

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {detail}"
        log.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(log):
        terminalreporter.write_line(line)

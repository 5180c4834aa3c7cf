"""Shared fixtures and the acceptance summary printed at the end of a run."""

import math

import numpy as np
import pytest

from hompulse import ExperimentGeometry

ACCEPTANCE_LINES: list[str] = []


def record(number: int, title: str, passed: bool, detail: str) -> str:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
        terminalreporter.write_line(line)


def random_geometry(rng: np.random.Generator, equal_inputs: bool = False) -> ExperimentGeometry:
    """Delays in [-5, 5], widths log-uniform in [0.2, 3]."""
    t = rng.uniform(-5.0, 5.0, size=4)
    d = np.exp(rng.uniform(math.log(0.2), math.log(3.0), size=4))
    if equal_inputs:
        t[1] = t[0]
        d[1] = d[0]
    return ExperimentGeometry(*map(float, t), *map(float, d))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fig2_geom():
    return ExperimentGeometry(2.0, 3.0, 2.0, 3.0)


def local_extrema(values):
    """Interior indices strictly above (maxima) or below (minima) both neighbours."""
    v = np.asarray(values)
    inner = np.arange(1, len(v) - 1)
    maxima = inner[(v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])]
    minima = inner[(v[1:-1] < v[:-2]) & (v[1:-1] < v[2:])]
    return list(maxima), list(minima)

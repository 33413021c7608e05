import numpy as np
import pytest

from holonomy_lab.algebra import RotationPath
from holonomy_lab.gauge import bpst
from holonomy_lab.geometry import CircleCurve, FigureEightCurve, FlatChart, LineCurve, S4StereographicChart, SplineCurve
from holonomy_lab.levy import PathSample
from holonomy_lab.transport import TransportOptions

# five pinned test curves, used on both charts
PINNED_CURVES = {
    "circle": CircleCurve((0.2, 0.1, 0.0, 0.0), 0.8),
    "line": LineCurve((-1.0, -0.5, 0.3, 0.0), (1.0, 0.4, -0.2, 0.5)),
    "figure_eight": FigureEightCurve((0.0, 0.0, 0.1, 0.0), 0.7, (1, 2)),
    "spline": SplineCurve([[0, 0, 0, 0], [0.5, 0.3, -0.2, 0.1], [0.2, 0.9, 0.4, -0.3], [-0.4, 0.5, 0.1, 0.6]]),
    "tilted_circle": CircleCurve((0.1, -0.2, 0.3, 0.1), 0.6, (0, 3)),
}

# converse witness found by scanning the pinned curves: right-basis W with the largest norm
WITNESS = ("flat", "line", 0)

CHARTS = {"flat": FlatChart(), "s4": S4StereographicChart()}

LEFT = [RotationPath.from_coefficients(left=np.eye(3)[i], name=f"e{i + 1}") for i in range(3)]
RIGHT = [RotationPath.from_coefficients(right=np.eye(3)[i], name=f"f{i + 1}") for i in range(3)]

DEFAULT = TransportOptions()

# acceptance results collected by tests/test_acceptance.py
ACCEPTANCE = {}


def record(criterion, ok, detail):
    ACCEPTANCE[criterion] = (bool(ok), detail)
    return ok


@pytest.fixture(scope="session")
def instanton():
    return bpst(1.0, (0.0, 0.0, 0.0, 0.0), "antidual")


@pytest.fixture(scope="session")
def instanton_samples(instanton):
    """PathSample of the instanton on every (chart, pinned curve) at the default grid."""
    return {(c, k): PathSample(instanton, chart, curve, DEFAULT) for c, chart in CHARTS.items() for k, curve in PINNED_CURVES.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, 11):
        if k in ACCEPTANCE:
            ok, detail = ACCEPTANCE[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: NOT RUN")

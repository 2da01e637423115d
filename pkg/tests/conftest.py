import numpy as np
import pytest

import grlmp

ACCEPTANCE_LINES: list[str] = []

# (op id, c, b) settings used across modules; two per family
UNIVARIATE_SETTINGS = [
    ("addition", 2.0, 0.0),
    ("addition", 0.5, 3.0),
    ("multiplication", 1.0, 2.0),
    ("multiplication", 3.5, 5.0),
    ("shifted_multiplication", 1.0, 1.0),
    ("shifted_multiplication", 0.7, 4.0),
    ("neg_quadratic", 1.0, 0.0),
    ("neg_quadratic", 2.5, 0.0),
]

CATALOG_B = {"addition": 0.0, "multiplication": 2.0, "shifted_multiplication": 1.0, "neg_quadratic": 0.0}


def make_uni(op_id, c, b):
    return grlmp.GrlmpDistribution(grlmp.builtin(op_id), c, b)


def make_bi(op_id, l1, l2, l12, b=None):
    return grlmp.BivariateGrlmp(grlmp.builtin(op_id), l1, l2, l12, CATALOG_B[op_id] if b is None else b)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest

ACCEPTANCE_RESULTS = []


def expand(counts):
    """Observations at cell coordinates, ``counts[i, j]`` copies of ``(i, j)``."""
    counts = np.asarray(counts)
    rows, cols = np.nonzero(counts)
    reps = counts[rows, cols]
    return np.repeat(rows, reps).astype(float), np.repeat(cols, reps).astype(float)


def close(a, b, tol):
    """Equal within ``tol``, treating two undefined (None/NaN) values as equal."""
    a = math.nan if a is None else float(a)
    b = math.nan if b is None else float(b)
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    return abs(a - b) <= tol


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {name} -- {detail}")

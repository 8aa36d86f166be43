import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from voigtmhd import spectral as sp  # noqa: E402
from voigtmhd.dynamics import random_solenoidal  # noqa: E402


def random_field(grid, rng, vector=True, mean_free=True, band_limited=True):
    """Random real field built in physical space (optionally mask-limited)."""
    shape = ((3,) if vector else ()) + grid.physical_shape
    c = sp.forward_array(rng.standard_normal(shape), grid.n)
    if band_limited:
        c = c * grid.dealias_mask
    if mean_free:
        c[..., 0, 0, 0] = 0.0
    return sp.SpectralField(c, grid, mean_free=mean_free)


def random_solenoidal_field(grid, rng, k0=2.0, norm=1.0):
    return random_solenoidal(grid, k0, norm, rng)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def grid8():
    return sp.make_grid(8)


@pytest.fixture(scope="session")
def grid16():
    return sp.make_grid(16)


ACCEPTANCE_LINES = []


def report_criterion(number, passed, detail):
    """Record one acceptance verdict for the end-of-run summary."""
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

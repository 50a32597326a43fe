from functools import lru_cache

import numpy as np
import pytest

from tensorxray import fanbeam, lattice, phantoms


@lru_cache(maxsize=None)
def forward(name: str, m: int, seed: int = 0, N: int = 256, band: int = 60):
    """(field, sinogram, lattice) for a phantom; cached across the session."""
    if name == "pedestal":
        f = phantoms.pedestal(m)
    else:
        f = phantoms.make_phantom(name, m, seed=seed, support=0.9)
    s = fanbeam.sinogram(f, N)
    l = lattice.analyze(fanbeam.g_from_sinogram(s), band, band)
    return f, s, l


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

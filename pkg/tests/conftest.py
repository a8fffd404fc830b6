import numpy as np
import pytest

from eewlan.channel import GainMatrices, RadioConfig
from eewlan.power import LinkSystem
from eewlan.rates import McsTable, default_mcs_table

NOISE = 1.6e-9  # mW, close to the 80 MHz thermal floor


def gains(a, b=None, noise=NOISE, tx_ap=None) -> GainMatrices:
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    b = np.zeros((n, n)) if b is None else np.asarray(b, dtype=float)
    noise = np.full(n, noise) if np.isscalar(noise) else np.asarray(noise, dtype=float)
    tx_ap = np.arange(n) if tx_ap is None else np.asarray(tx_ap)
    return GainMatrices(a, b, noise, tx_ap=tx_ap)


def blocked_pair(direct=1e-6, cross=1e-9, sense=1e-6) -> GainMatrices:
    """Two symmetric links whose transmitters always hear each other."""
    return gains([[direct, cross], [cross, direct]], [[0.0, sense], [sense, 0.0]])


@pytest.fixture
def config():
    return RadioConfig()


@pytest.fixture
def table():
    return default_mcs_table()


@pytest.fixture
def small_table():
    return McsTable.from_steps([(1.0, 10.0), (10.0, 50.0)])


def system(g, config=None, table=None, mode="min") -> LinkSystem:
    return LinkSystem(g, config or RadioConfig(), table or default_mcs_table(), power_mode=mode)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

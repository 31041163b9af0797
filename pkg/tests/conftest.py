"""Shared fixtures and a deterministic hypothesis profile."""

import numpy as np
import pytest
from hypothesis import settings

from ofdm_isac.frame import FrameConfig, make_alphabet

settings.register_profile("repro", deadline=None, derandomize=True, max_examples=30)
settings.load_profile("repro")

#: one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_cfg():
    """Tiny grid for exact/oracle checks."""
    return FrameConfig(
        n_subcarriers=64,
        n_symbols=16,
        subcarrier_spacing=30e3,
        cp_samples=16,
        carrier_frequency=3.5e9,
    )


@pytest.fixture(scope="session")
def desk_cfg():
    """Desk-scale grid used by the statistical checks."""
    return FrameConfig(
        n_subcarriers=256,
        n_symbols=64,
        subcarrier_spacing=30e3,
        cp_samples=18,
        carrier_frequency=3.5e9,
    )


@pytest.fixture(scope="session")
def qpsk():
    return make_alphabet("qpsk")


@pytest.fixture(scope="session")
def qam64():
    return make_alphabet("qam64")


def on_grid_reflection_bins(cfg, delay_bin, doppler_bin):
    """Physical (delay, doppler) of integer range-Doppler bins."""
    tau = delay_bin / cfg.sample_rate
    f_d = doppler_bin / (cfg.n_symbols * cfg.symbol_duration)
    return tau, f_d


@pytest.fixture(scope="session")
def grid_bins():
    return on_grid_reflection_bins

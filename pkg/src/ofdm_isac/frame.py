"""Modulation alphabets, OFDM frame configuration, and random symbol frames."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import speed_of_light

from .rng import as_generator

#: bits per I/Q axis for the built-in square constellations
_SQUARE_QAM_BITS = {"qpsk": 1, "qam16": 2, "qam64": 3}

ALPHABET_KINDS = ("qpsk", "qam16", "qam64", "custom")


def _gray_to_binary(g: int) -> int:
    b = 0
    while g:
        b ^= g
        g >>= 1
    return b


def _square_qam_points(bits_per_axis: int) -> np.ndarray:
    """Gray-labeled square QAM points, unit average power.

    Symbol index s carries the in-phase Gray bits in its high half and the
    quadrature Gray bits in its low half, so adjacent indices that differ in
    one bit map to adjacent amplitude levels. The ordering is fixed to keep
    frames reproducible across builds.
    """
    n_axis = 1 << bits_per_axis
    levels = np.array(
        [2 * _gray_to_binary(g) - (n_axis - 1) for g in range(n_axis)], dtype=float
    )
    idx = np.arange(n_axis * n_axis)
    points = levels[idx >> bits_per_axis] + 1j * levels[idx & (n_axis - 1)]
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


@dataclass(frozen=True)
class ModulationAlphabet:
    """A finite set of complex constellation points with unit average power."""

    points: np.ndarray
    kind: str

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex)
        if points.ndim != 1 or points.size == 0:
            raise ValueError("alphabet must be a non-empty vector of points")
        if not np.all(np.isfinite(points)):
            raise ValueError("alphabet contains non-finite points")
        mean_power = np.mean(np.abs(points) ** 2)
        if abs(mean_power - 1.0) > 1e-9:
            raise ValueError(
                f"alphabet must be normalized to unit average power, got {mean_power!r}"
            )
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return self.points.size


def make_alphabet(kind: str, points=None) -> ModulationAlphabet:
    """Build a named constellation or normalize a custom point list.

    Built-in kinds are Gray-labeled square constellations ("qpsk", "qam16",
    "qam64"). A "custom" alphabet is scaled to unit average power; note that
    the interference analysis additionally assumes zero mean, which custom
    point lists are not forced to satisfy.
    """
    kind = kind.lower()
    if kind in _SQUARE_QAM_BITS:
        return ModulationAlphabet(_square_qam_points(_SQUARE_QAM_BITS[kind]), kind)
    if kind != "custom":
        raise ValueError(f"unsupported alphabet kind {kind!r}")
    if points is None:
        raise ValueError("custom alphabet requires a point list")
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size == 0:
        raise ValueError("custom alphabet is empty")
    if not np.all(np.isfinite(pts)):
        raise ValueError("custom alphabet contains non-finite points")
    power = np.mean(np.abs(pts) ** 2)
    if power == 0:
        raise ValueError("custom alphabet has zero power")
    return ModulationAlphabet(pts / np.sqrt(power), "custom")


def kurtosis(alphabet: ModulationAlphabet) -> float:
    """Fourth moment of the alphabet, the self-interference scale factor.

    Requires unit average power (guaranteed by :func:`make_alphabet`).
    Constant-modulus alphabets give exactly 1.
    """
    power = np.abs(alphabet.points) ** 2
    if abs(np.mean(power) - 1.0) > 1e-9:
        raise ValueError("kurtosis requires a unit-average-power alphabet")
    return float(np.mean(power**2))


@dataclass(frozen=True)
class FrameConfig:
    """OFDM grid parameters.

    n_subcarriers:      number of subcarriers per symbol (N)
    n_symbols:          number of consecutive symbols per frame (M)
    subcarrier_spacing: subcarrier spacing in Hz
    cp_samples:         cyclic prefix length in samples at rate N * spacing
    carrier_frequency:  RF carrier in Hz
    """

    n_subcarriers: int
    n_symbols: int
    subcarrier_spacing: float
    cp_samples: int
    carrier_frequency: float

    def __post_init__(self):
        if self.n_subcarriers < 2 or self.n_symbols < 2:
            raise ValueError("need at least 2 subcarriers and 2 symbols")
        if self.subcarrier_spacing <= 0:
            raise ValueError("subcarrier spacing must be positive")
        if self.cp_samples < 0:
            raise ValueError("cyclic prefix length must be non-negative")
        if self.carrier_frequency <= 0:
            raise ValueError("carrier frequency must be positive")

    @property
    def sample_rate(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing

    @property
    def symbol_duration(self) -> float:
        """Duration of one symbol including the cyclic prefix, in seconds."""
        return (self.n_subcarriers + self.cp_samples) / self.sample_rate

    @property
    def range_resolution(self) -> float:
        """Distance covered by one delay bin, in meters."""
        return speed_of_light / (2.0 * self.sample_rate)

    @property
    def velocity_resolution(self) -> float:
        """Radial velocity covered by one Doppler bin, in m/s."""
        return speed_of_light / (
            2.0 * self.carrier_frequency * self.n_symbols * self.symbol_duration
        )


@dataclass(frozen=True)
class SymbolFrame:
    """An N x M matrix of transmit symbols drawn from one alphabet."""

    x: np.ndarray
    alphabet: ModulationAlphabet
    seed: int | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=complex)
        if x.ndim != 2:
            raise ValueError("frame must be a 2-D matrix")
        object.__setattr__(self, "x", x)

    @property
    def shape(self):
        return self.x.shape


def draw_frame(cfg: FrameConfig, alphabet: ModulationAlphabet, rng) -> SymbolFrame:
    """Draw an i.i.d. uniform frame from the alphabet.

    ``rng`` may be an integer seed (recorded on the frame), a SeedSequence, or
    an existing Generator. The same seed always yields the same frame.
    """
    gen, seed = as_generator(rng)
    idx = gen.integers(0, alphabet.size, size=(cfg.n_subcarriers, cfg.n_symbols))
    return SymbolFrame(alphabet.points[idx], alphabet, seed)

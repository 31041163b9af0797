"""Matched filtering and range-Doppler matrix computation."""

from __future__ import annotations

import numpy as np

from .channel import ReceiveFrame
from .frame import SymbolFrame


def matched_filter(rx: ReceiveFrame, frame: SymbolFrame) -> np.ndarray:
    """Remove the data modulation: entrywise product with the conjugate symbols."""
    if rx.y.shape != frame.x.shape:
        raise ValueError(f"receive shape {rx.y.shape} != frame shape {frame.x.shape}")
    return rx.y * np.conj(frame.x)


def compute_rdm(h_hat: np.ndarray) -> np.ndarray:
    """Complex range-Doppler matrix of a channel estimate.

    Inverse FFT along the subcarrier axis, FFT along the symbol axis, scaled
    by 1/(N*M) overall so that an on-grid reflection of complex amplitude c
    produces a single bin of value exactly c. This normalization is relied on
    by the cancellation stage, which subtracts synthesized amplitudes.
    """
    return np.fft.fft(np.fft.ifft(h_hat, axis=0), axis=1) / h_hat.shape[1]


def dtft_point(h_hat: np.ndarray, delay_bin: float, doppler_bin: float) -> complex:
    """Evaluate the range-Doppler transform at continuous bin coordinates.

    This is the exact double sum behind :func:`compute_rdm` at real-valued
    coordinates (the sinc interpolant of the bin grid); it is periodic in
    both axes and costs O(N*M) per point.
    """
    n_sub, n_sym = h_hat.shape
    along_subcarriers = np.exp(2j * np.pi * np.arange(n_sub) * (delay_bin / n_sub))
    along_symbols = np.exp(-2j * np.pi * np.arange(n_sym) * (doppler_bin / n_sym))
    return complex(along_subcarriers @ h_hat @ along_symbols) / (n_sub * n_sym)

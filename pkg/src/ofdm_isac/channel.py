"""Multi-reflection delay-Doppler sensing channel and AWGN application.

Sign conventions used throughout the package: a path delay tau appears on the
subcarrier axis as exp(-j 2 pi spacing tau n) and a Doppler shift f_D on the
symbol axis as exp(+j 2 pi T_sym f_D m), so that range-Doppler peaks land at
bin (tau * spacing * N, f_D * T_sym * M) with non-negative delay bins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import speed_of_light

from .errors import ScenarioInfeasibleError
from .frame import FrameConfig, SymbolFrame
from .rng import as_generator


def round_trip_delay(distance: float) -> float:
    """Two-way propagation delay of a target at ``distance`` meters."""
    return 2.0 * distance / speed_of_light


def doppler_shift(velocity: float, carrier_frequency: float) -> float:
    """Two-way Doppler shift of a target closing at ``velocity`` m/s."""
    return 2.0 * velocity * carrier_frequency / speed_of_light


@dataclass(frozen=True)
class TargetTruth:
    """Ground-truth point target: distance (m), radial velocity (m/s), RCS weight."""

    distance: float
    velocity: float
    rcs_weight: float = 1.0

    def __post_init__(self):
        if not (self.distance > 0 and np.isfinite(self.distance)):
            raise ValueError("target distance must be positive and finite")
        if not np.isfinite(self.velocity):
            raise ValueError("target velocity must be finite")
        if not (self.rcs_weight > 0 and np.isfinite(self.rcs_weight)):
            raise ValueError("rcs weight must be positive and finite")


@dataclass(frozen=True)
class Reflection:
    """One propagation path: linear amplitude, delay (s), Doppler (Hz), phase (rad)."""

    amplitude: float
    delay: float
    doppler: float
    phase: float

    def __post_init__(self):
        values = (self.amplitude, self.delay, self.doppler, self.phase)
        if not all(np.isfinite(v) for v in values):
            raise ValueError("reflection parameters must be finite")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative (sign goes into phase)")
        if self.delay < 0:
            raise ValueError("delay must be non-negative")


@dataclass(frozen=True)
class ReceiveFrame:
    """Frequency-domain receive matrix and the noise variance it was drawn with."""

    y: np.ndarray
    noise_variance: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=complex)
        if y.ndim != 2:
            raise ValueError("receive matrix must be 2-D")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be non-negative")
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class ScatteringParams:
    """Parametric diffuse-scattering surrogate for rough extended targets.

    Each specular return is split into a weakened specular ray plus ``n_rays``
    diffuse rays that together carry ``diffuse_fraction`` of the power, with
    delays spread over the target extent and jittered Doppler shifts. Total
    reflected power is conserved.
    """

    enabled: bool = False
    diffuse_fraction: float = 0.9
    n_rays: int = 8
    extent: float = 8.0
    doppler_jitter: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.diffuse_fraction <= 1.0:
            raise ValueError("diffuse fraction must lie in [0, 1]")
        if self.enabled and self.n_rays < 1:
            raise ValueError("need at least one diffuse ray when scattering is enabled")
        if self.extent < 0 or self.doppler_jitter < 0:
            raise ValueError("extent and doppler jitter must be non-negative")


def check_target_feasible(target: TargetTruth, cfg: FrameConfig) -> None:
    """Raise if a target violates the cyclic-prefix or Doppler-spread limits."""
    delay_samples = round_trip_delay(target.distance) * cfg.sample_rate
    if not delay_samples < cfg.cp_samples:
        raise ScenarioInfeasibleError(
            f"target at {target.distance} m: round-trip delay spans "
            f"{delay_samples:.2f} samples, cyclic prefix is {cfg.cp_samples}"
        )
    doppler = abs(doppler_shift(target.velocity, cfg.carrier_frequency))
    if not doppler < cfg.subcarrier_spacing / 10.0:
        raise ScenarioInfeasibleError(
            f"target at {target.velocity} m/s: Doppler {doppler:.1f} Hz exceeds "
            f"a tenth of the subcarrier spacing ({cfg.subcarrier_spacing / 10:.1f} Hz)"
        )


def reflections_from_targets(
    targets: list[TargetTruth], cfg: FrameConfig, snr_y_db: float, rng
) -> tuple[list[Reflection], float]:
    """Specular reflections with amplitudes calibrated to a total receive SNR.

    Amplitudes follow two-way free-space decay (rcs_weight / distance^2),
    jointly scaled to unit total power; the returned noise variance is then
    10**(-snr_y_db/10) so that sum(|a|^2) / noise_variance matches the
    requested SNR exactly. Phases are drawn uniformly in [0, 2 pi).
    """
    if not targets:
        raise ValueError("need at least one target")
    for target in targets:
        check_target_feasible(target, cfg)
    gen, _ = as_generator(rng)
    raw = np.array([t.rcs_weight / t.distance**2 for t in targets])
    amplitudes = raw / np.linalg.norm(raw)
    phases = gen.uniform(0.0, 2.0 * np.pi, len(targets))
    reflections = [
        Reflection(
            amplitude=float(a),
            delay=round_trip_delay(t.distance),
            doppler=doppler_shift(t.velocity, cfg.carrier_frequency),
            phase=float(p),
        )
        for a, t, p in zip(amplitudes, targets, phases)
    ]
    noise_variance = 10.0 ** (-snr_y_db / 10.0)
    return reflections, noise_variance


def expand_scattering(
    specular: Reflection, params: ScatteringParams, rng
) -> list[Reflection]:
    """Split one specular return into a specular + diffuse ray cluster.

    Diffuse powers come from a symmetric Dirichlet split of the diffuse
    energy, delays are uniform over the two-way extent, Doppler shifts are
    jittered with the configured standard deviation, and phases are i.i.d.
    uniform. Rays with zero power are dropped.
    """
    if not params.enabled:
        raise ValueError("scattering expansion called with disabled params")
    rho = params.diffuse_fraction
    if rho == 0.0:
        return [specular]
    gen, _ = as_generator(rng)
    weights = gen.dirichlet(np.ones(params.n_rays))
    delays = gen.uniform(
        specular.delay, specular.delay + 2.0 * params.extent / speed_of_light, params.n_rays
    )
    dopplers = specular.doppler + gen.normal(0.0, params.doppler_jitter, params.n_rays)
    phases = gen.uniform(0.0, 2.0 * np.pi, params.n_rays)

    rays = []
    kept_amplitude = specular.amplitude * np.sqrt(1.0 - rho)
    if kept_amplitude > 0:
        rays.append(
            Reflection(kept_amplitude, specular.delay, specular.doppler, specular.phase)
        )
    diffuse_amplitudes = np.sqrt(weights * rho) * specular.amplitude
    for a, d, f, p in zip(diffuse_amplitudes, delays, dopplers, phases):
        if a > 0:
            rays.append(Reflection(float(a), float(d), float(f), float(p)))
    return rays


def synthesize_channel(cfg: FrameConfig, reflections: list[Reflection]) -> np.ndarray:
    """Frequency-domain channel matrix of a reflection superposition."""
    if not reflections:
        raise ValueError("need at least one reflection")
    n = np.arange(cfg.n_subcarriers)
    m = np.arange(cfg.n_symbols)
    h = np.zeros((cfg.n_subcarriers, cfg.n_symbols), dtype=complex)
    for r in reflections:
        along_subcarriers = np.exp(-2j * np.pi * cfg.subcarrier_spacing * r.delay * n)
        along_symbols = np.exp(2j * np.pi * cfg.symbol_duration * r.doppler * m)
        h += (r.amplitude * np.exp(1j * r.phase)) * np.outer(
            along_subcarriers, along_symbols
        )
    return h


def apply_channel(
    frame: SymbolFrame, h: np.ndarray, noise_variance: float, rng
) -> ReceiveFrame:
    """Entrywise channel application plus circularly-symmetric AWGN."""
    if noise_variance < 0:
        raise ValueError("noise variance must be non-negative")
    if frame.x.shape != h.shape:
        raise ValueError(f"frame shape {frame.x.shape} != channel shape {h.shape}")
    y = frame.x * h
    if noise_variance > 0:
        gen, _ = as_generator(rng)
        sigma = np.sqrt(noise_variance / 2.0)
        y = y + gen.normal(0.0, sigma, h.shape) + 1j * gen.normal(0.0, sigma, h.shape)
    return ReceiveFrame(y, noise_variance)


def time_domain_oracle(
    frame: SymbolFrame,
    cfg: FrameConfig,
    delay_samples: int,
    amplitude: float,
    phase: float,
) -> ReceiveFrame:
    """Brute-force time-domain reference for integer-sample, zero-Doppler paths.

    Per symbol: inverse DFT to time domain, prepend the cyclic prefix, delay
    the extended symbol by ``delay_samples``, strip the prefix, and DFT back.
    Because the delay never exceeds the prefix, the receiver window only sees
    samples of the same symbol, making this an exact independent check of
    :func:`synthesize_channel` at on-grid delays.
    """
    if not 0 <= delay_samples <= cfg.cp_samples:
        raise ValueError(
            f"oracle delay must lie within the cyclic prefix [0, {cfg.cp_samples}]"
        )
    if frame.x.shape != (cfg.n_subcarriers, cfg.n_symbols):
        raise ValueError("frame dimensions do not match the configuration")
    x_time = np.fft.ifft(frame.x, axis=0)
    cp = x_time[cfg.n_subcarriers - cfg.cp_samples :, :]
    extended = np.concatenate([cp, x_time], axis=0)
    delayed = np.roll(extended, delay_samples, axis=0) * (
        amplitude * np.exp(1j * phase)
    )
    body = delayed[cfg.cp_samples :, :]
    return ReceiveFrame(np.fft.fft(body, axis=0), 0.0)

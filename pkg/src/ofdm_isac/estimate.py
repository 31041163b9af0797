"""Peak detection, off-grid refinement, physical mapping, and the CRB."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import speed_of_light
from scipy.ndimage import uniform_filter

from .channel import doppler_shift, round_trip_delay
from .frame import FrameConfig
from .rdm import dtft_point

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
REFINE_TOL_BINS = 1e-4
MAX_REFINE_SWEEPS = 50


@dataclass(frozen=True)
class Detection:
    """An integer range-Doppler bin flagged as a target candidate."""

    delay_bin: int
    doppler_bin: int
    power: float


@dataclass(frozen=True)
class TargetEstimate:
    """Refined target parameters and the detection they came from."""

    distance: float
    velocity: float
    amplitude: complex
    delay_bin: float
    doppler_bin: float
    detection: Detection
    converged: bool = True


def _per_axis(value, name: str) -> tuple[int, int]:
    arr = np.atleast_1d(value)
    if arr.size == 1:
        arr = np.repeat(arr, 2)
    if arr.size != 2:
        raise ValueError(f"{name} must be a scalar or a pair of integers")
    return int(arr[0]), int(arr[1])


@dataclass(frozen=True)
class CfarParams:
    """2-D cell-averaging CFAR window (per-axis guard/training half-widths)."""

    guard_cells: tuple[int, int] = (2, 2)
    training_cells: tuple[int, int] = (8, 8)
    false_alarm_rate: float = 1e-4

    def __post_init__(self):
        guard = _per_axis(self.guard_cells, "guard_cells")
        training = _per_axis(self.training_cells, "training_cells")
        object.__setattr__(self, "guard_cells", guard)
        object.__setattr__(self, "training_cells", training)
        if any(g < 0 for g in guard):
            raise ValueError("guard cells must be non-negative")
        if any(t < 1 for t in training):
            raise ValueError("training window must be non-empty on both axes")
        if not 0.0 < self.false_alarm_rate < 1.0:
            raise ValueError("false alarm rate must lie in (0, 1)")


def detect_max(p_hat: np.ndarray) -> Detection:
    """Bin with the largest power; ties break toward the smallest delay bin,
    then the smallest Doppler bin."""
    power = np.abs(p_hat) ** 2
    nu, mu = np.unravel_index(np.argmax(power), power.shape)
    return Detection(int(nu), int(mu), float(power[nu, mu]))


def detect_cfar(p_hat: np.ndarray, params: CfarParams) -> list[Detection]:
    """2-D cell-averaging CFAR with toroidal edge wrap.

    A cell is detected when its power exceeds alpha times the mean power of
    the training ring, with alpha = T * (pfa**(-1/T) - 1) for T training
    cells (the exact threshold for exponentially distributed noise cells).
    Detections are returned sorted by descending power.
    """
    n_sub, n_sym = p_hat.shape
    g_nu, g_mu = params.guard_cells
    t_nu, t_mu = params.training_cells
    outer = (2 * (g_nu + t_nu) + 1, 2 * (g_mu + t_mu) + 1)
    inner = (2 * g_nu + 1, 2 * g_mu + 1)
    if outer[0] > n_sub or outer[1] > n_sym:
        raise ValueError(
            f"CFAR window {outer} does not fit a {p_hat.shape} matrix"
        )
    power = np.abs(p_hat) ** 2
    outer_sum = uniform_filter(power, size=outer, mode="wrap") * (outer[0] * outer[1])
    inner_sum = uniform_filter(power, size=inner, mode="wrap") * (inner[0] * inner[1])
    n_training = outer[0] * outer[1] - inner[0] * inner[1]
    noise_mean = (outer_sum - inner_sum) / n_training
    alpha = n_training * (params.false_alarm_rate ** (-1.0 / n_training) - 1.0)
    hits = np.argwhere(power > alpha * noise_mean)
    detections = [Detection(int(nu), int(mu), float(power[nu, mu])) for nu, mu in hits]
    detections.sort(key=lambda d: -d.power)
    return detections


def _golden_max(f, lo: float, hi: float, tol: float = 1e-7) -> float:
    """Golden-section maximization over [lo, hi]; tolerant of boundary optima."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return c if fc > fd else d


def refine_around(
    h_hat: np.ndarray, delay_bin: float, doppler_bin: float
) -> tuple[float, float, complex, bool]:
    """Maximize the interpolated peak magnitude within +-0.5 bin of a center.

    Coordinate-wise golden-section search, alternating axes until both move
    by less than REFINE_TOL_BINS (at most MAX_REFINE_SWEEPS sweeps). Returns
    the refined bins, the complex amplitude there, and a convergence flag;
    on non-convergence the best iterate is still returned.
    """

    def magnitude(nu, mu):
        return abs(dtft_point(h_hat, nu, mu))

    nu, mu = float(delay_bin), float(doppler_bin)
    converged = False
    for _ in range(MAX_REFINE_SWEEPS):
        nu_new = _golden_max(
            lambda x: magnitude(x, mu), delay_bin - 0.5, delay_bin + 0.5
        )
        mu_new = _golden_max(
            lambda x: magnitude(nu_new, x), doppler_bin - 0.5, doppler_bin + 0.5
        )
        moved = max(abs(nu_new - nu), abs(mu_new - mu))
        nu, mu = nu_new, mu_new
        if moved < REFINE_TOL_BINS:
            converged = True
            break
    # the magnitude surface is flat near its top, which limits how precisely
    # the search can localize an exactly-on-grid peak; trying the rounded
    # bins and keeping the larger magnitude makes that case exact
    for cand_nu, cand_mu in ((round(nu), mu), (nu, round(mu)), (round(nu), round(mu))):
        if abs(cand_nu - delay_bin) > 0.5 or abs(cand_mu - doppler_bin) > 0.5:
            continue
        if magnitude(cand_nu, cand_mu) >= magnitude(nu, mu):
            nu, mu = float(cand_nu), float(cand_mu)
    return nu, mu, dtft_point(h_hat, nu, mu), converged


def refine_peak(h_hat: np.ndarray, det: Detection, cfg: FrameConfig) -> TargetEstimate:
    """Refine a detection off-grid and map it to physical distance/velocity."""
    n_sub, n_sym = h_hat.shape
    if not (0 <= det.delay_bin < n_sub and 0 <= det.doppler_bin < n_sym):
        raise ValueError(f"detection {det} outside a {h_hat.shape} matrix")
    nu, mu, amplitude, converged = refine_around(h_hat, det.delay_bin, det.doppler_bin)
    distance, velocity = to_physical(nu, mu, cfg)
    return TargetEstimate(distance, velocity, amplitude, nu, mu, det, converged)


def to_physical(
    delay_bin: float, doppler_bin: float, cfg: FrameConfig
) -> tuple[float, float]:
    """Convert range-Doppler bins to distance (m) and radial velocity (m/s).

    Doppler bins above M/2 wrap to negative shifts.
    """
    tau = delay_bin / cfg.sample_rate
    mu = doppler_bin - cfg.n_symbols if doppler_bin > cfg.n_symbols / 2 else doppler_bin
    f_d = mu / (cfg.n_symbols * cfg.symbol_duration)
    distance = speed_of_light * tau / 2.0
    velocity = f_d * speed_of_light / (2.0 * cfg.carrier_frequency)
    return float(distance), float(velocity)


def bins_from_physical(
    distance: float, velocity: float, cfg: FrameConfig
) -> tuple[float, float]:
    """Inverse of :func:`to_physical`; the Doppler bin may be negative."""
    nu = round_trip_delay(distance) * cfg.sample_rate
    mu = (
        doppler_shift(velocity, cfg.carrier_frequency)
        * cfg.n_symbols
        * cfg.symbol_duration
    )
    return nu, mu


def crb(cfg: FrameConfig, snr_target: float) -> tuple[float, float]:
    """Lower bounds on distance and velocity estimation variance.

    ``snr_target`` is the per-target receive SNR (target power over noise
    variance, before integration gain). Returns (var_d in m^2, var_v in
    m^2/s^2).
    """
    if snr_target <= 0:
        raise ValueError("per-target SNR must be positive")
    n, m = cfg.n_subcarriers, cfg.n_symbols
    common = 6.0 / (n * m * snr_target)
    var_d = (
        common / (n**2 - 1) * (speed_of_light / (4.0 * np.pi * cfg.subcarrier_spacing)) ** 2
    )
    var_v = (
        common
        / (m**2 - 1)
        * (
            speed_of_light
            / (4.0 * np.pi * cfg.symbol_duration * cfg.carrier_frequency)
        )
        ** 2
    )
    return var_d, var_v

"""Successive target cancellation and its two-pass refinement.

The cancellation loop works on the matched-filter output rather than the
range-Doppler grid: subtracting |X|^2-modulated target templates before the
transform is equivalent (by linearity) to subtracting their transformed
footprints afterwards, and it lets the continuous peak refinement see the
residual instead of a bin-grid approximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimate import Detection, TargetEstimate, refine_around, to_physical
from .frame import FrameConfig, SymbolFrame
from .rdm import compute_rdm, dtft_point

ORDERING_POLICIES = ("strongest", "nearest")

#: detections whose refined bins fall within this distance (both axes) of an
#: accepted estimate are treated as duplicates and rejected
DUPLICATE_RADIUS_BINS = 0.5

_MAX_REJECTIONS = 64


@dataclass(frozen=True)
class InterferenceTemplate:
    """Full range-Doppler footprint of one estimated target.

    ``h_domain`` is the matched-filter-domain contribution |X|^2 * a_tilde;
    ``rdm`` is its transform, i.e. what the target (including its
    modulation-induced sidelobes) adds to every bin of the range-Doppler
    matrix.
    """

    rdm: np.ndarray
    h_domain: np.ndarray
    amplitude: complex
    delay_bin: float
    doppler_bin: float


@dataclass
class MitigationReport:
    """Estimates from the cancellation loop and, optionally, the second pass."""

    first_pass: list[TargetEstimate]
    second_pass: list[TargetEstimate] | None = None
    residual_peak_power: list[float] = field(default_factory=list)
    templates: list[InterferenceTemplate] = field(default_factory=list)

    @property
    def estimates(self) -> list[TargetEstimate]:
        """Final estimates: second pass when present, else first pass."""
        return self.second_pass if self.second_pass is not None else self.first_pass


def synth_target_rdm(frame: SymbolFrame, est: TargetEstimate) -> InterferenceTemplate:
    """Synthesize the template of one target from its refined parameters.

    Rebuilds the target's matched-filter contribution at the continuous
    refined bins (integer-bin templates would leave large residuals for
    off-grid targets) and transforms it with the same normalization as the
    range-Doppler computation.
    """
    if not np.isfinite(est.amplitude):
        raise ValueError("target amplitude must be finite")
    n_sub, n_sym = frame.x.shape
    along_subcarriers = np.exp(-2j * np.pi * np.arange(n_sub) * (est.delay_bin / n_sub))
    along_symbols = np.exp(2j * np.pi * np.arange(n_sym) * (est.doppler_bin / n_sym))
    a_tilde = est.amplitude * np.outer(along_subcarriers, along_symbols)
    h_domain = (np.abs(frame.x) ** 2) * a_tilde
    return InterferenceTemplate(
        rdm=compute_rdm(h_domain),
        h_domain=h_domain,
        amplitude=complex(est.amplitude),
        delay_bin=float(est.delay_bin),
        doppler_bin=float(est.doppler_bin),
    )


def _circular_distance(a: float, b: float, period: int) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def _is_duplicate(
    nu: float, mu: float, accepted: list[TargetEstimate], shape: tuple[int, int]
) -> bool:
    return any(
        _circular_distance(nu, est.delay_bin, shape[0]) <= DUPLICATE_RADIUS_BINS
        and _circular_distance(mu, est.doppler_bin, shape[1]) <= DUPLICATE_RADIUS_BINS
        for est in accepted
    )


def _candidate_peaks(power: np.ndarray, excluded: set, count: int) -> list[Detection]:
    """Up to ``count`` greedy power maxima, skipping excluded integer bins."""
    work = power.copy()
    for nu, mu in excluded:
        work[nu, mu] = -np.inf
    peaks = []
    for _ in range(min(count, work.size - len(excluded))):
        nu, mu = np.unravel_index(np.argmax(work), work.shape)
        if work[nu, mu] == -np.inf:
            break
        peaks.append(Detection(int(nu), int(mu), float(power[nu, mu])))
        work[nu, mu] = -np.inf
    return peaks


def _select_detection(
    p_hat: np.ndarray, excluded: set, order: str, remaining: int
) -> Detection | None:
    power = np.abs(p_hat) ** 2
    if order == "strongest":
        peaks = _candidate_peaks(power, excluded, 1)
    elif order == "nearest":
        # among the strongest remaining candidates, process the closest first
        peaks = _candidate_peaks(power, excluded, remaining)
        peaks.sort(key=lambda d: (d.delay_bin, -d.power))
    else:
        raise ValueError(f"unknown ordering policy {order!r}")
    return peaks[0] if peaks else None


def _estimate_sequential(
    h_hat: np.ndarray,
    frame: SymbolFrame,
    n_targets: int,
    cfg: FrameConfig,
    order: str,
    subtract: bool,
) -> MitigationReport:
    residual = np.array(h_hat, dtype=complex, copy=True)
    accepted: list[TargetEstimate] = []
    templates: list[InterferenceTemplate] = []
    residual_peaks: list[float] = []

    for step in range(n_targets):
        p_hat = compute_rdm(residual)
        excluded: set = set()
        estimate = None
        for _ in range(_MAX_REJECTIONS):
            det = _select_detection(p_hat, excluded, order, n_targets - step)
            if det is None:
                break
            nu, mu, amplitude, converged = refine_around(
                residual, det.delay_bin, det.doppler_bin
            )
            if _is_duplicate(nu, mu, accepted, residual.shape):
                excluded.add((det.delay_bin, det.doppler_bin))
                continue
            distance, velocity = to_physical(nu, mu, cfg)
            estimate = TargetEstimate(
                distance, velocity, amplitude, nu, mu, det, converged
            )
            break
        if estimate is None:
            # every candidate duplicated an accepted target; keep the best one
            det = _select_detection(p_hat, set(), "strongest", 1)
            nu, mu, amplitude, converged = refine_around(
                residual, det.delay_bin, det.doppler_bin
            )
            distance, velocity = to_physical(nu, mu, cfg)
            estimate = TargetEstimate(
                distance, velocity, amplitude, nu, mu, det, converged
            )
        accepted.append(estimate)
        if subtract:
            template = synth_target_rdm(frame, estimate)
            templates.append(template)
            residual -= template.h_domain
            residual_peaks.append(float(np.max(np.abs(compute_rdm(residual)) ** 2)))
        else:
            residual_peaks.append(estimate.detection.power)

    return MitigationReport(
        first_pass=accepted,
        second_pass=None,
        residual_peak_power=residual_peaks,
        templates=templates,
    )


def mf_estimates(
    h_hat: np.ndarray,
    frame: SymbolFrame,
    n_targets: int,
    cfg: FrameConfig,
    order: str = "strongest",
) -> MitigationReport:
    """Plain detect-and-refine of ``n_targets`` peaks, without cancellation."""
    if n_targets < 1:
        raise ValueError("need at least one target")
    return _estimate_sequential(h_hat, frame, n_targets, cfg, order, subtract=False)


def cstc(
    h_hat: np.ndarray,
    frame: SymbolFrame,
    n_targets: int,
    cfg: FrameConfig,
    order: str = "strongest",
) -> MitigationReport:
    """Coherent successive target cancellation.

    Repeatedly detects the next target on the running residual, refines it,
    synthesizes its full template (peak plus modulation-induced sidelobes),
    and subtracts it before searching for the next target. The logged
    residual peak power after each subtraction tracks the cancellation
    progress.
    """
    if n_targets < 1:
        raise ValueError("need at least one target")
    return _estimate_sequential(h_hat, frame, n_targets, cfg, order, subtract=True)


def ecstc(
    report: MitigationReport,
    h_hat: np.ndarray,
    frame: SymbolFrame,
    cfg: FrameConfig,
) -> MitigationReport:
    """Second estimation pass with all other first-pass templates removed.

    Each target is re-refined on the receive data minus the templates of
    every *other* target, so early estimates no longer suffer interference
    from targets that had not been cancelled yet. First-pass templates are
    reused, not recomputed; only their sum is formed here.
    """
    if not report.first_pass:
        raise ValueError("report carries no first-pass estimates")
    if len(report.templates) != len(report.first_pass):
        raise ValueError("report lacks the first-pass templates (run cstc first)")
    n_sub, n_sym = h_hat.shape
    total = np.sum([t.h_domain for t in report.templates], axis=0)

    second = []
    for est, template in zip(report.first_pass, report.templates):
        residual = h_hat - (total - template.h_domain)
        nu, mu, amplitude, converged = refine_around(
            residual, est.delay_bin, est.doppler_bin
        )
        distance, velocity = to_physical(nu, mu, cfg)
        detection = Detection(
            int(round(nu)) % n_sub,
            int(round(mu)) % n_sym,
            float(abs(dtft_point(residual, round(nu), round(mu))) ** 2),
        )
        second.append(
            TargetEstimate(distance, velocity, amplitude, nu, mu, detection, converged)
        )
    return MitigationReport(
        first_pass=report.first_pass,
        second_pass=second,
        residual_peak_power=report.residual_peak_power,
        templates=report.templates,
    )

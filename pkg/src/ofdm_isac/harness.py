"""Scenario configuration, seeded Monte-Carlo trials, and MSE aggregation.

Per-trial randomness is split from the master seed with
``numpy.random.SeedSequence.spawn`` into independent Philox streams for the
scene, reflection phases, scattering, frame symbols, and noise, so that
trials can run in any order (or in parallel) and still reproduce exactly,
and so that two runs differing only in the mitigation mode see identical
receive data.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import (
    ScatteringParams,
    TargetTruth,
    apply_channel,
    check_target_feasible,
    expand_scattering,
    reflections_from_targets,
    synthesize_channel,
)
from .errors import ScenarioInfeasibleError
from .estimate import (
    CfarParams,
    Detection,
    TargetEstimate,
    bins_from_physical,
    crb,
    detect_cfar,
    refine_around,
    refine_peak,
    to_physical,
)
from .frame import FrameConfig, make_alphabet, draw_frame
from .mitigate import cstc, ecstc
from .rdm import compute_rdm, matched_filter
from .rng import make_rng

MITIGATION_MODES = ("mf", "cstc", "ecstc")
DETECTION_MODES = ("known-l", "cfar")

_SCENE_REDRAW_BUDGET = 1000


@dataclass(frozen=True)
class SceneSpec:
    """Random scene: target count and uniform distance/velocity ranges."""

    count: int
    distance_range: tuple[float, float]
    velocity_range: tuple[float, float]

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("scene needs at least one target")
        d_lo, d_hi = self.distance_range
        v_lo, v_hi = self.velocity_range
        if not (0 < d_lo < d_hi):
            raise ValueError("distance range must be non-degenerate and positive")
        if not v_lo < v_hi:
            raise ValueError("velocity range must be non-degenerate")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a simulation run depends on, seeds included."""

    frame: FrameConfig
    alphabet: str
    snr_y_db: float
    scene: SceneSpec | None = None
    targets: tuple[TargetTruth, ...] | None = None
    custom_points: tuple | None = None
    scattering: ScatteringParams = ScatteringParams(enabled=False)
    mitigation: str = "mf"
    ordering: str = "strongest"
    detection: str = "known-l"
    cfar: CfarParams = CfarParams()
    n_trials: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if (self.scene is None) == (self.targets is None):
            raise ValueError("exactly one of scene or targets must be given")
        if self.mitigation not in MITIGATION_MODES:
            raise ValueError(f"unknown mitigation mode {self.mitigation!r}")
        if self.detection not in DETECTION_MODES:
            raise ValueError(f"unknown detection mode {self.detection!r}")
        if self.n_trials < 1:
            raise ValueError("trial count must be at least 1")
        # fail deterministically at configuration time when no admissible
        # scene exists, rather than trial by trial
        if self.targets is not None:
            for target in self.targets:
                check_target_feasible(target, self.frame)
        else:
            d_lo, d_hi = self.scene.distance_range
            v_lo, v_hi = self.scene.velocity_range
            worst_v = max(abs(v_lo), abs(v_hi))
            check_target_feasible(TargetTruth(d_hi, worst_v), self.frame)
            span = d_hi - d_lo
            needed = (self.scene.count - 1) * self.frame.range_resolution
            if span < needed:
                raise ScenarioInfeasibleError(
                    f"distance range spans {span:.1f} m but {self.scene.count} targets "
                    f"at one range-cell separation need at least {needed:.1f} m"
                )


@dataclass
class TargetRow:
    """Per-target outcome of one trial (truth, estimate, squared errors)."""

    truth_distance: float
    truth_velocity: float
    snr_target: float
    est_distance: float | None
    est_velocity: float | None
    sq_err_distance: float | None
    sq_err_velocity: float | None
    matched: bool
    converged: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class TrialResult:
    """One trial's per-target rows (sorted by true distance) plus diagnostics."""

    trial_index: int
    rows: list[TargetRow]
    n_estimates: int
    misses: int
    false_alarms: int
    unconverged: int
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "trial_index": self.trial_index,
            "rows": [row.to_dict() for row in self.rows],
            "n_estimates": self.n_estimates,
            "misses": self.misses,
            "false_alarms": self.false_alarms,
            "unconverged": self.unconverged,
            "error": self.error,
        }


@dataclass
class MseReport:
    """Per-target-index MSEs with the matching bounds and diagnostics."""

    n_trials: int
    truth_d_mean: list[float]
    mse_d: list[float]
    crb_d: list[float]
    mse_v: list[float]
    crb_v: list[float]
    miss_rate: list[float]
    mean_snr_target: list[float]
    n_failed_trials: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def generate_scene(spec: SceneSpec, cfg: FrameConfig, rng) -> list[TargetTruth]:
    """Draw targets uniformly, re-drawing any that land within one range cell
    of an already-placed target (per-target MSE is ill-defined for unresolvable
    overlaps)."""
    gen = rng if isinstance(rng, np.random.Generator) else make_rng(rng)
    min_separation = cfg.range_resolution
    distances: list[float] = []
    redraws = 0
    while len(distances) < spec.count:
        candidate = gen.uniform(*spec.distance_range)
        if all(abs(candidate - d) >= min_separation for d in distances):
            distances.append(candidate)
            continue
        redraws += 1
        if redraws > _SCENE_REDRAW_BUDGET:
            raise ScenarioInfeasibleError(
                f"could not place {spec.count} targets with {min_separation:.2f} m "
                f"separation in {spec.distance_range} after {redraws} re-draws"
            )
    velocities = gen.uniform(*spec.velocity_range, size=spec.count)
    return [TargetTruth(d, float(v)) for d, v in zip(distances, velocities)]


def associate(
    estimates: list[TargetEstimate],
    truths: list[TargetTruth],
    cfg: FrameConfig,
) -> list[tuple[int, int]]:
    """Greedy one-to-one matching by resolution-normalized squared distance.

    Returns (truth_index, estimate_index) pairs. Ties break on cost, then on
    truth index, then on the estimate's values (not its list position), so the
    matching is invariant under permutations of the estimate list. Truths left
    unmatched are misses; estimates left unmatched are false alarms.
    """
    if not estimates or not truths:
        raise ValueError("association needs non-empty estimate and truth lists")
    d_res = cfg.range_resolution
    v_res = cfg.velocity_resolution
    candidates = []
    for i, truth in enumerate(truths):
        for j, est in enumerate(estimates):
            cost = ((truth.distance - est.distance) / d_res) ** 2 + (
                (truth.velocity - est.velocity) / v_res
            ) ** 2
            candidates.append((cost, i, est.distance, est.velocity, j))
    candidates.sort(key=lambda c: c[:4])
    pairs: list[tuple[int, int]] = []
    used_truths: set[int] = set()
    used_estimates: set[int] = set()
    for cost, i, _, _, j in candidates:
        if i in used_truths or j in used_estimates:
            continue
        pairs.append((i, j))
        used_truths.add(i)
        used_estimates.add(j)
    return pairs


def _resolve_alphabet(cfg: ScenarioConfig):
    return make_alphabet(cfg.alphabet, cfg.custom_points)


def _trial_streams(trial_seed):
    seq = (
        trial_seed
        if isinstance(trial_seed, np.random.SeedSequence)
        else np.random.SeedSequence(trial_seed)
    )
    return [make_rng(child) for child in seq.spawn(5)]


def trial_front_end(cfg: ScenarioConfig, trial_seed):
    """Scene, frame, channel, noise, and matched filter for one trial.

    Returns (targets, per-target SNRs, frame, matched-filter output, noise
    variance). Randomness is consumed in a mode-independent order.
    """
    scene_rng, phase_rng, scatter_rng, frame_rng, noise_rng = _trial_streams(trial_seed)
    if cfg.targets is not None:
        targets = list(cfg.targets)
    else:
        targets = generate_scene(cfg.scene, cfg.frame, scene_rng)
    targets.sort(key=lambda t: t.distance)

    reflections, noise_variance = reflections_from_targets(
        targets, cfg.frame, cfg.snr_y_db, phase_rng
    )
    snr_targets = [r.amplitude**2 / noise_variance for r in reflections]
    if cfg.scattering.enabled:
        reflections = [
            ray
            for specular in reflections
            for ray in expand_scattering(specular, cfg.scattering, scatter_rng)
        ]

    alphabet = _resolve_alphabet(cfg)
    frame = draw_frame(cfg.frame, alphabet, frame_rng)
    h = synthesize_channel(cfg.frame, reflections)
    rx = apply_channel(frame, h, noise_variance, noise_rng)
    h_hat = matched_filter(rx, frame)
    return targets, snr_targets, frame, h_hat, noise_variance


def _anchored_estimates(
    h_hat: np.ndarray, targets: list[TargetTruth], cfg: FrameConfig
) -> list[TargetEstimate]:
    """Refine each known target inside a window centered on its true bins.

    Used for the no-cancellation baseline under known-target evaluation:
    without windowing, the sidelobes of a strong target outrank weak targets'
    peaks, so blind greedy detection would score detection failures instead of
    estimation accuracy. Cancellation modes keep their own blind detection.
    """
    p_hat = compute_rdm(h_hat)
    n_sub, n_sym = h_hat.shape
    estimates = []
    for target in targets:
        nu_t, mu_t = bins_from_physical(target.distance, target.velocity, cfg)
        nu, mu, amplitude, converged = refine_around(h_hat, nu_t, mu_t)
        bin_nu = int(round(nu_t)) % n_sub
        bin_mu = int(round(mu_t)) % n_sym
        det = Detection(bin_nu, bin_mu, float(np.abs(p_hat[bin_nu, bin_mu]) ** 2))
        distance, velocity = to_physical(nu, mu, cfg)
        estimates.append(
            TargetEstimate(distance, velocity, amplitude, nu, mu, det, converged)
        )
    return estimates


def _wrapped_distance(a: int, b: int, period: int) -> int:
    d = abs(a - b) % period
    return min(d, period - d)


def _cluster_detections(detections, shape):
    """Collapse CFAR hits within one bin of a stronger hit into single peaks."""
    kept = []
    for det in detections:  # already sorted by descending power
        close = any(
            _wrapped_distance(det.delay_bin, k.delay_bin, shape[0]) <= 1
            and _wrapped_distance(det.doppler_bin, k.doppler_bin, shape[1]) <= 1
            for k in kept
        )
        if not close:
            kept.append(det)
    return kept


def run_trial(cfg: ScenarioConfig, trial_seed, trial_index: int = 0) -> TrialResult:
    """Run one end-to-end trial; fully deterministic given the trial seed.

    A scene-generation failure is recorded on the result instead of aborting
    the batch.
    """
    try:
        targets, snr_targets, frame, h_hat, _ = trial_front_end(cfg, trial_seed)
    except ScenarioInfeasibleError as exc:
        return TrialResult(trial_index, [], 0, 0, 0, 0, error=str(exc))

    n_targets = len(targets)
    if cfg.detection == "cfar":
        detections = _cluster_detections(
            detect_cfar(compute_rdm(h_hat), cfg.cfar), h_hat.shape
        )
        count = len(detections)
    else:
        detections = None
        count = n_targets

    estimates: list[TargetEstimate] = []
    if count > 0:
        if cfg.mitigation == "mf":
            if detections is not None:
                estimates = [refine_peak(h_hat, det, cfg.frame) for det in detections]
            else:
                estimates = _anchored_estimates(h_hat, targets, cfg.frame)
        else:
            report = cstc(h_hat, frame, count, cfg.frame, cfg.ordering)
            if cfg.mitigation == "ecstc":
                report = ecstc(report, h_hat, frame, cfg.frame)
            estimates = report.estimates

    rows = []
    matched_by_truth: dict[int, TargetEstimate] = {}
    if estimates:
        for i, j in associate(estimates, targets, cfg.frame):
            matched_by_truth[i] = estimates[j]
    for i, truth in enumerate(targets):
        est = matched_by_truth.get(i)
        if est is None:
            rows.append(
                TargetRow(
                    truth.distance, truth.velocity, snr_targets[i],
                    None, None, None, None, matched=False, converged=True,
                )
            )
        else:
            rows.append(
                TargetRow(
                    truth.distance,
                    truth.velocity,
                    snr_targets[i],
                    est.distance,
                    est.velocity,
                    (truth.distance - est.distance) ** 2,
                    (truth.velocity - est.velocity) ** 2,
                    matched=True,
                    converged=est.converged,
                )
            )
    return TrialResult(
        trial_index=trial_index,
        rows=rows,
        n_estimates=len(estimates),
        misses=n_targets - len(matched_by_truth),
        false_alarms=len(estimates) - len(matched_by_truth),
        unconverged=sum(not e.converged for e in estimates),
    )


def aggregate(results: list[TrialResult], cfg: ScenarioConfig) -> MseReport:
    """Per-target-index MSEs across trials, with CRBs at the mean per-target SNR.

    Targets are indexed by ascending true distance within each trial. Missed
    targets are excluded from the MSE and counted in the miss rate.
    """
    if not results:
        raise ValueError("need at least one trial result")
    valid = [r for r in results if r.error is None]
    n_failed = len(results) - len(valid)
    if not valid:
        raise ScenarioInfeasibleError("every trial failed scene generation")
    n_targets = len(valid[0].rows)

    truth_d_mean, mse_d, mse_v, miss_rate, mean_snr = [], [], [], [], []
    crb_d, crb_v = [], []
    for idx in range(n_targets):
        rows = [r.rows[idx] for r in valid]
        truth_d_mean.append(float(np.mean([row.truth_distance for row in rows])))
        mean_snr.append(float(np.mean([row.snr_target for row in rows])))
        matched = [row for row in rows if row.matched]
        miss_rate.append(1.0 - len(matched) / len(rows))
        if matched:
            mse_d.append(float(np.mean([row.sq_err_distance for row in matched])))
            mse_v.append(float(np.mean([row.sq_err_velocity for row in matched])))
        else:
            mse_d.append(float("nan"))
            mse_v.append(float("nan"))
        bound_d, bound_v = crb(cfg.frame, mean_snr[-1])
        crb_d.append(bound_d)
        crb_v.append(bound_v)

    return MseReport(
        n_trials=len(valid),
        truth_d_mean=truth_d_mean,
        mse_d=mse_d,
        crb_d=crb_d,
        mse_v=mse_v,
        crb_v=crb_v,
        miss_rate=miss_rate,
        mean_snr_target=mean_snr,
        n_failed_trials=n_failed,
    )


def trial_seeds(master_seed: int, n_trials: int) -> list[np.random.SeedSequence]:
    """Independent per-trial seed sequences split from the master seed."""
    return np.random.SeedSequence(master_seed).spawn(n_trials)


def run_simulation(cfg: ScenarioConfig) -> tuple[MseReport, list[TrialResult]]:
    """Run all trials of a scenario and aggregate them."""
    results = [
        run_trial(cfg, seed, trial_index=i)
        for i, seed in enumerate(trial_seeds(cfg.master_seed, cfg.n_trials))
    ]
    return aggregate(results, cfg), results


def with_snr(cfg: ScenarioConfig, snr_y_db: float) -> ScenarioConfig:
    """Copy of a scenario at a different total receive SNR."""
    return replace(cfg, snr_y_db=snr_y_db)


def _format_float(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_outputs(
    out_dir, cfg_dict: dict, report: MseReport, trials: list[TrialResult]
) -> None:
    """Write mse_per_target.csv, trials.jsonl, and report.json to a directory.

    All floats go out in round-trip precision and nothing time- or
    host-dependent is included, so identical runs produce identical bytes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "mse_per_target.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["target_index", "truth_d_mean", "mse_d", "crb_d", "mse_v", "crb_v", "miss_rate"]
        )
        for idx in range(len(report.mse_d)):
            writer.writerow(
                [
                    idx,
                    _format_float(report.truth_d_mean[idx]),
                    _format_float(report.mse_d[idx]),
                    _format_float(report.crb_d[idx]),
                    _format_float(report.mse_v[idx]),
                    _format_float(report.crb_v[idx]),
                    _format_float(report.miss_rate[idx]),
                ]
            )

    with open(out / "trials.jsonl", "w") as fh:
        for trial in trials:
            fh.write(json.dumps(trial.to_dict()))
            fh.write("\n")

    summary = report.to_dict()
    with open(out / "report.json", "w") as fh:
        json.dump({"config": cfg_dict, "summary": summary}, fh, indent=2)
        fh.write("\n")

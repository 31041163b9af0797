"""Command-line interface: simulate, sweep, rdm-dump, and crb subcommands."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .config import load_config, scenario_to_dict
from .errors import ConfigError, ScenarioInfeasibleError
from .estimate import crb
from .harness import run_simulation, trial_front_end, with_snr, write_outputs
from .rdm import compute_rdm


def _parse_snr_spec(spec: str) -> list[float]:
    """Parse an SNR sweep given as a single value or start:step:stop (inclusive)."""
    parts = spec.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ConfigError(f"SNR spec must be a value or start:step:stop, got {spec!r}")
    start, step, stop = (float(p) for p in parts)
    if step <= 0:
        raise ConfigError("SNR sweep step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ConfigError(f"empty SNR sweep {spec!r}")
    return [start + i * step for i in range(count)]


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    report, trials = run_simulation(cfg)
    write_outputs(args.out, scenario_to_dict(cfg), report, trials)
    print(f"wrote {Path(args.out) / 'mse_per_target.csv'}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    snrs = _parse_snr_spec(args.snr)
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    combined_rows = []
    for snr_db in snrs:
        point = with_snr(cfg, snr_db)
        report, trials = run_simulation(point)
        sub = out_root / f"snr_{snr_db:g}dB"
        write_outputs(sub, scenario_to_dict(point), report, trials)
        for idx in range(len(report.mse_d)):
            combined_rows.append(
                [
                    repr(snr_db),
                    idx,
                    repr(report.mse_d[idx]),
                    repr(report.crb_d[idx]),
                    repr(report.mse_v[idx]),
                    repr(report.crb_v[idx]),
                    repr(report.miss_rate[idx]),
                ]
            )
    with open(out_root / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["snr_y_db", "target_index", "mse_d", "crb_d", "mse_v", "crb_v", "miss_rate"]
        )
        writer.writerows(combined_rows)
    print(f"wrote {out_root / 'sweep.csv'}")
    return 0


def _cmd_rdm_dump(args) -> int:
    cfg = load_config(args.config)
    _, _, _, h_hat, _ = trial_front_end(cfg, args.seed)
    power_db = 10.0 * np.log10(
        np.maximum(np.abs(compute_rdm(h_hat)) ** 2, np.finfo(float).tiny)
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delay_bin"] + list(range(power_db.shape[1])))
        for nu in range(power_db.shape[0]):
            writer.writerow([nu] + [repr(float(v)) for v in power_db[nu]])
    print(f"wrote {out}")
    return 0


def _cmd_crb(args) -> int:
    cfg = load_config(args.config)
    writer = csv.writer(sys.stdout)
    writer.writerow(["snr_db", "var_d", "var_v"])
    for snr_db in _parse_snr_spec(args.snr):
        var_d, var_v = crb(cfg.frame, 10.0 ** (snr_db / 10.0))
        writer.writerow([repr(snr_db), repr(var_d), repr(var_v)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ofdm-isac",
        description="OFDM sensing simulator: range-Doppler estimation with "
        "successive target cancellation, evaluated against the Cramer-Rao bound",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and write MSE reports")
    p_sim.add_argument("--config", required=True, help="scenario JSON file")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a scenario across an SNR sweep")
    p_sweep.add_argument("--config", required=True, help="scenario JSON file")
    p_sweep.add_argument(
        "--snr", required=True, help="SNR sweep in dB as start:step:stop or a value"
    )
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_dump = sub.add_parser(
        "rdm-dump", help="write one realization's range-Doppler power map as CSV"
    )
    p_dump.add_argument("--config", required=True, help="scenario JSON file")
    p_dump.add_argument("--seed", required=True, type=int, help="realization seed")
    p_dump.add_argument("--out", required=True, help="output CSV file")
    p_dump.set_defaults(func=_cmd_rdm_dump)

    p_crb = sub.add_parser("crb", help="print distance/velocity bounds over an SNR sweep")
    p_crb.add_argument("--config", required=True, help="scenario JSON file")
    p_crb.add_argument(
        "--snr",
        default="-20:5:20",
        help="per-target SNR sweep in dB as start:step:stop (default -20:5:20)",
    )
    p_crb.set_defaults(func=_cmd_crb)

    return parser


def _merge_snr_value(argv: list[str]) -> list[str]:
    """Join ``--snr -20:5:20`` into one token so argparse does not read the
    negative sweep start as a flag."""
    merged = []
    i = 0
    while i < len(argv):
        if argv[i] == "--snr" and i + 1 < len(argv):
            merged.append(f"--snr={argv[i + 1]}")
            i += 2
        else:
            merged.append(argv[i])
            i += 1
    return merged


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_merge_snr_value(list(argv)))
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ScenarioInfeasibleError as exc:
        print(f"scenario infeasible: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Strict config parsing, profiles, CLI subcommands, and exit codes."""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from ofdm_isac.cli import main
from ofdm_isac.config import (
    desk_profile,
    load_config,
    paper_profile,
    scenario_from_dict,
    scenario_to_dict,
)
from ofdm_isac.errors import ConfigError
from ofdm_isac.estimate import crb


def tiny_config(**overrides):
    doc = {
        "frame": {
            "n_subcarriers": 64,
            "n_symbols": 16,
            "subcarrier_spacing_hz": 30e3,
            "cp_samples": 16,
            "carrier_frequency_hz": 3.5e9,
        },
        "alphabet": "qam64",
        "targets": [
            {"distance_m": 400.0, "velocity_mps": 20.0},
            {"distance_m": 700.0, "velocity_mps": -35.0, "rcs_weight": 2.0},
        ],
        "snr_y_db": 15.0,
        "mitigation": "ecstc",
        "trials": 3,
        "master_seed": 7,
    }
    doc.update(overrides)
    return doc


def write_config(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestScenarioFromDict:
    def test_tiny_roundtrip(self):
        cfg = scenario_from_dict(tiny_config())
        doc = scenario_to_dict(cfg)
        assert scenario_from_dict(doc) == cfg

    def test_profiles_parse(self):
        desk = scenario_from_dict(desk_profile())
        assert desk.frame.n_subcarriers == 256
        assert desk.scene.count == 8
        paper = scenario_from_dict(paper_profile())
        assert paper.frame.n_subcarriers == 6552
        assert paper.ordering == "nearest"

    def test_shipped_configs_match_profiles(self):
        root = Path(__file__).resolve().parent.parent / "configs"
        desk = json.loads((root / "desk.json").read_text())
        assert scenario_from_dict(desk) == scenario_from_dict(desk_profile())
        paper = json.loads((root / "paper_scale.json").read_text())
        assert scenario_from_dict(paper) == scenario_from_dict(paper_profile())

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            scenario_from_dict(tiny_config(extra_knob=1))

    def test_unknown_nested_key(self):
        doc = tiny_config()
        doc["frame"]["bandwidth_hz"] = 2e8
        with pytest.raises(ConfigError, match="frame"):
            scenario_from_dict(doc)

    def test_missing_required(self):
        doc = tiny_config()
        del doc["snr_y_db"]
        with pytest.raises(ConfigError, match="snr_y_db"):
            scenario_from_dict(doc)

    def test_targets_and_scene_exclusive(self):
        doc = tiny_config()
        doc["scene"] = {
            "count": 2,
            "distance_range_m": [45.0, 145.0],
            "velocity_range_mps": [-50.0, 50.0],
        }
        with pytest.raises(ConfigError, match="exactly one"):
            scenario_from_dict(doc)

    def test_custom_points_require_custom_kind(self):
        with pytest.raises(ConfigError, match="custom"):
            scenario_from_dict(tiny_config(custom_points=[[1, 0], [-1, 0]]))

    def test_custom_alphabet(self):
        doc = tiny_config(alphabet="custom", custom_points=[[2, 0], [-2, 0]])
        cfg = scenario_from_dict(doc)
        assert cfg.custom_points == (2 + 0j, -2 + 0j)

    def test_bad_alphabet(self):
        with pytest.raises(ConfigError, match="alphabet"):
            scenario_from_dict(tiny_config(alphabet="qam8"))

    def test_scattering_jitter_default(self):
        doc = tiny_config(scattering={"enabled": True})
        cfg = scenario_from_dict(doc)
        expected = 0.02 / (cfg.frame.symbol_duration * cfg.frame.n_symbols)
        assert cfg.scattering.doppler_jitter == pytest.approx(expected, rel=1e-12)
        assert cfg.scattering.diffuse_fraction == 0.9
        assert cfg.scattering.n_rays == 8
        assert cfg.scattering.extent == 8.0

    def test_non_integer_trials(self):
        with pytest.raises(ConfigError, match="trials"):
            scenario_from_dict(tiny_config(trials=2.5))

    def test_bad_cfar_params(self):
        with pytest.raises(ConfigError, match="cfar"):
            scenario_from_dict(tiny_config(cfar={"false_alarm_rate": 2.0}))


class TestCliSimulate:
    def test_writes_outputs(self, tmp_path):
        path = write_config(tmp_path, tiny_config())
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(path), "--out", str(out)]) == 0
        assert (out / "mse_per_target.csv").exists()
        assert (out / "trials.jsonl").exists()
        assert (out / "report.json").exists()
        with open(out / "mse_per_target.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert float(rows[0]["mse_d"]) >= 0.0
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["master_seed"] == 7
        assert report["summary"]["n_trials"] == 3
        lines = (out / "trials.jsonl").read_text().splitlines()
        assert len(lines) == 3

    def test_byte_identical_reruns(self, tmp_path):
        path = write_config(tmp_path, tiny_config())
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(path), "--out", str(out_a)]) == 0
        assert main(["simulate", "--config", str(path), "--out", str(out_b)]) == 0
        for name in ("mse_per_target.csv", "trials.jsonl", "report.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_config_error_exit_code(self, tmp_path):
        path = write_config(tmp_path, tiny_config(extra_knob=1))
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 2

    def test_malformed_json_exit_code(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 2

    def test_missing_file_exit_code(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", "o"]) == 2

    def test_infeasible_exit_code(self, tmp_path):
        doc = tiny_config()
        doc["targets"] = [{"distance_m": 5000.0, "velocity_mps": 0.0}]
        path = write_config(tmp_path, doc)
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 3


class TestCliSweep:
    def test_sweep_outputs(self, tmp_path):
        path = write_config(tmp_path, tiny_config(trials=2))
        out = tmp_path / "sweep"
        code = main(["sweep", "--config", str(path), "--snr", "0:10:10", "--out", str(out)])
        assert code == 0
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert {r["snr_y_db"] for r in rows} == {"0.0", "10.0"}
        assert (out / "snr_0dB" / "mse_per_target.csv").exists()
        assert (out / "snr_10dB" / "mse_per_target.csv").exists()

    def test_bad_snr_spec(self, tmp_path):
        path = write_config(tmp_path, tiny_config())
        assert main(["sweep", "--config", str(path), "--snr", "1:2", "--out", "o"]) == 2


class TestCliRdmDump:
    def test_dump_shape_and_peak(self, tmp_path):
        doc = tiny_config()
        # single target on an exact grid bin: delay bin 6, doppler bin 1
        frame = scenario_from_dict(doc).frame
        from ofdm_isac.estimate import to_physical

        d, v = to_physical(6.0, 1.0, frame)
        doc["targets"] = [{"distance_m": d, "velocity_mps": v}]
        doc["snr_y_db"] = 60.0
        path = write_config(tmp_path, doc)
        out = tmp_path / "rdm.csv"
        assert main(["rdm-dump", "--config", str(path), "--seed", "5", "--out", str(out)]) == 0
        with open(out) as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        assert header[0] == "delay_bin"
        assert len(header) == 1 + 16
        assert len(rows) == 64
        power = np.array([[float(v) for v in row[1:]] for row in rows])
        assert np.unravel_index(np.argmax(power), power.shape) == (6, 1)

    def test_deterministic(self, tmp_path):
        path = write_config(tmp_path, tiny_config())
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["rdm-dump", "--config", str(path), "--seed", "5", "--out", str(a)])
        main(["rdm-dump", "--config", str(path), "--seed", "5", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestCliCrb:
    def test_matches_library(self, tmp_path, capsys):
        path = write_config(tmp_path, tiny_config())
        assert main(["crb", "--config", str(path), "--snr", "-10:10:10"]) == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert [r["snr_db"] for r in rows] == ["-10.0", "0.0", "10.0"]
        cfg = scenario_from_dict(tiny_config())
        for row in rows:
            var_d, var_v = crb(cfg.frame, 10 ** (float(row["snr_db"]) / 10))
            assert float(row["var_d"]) == pytest.approx(var_d, rel=1e-12)
            assert float(row["var_v"]) == pytest.approx(var_v, rel=1e-12)

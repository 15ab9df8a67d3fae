import json

import numpy as np
import pytest

from cdmadet.cli import main
from cdmadet.config import ExperimentConfig, config_from_dict, load_config, preset
from cdmadet.core import ParameterError

TOY_DOC = {
    "N": 4, "M": 1, "L": 2, "P": 1, "Q": 16, "n_paths": 3, "N0": 1.0,
    "detectors": ["mglrt"], "snr_db": [17.0], "sir_db": [0.0], "fd": [0.05],
    "alpha": [0.3], "k_users": [2], "hypothesis": "H1", "mode": "faithful_stream",
    "target_pfa": 0.05, "n_trials": 120, "n_calibration": 300, "master_seed": 5,
}


class TestConfig:
    def test_roundtrip_identity(self):
        cfg = config_from_dict(TOY_DOC)
        again = config_from_dict(json.loads(cfg.serialize()))
        assert again == cfg

    def test_unknown_keys_rejected(self):
        with pytest.raises(ParameterError, match="unknown config keys.*bogus"):
            config_from_dict({**TOY_DOC, "bogus": 1})

    def test_invalid_grid_point_rejected(self):
        with pytest.raises(ParameterError):
            config_from_dict({**TOY_DOC, "q_active": [99]})

    def test_target_pfa_bounds(self):
        with pytest.raises(ParameterError):
            config_from_dict({**TOY_DOC, "target_pfa": 0.0})

    def test_json_and_toml_sources(self, tmp_path):
        jpath = tmp_path / "c.json"
        jpath.write_text(json.dumps(TOY_DOC))
        tpath = tmp_path / "c.toml"
        lines = []
        for key, val in TOY_DOC.items():
            lines.append(f"{key} = {json.dumps(val)}")
        tpath.write_text("\n".join(lines))
        assert load_config(jpath) == load_config(tpath)

    def test_explicit_codes(self):
        doc = {**TOY_DOC, "codes": [[1, -1, 1, 1], [-1, 1, 1, -1]]}
        cfg = config_from_dict(doc)
        codes = cfg.explicit_codes()
        assert len(codes) == 2
        assert codes[0].signs() == [1, -1, 1, 1]

    def test_wrong_code_length(self):
        with pytest.raises(ParameterError):
            config_from_dict({**TOY_DOC, "codes": [[1, -1]]})


class TestPresets:
    def test_fig1_grid(self):
        cfg = preset("fig1")
        assert cfg.k_users == (1, 3, 5)
        assert cfg.detectors == ("mglrt", "genie")
        assert cfg.fd == (0.01, 0.1)
        assert cfg.N == 15 and cfg.M == 2 and cfg.Q == 120 and cfg.P == 4
        assert cfg.target_pfa == 0.01

    def test_fig3_grid(self):
        assert preset("fig3").q_active == (30, 60, 90, 120)

    def test_fig4_grid(self):
        assert preset("fig4").sir_db == (-10.0, 0.0, 10.0)

    def test_fig2_grid(self):
        assert preset("fig2").alpha == (0.1, 0.3, 0.5, 0.7)

    def test_unknown_preset(self):
        with pytest.raises(ParameterError):
            preset("fig9")


class TestCli:
    def write_config(self, tmp_path, name="config.json", **extra):
        doc = {**TOY_DOC, **extra}
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return path

    def test_calibrate_then_sweep(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        thr = tmp_path / "thresholds.json"
        out = tmp_path / "results.csv"
        assert main(["calibrate", "--config", str(cfg), "--out", str(thr)]) == 0
        assert thr.exists()
        assert main(["sweep", "--config", str(cfg), "--thresholds", str(thr),
                     "--out", str(out)]) == 0
        rows = out.read_text().strip().splitlines()
        assert len(rows) == 2   # header + one grid point
        assert rows[0].startswith("detector,snr_db")

    def test_calibrate_idempotent(self, tmp_path):
        cfg = self.write_config(tmp_path)
        t1, t2 = tmp_path / "t1.json", tmp_path / "t2.json"
        assert main(["calibrate", "--config", str(cfg), "--out", str(t1)]) == 0
        assert main(["calibrate", "--config", str(cfg), "--out", str(t2)]) == 0
        assert t1.read_bytes() == t2.read_bytes()

    def test_sweep_missing_threshold_is_config_error(self, tmp_path):
        narrow = self.write_config(tmp_path, name="narrow.json")
        wide = self.write_config(tmp_path, name="wide.json",
                                 detectors=["mglrt", "mglrt-direct"])
        thr = tmp_path / "thresholds.json"
        assert main(["calibrate", "--config", str(narrow), "--out", str(thr)]) == 0
        out = tmp_path / "r.csv"
        assert main(["sweep", "--config", str(wide), "--thresholds", str(thr),
                     "--out", str(out)]) == 2

    def test_sweep_auto_calibrates_without_table(self, tmp_path):
        cfg = self.write_config(tmp_path)
        out = tmp_path / "results.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        assert len(out.read_text().strip().splitlines()) == 2

    def test_zero_pfa_rejected(self, tmp_path):
        cfg = self.write_config(tmp_path, target_pfa=0.0)
        assert main(["calibrate", "--config", str(cfg), "--out",
                     str(tmp_path / "t.json")]) == 2

    def test_dry_run_lists_presets(self, capsys):
        assert main(["sweep", "--preset", "fig1", "--dry-run"]) == 0
        out = capsys.readouterr().out
        lines = [l for l in out.strip().splitlines() if l]
        cfg = preset("fig1")
        expected = (len(cfg.detectors) * len(cfg.k_users) * len(cfg.snr_db)
                    * len(cfg.sir_db) * len(cfg.fd) * len(cfg.alpha))
        assert len(lines) == expected
        assert sum(1 for l in lines if " k=5 " in l) == expected // 3

    def test_dry_run_fig3_activation_grid(self, capsys):
        assert main(["sweep", "--preset", "fig3", "--dry-run"]) == 0
        out = capsys.readouterr().out
        for qa in (30, 60, 90, 120):
            assert f"q_active={qa}" in out

    def test_run_single_point(self, tmp_path):
        cfg = self.write_config(tmp_path)
        out = tmp_path / "results.csv"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        assert len(out.read_text().strip().splitlines()) == 2

    def test_run_rejects_grids(self, tmp_path):
        cfg = self.write_config(tmp_path, snr_db=[10.0, 14.0])
        assert main(["run", "--config", str(cfg)]) == 2

    def test_selftest_passes(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 4
        assert "selftest passed" in out

    def test_selftest_fault_injection(self, capsys):
        assert main(["selftest", "--corrupt-geometry"]) == 1
        out = capsys.readouterr().out
        assert "[FAIL] fast-vs-direct statistic" in out

    def test_seed_and_trials_overrides(self, tmp_path):
        cfg = self.write_config(tmp_path)
        o1, o2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["sweep", "--config", str(cfg), "--seed", "99",
                     "--trials", "60", "--out", str(o1)]) == 0
        assert main(["sweep", "--config", str(cfg), "--seed", "99",
                     "--trials", "60", "--out", str(o2)]) == 0
        assert o1.read_bytes() == o2.read_bytes()
        assert ",60," in o1.read_text().splitlines()[1]

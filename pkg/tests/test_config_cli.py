import json
from pathlib import Path

import pytest

from hartree_decay.cli import main
from hartree_decay.config import SCENARIOS, ConfigError, from_preset, load_config, parse_config, preset
from hartree_decay.scenarios import bootstrap_checks, run_scenario

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


class TestParsing:
    def test_minimal(self):
        cfg = parse_config('scenario = "free_decay"\n')
        assert cfg.scenario == "free_decay"
        assert cfg.get("grid.points") == 512
        assert cfg.seed == 0

    def test_file_values_override_preset(self):
        cfg = parse_config('scenario = "free_decay"\n[grid]\ndimension = 2\npoints = 64\n')
        assert cfg.get("grid.dimension") == 2 and cfg.get("grid.points") == 64
        assert cfg.get("grid.half_length") == 80.0

    def test_unknown_key_reports_line(self):
        text = 'scenario = "free_decay"\n\n[grid]\npoints = 64\nspacing = 0.1\n'
        with pytest.raises(ConfigError, match=r"grid\.spacing \(line 5\)"):
            parse_config(text)

    def test_unknown_table(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config('scenario = "free_decay"\n[solver]\norder = 2\n')

    def test_wrong_type(self):
        with pytest.raises(ConfigError, match="expected"):
            parse_config('scenario = "free_decay"\n[grid]\npoints = "many"\n')
        with pytest.raises(ConfigError, match="bool"):
            parse_config('scenario = "free_decay"\n[time]\ndt = true\n')

    @pytest.mark.parametrize("body", [
        "[grid]\npoints = 63\n",
        "[grid]\ndimension = 4\n",
        "[grid]\nhalf_length = -1.0\n",
        "[time]\ndt = 0.3\nt_end = 1.0\n",
        "[interaction]\nsign = 2\n",
        "[potential]\nfamily = \"coulomb\"\n",
        "[tolerances]\nfit_start = 5.0\nfit_end = 4.0\n",
    ])
    def test_semantic_errors(self, body):
        with pytest.raises(ConfigError):
            parse_config('scenario = "free_decay"\n' + body)

    def test_missing_and_unknown_scenario(self):
        with pytest.raises(ConfigError, match="missing"):
            parse_config("seed = 1\n")
        with pytest.raises(ConfigError, match="unknown scenario"):
            parse_config('scenario = "warp_drive"\n')

    def test_syntax_error(self):
        with pytest.raises(ConfigError):
            parse_config("scenario = \n")

    def test_overrides(self):
        cfg = parse_config('scenario = "free_decay"\n', ["time.dt=0.5", "seed=7", "output.csv=false"])
        assert cfg.get("time.dt") == 0.5 and cfg.seed == 7 and cfg.get("output.csv") is False

    @pytest.mark.parametrize("bad", ["time.dt", "grid.colour=red", "a.b.c=1", "time.dt=fast"])
    def test_bad_overrides(self, bad):
        with pytest.raises(ConfigError):
            parse_config('scenario = "free_decay"\n', [bad])

    def test_presets_validate(self):
        for name in SCENARIOS:
            assert from_preset(name).scenario == name

    def test_preset_unknown(self):
        with pytest.raises(ConfigError):
            preset("nope")

    def test_shipped_configs_load(self):
        for p in sorted(CONFIGS.glob("*.toml")):
            assert load_config(p).scenario in SCENARIOS

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.toml")

    def test_to_dict_is_a_copy(self):
        cfg = from_preset("free_decay")
        d = cfg.to_dict()
        d["grid"]["points"] = 2
        assert cfg.get("grid.points") == 512


class TestScenarios:
    def test_free_decay_deterministic(self, tmp_path):
        a = run_scenario(from_preset("free_decay"), tmp_path / "a")
        b = run_scenario(from_preset("free_decay"), tmp_path / "b")
        assert a.passed
        assert a.exponents == b.exponents
        assert (tmp_path / "a" / "diagnostics.csv").read_bytes() == (tmp_path / "b" / "diagnostics.csv").read_bytes()
        data = json.loads((tmp_path / "a" / "summary.json").read_text())
        assert {c["name"] for c in data["checks"]} == {"dispersive_law", "decay_exponent", "mass_conservation"}

    def test_bootstrap_checks_seeded(self):
        a = bootstrap_checks(0.1, 7.0, 50, seed=3)
        b = bootstrap_checks(0.1, 7.0, 50, seed=3)
        assert a == b


class TestCli:
    def test_run_passes(self, tmp_path, capsys):
        assert main(["run", str(CONFIGS / "free_decay_d1.toml"), "--out", str(tmp_path)]) == 0
        assert "free_decay.decay_exponent: PASS" in capsys.readouterr().out
        assert (tmp_path / "summary.json").exists()

    def test_config_error_exit_code(self, tmp_path, capsys):
        p = tmp_path / "c.toml"
        p.write_text('scenario = "free_decay"\n[grid]\npoints = 63\n')
        assert main(["run", str(p), "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_key_exit_code(self, tmp_path, capsys):
        p = tmp_path / "c.toml"
        p.write_text('scenario = "free_decay"\n[grid]\nwidth = 3\n')
        assert main(["run", str(p)]) == 2
        assert "line 3" in capsys.readouterr().err

    def test_failed_check_exit_code(self, tmp_path):
        assert main(["run", str(CONFIGS / "bootstrap_sweep.toml"), "--out", str(tmp_path)]) == 1
        data = json.loads((tmp_path / "summary.json").read_text())
        assert not data["passed"]

    def test_numerical_abort_exit_code(self, tmp_path):
        p = tmp_path / "c.toml"
        p.write_text('scenario = "free_decay"\n[initial]\namplitude = 1e200\n')
        assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 3
        assert json.loads((tmp_path / "o" / "summary.json").read_text())["aborted"]

    def test_set_and_seed(self, tmp_path):
        code = main(["run", str(CONFIGS / "free_decay_d1.toml"), "--out", str(tmp_path),
                     "--set", "time.stride=2", "--seed", "5"])
        assert code == 0
        assert json.loads((tmp_path / "summary.json").read_text())["seed"] == 5

    def test_suite_selection(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        assert main(["suite", "--only", "10", "--json", str(out)]) == 0
        assert "criterion 10" in capsys.readouterr().out
        assert json.loads(out.read_text())[0]["number"] == 10

    def test_suite_unknown_scenario(self):
        assert main(["suite", "--only", "nope"]) == 2

    def test_suite_empty_selection(self):
        assert main(["suite", "--only", "bootstrap_sweep", "--dimension", "3"]) == 2

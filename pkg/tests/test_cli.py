import json
from pathlib import Path

from platoon_asmc.cli import main
from platoon_asmc.config import default_config, from_dict, load_config

REPO_ROOT = Path(__file__).resolve().parent.parent


def tiny_config(**overrides):
    doc = default_config().to_dict()
    doc["sim"]["duration"] = 1.0
    doc["controller"] = "proposed"
    for dotted, value in overrides.items():
        section, _, key = dotted.partition(".")
        if key:
            doc[section][key] = value
        else:
            doc[section] = value
    return doc


def write_config(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


class TestConfigParsing:
    def test_defaults_round_trip(self):
        cfg = default_config()
        assert from_dict(cfg.to_dict()) == cfg

    def test_shipped_defaults_file_matches_code(self):
        shipped = load_config(REPO_ROOT / "configs" / "defaults.json")
        assert shipped == default_config()

    def test_unknown_top_level_key(self, tmp_path):
        p = write_config(tmp_path, {**tiny_config(), "typo_section": {}})
        assert main(["run", "--config", str(p), "--out", str(tmp_path)]) == 2

    def test_unknown_section_key(self, tmp_path, capsys):
        doc = tiny_config()
        doc["kinematic"]["k9"] = 1.0
        p = write_config(tmp_path, doc)
        assert main(["run", "--config", str(p), "--out", str(tmp_path)]) == 2
        assert "k9" in capsys.readouterr().err

    def test_invariant_violation_names_field(self, tmp_path, capsys):
        p = write_config(tmp_path, tiny_config(**{"kinematic.k1": -1.0}))
        assert main(["run", "--config", str(p), "--out", str(tmp_path)]) == 2
        err = capsys.readouterr().err
        assert err.count("\n") == 1  # single-line machine-parseable error
        assert "k1" in err and "> 0" in err

    def test_robot_section_accepts_per_robot_list(self, tmp_path):
        doc = tiny_config()
        doc["robot"] = [doc["robot"], {**doc["robot"], "m": 2.0},
                        dict(doc["robot"])]
        p = write_config(tmp_path, doc)
        out = tmp_path / "per_robot"
        assert main(["run", "--config", str(p), "--out", str(out),
                     "--quiet"]) == 0
        echo = json.loads((out / "config_echo.json").read_text())
        assert [r["m"] for r in echo["robot"]] == [1.2, 2.0, 1.2]

    def test_robot_list_length_mismatch_is_rejected(self, tmp_path, capsys):
        doc = tiny_config()
        doc["robot"] = [doc["robot"]]
        p = write_config(tmp_path, doc)
        assert main(["run", "--config", str(p), "--out", str(tmp_path)]) == 2
        assert "parameter sets" in capsys.readouterr().err

    def test_scenario_hash_ignores_output_and_controller(self):
        a = from_dict(tiny_config())
        b = from_dict({**tiny_config(), "controller": "baseline",
                       "output_dir": "elsewhere"})
        c = from_dict(tiny_config(**{"sim.duration": 2.0}))
        assert a.scenario_hash() == b.scenario_hash()
        assert a.scenario_hash() != c.scenario_hash()


class TestRunCommand:
    def test_happy_path_both_controllers(self, tmp_path):
        p = write_config(tmp_path, tiny_config(controller="both"))
        out = tmp_path / "out"
        assert main(["run", "--config", str(p), "--out", str(out),
                     "--quiet"]) == 0
        for name in ("trace_proposed.csv", "trace_baseline.csv", "report.txt",
                     "report.json", "plotspec.txt", "config_echo.json"):
            assert (out / name).exists(), name
        rep = json.loads((out / "report.json").read_text())
        assert {r["controller"] for r in rep["reports"]} == \
            {"proposed", "baseline"}
        assert rep["comparison"]

    def test_single_controller_has_no_comparison(self, tmp_path):
        p = write_config(tmp_path, tiny_config())
        out = tmp_path / "single"
        assert main(["run", "--config", str(p), "--out", str(out),
                     "--quiet"]) == 0
        assert not (out / "trace_baseline.csv").exists()
        rep = json.loads((out / "report.json").read_text())
        assert "comparison" not in rep

    def test_duration_flag_sets_row_count(self, tmp_path):
        p = write_config(tmp_path, tiny_config(**{"sim.duration": 5.0}))
        out = tmp_path / "dur"
        assert main(["run", "--config", str(p), "--out", str(out), "--quiet",
                     "--duration", "2.0"]) == 0
        rows = (out / "trace_proposed.csv").read_text().splitlines()
        assert len(rows) == 1 + 201

    def test_dt_flag_overrides_plant_step(self, tmp_path):
        p = write_config(tmp_path, tiny_config())
        out = tmp_path / "dt"
        assert main(["run", "--config", str(p), "--out", str(out), "--quiet",
                     "--dt", "0.002"]) == 0
        echo = json.loads((out / "config_echo.json").read_text())
        assert echo["sim"]["dt_plant"] == 0.002

    def test_controller_flag_overrides_config(self, tmp_path):
        p = write_config(tmp_path, tiny_config(controller="both"))
        out = tmp_path / "ctl"
        assert main(["run", "--config", str(p), "--out", str(out), "--quiet",
                     "--controller", "baseline"]) == 0
        assert (out / "trace_baseline.csv").exists()
        assert not (out / "trace_proposed.csv").exists()

    def test_out_flag_beats_config_and_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PLATOON_ASMC_OUT", str(tmp_path / "env"))
        p = write_config(tmp_path,
                         tiny_config(output_dir=str(tmp_path / "cfgdir")))
        out = tmp_path / "flag"
        assert main(["run", "--config", str(p), "--out", str(out),
                     "--quiet"]) == 0
        assert (out / "trace_proposed.csv").exists()
        assert not (tmp_path / "env").exists()
        assert not (tmp_path / "cfgdir").exists()

    def test_env_var_is_output_fallback(self, tmp_path, monkeypatch):
        env_dir = tmp_path / "envout"
        monkeypatch.setenv("PLATOON_ASMC_OUT", str(env_dir))
        p = write_config(tmp_path, tiny_config())
        assert main(["run", "--config", str(p), "--quiet"]) == 0
        assert (env_dir / "trace_proposed.csv").exists()

    def test_defaults_config_is_optional(self, tmp_path):
        out = tmp_path / "defaults"
        assert main(["run", "--out", str(out), "--quiet", "--duration", "0.5",
                     "--controller", "baseline"]) == 0
        assert (out / "trace_baseline.csv").exists()

    def test_rerun_from_echo_reproduces_traces(self, tmp_path):
        p = write_config(tmp_path, tiny_config(controller="both"))
        out1 = tmp_path / "first"
        out2 = tmp_path / "second"
        assert main(["run", "--config", str(p), "--out", str(out1),
                     "--quiet"]) == 0
        assert main(["run", "--config", str(out1 / "config_echo.json"),
                     "--out", str(out2), "--quiet"]) == 0
        for name in ("trace_proposed.csv", "trace_baseline.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_custom_course_from_path_file(self, tmp_path):
        course = tmp_path / "course.txt"
        course.write_text(
            "".join(f"{0.05 * i} 0.0\n" for i in range(2000)))
        doc = tiny_config(path_file=str(course))
        doc["sim"]["duration"] = 2.0
        p = write_config(tmp_path, doc)
        out = tmp_path / "course_out"
        assert main(["run", "--config", str(p), "--out", str(out),
                     "--quiet"]) == 0
        rows = (out / "trace_proposed.csv").read_text().splitlines()
        # straight course: the heading column stays at zero
        header = rows[0].split(",")
        theta_col = header.index("r1_theta")
        assert all(abs(float(r.split(",")[theta_col])) < 0.2 for r in rows[1:])

    def test_abort_reports_machine_parseable_line(self, tmp_path, capsys):
        doc = tiny_config(**{"asmc.Lambda_v": 1e300})
        p = write_config(tmp_path, doc)
        code = main(["run", "--config", str(p), "--out", str(tmp_path / "x"),
                     "--quiet"])
        assert code == 3
        err = capsys.readouterr().err
        assert err.startswith("error: kind=abort")
        assert err.count("\n") == 1

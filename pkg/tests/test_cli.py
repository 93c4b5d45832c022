"""CLI subcommands: run, oracle, compare, plotdata, validate."""

from __future__ import annotations

import json

from stowbench.cli import main
from stowbench.model import GridSpec, ScenarioSpec, generate_instance

FAST_ALGO = {"hidden": [16], "warmup_steps": 8, "update_every": 4, "batch_size": 8,
             "rollout_steps": 16, "epochs": 2, "minibatch_size": 8, "vf_iters": 2}

TINY_SCENARIO = {"vessel": {"bays": 2, "rows": 2, "tiers": 2},
                 "yard": {"bays": 2, "rows": 2, "tiers": 2},
                 "num_containers": 6, "num_groups": 2, "num_cranes": 1,
                 "seed": 0, "vessel_preoccupied": 0.0}


def write_config(tmp_path, **overrides):
    payload = {
        "scenario": TINY_SCENARIO,
        "algo": "dqn",
        "env": "spge",
        "reps": 1,
        "total_timesteps": 30,
        "eval_every": 15,
        "eval_episodes": 2,
        "seed": 3,
        "out": str(tmp_path / "out"),
        "algo_config": FAST_ALGO,
    }
    payload.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return path


class TestRun:
    def test_run_from_config_writes_outputs(self, tmp_path, capsys):
        config = write_config(tmp_path)
        assert main(["run", "--config", str(config)]) == 0
        out_dir = tmp_path / "out"
        assert (out_dir / "curves.csv").exists()
        assert (out_dir / "finals.csv").exists()
        assert (out_dir / "runs" / "run_000.json").exists()
        assert "wrote" in capsys.readouterr().out

    def test_flags_override_config(self, tmp_path):
        config = write_config(tmp_path)
        override_out = tmp_path / "elsewhere"
        assert main(["run", "--config", str(config), "--out", str(override_out),
                     "--reps", "2"]) == 0
        assert (override_out / "runs" / "run_001.json").exists()

    def test_unknown_scenario_id_fails_with_valid_ids(self, tmp_path, capsys):
        code = main(["run", "--scenario", "42", "--algo", "dqn", "--env", "spge",
                     "--reps", "1", "--timesteps", "10", "--seed", "1",
                     "--out", str(tmp_path / "x")])
        assert code != 0
        err = capsys.readouterr().err
        assert "42" in err and "[1, 2, 3, 4, 5, 6, 7, 8]" in err

    def test_variant_mismatch_fails(self, tmp_path, capsys):
        code = main(["run", "--scenario", "6", "--algo", "dqn", "--env", "spge",
                     "--reps", "1", "--timesteps", "10", "--seed", "1",
                     "--out", str(tmp_path / "x")])
        assert code != 0
        assert "multi-crane" in capsys.readouterr().err


class TestOracle:
    def instance_file(self, tmp_path, cranes=1):
        spec = ScenarioSpec(vessel=GridSpec(2, 2, 2), yard=GridSpec(2, 2, 2),
                            num_containers=5, num_groups=2, num_cranes=cranes, seed=9)
        path = tmp_path / "instance.json"
        path.write_text(generate_instance(spec).to_json())
        return path

    def test_shifters_objective(self, tmp_path, capsys):
        path = self.instance_file(tmp_path)
        assert main(["oracle", "--instance", str(path)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["objective"] == "shifters"
        assert payload["best_value"] >= 0
        assert len(payload["best_sequence"]) == 5

    def test_makespan_objective_to_file(self, tmp_path):
        path = self.instance_file(tmp_path, cranes=2)
        out = tmp_path / "oracle.json"
        assert main(["oracle", "--instance", str(path), "--objective", "makespan",
                     "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["best_value"] >= 3 * 60.0  # 5 containers over 2 cranes

    def test_oversized_instance_refused(self, tmp_path, capsys):
        spec = ScenarioSpec(vessel=GridSpec(3, 5, 3), yard=GridSpec(3, 5, 3),
                            num_containers=45, num_groups=3, num_cranes=1, seed=1)
        path = tmp_path / "big.json"
        path.write_text(generate_instance(spec).to_json())
        assert main(["oracle", "--instance", str(path)]) != 0
        assert "guarded" in capsys.readouterr().err

    def test_missing_file_is_clean_error(self, tmp_path, capsys):
        assert main(["oracle", "--instance", str(tmp_path / "nope.json")]) != 0
        assert "error" in capsys.readouterr().err


class TestCompareAndPlotdata:
    def run_cell(self, tmp_path, name, env, seed):
        config = write_config(
            tmp_path,
            scenario={**TINY_SCENARIO, "num_cranes": 2},
            env=env, seed=seed, reps=2, out=str(tmp_path / name))
        config = config.rename(tmp_path / f"{name}.json")
        assert main(["run", "--config", str(config)]) == 0
        return tmp_path / name

    def test_compare_two_directories(self, tmp_path, capsys):
        a = self.run_cell(tmp_path, "mc", "spge-mc", seed=1)
        b = self.run_cell(tmp_path, "aec", "spaec", seed=2)
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--a", str(a), "--b", str(b), "--out", str(out),
                     "--label-a", "mc", "--label-b", "aec"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("scenario,algo,kpi,mc_value,aec_value")
        assert len(lines) == 1 + 2  # one cell x two KPIs

    def test_plotdata_regeneration(self, tmp_path, capsys):
        cell = self.run_cell(tmp_path, "mc2", "spge-mc", seed=3)
        out = tmp_path / "series"
        assert main(["plotdata", "--in", str(cell), "--out", str(out)]) == 0
        files = sorted(p.name for p in out.glob("*.csv"))
        assert files == ["scenariocustom_spge-mc_optime.csv",
                         "scenariocustom_spge-mc_shifters.csv"]

    def test_compare_missing_directory_fails(self, tmp_path, capsys):
        assert main(["compare", "--a", str(tmp_path / "nope"),
                     "--b", str(tmp_path / "nope2"), "--out",
                     str(tmp_path / "cmp.csv")]) != 0


class TestValidate:
    def test_valid_config_accepted(self, tmp_path, capsys):
        config = write_config(tmp_path)
        assert main(["validate", "--config", str(config)]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_crane_mismatch_rejected(self, tmp_path, capsys):
        config = write_config(tmp_path, scenario=6, env="spge")
        assert main(["validate", "--config", str(config)]) != 0
        assert "multi-crane" in capsys.readouterr().err

    def test_malformed_json_rejected(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["validate", "--config", str(path)]) != 0

    def test_unknown_algo_rejected(self, tmp_path, capsys):
        config = write_config(tmp_path, algo="sarsa")
        assert main(["validate", "--config", str(config)]) != 0
        assert "algorithm" in capsys.readouterr().err

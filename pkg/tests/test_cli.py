"""End-to-end command line behavior: config handling, determinism, reports."""

import json
import re
from pathlib import Path

import numpy as np
import pytest

from xvwm.cli import main
from xvwm.cli.config import (AppConfig, config_dict, config_hash, load_config)
from xvwm.errors import ConfigurationError
from xvwm.training import Scheme

COMMANDS = ["gen-data", "train", "eval-loc", "eval-traj", "eval-spawn",
            "eval-matrix", "transfer-study", "rollout", "serve", "inspect"]

TINY = {
    "world": {"render": {"size": 16}},
    "dataset": {"num_episodes": 3, "length": 8},
    "model": {"image_size": 16, "patch": 8, "dim": 16, "heads": 2,
              "layers": 1, "context_len": 2, "freq_dim": 16},
    "scheme": {"k_train": 2, "k_test": 2},
    "eval": {"horizon": 2, "anchors_per_episode": 1, "ddim_steps": 2},
}


@pytest.fixture(scope="module")
def tiny_cfg(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "tiny.json"
    p.write_text(json.dumps(TINY))
    return str(p)


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory, tiny_cfg):
    out = tmp_path_factory.mktemp("data") / "ds"
    assert main(["gen-data", "--config", tiny_cfg, "--out", str(out)]) == 0
    return str(out)


@pytest.fixture(scope="module")
def tiny_ckpt(tmp_path_factory, tiny_cfg, tiny_dataset):
    out = tmp_path_factory.mktemp("train") / "run"
    rc = main(["train", "--config", tiny_cfg, "--dataset", tiny_dataset,
               "--out", str(out), "--steps", "3", "--batch-size", "4"])
    assert rc == 0
    return str(out / "last.ckpt")


# -- config schema ---------------------------------------------------------------


class TestConfig:
    def test_defaults_load_without_a_file(self):
        app = load_config(None)
        assert app.model.image_size == app.render.size == 64
        assert app.scheme.scheme is Scheme.TWO_VIEW
        app.validate()

    def test_unknown_keys_rejected_with_dotted_paths(self):
        bad = json.dumps({"world": {"sides": 12}, "trian": {},
                          "model": {"dmi": 8}})
        with pytest.raises(ConfigurationError) as e:
            load_config(text=bad)
        msg = str(e.value)
        assert "world.sides" in msg
        assert "trian" in msg
        assert "model.dmi" in msg

    def test_invalid_json_is_a_config_error(self):
        with pytest.raises(ConfigurationError, match="not valid JSON"):
            load_config(text="{nope")

    def test_missing_file_is_a_config_error(self):
        with pytest.raises(ConfigurationError, match="does not exist"):
            load_config("/definitely/not/here.json")

    def test_view_names_parse_in_model_section(self):
        app = load_config(text=json.dumps(
            {"model": {"views": ["ego", "bev", "os", "front"]}}))
        assert len(app.model.views) == 4

    def test_single_view_scheme_needs_no_explicit_prob(self):
        app = load_config(text=json.dumps({"scheme": {"scheme": "single-view"}}))
        assert app.scheme.cross_view_prob == 0.0
        app.scheme.validate()

    def test_mismatched_sizes_refused(self):
        app = load_config(text=json.dumps(
            {"world": {"render": {"size": 32}},
             "model": {"image_size": 64}}))
        with pytest.raises(ConfigurationError, match="does not match"):
            app.validate()

    def test_hash_stable_and_sensitive(self):
        a = load_config(None)
        b = load_config(text="{}")
        c = load_config(text=json.dumps({"dataset": {"seed": 7}}))
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash(c)
        assert re.fullmatch(r"[0-9a-f]{10}", config_hash(a))

    def test_config_dict_round_trips_through_loader(self):
        app = load_config(text=json.dumps(TINY))
        again = load_config(text=json.dumps(config_dict(app)))
        assert config_hash(app) == config_hash(again)

    def test_unsupported_version_refused(self):
        with pytest.raises(ConfigurationError, match="version"):
            load_config(text=json.dumps({"version": 99}))


# -- generic command behavior ----------------------------------------------------


class TestParser:
    @pytest.mark.parametrize("command", COMMANDS)
    def test_help_exits_zero(self, command, capsys):
        with pytest.raises(SystemExit) as e:
            main([command, "--help"])
        assert e.value.code == 0
        assert command in capsys.readouterr().out

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 2
        assert "COMMAND" in capsys.readouterr().out

    def test_errors_are_one_machine_line(self, capsys):
        rc = main(["train", "--steps", "2"])  # no dataset
        assert rc == 1
        err = capsys.readouterr().err.strip()
        assert err.startswith("error.ConfigurationError: ")
        assert "\n" not in err

    def test_unknown_config_key_fails_loud(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"dataset": {"episodes": 4}}))
        rc = main(["gen-data", "--config", str(p), "--out",
                   str(tmp_path / "ds")])
        assert rc == 1
        assert "dataset.episodes" in capsys.readouterr().err


# -- gen-data ----------------------------------------------------------------------


class TestGenData:
    def test_rerun_is_bit_identical(self, tiny_cfg, tiny_dataset, tmp_path):
        again = tmp_path / "ds_again"
        assert main(["gen-data", "--config", tiny_cfg,
                     "--out", str(again)]) == 0
        first = sorted(Path(tiny_dataset).rglob("*"))
        second = sorted(again.rglob("*"))
        assert [p.relative_to(tiny_dataset) for p in first] == \
               [p.relative_to(again) for p in second]
        for a, b in zip(first, second):
            if a.is_file():
                assert a.read_bytes() == b.read_bytes(), a.name

    def test_flags_override_the_file(self, tiny_cfg, tmp_path, capsys):
        out = tmp_path / "ds5"
        assert main(["gen-data", "--config", tiny_cfg, "--out", str(out),
                     "--episodes", "5", "--seed", "9"]) == 0
        manifest = json.loads((out / "dataset.json").read_text())
        assert manifest["num_episodes"] == 5
        assert manifest["seed"] == 9

    def test_auto_run_dir_records_the_config(self, tiny_cfg, tmp_path):
        root = tmp_path / "runs"
        assert main(["gen-data", "--config", tiny_cfg,
                     "--out-root", str(root)]) == 0
        (run,) = root.iterdir()
        assert run.name.startswith("gen-data-")
        stored = json.loads((run / "config.json").read_text())
        assert stored["dataset"]["num_episodes"] == 3
        assert (run / "dataset" / "dataset.json").exists()


# -- train -------------------------------------------------------------------------


class TestTrain:
    def test_dry_run_two_view_frequencies(self, capsys):
        rc = main(["train", "--scheme", "two-view", "--steps", "50",
                   "--dry-run"])
        assert rc == 0
        out = capsys.readouterr().out
        freqs = dict(re.findall(r"(\w+:\w+)\s+(0\.\d+)", out))
        assert set(freqs) == {"ego:ego", "ego:bev", "bev:ego", "bev:bev"}
        for pair, f in freqs.items():
            assert abs(float(f) - 0.25) < 0.03, (pair, f)

    def test_dry_run_single_view_is_all_ego(self, capsys):
        rc = main(["train", "--scheme", "single-view", "--steps", "20",
                   "--dry-run"])
        assert rc == 0
        out = capsys.readouterr().out
        freqs = dict(re.findall(r"(\w+:\w+)\s+(0\.\d+|1\.\d+)", out))
        assert freqs == {"ego:ego": "1.0000"}

    def test_dry_run_needs_steps(self, capsys):
        assert main(["train", "--dry-run"]) == 1
        assert "error.ConfigurationError" in capsys.readouterr().err

    def test_short_run_saves_checkpoint_and_config(self, tiny_ckpt):
        run = Path(tiny_ckpt).parent
        assert Path(tiny_ckpt).exists()
        assert (run / "config.json").exists()
        assert (run / "metrics.jsonl").exists()
        lines = (run / "metrics.jsonl").read_text().splitlines()
        assert len(lines) == 3
        assert json.loads(lines[-1])["step"] == 3

    def test_scheme_flag_must_be_known(self, capsys):
        assert main(["train", "--scheme", "five-view", "--steps", "2",
                     "--dry-run"]) == 1
        assert "unknown scheme" in capsys.readouterr().err


# -- inspect -----------------------------------------------------------------------


class TestInspect:
    def test_dataset_summary(self, tiny_dataset, capsys):
        assert main(["inspect", tiny_dataset]) == 0
        out = capsys.readouterr().out
        assert "num_episodes: 3" in out
        assert "split: 2 train / 1 test" in out

    def test_checkpoint_summary(self, tiny_ckpt, capsys):
        assert main(["inspect", tiny_ckpt]) == 0
        out = capsys.readouterr().out
        assert "step: 3" in out
        assert "config.dim: 16" in out
        assert re.search(r"hash: [0-9a-f]{12}", out)
        assert "extra.exposure" in out

    def test_episode_summary(self, tiny_dataset, capsys):
        ep = str(Path(tiny_dataset) / "episodes" / "ep_00000.xvwm")
        assert main(["inspect", ep]) == 0
        out = capsys.readouterr().out
        assert "frames: 8 per view at 16px" in out

    def test_config_summary(self, tiny_cfg, capsys):
        assert main(["inspect", tiny_cfg]) == 0
        out = capsys.readouterr().out
        assert "config hash:" in out

    def test_garbage_is_a_format_error(self, tmp_path, capsys):
        p = tmp_path / "noise.bin"
        p.write_bytes(b"\x00" * 64)
        assert main(["inspect", str(p)]) == 1
        assert "error.FormatError" in capsys.readouterr().err


# -- evaluation through the CLI ------------------------------------------------------


@pytest.fixture(scope="module")
def oracle_dataset(tmp_path_factory):
    cfg = {"world": {"render": {"size": 64}},
           "dataset": {"num_episodes": 2, "length": 10, "test_fraction": 0.5}}
    p = tmp_path_factory.mktemp("ocfg") / "cfg.json"
    p.write_text(json.dumps(cfg))
    out = tmp_path_factory.mktemp("odata") / "ds"
    assert main(["gen-data", "--config", str(p), "--out", str(out)]) == 0
    return str(out)


class TestEvalCommands:
    def test_oracle_localization_is_subpixel(self, oracle_dataset, tmp_path,
                                             capsys):
        rc = main(["eval-loc", "--dataset", oracle_dataset, "--oracle",
                   "--horizon", "3", "--anchors", "2",
                   "--out", str(tmp_path / "loc")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "checkpoint: oracle" in out
        records = [json.loads(l) for l in
                   (tmp_path / "loc" / "records.jsonl").read_text().splitlines()]
        bev = [r for r in records if r["input_view"] == "bev"]
        assert bev and bev[0]["median_px"] <= 1.0
        assert bev[0]["success_a"] == 1.0
        assert bev[0]["invalid"] == 0

    def test_predictor_flags_are_exclusive(self, oracle_dataset, capsys):
        rc = main(["eval-loc", "--dataset", oracle_dataset, "--oracle",
                   "--baseline", "gray"])
        assert rc == 1
        assert "exactly one" in capsys.readouterr().err

    def test_some_predictor_is_required(self, oracle_dataset, capsys):
        assert main(["eval-loc", "--dataset", oracle_dataset]) == 1
        assert "error.ConfigurationError" in capsys.readouterr().err

    def test_trajectory_writes_figure_and_records(self, oracle_dataset,
                                                  tmp_path, capsys):
        rc = main(["eval-traj", "--dataset", oracle_dataset, "--oracle",
                   "--horizon", "3", "--out", str(tmp_path / "traj")])
        assert rc == 0
        svg = (tmp_path / "traj" / "trajectory.svg").read_text()
        assert svg.startswith("<?xml")
        recs = (tmp_path / "traj" / "records.jsonl").read_text().splitlines()
        assert len(recs) > 0

    def test_spawn_reports_gray_baseline(self, oracle_dataset, tmp_path,
                                         capsys):
        rc = main(["eval-spawn", "--dataset", oracle_dataset, "--oracle",
                   "--horizon", "3", "--anchors", "1",
                   "--out", str(tmp_path / "spawn")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "constant gray" in out

    def test_model_eval_runs_end_to_end(self, tiny_ckpt, tiny_dataset,
                                        tmp_path, capsys):
        rc = main(["eval-matrix", "--dataset", tiny_dataset, "--split",
                   "test", "--checkpoint", tiny_ckpt, "--horizon", "2",
                   "--anchors", "1", "--ddim-steps", "2", "--resamples", "50",
                   "--out", str(tmp_path / "mx")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "ego:ego" not in out  # matrix is a table, not pair lines
        assert "static arena map" in out

    def test_rollout_writes_frames_and_sheet(self, tiny_ckpt, tiny_dataset,
                                             tmp_path, capsys):
        rc = main(["rollout", "--checkpoint", tiny_ckpt, "--dataset",
                   tiny_dataset, "--length", "2", "--ddim-steps", "2",
                   "--out", str(tmp_path / "ro")])
        assert rc == 0
        d = tmp_path / "ro"
        pngs = sorted(d.glob("pred_*.png"))
        assert len(pngs) == 2
        assert (d / "rollout.svg").exists()
        recs = [json.loads(l) for l in
                (d / "records.jsonl").read_text().splitlines()]
        assert [r["step"] for r in recs] == [1, 2]
        assert "checkpoint:" in (d / "report.txt").read_text()

    def test_rollout_refuses_untrained_view(self, tiny_ckpt, tiny_dataset,
                                            capsys):
        rc = main(["rollout", "--checkpoint", tiny_ckpt, "--dataset",
                   tiny_dataset, "--view", "front", "--length", "2"])
        assert rc == 1
        assert "error.ConfigurationError" in capsys.readouterr().err

    def test_transfer_study_over_cli(self, tiny_ckpt, tiny_dataset, tmp_path,
                                     capsys):
        rc = main(["transfer-study", "--checkpoints", tiny_ckpt, tiny_ckpt,
                   "--dataset", tiny_dataset, "--horizon", "2",
                   "--anchors", "1", "--ddim-steps", "2", "--resamples", "50",
                   "--out", str(tmp_path / "ts")])
        assert rc == 0
        assert (tmp_path / "ts" / "transfer.svg").exists()
        out = capsys.readouterr().out
        assert "ego:ego seen" in out

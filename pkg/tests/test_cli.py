"""Command-line front-end: configs, outputs, determinism, exit codes."""

from __future__ import annotations

import csv
import json

import numpy as np
import pytest

import relaylab as rl
from relaylab import cli
from relaylab.verify import CheckResult


def write_config(tmp_path, name="cfg.json", **overrides):
    base = {
        "channel": {"kind": "orthogonal_bsc", "params": {"p2": 0.0, "p3": 0.0}},
        "distribution": {
            "p_x1": [0.5, 0.5],
            "p_x2": [0.5, 0.5],
            "q": [[[1.0], [1.0]], [[1.0], [1.0]]],
        },
        "search": {"grid_resolution": 2, "yhat_max_size": 2},
        "sim": {
            "n": 8,
            "B": 2,
            "R": 0.25,
            "R2": 0.25,
            "epsilon": 0.3,
            "seed": 11,
            "decoder": "sliding",
            "metric": "max_score",
            "trials": 10,
        },
    }
    base.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(base))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        header = fh.readline()
        assert header.startswith("# relaylab ")
        rows = list(csv.DictReader(fh))
    return rows


def test_config_validation(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"channel": {"kind": "primitive", "path": "x"}}))
    with pytest.raises(cli.ConfigError, match="not both"):
        cli.load_config(path)
    path.write_text(json.dumps({"channel": {}}))
    with pytest.raises(cli.ConfigError, match="kind"):
        cli.load_config(path)
    path.write_text(json.dumps({"channel": {"kind": "deterministic"}, "distribution": {}}))
    with pytest.raises(cli.ConfigError, match="distribution"):
        cli.load_config(path)
    path.write_text(
        json.dumps(
            {
                "channel": {"kind": "deterministic"},
                "distribution": {"search": {}, "p_x1": [1.0]},
            }
        )
    )
    with pytest.raises(cli.ConfigError, match="not both"):
        cli.load_config(path)
    path.write_text("not json at all {")
    with pytest.raises(cli.ConfigError, match="valid JSON"):
        cli.load_config(path)
    path.write_text(
        json.dumps(
            {
                "channel": {"kind": "deterministic"},
                "distribution": {"search": {"grid_step": 4}},
            }
        )
    )
    with pytest.raises(cli.ConfigError, match="unknown search settings"):
        cli.load_config(path)


def test_missing_config_reports_path_and_exit_code(tmp_path, capsys):
    code = cli.main(["rates", "--config", str(tmp_path / "absent.json")])
    assert code == 2
    assert "absent.json" in capsys.readouterr().err


def test_missing_channel_file_reports_path(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "channel": {"path": str(tmp_path / "ghost_channel.json")},
                "distribution": {"search": {"grid_resolution": 2}},
            }
        )
    )
    code = cli.main(["rates", "--config", str(cfg)])
    assert code == 2
    assert "ghost_channel.json" in capsys.readouterr().err


def test_rates_perfect_relay_row(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "channel": {"kind": "primitive", "params": {"r0": 1, "p3": 0.0}},
                "distribution": {
                    "p_x1": [0.5, 0.5],
                    "p_x2": [0.5, 0.5],
                    "q": [
                        [[1.0, 0.0], [0.0, 1.0]],
                        [[1.0, 0.0], [0.0, 1.0]],
                    ],
                },
                "search": {"grid_resolution": 4, "yhat_max_size": 2},
            }
        )
    )
    out = tmp_path / "rates.csv"
    assert cli.main(["rates", "--config", str(cfg), "--output", str(out)]) == 0
    (row,) = read_csv(out)
    assert float(row["sliding_rate[bits/use]"]) == 1.0
    assert float(row["cf_rate_minform[bits/use]"]) == pytest.approx(1.0, abs=1e-9)
    assert float(row["cf_rate_constrained[bits/use]"]) == pytest.approx(1.0, abs=1e-9)
    assert row["distribution_source"] == "explicit"
    assert row["seed"] == "0"


def test_rates_useless_channel_is_all_zero(tmp_path):
    flat = rl.RelayChannelSpec(np.full((2, 2, 2, 2), 0.25))
    ch_path = tmp_path / "flat.json"
    rl.save_channel_file(flat, ch_path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "channel": {"path": str(ch_path)},
                "distribution": {"search": {"grid_resolution": 2, "yhat_max_size": 2}},
            }
        )
    )
    out = tmp_path / "rates.csv"
    assert cli.main(["rates", "--config", str(cfg), "--output", str(out)]) == 0
    (row,) = read_csv(out)
    for column, value in row.items():
        if column.endswith("[bits/use]"):
            assert float(value) == pytest.approx(0.0, abs=1e-9), column
    assert row["channel_kind"] == "custom"


def test_rates_seed_flag_is_echoed(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert cli.main(["rates", "--config", cfg, "--seed", "7"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("# relaylab ")
    row = next(csv.DictReader(text.splitlines()[1:]))
    assert row["seed"] == "7"


def test_simulate_noiseless_single_trial(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "sim.csv"
    code = cli.main(
        ["simulate", "--config", cfg, "--trials", "1", "--output", str(out)]
    )
    assert code == 0
    (row,) = read_csv(out)
    assert row["status"] == "ok"
    assert float(row["message_error_rate[prob]"]) == 0.0
    assert row["trials"] == "1"
    assert float(row["effective_rate[bits/use]"]) == 0.25


def test_simulate_outputs_are_deterministic(tmp_path):
    cfg = write_config(
        tmp_path,
        channel={"kind": "orthogonal_bsc", "params": {"p2": 0.05, "p3": 0.2}},
    )
    paths = [tmp_path / f"run{i}.csv" for i in range(3)]
    for path, workers in zip(paths, ("1", "1", "8")):
        code = cli.main(
            [
                "simulate",
                "--config",
                cfg,
                "--output",
                str(path),
                "--workers",
                workers,
                "--sweep",
                "n=6,10",
            ]
        )
        assert code == 0
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1]
    assert blobs[0] == blobs[2]


def test_simulate_sweep_rows_and_json_mirror(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "sim.json"
    code = cli.main(
        [
            "simulate",
            "--config",
            cfg,
            "--format",
            "json",
            "--output",
            str(out),
            "--sweep",
            "n=6,8",
            "--sweep",
            "decoder=sliding,backward",
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["relaylab_version"] == rl.__version__
    rows = payload["rows"]
    assert [(r["n"], r["decoder"]) for r in rows] == [
        (6, "sliding"),
        (6, "backward"),
        (8, "sliding"),
        (8, "backward"),
    ]
    assert list(rows[0]) == cli.SIMULATE_COLUMNS
    assert isinstance(rows[0]["per_block_error[prob]"], list)


def test_simulate_bad_sweep_field(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert cli.main(["simulate", "--config", cfg, "--sweep", "workers=1,2"]) == 2
    assert "bad sweep" in capsys.readouterr().err


def test_simulate_requires_sim_block(tmp_path, capsys):
    cfg = write_config(tmp_path, sim=None)
    assert cli.main(["simulate", "--config", cfg]) == 2
    assert "sim" in capsys.readouterr().err


def test_simulate_skips_oversized_oracle(tmp_path):
    cfg = write_config(
        tmp_path,
        sim={
            "n": 48,
            "B": 2,
            "R": 0.5,
            "R2": 0.5,
            "decoder": "joint_oracle",
            "metric": "max_score",
            "trials": 2,
        },
    )
    out = tmp_path / "sim.csv"
    assert cli.main(["simulate", "--config", cfg, "--output", str(out)]) == 0
    (row,) = read_csv(out)
    assert row["status"] == "skipped"
    assert "cap" in row["reason"]
    assert row["message_error_rate[prob]"] == ""


def test_decoder_sweep_backward_beats_sliding(tmp_path, xor_fixture):
    _, d = xor_fixture
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "channel": {"path": None},
                "distribution": {
                    "p_x1": d.p_x1.tolist(),
                    "p_x2": d.p_x2.tolist(),
                    "q": d.q.tolist(),
                },
                "sim": {
                    "n": 12,
                    "B": 2,
                    "R": 0.30,
                    "R2": 0.631,
                    "epsilon": 0.3,
                    "seed": 77,
                    "decoder": "sliding",
                    "metric": "max_score",
                    "trials": 30,
                },
            }
        )
    )
    ch_path = tmp_path / "xor.json"
    rl.save_channel_file(rl.xor_sink_channel(0.1), ch_path)
    text = cfg.read_text().replace('"path": null', f'"path": "{ch_path}"')
    cfg.write_text(text)
    out = tmp_path / "cmp.csv"
    code = cli.main(
        [
            "simulate",
            "--config",
            str(cfg),
            "--output",
            str(out),
            "--sweep",
            "decoder=sliding,backward",
        ]
    )
    assert code == 0
    rows = read_csv(out)
    by_decoder = {r["decoder"]: float(r["message_error_rate[prob]"]) for r in rows}
    assert by_decoder["backward"] < by_decoder["sliding"] - 0.2


def test_export_channel_round_trip(tmp_path):
    out = tmp_path / "prim.json"
    code = cli.main(
        [
            "export-channel",
            "--kind",
            "primitive",
            "--param",
            "r0=1",
            "--param",
            "p3=0.1",
            "--output",
            str(out),
        ]
    )
    assert code == 0
    direct = rl.make_channel(rl.ChannelRecipe("primitive", {"r0": 1, "p3": 0.1}))
    np.testing.assert_array_equal(rl.load_channel_file(out).kernel, direct.kernel)


def test_verify_exit_codes(monkeypatch, capsys):
    healthy = [CheckResult("a", True, "fine", 0.0)]
    broken = [CheckResult("a", True, "fine", 0.0), CheckResult("b", False, "off", 0.0)]
    monkeypatch.setattr(cli, "run_checks", lambda level, seed: healthy)
    assert cli.main(["verify", "--level", "fast"]) == 0
    monkeypatch.setattr(cli, "run_checks", lambda level, seed: broken)
    assert cli.main(["verify"]) == 1
    out = capsys.readouterr().out
    assert "[FAIL] b" in out
    assert "1/2 checks passed" in out

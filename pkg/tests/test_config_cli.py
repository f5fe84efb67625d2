import json

import pytest

from pdmpswitch.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_RUNTIME, main
from pdmpswitch.config import (
    BlowupConfig,
    SimulateConfig,
    dump_run_config,
    load_run_config,
    validate_run_config,
)
from pdmpswitch.errors import ConfigError

PITCHFORK = ["--kind", "sup-pitchfork", "--p-minus", "-1", "--p-plus", "1",
             "--lambda-minus", "2", "--lambda-plus", "1"]


@pytest.fixture(autouse=True)
def quiet_env(monkeypatch, tmp_path):
    monkeypatch.setenv("PDMP_LOG_LEVEL", "0")
    monkeypatch.setenv("PDMP_THREADS", "1")
    monkeypatch.setenv("PDMP_LOG_FILE", "")
    monkeypatch.setenv("PDMP_OUTPUT_DIR", str(tmp_path))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- config records -----------------------------------------------------------

def test_validate_run_config_accepts_camel_case():
    cfg = validate_run_config({
        "command": "simulate",
        "switching": {"kind": "transcritical", "pMinus": -1, "pPlus": 1,
                      "lambdaMinus": 2, "lambdaPlus": 1},
        "x0": 0.5, "stop": {"horizon": 10}, "histOut": "h.csv",
    })
    assert isinstance(cfg, SimulateConfig)
    assert cfg.hist_out == "h.csv"
    assert cfg.stop.blowup_guard == 1e6


def test_validation_errors_name_the_field():
    with pytest.raises(ConfigError) as err:
        validate_run_config({"command": "classify",
                             "switching": {"kind": "fold", "pMinus": 1, "pPlus": 1,
                                           "lambdaMinus": 1, "lambdaPlus": 1}}, "run.json")
    assert "pMinus" in err.value.reason
    assert err.value.reason.startswith("run.json: ")


def test_blowup_needs_exactly_one_initial_rule():
    base = {"command": "blowup", "stop": {"horizon": 5},
            "switching": {"kind": "fold", "pMinus": -1, "pPlus": 1,
                          "lambdaMinus": 1, "lambdaPlus": 1}}
    with pytest.raises(ConfigError):
        validate_run_config(base)
    with pytest.raises(ConfigError):
        validate_run_config({**base, "x0": 0.0, "xRange": [0, 1]})
    cfg = validate_run_config({**base, "xRange": [-1, 1]})
    assert isinstance(cfg, BlowupConfig)


def test_json_syntax_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "command": "classify",\n  "switching": {,}\n}\n')
    with pytest.raises(ConfigError) as err:
        load_run_config(path)
    assert f"{path}:3:" in err.value.reason


def test_dump_round_trip(tmp_path):
    cfg = validate_run_config({
        "command": "blowup", "xRange": [-0.5, 0.5], "n": 10, "seed": 7,
        "switching": {"kind": "transcritical", "pMinus": -1, "pPlus": 1,
                      "lambdaMinus": 1, "lambdaPlus": 2},
        "stop": {"horizon": 20, "absorptionGuard": 1e-6},
    })
    path = tmp_path / "cfg.json"
    path.write_text(dump_run_config(cfg))
    assert load_run_config(path) == cfg


# --- command line -------------------------------------------------------------

def test_classify_super(capsys):
    code, out, _ = run(capsys, "classify", *PITCHFORK)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert len(doc["ergodicIPMs"]) == 3
    assert doc["comparison"] == "super"


def test_classify_critical_and_fold(capsys):
    args = list(PITCHFORK)
    args[args.index("--lambda-minus") + 1] = "1"
    code, out, _ = run(capsys, "classify", *args)
    assert code == EXIT_OK
    assert [m["name"] for m in json.loads(out)["ergodicIPMs"]] == ["trivialDelta"]

    code, out, _ = run(capsys, "classify", "--kind", "fold", "--p-minus", "-1", "--p-plus", "1",
                       "--lambda-minus", "3", "--lambda-plus", "1")
    assert code == EXIT_OK
    assert json.loads(out)["blowup"] == "almost_sure"


def test_invalid_input_exits_2(capsys):
    args = list(PITCHFORK)
    args[args.index("--lambda-minus") + 1] = "0"
    code, out, err = run(capsys, "classify", *args)
    assert code == EXIT_INVALID
    assert out == ""
    assert err.startswith("Error: ")
    assert "lambdaMinus" in err

    code, _, _ = run(capsys, "classify", "--kind", "saddle")
    assert code == EXIT_INVALID
    code, _, _ = run(capsys, "--threads", "0", "classify", *PITCHFORK)
    assert code == EXIT_INVALID
    code, _, err = run(capsys, "hopf", *PITCHFORK, "--r0", "0.5", "--horizon", "10")
    assert code == EXIT_INVALID
    assert "hopf needs kind" in err


def test_runtime_failure_exits_3(capsys):
    args = list(PITCHFORK)
    args[args.index("--lambda-minus") + 1] = "1"
    code, out, err = run(capsys, "density", *args)
    assert code == EXIT_RUNTIME
    assert out == ""
    assert "densities exist only" in err


def test_io_failure_exits_4(capsys, tmp_path):
    (tmp_path / "blocker").write_text("not a directory")
    code, _, err = run(capsys, "density", *PITCHFORK, "--out", "blocker/rho.csv")
    assert code == EXIT_IO
    assert err.startswith("Error: ")


def test_density_table(capsys, tmp_path):
    code, out, _ = run(capsys, "density", *PITCHFORK, "--grid", "1000", "--out", "rho.csv")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["rows"] == 1000
    assert doc["masses"] == [pytest.approx(1 / 3, abs=1e-8), pytest.approx(2 / 3, abs=1e-8)]
    lines = (tmp_path / "rho.csv").read_text().splitlines()
    assert lines[0] == "x,rho_minus,rho_plus,rho_marginal"
    assert len(lines) == 1001


def test_simulate_is_byte_identical(capsys, tmp_path):
    argv = ["simulate", *PITCHFORK, "--x0", "0.5", "--horizon", "200", "--seed", "42",
            "--bins", "20", "--hist-lo", "0", "--hist-hi", "1"]
    code1, out1, _ = run(capsys, *argv, "--out", "a.csv", "--hist-out", "ha.csv")
    code2, out2, _ = run(capsys, *argv, "--out", "b.csv", "--hist-out", "hb.csv")
    assert code1 == code2 == EXIT_OK
    assert out1 == out2
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "ha.csv").read_bytes() == (tmp_path / "hb.csv").read_bytes()
    doc = json.loads(out1)
    assert doc["status"] == "horizon_reached"
    assert "l1Marginal" in doc["histogram"]
    assert (tmp_path / "a.csv").read_text().splitlines()[-1].startswith("status,horizon_reached,200.0")


def test_simulate_below_zero_compares_with_mirror_branch(capsys):
    common = [*PITCHFORK, "--horizon", "20000", "--seed", "7",
              "--bins", "40", "--hist-lo", "-1", "--hist-hi", "1"]
    code, out, _ = run(capsys, "simulate", "--x0", "-0.5", *common)
    assert code == EXIT_OK
    below = json.loads(out)["histogram"]
    assert below["densityBranch"] == "pi"
    assert below["totalMass"] == pytest.approx(1.0)
    assert below["l1Marginal"] < 0.1

    code, out, _ = run(capsys, "simulate", "--x0", "0.5", *common)
    above = json.loads(out)["histogram"]
    assert above["densityBranch"] == "mu"
    # same seed, odd vector field: the two runs are mirror images
    assert below["l1Marginal"] == pytest.approx(above["l1Marginal"], abs=1e-4)


def test_blown_up_simulation_has_no_histogram(capsys):
    code, out, _ = run(capsys, "simulate", "--kind", "fold", "--p-minus", "-1", "--p-plus", "1",
                       "--lambda-minus", "1", "--lambda-plus", "1", "--x0", "0",
                       "--horizon", "10000", "--bins", "10")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["status"] == "blew_up"
    assert doc["direction"] == -1
    assert doc["histogram"] is None


def test_blowup_dichotomy(capsys, tmp_path):
    code, out, _ = run(capsys, "blowup", "--kind", "transcritical", "--p-minus", "-1", "--p-plus", "1",
                       "--lambda-minus", "1", "--lambda-plus", "2", "--x0", "-0.4",
                       "--horizon", "50", "--absorption-guard", "1e-6", "--n", "200",
                       "--seed", "3", "--out", "times.json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert 0.0 < doc["blowupFraction"] < 1.0
    assert doc["verdict"] == "dichotomy"
    assert doc["escapeThreshold"] == -2.0
    times = json.loads((tmp_path / "times.json").read_text())
    assert len(times["blowupTimes"]) == doc["statusCounts"]["blew_up"]


def test_app_scan(capsys, tmp_path):
    code, out, _ = run(capsys, "app", "--model", "rm", "--scan", "--scan-points", "50",
                       "--out", "rm.csv")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["hopfPoint"] == pytest.approx(2.0, abs=1e-5)
    assert (tmp_path / "rm.csv").read_text().splitlines()[0] == "p,trace"


def test_dump_config_reproduces_run(capsys, tmp_path):
    argv = ["simulate", *PITCHFORK, "--x0", "0.25", "--horizon", "30", "--seed", "9"]
    code, dumped, _ = run(capsys, "dump-config", *argv)
    assert code == EXIT_OK
    assert json.loads(dumped)["command"] == "simulate"
    path = tmp_path / "sim.json"
    path.write_text(dumped)

    code, again, _ = run(capsys, "dump-config", "simulate", "--config", str(path))
    assert again == dumped
    _, from_flags, _ = run(capsys, *argv)
    _, from_file, _ = run(capsys, "simulate", "--config", str(path))
    assert from_flags == from_file


def test_flags_override_config_file(capsys, tmp_path):
    path = tmp_path / "sim.json"
    path.write_text(json.dumps({
        "switching": {"kind": "sup-pitchfork", "pMinus": -1, "pPlus": 1,
                      "lambdaMinus": 2, "lambdaPlus": 1},
        "x0": 0.5, "seed": 1, "stop": {"horizon": 10, "blowupGuard": 100},
    }))
    code, out, _ = run(capsys, "dump-config", "simulate", "--config", str(path),
                       "--seed", "2", "--horizon", "20")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["seed"] == 2
    assert doc["stop"] == {"horizon": 20.0, "blowupGuard": 100.0, "absorptionGuard": 1e-12}
    assert doc["switching"]["lambdaMinus"] == 2.0


def test_config_syntax_error_exits_2(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"x0": 0.5,,}')
    code, _, err = run(capsys, "simulate", "--config", str(path))
    assert code == EXIT_INVALID
    assert f"{path}:1:" in err

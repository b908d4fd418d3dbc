import json
import subprocess
import sys

import pytest

from delottery_sim.cli import main
from delottery_sim.harness import load_report

SCENARIO = """
name = cli-check
rounds = 2
guess_space_size = 4
[player]
seed_material = alice
[player]
seed_material = bob
"""


@pytest.fixture
def scenario_path(tmp_path):
    path = tmp_path / "cli-check.txt"
    path.write_text(SCENARIO)
    return str(path)


def test_run_writes_json_to_stdout(scenario_path, capsys):
    assert main(["run", "--scenario", scenario_path]) == 0
    captured = capsys.readouterr()
    data = json.loads(captured.out)
    assert data["kind"] == "single"
    assert data["scenario"] == "cli-check"
    assert "cli-check" in captured.err  # status goes to stderr, not stdout


def test_run_then_verify_round_trip(scenario_path, tmp_path, capsys):
    out = str(tmp_path / "report.json")
    assert main(["run", "--scenario", scenario_path, "--out", out]) == 0
    capsys.readouterr()
    assert main(["verify", "--report", out]) == 0
    assert "ok" in capsys.readouterr().err


def test_verify_rejects_tampered_report(scenario_path, tmp_path, capsys):
    out = tmp_path / "report.json"
    main(["run", "--scenario", scenario_path, "--out", str(out)])
    data = load_report(out)
    data["conservation_residual"] = 5
    out.write_text(json.dumps(data))
    capsys.readouterr()
    assert main(["verify", "--report", str(out)]) == 1
    assert "check failed" in capsys.readouterr().err


def test_verify_missing_report_is_usage_error(tmp_path, capsys):
    assert main(["verify", "--report", str(tmp_path / "absent.json")]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_bad_scenario_is_usage_error(tmp_path, capsys):
    assert main(["run", "--scenario", str(tmp_path / "absent.txt")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("rounds = zero\n[player]\n")
    assert main(["run", "--scenario", str(bad)]) == 2


def test_run_rejects_zero_seeds(scenario_path, capsys):
    assert main(["run", "--scenario", scenario_path, "--seeds", "0"]) == 2


def test_csv_format(scenario_path, capsys):
    assert main(["run", "--scenario", scenario_path, "--format", "csv"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().split("\n")
    assert lines[0] == "name,address_hex,final_balance,wins"
    assert len(lines) == 3


def test_seeds_flag_builds_aggregate(scenario_path, capsys):
    assert main(["run", "--scenario", scenario_path, "--seeds", "3"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["kind"] == "aggregate"
    assert data["n_seeds"] == 3


def test_override_flags_land_in_report(scenario_path, capsys):
    code = main(
        [
            "run", "--scenario", scenario_path,
            "--mode", "naive", "--pool-mode", "literal", "--base-seed", "9",
        ]
    )
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["rng_mode"] == "naive"
    assert data["pool_mode"] == "literal"
    assert data["seed"] == 9


def test_argparse_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run"])  # --scenario is required
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["conjure"])
    assert exc.value.code == 2


def test_installed_entry_point(scenario_path):
    proc = subprocess.run(
        [sys.executable, "-m", "delottery_sim.cli", "run", "--scenario", scenario_path],
        capture_output=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["scenario"] == "cli-check"

import json
import subprocess
import sys

import pytest

from bosonic_entropy import checks
from bosonic_entropy.checks import CheckResult
from bosonic_entropy.cli import main
from bosonic_entropy.serialization import state_to_json
from bosonic_entropy.fock import coherent_state


def _read(path):
    return path.read_bytes().decode()


def test_channel_apply_vacuum(tmp_path, capsys):
    code = main(["channel-apply", "--state", "fock:0", "--channel", "classical", "--n", "0.85", "--dim", "41",
                 "--max-deficit", "1e-3", "--out", str(tmp_path)])
    assert code == 0
    assert "1.841217 bits" in capsys.readouterr().out
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["entropy_bits"] == pytest.approx(1.8412, abs=1e-3)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["subcommand"] == "channel-apply"
    assert set(manifest["outputs"]) == {"output_state.json", "spectrum.csv", "result.json"}
    assert manifest["params"]["n"] == 0.85


def test_channel_apply_json_state(tmp_path):
    state_file = tmp_path / "state.json"
    state_file.write_text(json.dumps(state_to_json(coherent_state(0.3, 8))))
    code = main(["channel-apply", "--state", str(state_file), "--channel", "thermal", "--eta", "0.7", "--N", "0.6",
                 "--dim", "48", "--out", str(tmp_path / "o")])
    assert code == 0


def test_bad_state_spec_is_usage_error(tmp_path):
    assert main(["channel-apply", "--state", "fock:x", "--channel", "classical", "--n", "1",
                 "--out", str(tmp_path)]) == 2
    assert main(["channel-apply", "--state", "fock:0", "--channel", "classical",
                 "--out", str(tmp_path)]) == 2
    assert main(["channel-apply", "--state", "fock:0", "--channel", "classical", "--n", "-1",
                 "--out", str(tmp_path)]) == 2


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["channel-apply", "--channel", "bogus", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_truncation_exit_code(tmp_path, capsys):
    code = main(["channel-apply", "--state", "fock:10", "--channel", "amplifier", "--kappa", "2", "--dim", "12",
                 "--out", str(tmp_path)])
    assert code == 3
    assert "truncation" in capsys.readouterr().err


def test_bounds_table_csv_format(tmp_path):
    assert main(["bounds-table", "--points", "5", "--out", str(tmp_path)]) == 0
    text = _read(tmp_path / "bounds_classical.csv")
    lines = text.split("\r\n")
    assert lines[0] == "n,a,b,c,d,upper,envelope"
    first = lines[1].split(",")
    assert first[0] == "%.17g" % 1e-3
    assert first[1] == ""  # bound a undefined below n = 1


def test_bounds_table_thermal(tmp_path):
    assert main(["bounds-table", "--channel", "thermal", "--N", "0.1", "10", "--points", "6",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "bounds_thermal_N0.1.csv").exists()
    assert (tmp_path / "bounds_thermal_N10.csv").exists()


def test_region_map(tmp_path):
    assert main(["region-map", "--grid", "11", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "region_summary.json").read_text())
    assert summary["contradictions"] == 0
    assert sum(summary["labels"].values()) == 121


def test_majorize_fock_and_random(tmp_path):
    assert main(["majorize", "--k", "0", "1", "2", "--strict", "--out", str(tmp_path / "f")]) == 0
    assert _read(tmp_path / "f" / "verdicts.csv").split("\r\n")[1] == "0,true,,false"
    assert main(["majorize", "--mode", "random", "--trials", "5", "--seed", "2", "--strict",
                 "--out", str(tmp_path / "r")]) == 0
    manifest = json.loads((tmp_path / "r" / "manifest.json").read_text())
    assert len(manifest["seeds"]) == 6


def test_majorize_deterministic(tmp_path):
    for name in ("a", "b"):
        main(["majorize", "--mode", "random", "--trials", "4", "--seed", "9", "--out", str(tmp_path / name)])
    assert _read(tmp_path / "a" / "trials.csv") == _read(tmp_path / "b" / "trials.csv")


def test_anneal_short_run(tmp_path):
    args = ["anneal", "--iters", "20", "--restarts", "2", "--checkpoints", "10", "--out"]
    assert main(args + [str(tmp_path / "a")]) == 0
    assert main(args + [str(tmp_path / "b")]) == 0
    assert _read(tmp_path / "a" / "trace.csv") == _read(tmp_path / "b" / "trace.csv")
    report = json.loads((tmp_path / "a" / "final_state.json").read_text())
    assert report["initial_entropy_bits"] == pytest.approx(3.7541, abs=1e-3)
    header = _read(tmp_path / "a" / "staircase.csv").split("\r\n")[0]
    assert header == "q,iter_0,iter_10,iter_20,thermal"


def test_anneal_rejects_mixed_start(tmp_path):
    assert main(["anneal", "--init", "thermal:0.3", "--iters", "2", "--out", str(tmp_path)]) == 2


def test_verify_single_check(tmp_path, capsys):
    assert main(["verify", "--quick", "--check", "duality", "--out", str(tmp_path)]) == 0
    assert "PASS duality" in capsys.readouterr().out


def test_verify_reports_injected_failure(tmp_path, monkeypatch, capsys):
    monkeypatch.setitem(checks.CHECKS, "duality", lambda quick: CheckResult("duality", False, 1.0, 1e-8))
    assert main(["verify", "--check", "duality", "--out", str(tmp_path)]) == 1
    captured = capsys.readouterr()
    assert "FAIL duality" in captured.out
    assert "duality" in captured.err


def test_verify_reports_crashing_check(tmp_path, monkeypatch):
    def boom(quick):
        raise RuntimeError("injected")

    monkeypatch.setitem(checks.CHECKS, "majorization", boom)
    assert main(["verify", "--check", "majorization", "--out", str(tmp_path)]) == 1
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report[0]["name"] == "majorization"
    assert "injected" in report[0]["detail"]["error"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bosonic_entropy", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip()

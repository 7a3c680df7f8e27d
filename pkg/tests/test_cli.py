import json
import subprocess
import sys

import pytest

from altcsit import cli


def run(args, capsys):
    try:
        code = cli.main(args)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_csv_to_stdout(capsys):
    code, out, err = run(["--trials", "5", "--snr-start-db", "0", "--snr-stop-db", "30"], capsys)
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0].startswith("snr_db,power_linear,sum_rate_bits")
    assert len(lines) == 5


def test_json_file_and_summary_line(tmp_path, capsys):
    out_path = tmp_path / "r.json"
    code, out, _ = run(["--format", "json", "--out", str(out_path), "--trials", "100", "--users", "2"], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["reference"] == 1.5 and abs(summary["delta"]) < 0.05
    doc = json.loads(out_path.read_text())
    assert doc["config"]["users"] == 2


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"users": 4, "trials": 3, "snr_db_start": 0, "snr_db_stop": 20}))
    code, out, _ = run(["--config", str(cfg), "--users", "2"], capsys)
    assert code == 0
    assert out.splitlines()[0].count("rate_user_") == 2


def test_config_error_exit_code(capsys):
    code, out, err = run(["--users", "1", "--snr-step-db", "0"], capsys)
    assert code == 2 and out == ""
    fields = [e["field"] for e in json.loads(err)["errors"]]
    assert fields == ["users", "snr_db_step"]


def test_unknown_flag_is_config_error(capsys):
    code, _, err = run(["--nope"], capsys)
    assert code == 2
    assert json.loads(err)["errors"][0]["field"] == "arguments"


def test_bad_config_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["--config", str(bad)], capsys)[0] == 2
    assert run(["--config", str(tmp_path / "absent.json")], capsys)[0] == 3


def test_unwritable_output_exit_code(tmp_path, capsys):
    code, _, err = run(["--trials", "2", "--out", str(tmp_path / "no" / "dir.csv")], capsys)
    assert code == 3
    assert json.loads(err)["errors"][0]["field"] == "output_path"


@pytest.mark.slow
def test_module_entry_point(tmp_path):
    out = tmp_path / "o.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "altcsit", "--trials", "3", "--snr-start-db", "0", "--snr-stop-db", "10", "--out", str(out)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().count("\n") == 3

import subprocess
import sys

import pytest

from rdcsim.cli import main


def test_calc_prints_the_analytic_latency(capsys):
    assert main(["calc", "--preset", "sec423", "--protocol", "contikimac", "--hops", "2"]) == 0
    assert capsys.readouterr().out.strip() == "140.8 ms"
    assert main(["calc", "--protocol", "xmac-cp", "--hops", "2"]) == 0
    assert capsys.readouterr().out.strip() == "144.4 ms"


def test_calc_rejects_unsupported_protocol(capsys):
    assert main(["calc", "--protocol", "xmac", "--hops", "2"]) == 2
    assert "error" in capsys.readouterr().err


def test_validate_timing_accepts_table3(capsys):
    assert main(["validate-timing", "--preset", "table3"]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_timing_unknown_preset_is_a_config_error(capsys):
    assert main(["validate-timing", "--preset", "table9"]) == 2


def test_run_writes_csv_to_stdout(tmp_path, capsys):
    scn = tmp_path / "s.txt"
    scn.write_text("kind=star\nN=2\nprotocol=xmac-cp\nduration=20s\n")
    assert main(["run", "--scenario", str(scn), "--runs", "2", "--seed", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("protocol,scenario,runs,")
    assert lines[1].startswith("xmac-cp,star-n2-high,2,")


def test_run_with_out_dir_and_overrides(tmp_path, capsys):
    scn = tmp_path / "s.txt"
    scn.write_text("kind=star N=2 duration=20s\n")
    out = tmp_path / "out"
    rc = main(["run", "--scenario", str(scn), "--runs", "1", "--out", str(out),
               "--format", "table", "--set", "protocol=xmac"])
    assert rc == 0
    assert "X-MAC" in (out / "summary.txt").read_text()
    assert (out / "runs.csv").read_text().count("\n") == 2


@pytest.mark.parametrize("content", ["protocol=zmac", "N=3"])
def test_run_with_bad_scenario_exits_nonzero(tmp_path, content, capsys):
    scn = tmp_path / "s.txt"
    scn.write_text(content)
    assert main(["run", "--scenario", str(scn)]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_scenario_file(tmp_path):
    assert main(["run", "--scenario", str(tmp_path / "nope.txt")]) == 2


def test_console_script_module_entry():
    out = subprocess.run([sys.executable, "-m", "rdcsim.cli", "calc", "--protocol", "contikimac",
                          "--hops", "0"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "0.0 ms"

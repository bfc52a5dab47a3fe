import json

import pytest
from typer.testing import CliRunner

from app.commands import cli

runner = CliRunner()


@pytest.fixture
def coin(fixtures_dir):
    return str(fixtures_dir / "coin.bp")


@pytest.fixture
def xor6(fixtures_dir):
    return str(fixtures_dir / "xor6.bp")


def invoke(*args):
    return runner.invoke(cli, [str(arg) for arg in args])


def test_validate(coin):
    result = invoke("validate", "--bp", coin)
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert (report["n"], report["m"], report["size"], report["length"]) == (1, 1, 3, 1)
    assert all(report["disciplines"].values())


def test_validate_discipline_failure(fixtures_dir):
    result = invoke("validate", "--bp", fixtures_dir / "reversed.bp", "--discipline", "R_OW")
    assert result.exit_code == 2
    assert json.loads(result.stdout)["disciplines"]["S_R"] is True


def test_unreadable_program_is_a_usage_error(tmp_path, bp_file):
    assert invoke("validate", "--bp", tmp_path / "missing.bp").exit_code == 1
    assert invoke("validate", "--bp", bp_file("bp 1\nn 1 m 1\nv 0 bogus\n")).exit_code == 1


def test_eval(coin):
    result = invoke("eval", "--bp", coin, "--x", "0")
    assert json.loads(result.stdout) == {"distribution": {"1": "1/2", "2": "1/2"}}
    result = invoke("eval", "--bp", coin, "--x", "0", "--y", "1")
    assert json.loads(result.stdout) == {"output": 1, "vertex": 2}
    result = invoke("--format", "csv", "eval", "--bp", coin, "--x", "1")
    assert result.stdout == "vertex,probability\n1,1/2\n2,1/2\n"


def test_eval_rejects_wrong_widths(coin):
    assert invoke("eval", "--bp", coin, "--x", "01").exit_code == 1


def test_simulate_exact_law(coin):
    result = invoke("simulate", "--bp", coin, "--x", "0", "--exact-law")
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["distribution"] == {"1": "1/2", "2": "1/2"}
    assert report["bits_consumed"] == 1
    assert report["parameters"]["direct"] is True


def test_simulate_with_overrides(fixtures_dir):
    result = invoke(
        "simulate", "--bp", fixtures_dir / "wide64.bp", "--x", "1" * 64, "--trials", "50",
        "--override", "T=4,r=6,block=8,threshold=64", "--master-seed", "ff",
    )
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["bits_consumed"] == 66
    assert report["parameters"]["B"] == 8
    assert report["trace_summary"]["phases"] == 6


def test_bad_override(coin):
    assert invoke("simulate", "--bp", coin, "--x", "0", "--override", "r").exit_code == 1


def test_hybrid_compare(coin):
    result = invoke("hybrid-compare", "--bp", coin)
    assert result.exit_code == 0
    assert result.stdout == "x,tvd,bad_flag\n0,0,0\n1,0,0\n"


def test_extractor_test_defaults():
    result = invoke("extractor-test")
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["params"]["s"] == 2
    assert report["verified"] is True
    assert report["badset_count"] is None


def test_prg():
    result = invoke("prg", "--seed-hex", "ff", "--len", "4", "--space", "4")
    assert result.stdout.strip() == "f"
    result = invoke("--format", "json", "prg", "--kind", "nz", "--seed-hex", "00", "--len", "1", "--space", "2",
                    "--eps", "0.5")
    report = json.loads(result.stdout)
    assert (report["kind"], report["output"]) == ("nz", "0")


def test_gip():
    assert invoke("gip", "--x", "101010", "--m", "1").stdout.strip() == "8"
    assert invoke("gip", "--x", "111111", "--m", "1").stdout.strip() == "0"
    assert invoke("gip", "--x", "1010", "--m", "2").exit_code == 1


def test_derand_sr_single_input(xor6):
    result = invoke("derand-sr", "--bp", xor6, "--x", "101010")
    assert json.loads(result.stdout) == {"R": "1", "output": 0, "x": "101010"}


def test_derand_sr_exhaustive(xor6, tmp_path):
    summary = tmp_path / "summary.json"
    result = invoke("--format", "json", "derand-sr", "--bp", xor6, "--exhaustive", "--summary", summary)
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert len(report["rows"]) == 64
    assert report["summary"]["mistake_density"] == "19/32"
    assert json.loads(summary.read_text())["delta_measured"] == "1/2"


def test_derand_sr_needs_a_mode(xor6):
    assert invoke("derand-sr", "--bp", xor6).exit_code == 1


def test_ff_test():
    result = invoke("ff-test", "--towers", "0", "--degrees", "0,1", "--cases", "2")
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == "check,a,b,cases,ok"
    assert all(line.endswith(",1") for line in lines[1:])


def test_experiment_uses_the_global_seed(tmp_path):
    config = tmp_path / "fields.cfg"
    config.write_text("kind = ff-verify\nfrobenius_cases = 2\noutput_dir = out\n")
    assert invoke("experiment", config).exit_code == 1
    result = invoke("--seed", "3", "experiment", config)
    assert result.exit_code == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["master_seed"] == 3


def test_experiment_unknown_key(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("kind = ff-verify\nmaster_seed = 1\ncolour = blue\n")
    assert invoke("experiment", config).exit_code == 1

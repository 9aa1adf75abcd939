"""End-to-end tests of the command-line interface."""

import subprocess
import sys

import pytest

from plugplay_qkd.cli import main

FAST_SESSION = ["session", "--bits", "3000", "--seed", "5"]


def test_session_happy_path(capsys):
    assert main(FAST_SESSION) == 0
    out = capsys.readouterr().out
    assert out.startswith("qber=")
    fields = dict(part.split("=") for part in out.split())
    assert set(fields) == {"qber", "std_error", "n_sifted", "n_errors"}
    assert 0.0 <= float(fields["qber"]) <= 1.0
    assert int(fields["n_sifted"]) > 0


def test_session_is_deterministic(capsys):
    assert main(FAST_SESSION) == 0
    first = capsys.readouterr().out
    assert main(FAST_SESSION) == 0
    assert capsys.readouterr().out == first


def test_session_writes_record_csv(tmp_path, capsys):
    target = tmp_path / "records.csv"
    code = main(["session", "--bits", "4000", "--seed", "3", "--output", str(target)])
    assert code == 0
    lines = target.read_text().strip().split("\n")
    assert lines[0] == "bit_index,alice_basis,alice_bit,bob_basis,click_d0,click_d1"
    assert len(lines) == 4001
    assert f"wrote 4000 records to {target}" in capsys.readouterr().out


def test_session_rejects_invalid_parameters(capsys):
    assert main(["session", "--bits", "0"]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["session", "--mean-photon", "-1"]) == 1
    assert main(["session", "--polarization", "bogus"]) == 1


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["no-such-command"]) == 1
    assert main(["session", "--no-such-flag"]) == 1
    err = capsys.readouterr().err
    assert err  # something was said on stderr


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "session" in capsys.readouterr().out
    assert main(["scan", "--help"]) == 0
    assert "--scan-range-ns" in capsys.readouterr().out


def _scan_args(output, **extra):
    args = [
        "scan", "--bits", "2000", "--seed", "11",
        "--scan-range-ns", "30", "--scan-step-ns", "10",
        "--output", str(output),
    ]
    for key, value in extra.items():
        args += [f"--{key.replace('_', '-')}", str(value)]
    return args


def test_scan_writes_expected_grid(tmp_path, capsys):
    target = tmp_path / "scan.csv"
    assert main(_scan_args(target)) == 0
    lines = target.read_text().strip().split("\n")
    assert lines[0] == "delay_ns,qber,std_error,n_sifted,n_errors"
    delays = [float(line.split(",")[0]) for line in lines[1:]]
    assert delays == [-30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0]
    out = capsys.readouterr().out
    assert f"wrote 7 points to {target}" in out
    assert out.count("delay_ns=") == 7


def test_scan_reruns_identically(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(_scan_args(a)) == 0
    assert main(_scan_args(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_scan_threads_do_not_change_results(tmp_path):
    serial, threaded = tmp_path / "serial.csv", tmp_path / "threaded.csv"
    assert main(_scan_args(serial)) == 0
    assert main(_scan_args(threaded, threads=3)) == 0
    assert serial.read_bytes() == threaded.read_bytes()


def test_scan_rejects_ragged_grid(tmp_path, capsys):
    target = tmp_path / "scan.csv"
    assert main(_scan_args(target) + ["--scan-step-ns", "7"]) == 1
    assert "whole number of steps" in capsys.readouterr().err


def test_config_file_equivalent_to_flags(tmp_path, capsys):
    config = tmp_path / "run.conf"
    config.write_text(
        "# demo run\n"
        "seed = 7\n"
        "bits = 3000\n"
        "mean_photon = 0.2\n"
        "polarization = d\n"
    )
    assert main(["session", "--config", str(config)]) == 0
    from_file = capsys.readouterr().out
    assert main(["session", "--seed", "7", "--bits", "3000",
                 "--mean-photon", "0.2", "--polarization", "d"]) == 0
    assert capsys.readouterr().out == from_file


def test_flags_override_config_file(tmp_path, capsys):
    config = tmp_path / "run.conf"
    config.write_text("seed = 7\nbits = 3000\n")
    assert main(["session", "--config", str(config), "--seed", "9"]) == 0
    overridden = capsys.readouterr().out
    assert main(["session", "--seed", "9", "--bits", "3000"]) == 0
    assert capsys.readouterr().out == overridden
    assert main(["session", "--config", str(config)]) == 0
    assert capsys.readouterr().out != overridden


def test_config_file_errors(tmp_path, capsys):
    bad_key = tmp_path / "bad_key.conf"
    bad_key.write_text("volume = 11\n")
    assert main(["session", "--config", str(bad_key)]) == 1
    assert "unknown option" in capsys.readouterr().err

    bad_line = tmp_path / "bad_line.conf"
    bad_line.write_text("seed\n")
    assert main(["session", "--config", str(bad_line)]) == 1
    assert "expected 'key = value'" in capsys.readouterr().err

    bad_value = tmp_path / "bad_value.conf"
    bad_value.write_text("bits = plenty\n")
    assert main(["session", "--config", str(bad_value)]) == 1
    assert "invalid" in capsys.readouterr().err

    assert main(["session", "--config", str(tmp_path / "missing.conf")]) == 2
    assert "i/o error" in capsys.readouterr().err


def test_verify_uniformity_accepts_default_stream(capsys):
    assert main(["verify-uniformity"]) == 0
    out = capsys.readouterr().out
    assert "consistent with uniform" in out
    assert "chi-square statistic" in out


def test_verify_uniformity_rejects_constant_stream(capsys):
    assert main(["verify-uniformity", "--codes", "100000", "--constant-code", "100"]) == 3
    out = capsys.readouterr().out
    assert "REJECTED" in out


def test_verify_uniformity_parameter_errors(capsys):
    assert main(["verify-uniformity", "--codes", "100"]) == 1  # undersampled
    assert main(["verify-uniformity", "--codes", "0"]) == 1
    assert main(["verify-uniformity", "--codes", "100000", "--constant-code", "5000"]) == 1
    assert capsys.readouterr().err


def test_density_writes_matrix(tmp_path, capsys):
    target = tmp_path / "rho.csv"
    code = main(["density", "--mean-photon", "0.1", "--n-max", "6",
                 "--phase-dist", "uniform", "--output", str(target)])
    assert code == 0
    lines = target.read_text().strip().split("\n")
    assert lines[0] == "n,m,real,imag"
    assert len(lines) == 1 + 49
    out = capsys.readouterr().out
    assert "trace=" in out and "max_offdiag=0.000000e+00" in out


def test_density_distribution_forms(tmp_path):
    for dist in ("discrete:4", "fixed:0.5", "fixed"):
        target = tmp_path / f"{dist.replace(':', '_')}.csv"
        assert main(["density", "--n-max", "4", "--phase-dist", dist,
                     "--output", str(target)]) == 0
        assert target.exists()


def test_density_rejects_bad_distribution(capsys):
    assert main(["density", "--phase-dist", "weird"]) == 1
    assert main(["density", "--phase-dist", "discrete:few"]) == 1
    assert main(["density", "--mean-photon", "-2"]) == 1
    assert capsys.readouterr().err


def test_unwritable_output_is_an_io_error(tmp_path, capsys):
    target = tmp_path / "no_such_dir" / "out.csv"
    assert main(["density", "--n-max", "3", "--output", str(target)]) == 2
    assert "i/o error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "plugplay_qkd", "session", "--bits", "500", "--seed", "1"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("qber=")

import csv
import io
import json
import subprocess
import sys

import pytest

from mgami.cli import AMI_COLUMNS, ArgumentError, RunConfig, main, parse_grid, power_columns


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_grid():
    assert parse_grid("0:5:20") == [0.0, 5.0, 10.0, 15.0, 20.0]
    assert parse_grid("1,2.5") == [1.0, 2.5]
    with pytest.raises(ValueError):
        parse_grid("0:-1:5")


def test_config_validation():
    with pytest.raises(ArgumentError):
        RunConfig(command="ami-curve", snr_db=[])
    with pytest.raises(ArgumentError):
        RunConfig(command="ami-curve", snr_db=[5.0, 5.0])
    with pytest.raises(ArgumentError):
        RunConfig(command="ami-curve", snr_db=[0.0], order=0)


def test_ami_curve_nakagami(capsys):
    code, out, _ = run(capsys, "ami-curve", "--fading", "nakagami:m=2", "--constellation", "qam4", "--snr-db", "0:5:40")
    assert code == 0
    assert out.splitlines()[0].split(",") == AMI_COLUMNS
    gaps = [float(r["gap_bits"]) for r in rows(out)]
    assert len(gaps) == 9
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    last = rows(out)[-1]
    assert float(last["gap_bits"]) / float(last["asymptote_gap_bits"]) == pytest.approx(1.0, abs=0.01)


@pytest.mark.parametrize("fading", ["etamu:format=1,eta=4,mu=1", "kg:k=4,m=2,N=30", "kappamu:kappa=1,mu=2"])
def test_ami_curve_families(capsys, fading):
    code, out, _ = run(capsys, "ami-curve", "--fading", fading, "--snr-db", "20:10:40")
    assert code == 0
    last = rows(out)[-1]
    assert float(last["gap_bits"]) / float(last["asymptote_gap_bits"]) == pytest.approx(1.0, abs=0.05)


def test_ami_curve_quadrature_method_and_json(capsys, tmp_path):
    path = tmp_path / "curve.json"
    code, _, _ = run(capsys, "ami-curve", "--fading", "rayleigh", "--method", "quadrature", "--snr-db", "0:10:10",
                     "--format", "json", "--out", str(path))
    assert code == 0
    data = json.loads(path.read_text())
    assert [set(d) for d in data] == [set(AMI_COLUMNS)] * 2


def test_power_alloc(capsys):
    code, out, _ = run(capsys, "power-alloc", "--fading", "nakagami:m=1", "--fading", "nakagami:m=4",
                       "--snr-db", "10:10:40")
    assert code == 0
    assert out.splitlines()[0].split(",") == power_columns(2)
    p1 = [float(r["exact_p1"]) for r in rows(out)]
    assert all(b > a for a, b in zip(p1, p1[1:])) and p1[-1] > 0.95
    assert all(float(r["limiting_p1"]) == 1.0 for r in rows(out))


def test_power_alloc_single_channel(capsys):
    code, out, _ = run(capsys, "power-alloc", "--fading", "rayleigh", "--snr-db", "0:10:20")
    assert code == 0
    for r in rows(out):
        assert r["exact_p1"] == r["asymptotic_p1"] == r["limiting_p1"] == "1.0"


def test_power_alloc_json(capsys):
    code, out, _ = run(capsys, "power-alloc", "--fading", "kappamu:kappa=2,mu=1", "--fading", "kappamu:kappa=5,mu=1",
                       "--snr-db", "40", "--format", "json")
    assert code == 0
    data = json.loads(out)
    methods = [p["method"] for p in data[0]["policies"]]
    assert methods == ["exact_kkt", "asymptotic", "limiting"]
    exact, _, lim = data[0]["policies"]
    assert max(abs(a - b) for a, b in zip(exact["fractions"], lim["fractions"])) < 0.02


def test_validate(capsys, tmp_path):
    report = tmp_path / "report.json"
    code, _, _ = run(capsys, "validate", "--fading", "rayleigh", "--fading", "nakagami:m=2",
                     "--snr-db", "0:10:10", "--trials", "20000", "--seed", "3", "--out", str(report))
    data = json.loads(report.read_text())
    assert code == 0 and data["passed"]
    names = " ".join(c["name"] for c in data["checks"])
    for part in ("quadrature-vs-mc", "corollary-vs-general", "i-mmse", "kkt-certificate"):
        assert part in names


def test_validate_failure_exit_code(capsys):
    # the Gauss-Laguerre double sum misses the gap at 30 dB, which the
    # Monte Carlo check exposes
    code, out, _ = run(capsys, "validate", "--fading", "rayleigh", "--snr-db", "30", "--trials", "100000")
    assert code == 3
    assert not json.loads(out)["passed"]


def test_fading_info(capsys):
    code, out, _ = run(capsys, "fading-info", "--fading", "nakagami:m=2")
    assert code == 0
    info = json.loads(out)
    assert info["diversity_order"] == 2.0
    assert info["terms"] == [[4.0, 2.0, 2.0]]
    assert info["normalisation_residual"] < 1e-12


def test_mixture_json_input(capsys, tmp_path):
    mg = {"family": "custom", "terms": [[1.0, 1.0, 1.0]]}
    path = tmp_path / "mg.json"
    path.write_text(json.dumps(mg))
    code, out, _ = run(capsys, "fading-info", "--fading", str(path))
    assert code == 0 and json.loads(out)["diversity_order"] == 1.0
    code, _, _ = run(capsys, "fading-info", "--fading", json.dumps(mg))
    assert code == 0


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"fading": ["rayleigh"], "snr_db": "0:10:30", "constellation": "qam16"}))
    code, out, _ = run(capsys, "ami-curve", "--config", str(cfg), "--snr-db", "0:10:10")
    assert code == 0
    assert [r["snr_db"] for r in rows(out)] == ["0.0", "10.0"]


def test_deterministic(capsys):
    argv = ["validate", "--fading", "rayleigh", "--snr-db", "0", "--trials", "5000", "--seed", "11"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


@pytest.mark.parametrize(
    "argv",
    [
        ["ami-curve", "--fading", "weibull:k=2"],
        ["ami-curve", "--fading", "rayleigh", "--snr-db", "10:5:0"],
        ["ami-curve", "--fading", "rayleigh", "--constellation", "qam8"],
        ["ami-curve"],
        ["ami-curve", "--fading", "rayleigh", "--order", "abc"],
        ["power-alloc", "--fading", "rayleigh", "--fading", "rayleigh", "--constellation", "qam4",
         "--constellation", "qam4", "--constellation", "qam4"],
        ["fading-info", "--fading", "/nonexistent/file.json"],
        ["frobnicate"],
    ],
)
def test_argument_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        raise SystemExit(main(argv))
    assert info.value.code == 1


def test_short_truncation_is_argument_error(capsys):
    code, _, err = run(capsys, "fading-info", "--fading", "kappamu:kappa=5,mu=2", "--truncation", "2")
    assert code == 1 and "unit-mean" in err


def test_numerical_failure_exit_code(capsys, monkeypatch):
    from mgami import ami
    from mgami.errors import NumericalError

    def fail(*args, **kwargs):
        raise NumericalError("integral not resolved")

    monkeypatch.setattr(ami, "characterize_asymptote", fail)
    code, _, err = run(capsys, "ami-curve", "--fading", "rayleigh", "--snr-db", "0")
    assert code == 2 and "numerical failure" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mgami.cli", "fading-info", "--fading", "rayleigh"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["diversity_order"] == 1.0

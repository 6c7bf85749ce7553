import json

import pytest

from fjforms.cli import main, parse_matrix, parse_number


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_number():
    assert parse_number("i") == 1j
    assert parse_number("-i") == -1j
    assert parse_number("0.1+1.2i") == 0.1 + 1.2j
    assert parse_number("1/2") == 0.5
    assert parse_matrix("1,1/2;1/2,1") == [[1, 0.5], [0.5, 1]]


def test_theta_values(capsys):
    code, out, err = run(capsys, "theta", "--m", "1", "--a", "0", "--Z", "i", "--z", "0")
    assert code == 0
    assert json.loads(out)["value"][0] == pytest.approx(1.003735, abs=1e-6)
    code, out, _ = run(capsys, "theta", "--m", "1", "--a", "1/2", "--Z", "i", "--z", "0")
    assert json.loads(out)["value"][0] == pytest.approx(0.415761, abs=1e-6)
    assert "Theta" in err


def test_usage_errors(capsys):
    code, _, err = run(capsys, "theta", "--a", "0", "--z", "0")
    assert code == 2 and "usage" in err
    assert run(capsys, "theta", "--a", "1/3", "--Z", "i", "--z", "0")[0] == 2
    assert run(capsys, "theta", "--a", "0", "--Z", "x", "--z", "0")[0] == 2
    assert run(capsys, "verify", "nosuch")[0] == 2
    assert run(capsys, "verify", "appendix", "--tol", "-1")[0] == 2


def test_psi_and_g1(capsys):
    code, out, _ = run(capsys, "psi", "--T", "3,1/2;1/2,1", "--a", "1/2", "--Z", "0.2+1.1i")
    assert code == 0 and len(json.loads(out)["psi"]) == 2
    code, out, _ = run(capsys, "g1", "--T", "3,1/2;1/2,1", "--Z", "0.2+1.1i", "--z", "0.1+0.3i", "--tol", "1e-20")
    assert code == 0 and json.loads(out)["relative_difference"] < 1e-12


def test_fj_extract(capsys):
    code, out, _ = run(capsys, "fj-extract", "--T", "3,1/2;1/2,1", "--Z", "0.2+1.1i", "--weight", "6",
                       "--grid", "8", "--tol", "1e-14")
    assert code == 0
    assert set(json.loads(out)["phi"]) == {"(0)", "(1/2)"}


def test_rank_probe_command(capsys):
    code, out, _ = run(capsys, "rank-probe", "--n", "2")
    res = json.loads(out)
    assert code == 0 and res["rank"] == 2 and res["status"] == "full"


def test_verify_report_schema(capsys, tmp_path):
    path = tmp_path / "rep.json"
    code, out, err = run(capsys, "verify", "appendix", "--out", str(path))
    assert code == 0 and out == ""
    rep = json.loads(path.read_text())
    assert rep["suite"] == "appendix" and rep["timing"] is None
    assert all(set(c) == {"name", "value", "bound", "pass"} for c in rep["checks"])
    assert rep["checks"][0]["value"] == 72
    assert "8/8" in err


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nseed = 5\nnpts = 3\n")
    code, out, _ = run(capsys, "verify", "theta-id", "--config", str(cfg), "--seed", "9")
    rep = json.loads(out)
    assert code == 0
    assert rep["config"]["seed"] == 9 and rep["config"]["npts"] == 3
    cfg.write_text("bogus = 1\n")
    assert run(capsys, "verify", "theta-id", "--config", str(cfg))[0] == 2


def test_gtilde_command(capsys):
    code, out, _ = run(capsys, "gtilde")
    res = json.loads(out)
    assert code == 0
    assert res["fitted_exponent_over_pi"] == pytest.approx(res["oracle_exponent_over_pi"], abs=1e-6)
    assert res["witness"] >= 1

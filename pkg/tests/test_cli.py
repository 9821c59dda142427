import json

import pytest

from bpplab.cli import main, parse_grid, parse_weight


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_barrier_reports_k(capsys):
    code, out = run(capsys, "barrier", "--n", "2", "--R", "2", "--weight", "constant:1", "--m", "1")
    assert code == 0
    assert out["report"]["barrier"]["k"] == 11.0
    assert out["report"]["residual"]["pass"]


def test_order_m_star(capsys):
    code, out = run(capsys, "order", "--kappa", "0.8", "--C", "100", "--n", "2")
    assert code == 0 and out["report"]["m_star"] == 26


def test_case_exit_zero(capsys):
    code, out = run(capsys, "case", "ex2_12")
    assert code == 0 and out["report"]["all_expected"]


def test_verify_operator_expectations(capsys):
    code, _ = run(capsys, "verify-operator", "--n", "2", "--weight", "power:2,0.5",
                  "--coeffs", "c_overgrowth")
    assert code == 1
    code, _ = run(capsys, "verify-operator", "--n", "2", "--weight", "power:2,0.5",
                  "--coeffs", "c_overgrowth", "--expect", "fail")
    assert code == 0


def test_outward_ball_and_fd_commands(capsys):
    code, out = run(capsys, "outward-ball", "--scene", "half_cross", "--h", "0.1", "--expect", "found")
    assert code == 0 and out["report"]["runs"][0]["search"]["radius"] == pytest.approx(0.5)
    code, out = run(capsys, "csmp", "--grid", "annulus:1,0.5,40,12", "--boundary", "0,1")
    assert code == 0 and out["report"]["csmp"]["strict"]
    code, out = run(capsys, "hopf", "--grid", "interval:0,1,200", "--weight", "constant:1",
                    "--coeffs", "laplacian", "--boundary", "0,1", "--hseq", "0.04,0.02,0.01")
    assert code == 0 and out["report"]["hopf"]["extrapolated"] == pytest.approx(1.0, rel=1e-9)


def test_json_file_and_determinism(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["barrier", "--n", "3", "--R", "1", "--weight", "power:2,0.5",
                     "--seed", "4", "--samples", "2000", "--json", str(p)]) == 0
    capsys.readouterr()
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 2, "R": 2.0, "weight": "constant:1", "samples": 300}))
    code, out = run(capsys, "barrier", "--config", str(cfg), "--R", "3")
    assert code == 0
    assert out["report"]["barrier"]["R"] == 3.0
    assert out["report"]["residual"]["n_samples"] == 300


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 2, "R": 2.0, "weight": "constant:1", "bogus": 1}))
    with pytest.raises(SystemExit) as info:
        main(["barrier", "--config", str(cfg)])
    assert info.value.code == 2


def test_bad_weight_is_usage_error(capsys):
    assert main(["barrier", "--n", "2", "--R", "2", "--weight", "cubic:1"]) == 2


def test_missing_case_id_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["case"])
    assert info.value.code == 2


def test_parsers():
    assert parse_weight("power:2,0.5").params == (2.0, 0.5)
    grid = parse_grid("annulus:1,0.5,10,8,0.95")
    assert grid.shape == (11, 8)
    assert parse_grid("rectangle:0,1,4,0,2,5").shape == (5, 6)

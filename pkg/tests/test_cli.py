from pathlib import Path

import numpy as np
import pytest

from fgzlb.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main, read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, name, text):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def test_zero_shock_irf_is_zero(tmp_path):
    out = tmp_path / "out"
    code = main(["irf", "--scenario", str(CONFIGS / "zero_shock.ini"), "--out", str(out)])
    assert code == EXIT_OK
    header, data = read_csv(out / "irf_zlb_zlb.csv")
    assert header == ["t", "pi_h", "pi_f", "x_h", "x_f", "r_h", "r_f", "rn_h", "rn_f"]
    assert not data[:, 1:].any()
    np.testing.assert_array_equal(data[:, 0], np.arange(1, 61))


def test_header_records_run_settings(tmp_path):
    out = tmp_path / "out"
    main(["irf", "--scenario", str(CONFIGS / "zero_shock.ini"), "--out", str(out), "--lambda-r", "0.03", "--horizon", "20"])
    text = (out / "irf_zlb_zlb.csv").read_text()
    for key in ("# tool: fgzlb", "# params_hash:", "# lambda_r: 0.03", "# horizon: 20", "# tolerances:"):
        assert key in text


def test_figure1_menu_writes_one_csv_per_policy_and_svg(tmp_path):
    out = tmp_path / "out"
    code = main(["irf", "--scenario", str(CONFIGS / "fig1_sigma2.ini"), "--out", str(out), "--plots"])
    assert code == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted(
        ["irf_nozlb_nozlb.csv", "irf_fg2_nozlb.csv", "irf_fg5_nozlb.csv", "irf_fg9_nozlb.csv", "irf.svg"]
    )
    assert (out / "irf.svg").read_text().lstrip().startswith("<?xml")


def test_missing_scenario_is_config_error(tmp_path):
    out = tmp_path / "out"
    code = main(["irf", "--scenario", str(tmp_path / "missing.ini"), "--out", str(out)])
    assert code == EXIT_CONFIG
    assert not out.exists()


def test_unknown_param_key_is_config_error(tmp_path):
    params = write(tmp_path, "p.ini", "[params]\nsigmaa = 2\n")
    out = tmp_path / "out"
    assert main(["irf", "--params", params, "--scenario", str(CONFIGS / "zero_shock.ini"), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_empty_family_is_config_error(tmp_path):
    sc = write(tmp_path, "s.ini", "[scenario]\nshock = home_only\n")
    out = tmp_path / "out"
    assert main(["welfare", "--scenario", sc, "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_solver_failure_exit_code(tmp_path):
    sc = write(tmp_path, "s.ini", "[scenario]\nshock = home_only\n\n[params]\nbound = 0\n")
    out = tmp_path / "out"
    assert main(["irf", "--scenario", sc, "--out", str(out)]) == EXIT_SOLVER
    assert not out.exists()


def test_welfare_sigma_one_foreign_zero(tmp_path):
    out = tmp_path / "out"
    assert main(["welfare", "--scenario", str(CONFIGS / "table2_sigma1.ini"), "--out", str(out)]) == EXIT_OK
    lines = [l for l in (out / "welfare.csv").read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    col = header.index("foreign")
    assert all(float(l.split(",")[col]) == 0.0 for l in lines[1:])
    assert "*" in (out / "welfare.txt").read_text()


def test_welfare_equal_fg_columns(tmp_path):
    out = tmp_path / "out"
    assert main(["welfare", "--scenario", str(CONFIGS / "table3c.ini"), "--out", str(out), "--raw"]) == EXIT_OK
    header, data = None, []
    lines = [l for l in (out / "welfare_raw.csv").read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    h, f = header.index("home"), header.index("foreign")
    for l in lines[1:]:
        cells = l.split(",")
        assert float(cells[h]) == pytest.approx(float(cells[f]), rel=1e-10)


def test_bargain_summary_reports_home_best_response(tmp_path):
    out = tmp_path / "out"
    assert main(["bargain", "--scenario", str(CONFIGS / "bargain.ini"), "--out", str(out), "--grid", "0:10/5"]) == EXIT_OK
    summary = (out / "bargain_summary.txt").read_text()
    assert "home best response to kF=5: kH=6" in summary


def test_bargain_one_by_one(tmp_path):
    out = tmp_path / "out"
    assert main(["bargain", "--scenario", str(CONFIGS / "bargain.ini"), "--out", str(out), "--grid", "4"]) == EXIT_OK
    summary = (out / "bargain_summary.txt").read_text()
    assert "cooperative point: kH=4, kF=4" in summary
    assert "home has no incentive" in summary and "foreign has no incentive" in summary


def test_bargain_symmetric_csv(tmp_path):
    out = tmp_path / "out"
    main(["bargain", "--scenario", str(CONFIGS / "bargain.ini"), "--out", str(out), "--grid", "0,3,6", "--raw"])
    header, data = read_csv_rows(out / "bargain_grid_raw.csv")
    world = {(int(r[0]), int(r[1])): float(r[2]) for r in data}
    for (a, b), v in world.items():
        assert v == pytest.approx(world[(b, a)], rel=1e-10)


def read_csv_rows(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


def test_losses_fg0_equals_zlb(tmp_path):
    sc = write(tmp_path, "s.ini", "[scenario]\nshock = global_trap\npairs = zlb:zlb, fg0:fg0\n")
    out = tmp_path / "out"
    assert main(["losses", "--scenario", sc, "--out", str(out), "--plots"]) == EXIT_OK
    _, a = read_csv(out / "losses_zlb_zlb.csv")
    _, b = read_csv(out / "losses_fg0_fg0.csv")
    np.testing.assert_array_equal(a, b)
    assert (out / "losses.svg").exists()


def test_losses_zero_shock(tmp_path):
    out = tmp_path / "out"
    assert main(["losses", "--scenario", str(CONFIGS / "zero_shock.ini"), "--out", str(out)]) == EXIT_OK
    _, data = read_csv(out / "losses_zlb_zlb.csv")
    assert not data[:, 1:].any()


def test_svg_is_reproducible(tmp_path):
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        main(["losses", "--scenario", str(CONFIGS / "fig3.ini"), "--out", str(out), "--plots"])
        runs.append((out / "losses.svg").read_bytes())
    assert runs[0] == runs[1]

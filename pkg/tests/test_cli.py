import csv
import hashlib
import io
import json

import numpy as np
import pytest

from obethermo.cli import (EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_PARTIAL, SIMULATE_COLUMNS,
                           cmd_steady, cmd_sweep, fmt, main)
from obethermo.config import list_presets, load_config
from obethermo.errors import ConfigError


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_presets_ship():
    assert {"fig2a", "fig2d", "fig3a", "fig3b", "fig4", "fig4-point", "cascade"} <= set(list_presets())
    for name in list_presets():
        load_config(name)


def test_number_format():
    assert fmt(-0.0) == "0.0"
    assert fmt(0.1) == "0.1"
    assert float(fmt(1 / 3)) == 1 / 3
    assert fmt(float("nan")) == "nan"
    assert fmt(True) == "true" and fmt(3) == "3"


@pytest.mark.parametrize("text, fragment", [
    ("[system]\nbeta_L = -1\n", ":2: [system] beta_L"),
    ("[system]\nwobble = 1\n", "unknown key"),
    ("[nonsense]\n", "unknown section"),
    ("[system]\ng_over_gamma = 1\ng_over_delta = 2\n", "given twice"),
    ("[system]\nfamilies = obe, xyz\n", "families"),
    ("[time]\nt_end = 1\n[sweep]\nx = g_over_gamma\nx_min = 1\nx_max = 2\n", "not both"),
    ("[sweep]\nx = g_over_gamma\nx_scale = log\nx_min = 0\nx_max = 2\n", "positive bounds"),
    ("[sweep]\nx = g\nx_min = 0\nx_max = 2\n", "cannot sweep"),
    ("[time]\npoints = many\n", "not a valid int"),
])
def test_config_errors_name_line_and_field(text, fragment):
    with pytest.raises(ConfigError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        load_config(text=text)


def test_overrides(tmp_path):
    cfg = load_config("fig4-point", ["system.beta_L=5", "system.g_over_delta=2"])
    assert cfg.system["beta_L"] == 5.0
    assert cfg.system["g_over_delta"] == 2.0 and "g_over_gamma" not in cfg.system
    with pytest.raises(ConfigError):
        load_config("fig4-point", ["beta_L=5"])


def test_cli_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[system]\nbeta_L = cold\n")
    assert main(["steady", "--config", str(bad)]) == EXIT_CONFIG
    assert "bad.ini:2" in capsys.readouterr().err


def test_simulate_columns_and_determinism(tmp_path):
    hashes = []
    for k in range(2):
        out = tmp_path / f"sim{k}.csv"
        code = main(["simulate", "--config", "fig2a", "--set", "time.points=41",
                     "--set", "system.initial=random", "--set", "system.seed=7",
                     "--fixed-step", "0.01", "--out", str(out),
                     "--diagnostics", str(tmp_path / "diag.txt")])
        assert code == EXIT_OK
        hashes.append(hashlib.sha256(out.read_bytes()).hexdigest())
    assert hashes[0] == hashes[1]
    rows = _read_csv(tmp_path / "sim0.csv")
    assert list(rows[0]) == SIMULATE_COLUMNS
    assert {r["family"] for r in rows} == {"obe", "fme"}


def test_simulate_without_dissipation_has_zero_heat(tmp_path):
    out = tmp_path / "sim.csv"
    code = main(["simulate", "--set", "system.gamma_over_omega_L=0",
                 "--set", "system.g_over_omega_L=1e-3", "--set", "system.delta_over_omega_L=1e-3",
                 "--set", "time.unit=omega_L", "--set", "time.t_end=5000",
                 "--set", "time.points=51", "--out", str(out)])
    assert code == EXIT_OK
    rows = _read_csv(out)
    assert all(float(r["Q_dot"]) == 0.0 for r in rows)
    assert max(float(r["P1"]) for r in rows) > 0.1


def test_steady_record(tmp_path):
    out = tmp_path / "steady.json"
    assert main(["steady", "--config", "fig4-point", "--format", "json", "--out", str(out)]) == EXIT_OK
    rec = json.loads(out.read_text())
    obe = rec["families"]["obe"]
    assert obe["numeric_minus_analytic"] <= 1e-10
    assert obe["analytic"]["P1"] == pytest.approx(0.217801825615423, abs=1e-13)
    assert set(rec["deviations"]) >= {"dP1", "dP1_first_order", "dIm_s_first_order"}


def test_steady_without_drive_is_thermal():
    rec = cmd_steady(load_config(text="[system]\nfamilies = obe\ng_over_gamma = 0\n"), io.StringIO())
    obe = rec["families"]["obe"]
    n = rec["params"]["nbar"]
    assert obe["analytic"]["P1"] == pytest.approx(n / (2 * n + 1))
    assert all(abs(v) < 1e-20 for k, v in obe["flows"].items() if k.endswith("_dot"))


def test_sweep_error_rows_and_symmetry(tmp_path):
    text = ("[system]\nfamilies = obe\nbeta_L = 2\ng_over_omega_L = 1e-5\n"
            "delta_over_omega_L = 1e-5\n"
            "[sweep]\nx = gamma_over_omega_L\nx_min = 0\nx_max = 2e-5\nx_count = 3\n")
    cols, rows, n_err = cmd_sweep(load_config(text=text))
    assert n_err == 1 and rows[0]["error"].startswith("NonUniqueSteadyStateError")
    assert all(not r.get("error") for r in rows[1:])
    cfg = load_config("fig4", ["sweep.x_count=3", "sweep.y_count=5"])
    _, rows, _ = cmd_sweep(cfg)
    by = {(r["g_over_gamma"], r["delta"]): r for r in rows}
    for (g, d), r in by.items():
        # even in delta up to the delta/omega_L shift of the thermal occupation
        a, b = r["D_cl"], by[(g, -d)]["D_cl"]
        assert abs(a - b) <= 10 * r["beta_L"] * abs(d) * max(a, b) + 1e-16


def test_partial_sweep_exit_code(tmp_path):
    out = tmp_path / "s.csv"
    code = main(["sweep", "--set", "system.families=fme", "--set", "sweep.x=g_over_gamma",
                 "--set", "sweep.x_min=0", "--set", "sweep.x_max=1", "--set", "sweep.x_count=2",
                 "--set", "system.delta_over_gamma=0", "--out", str(out)])
    assert code == EXIT_PARTIAL
    rows = _read_csv(out)
    assert rows[0]["error"].startswith("DegenerateBasisError") and rows[1]["error"] == ""


def test_single_point_sweep_matches_steady():
    cfg = load_config("fig4-point")
    rec = cmd_steady(cfg, io.StringIO())
    sweep_cfg = load_config(text="[system]\nfamilies = obe, fme\ngamma_over_omega_L = 1e-5\n"
                                 "beta_L = 2\ng_over_gamma = 1\n"
                                 "[sweep]\nx = delta_over_gamma\nx_min = 1\nx_max = 1\n")
    _, rows, _ = cmd_sweep(sweep_cfg)
    assert rows[0]["P1"] == rec["families"]["obe"]["analytic"]["P1"]
    assert rows[1]["Q_dot"] == rec["families"]["fme"]["flows"]["Q_dot"]


def test_cascade_command(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["cascade", "--config", "cascade", "--set", "cascade.alphas=0, 4",
                 "--set", "cascade.points=21", "--out", str(out)]) == EXIT_OK
    rows = _read_csv(out)
    zero = [r for r in rows if float(r["alpha"]) == 0]
    assert all(float(r[k]) == 0 for r in zero for k in ("P1_cascade", "P1_semiclassical",
                                                        "U_q", "identity_residual"))
    out2 = tmp_path / "c2.csv"
    assert main(["cascade", "--config", "cascade", "--set", "cascade.g0_over_omega_L=0",
                 "--set", "cascade.t_end_over_omega_L=300", "--set", "cascade.points=5",
                 "--out", str(out2)]) == EXIT_OK
    assert all(float(r["identity_residual"]) == 0 for r in _read_csv(out2))


def test_cascade_residual_decreases(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["cascade", "--config", "cascade", "--out", str(out)]) == EXIT_OK
    rows = _read_csv(out)
    worst = {}
    for r in rows:
        a = float(r["alpha"])
        worst[a] = max(worst.get(a, 0.0), float(r["identity_residual"]))
    vals = [worst[a] for a in sorted(worst)]
    assert vals == sorted(vals, reverse=True) and len(set(vals)) == 3


def test_numerical_failure_exit(capsys):
    code = main(["steady", "--set", "system.families=fme", "--set", "system.g_over_gamma=0",
                 "--set", "system.delta_over_gamma=0"])
    assert code in (EXIT_OK, EXIT_NUMERIC)

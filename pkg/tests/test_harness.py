import json

import pytest

from chemosim import ConfigError, RunStatus, parse_run_config, parse_sweep_config
from chemosim.cli import main as cli_main
from chemosim.harness import (SWEEP_COLUMNS, constants_report, load_run_config,
                              resolve_init_spec, simulate, sweep)
from chemosim.regimes import ModelParams


BASE = {
    "params": {"d": 3, "m1": 1.5, "m2": 1.5},
    "grid": {"N": 64, "R": 6.0},
    "solver": {"t_end": 0.02, "record_every": 10},
    "init_u": {"variant": "gaussian", "mass": 1.0, "spread": 0.25},
    "init_w": {"variant": "gaussian", "mass": 1.0, "spread": 0.25},
}


def config_dict(**over):
    cfg = json.loads(json.dumps(BASE))
    cfg.update(over)
    return cfg


def test_parse_valid_config():
    cfg = parse_run_config(config_dict())
    assert cfg.params.m1 == 1.5
    assert cfg.grid.n_cells == 64
    assert cfg.solver.t_end == 0.02


@pytest.mark.parametrize("mutate, fragment", [
    (lambda c: c.pop("params"), "params"),
    (lambda c: c["params"].pop("m1"), "params.m1"),
    (lambda c: c["params"].update(m1="x"), "params.m1"),
    (lambda c: c["grid"].update(N=8), "grid.N"),
    (lambda c: c["solver"].update(cfl=1.5), "solver"),
    (lambda c: c["init_u"].update(variant="nope"), "init_u.variant"),
    (lambda c: c["init_u"].pop("spread"), "init_u.spread"),
])
def test_parse_rejects_bad_configs(mutate, fragment):
    cfg = config_dict()
    mutate(cfg)
    with pytest.raises(ConfigError) as err:
        parse_run_config(cfg)
    assert fragment in str(err.value)


def test_load_reports_json_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"params": }')
    with pytest.raises(ConfigError) as err:
        load_run_config(path)
    assert "line 1" in str(err.value)


def test_resolve_init_spec_mass_override():
    params = ModelParams(3, 1.2, 1.3)
    spec = resolve_init_spec({"variant": "critical-polynomial",
                              "mass": 2.0, "radius": 0.5}, params, "u",
                             mass_override=3.0)
    from chemosim.initdata import compact_poly_mass, iota_exponents
    i1, _ = iota_exponents(params)
    assert spec.exponent == pytest.approx(i1, rel=1e-14)
    assert compact_poly_mass(spec.amplitude, 0.5, i1, 3) == pytest.approx(3.0, rel=1e-13)


def test_simulate_writes_artifacts(tmp_path):
    cfg = parse_run_config(config_dict(outputs=str(tmp_path / "out")))
    art = simulate(cfg, svg=True)
    assert art.outcome.status is RunStatus.REACHED_HORIZON
    assert art.series_path.exists() and art.summary_path.exists()
    assert art.plot_path.exists()
    summary = json.loads(art.summary_path.read_text())
    assert summary["status"] == "ReachedHorizon"
    assert summary["mass_drift_u"] < 1e-12
    body = art.series_path.read_text().splitlines()
    assert len(body) >= 3  # header plus at least two records
    assert body[0].startswith("t,mass_u")


def test_simulate_deterministic_bytes(tmp_path):
    cfg = parse_run_config(config_dict())
    a = simulate(cfg, out_dir=tmp_path / "a")
    b = simulate(cfg, out_dir=tmp_path / "b")
    assert a.series_path.read_bytes() == b.series_path.read_bytes()


def test_sweep_product_and_order(tmp_path):
    raw = {
        "axes": {"m1": [1.2, 1.5], "M1": [0.5, 1.0, 2.0]},
        "base": config_dict(),
        "workers": 1,
    }
    cfg = parse_sweep_config(raw)
    out = tmp_path / "sweep.csv"
    rows = sweep(cfg, out_path=out)
    assert len(rows) == 6
    # sorted by axes order: m1 outer, M1 inner
    got = [(r[0], r[2]) for r in rows]
    masses = [0.5, 1.0, 2.0]
    expect = [(m1, m) for m1 in (1.2, 1.5) for m in masses]
    for (gm1, gm), (em1, em) in zip(got, expect):
        assert gm1 == pytest.approx(em1)
        assert gm == pytest.approx(em, rel=1e-9)
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 7


def test_sweep_single_point_matches_simulate(tmp_path):
    base = parse_run_config(config_dict())
    art = simulate(base, write=False)
    cfg = parse_sweep_config({"axes": {"m1": [1.5]}, "base": config_dict()})
    rows = sweep(cfg)
    assert rows[0][5] == art.outcome.status.value
    assert rows[0][6] == pytest.approx(art.outcome.t_final, rel=1e-12)


def test_sweep_rejects_empty_axis():
    with pytest.raises(ConfigError):
        parse_sweep_config({"axes": {"m1": []}, "base": config_dict()})
    with pytest.raises(ConfigError):
        parse_sweep_config({"axes": {}, "base": config_dict()})
    with pytest.raises(ConfigError):
        parse_sweep_config({"axes": {"m1": [1.2] * 600}, "base": config_dict()})


def test_sweep_parallel_matches_serial(tmp_path, monkeypatch):
    raw = {"axes": {"M1": [0.5, 1.0, 1.5, 2.0]}, "base": config_dict()}
    serial = sweep(parse_sweep_config(raw))
    monkeypatch.setenv("CHEMOSIM_THREADS", "2")
    parallel = sweep(parse_sweep_config({**raw, "workers": 4}))
    assert serial == parallel


DICHOTOMY_BASE = {
    "params": {"d": 3, "m1": 1.5, "m2": 1.5},
    "grid": {"N": 160, "R": 1.5},
    "solver": {"t_end": 0.002, "dt_min": 1.5e-9, "linf_factor": 2000.0,
               "norm_factor": 1.2, "record_every": 5000},
    "init_u": {"variant": "critical-polynomial", "mass": 400.0, "radius": 0.2},
    "init_w": {"variant": "critical-polynomial", "mass": 400.0, "radius": 0.2},
}


def test_sweep_dichotomy_straddles_curves():
    # exponent axes straddling the critical curves at fixed masses: the
    # status column separates into blow-up below and horizon above
    cfg = parse_sweep_config({"axes": {"m1": [1.1, 1.5], "m2": [1.1, 1.5]},
                              "base": DICHOTOMY_BASE})
    rows = sweep(cfg)
    by_point = {(round(r[0], 3), round(r[1], 3)): r for r in rows}
    assert by_point[(1.1, 1.1)][4] == "Supercritical"
    assert by_point[(1.1, 1.1)][5] == "BlowUpDetected"
    assert by_point[(1.1, 1.1)][8] < 0.0  # G0
    for pt in ((1.1, 1.5), (1.5, 1.1), (1.5, 1.5)):
        assert by_point[pt][4] == "Subcritical"
        assert by_point[pt][5] == "ReachedHorizon"


def test_cli_simulate_blowup_exit_code(tmp_path, capsys):
    cfg = dict(DICHOTOMY_BASE)
    cfg["params"] = {"d": 3, "m1": 1.1, "m2": 1.1}
    cfg["outputs"] = str(tmp_path / "out")
    cfg_path = tmp_path / "blowup.json"
    cfg_path.write_text(json.dumps(cfg))
    code = cli_main(["simulate", "--config", str(cfg_path)])
    assert code == 2
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "BlowUpDetected"
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["status"] == "BlowUpDetected"


def test_cli_classify_and_exit_codes(capsys):
    assert cli_main(["classify", "1.5", "1.5", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["tag"] == "Subcritical"
    assert cli_main(["classify", "1.1", "1.1", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["tag"] == "Supercritical"
    # malformed dimension is an error exit
    assert cli_main(["classify", "1.5", "1.5", "2"]) == 1


def test_cli_simulate_roundtrip(tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(config_dict(outputs=str(tmp_path / "out"))))
    code = cli_main(["simulate", "--config", str(cfg_path)])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["status"] == "ReachedHorizon"
    assert (tmp_path / "out" / "series.csv").exists()
    assert (tmp_path / "out" / "final_u.csv").exists()
    assert cli_main(["simulate", "--config", str(tmp_path / "missing.json")]) == 1
    # the plot subcommand renders the produced series
    svg = tmp_path / "t.svg"
    assert cli_main(["plot", "--series", str(tmp_path / "out" / "series.csv"),
                     "--out", str(svg)]) == 0
    capsys.readouterr()
    assert svg.exists() and b"<svg" in svg.read_bytes()


def test_cli_lane_emden(capsys):
    code = cli_main(["lane-emden", "--power", "3", "--coeff", "1", "--zeta0", "1"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["first_zero"] == pytest.approx(6.8968486, abs=1e-4)


def test_cli_constants_deterministic(capsys):
    assert cli_main(["constants", "--d", "3", "--samples", "40"]) == 0
    first = capsys.readouterr().out
    assert cli_main(["constants", "--d", "3", "--samples", "40"]) == 0
    second = capsys.readouterr().out
    assert first == second
    report = json.loads(first)
    for key in ("C_c", "C_star_L1", "C_star_L2", "M_c", "M_1c", "M_2c",
                "c_d_convention", "seed"):
        assert key in report
    assert report["c_d_convention"] == "newtonian"
    assert cli_main(["constants", "--d", "2"]) == 1


def test_constants_report_seed_robust():
    a = constants_report(3, seed=0, n_samples=60, grid_cells=512)
    b = constants_report(3, seed=5, n_samples=60, grid_cells=512)
    assert b["C_c"] == pytest.approx(a["C_c"], rel=1e-3)
    assert a["M_c"] > 0 and a["M_1c"] > 0 and a["M_2c"] > 0

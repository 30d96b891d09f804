import math

import numpy as np
import pytest

import fdfp
from fdfp.cli import main as cli_main
from fdfp.harness import (
    ConfigError,
    DIAGNOSTIC_COLUMNS,
    build_initial,
    fit_exponential,
    parse_config,
    read_snapshot,
    run_scenario,
    snapshot_info,
    write_snapshot,
)

from conftest import MASS_BETA1_N1

MINIMAL = """
[grid]
geometry = cartesian1d
dim = 1
extent = 8.0
cells = 64

[initial]
kind = fermi_dirac
mass = 1.0

[solver]
kind = fv
t_final = 0.05
output_stride = 10

[run]
output_dir = {out}
seed = 0
"""


def test_parse_minimal_config(tmp_path):
    cfg = parse_config(MINIMAL.format(out=tmp_path))
    assert cfg.geometry == "cartesian1d"
    assert cfg.cells == 64
    assert cfg.solver_kind == "fv"
    assert cfg.initial.kind == "fermi_dirac"
    assert cfg.experiments == []


def test_unknown_key_reports_name_and_suggestion(tmp_path):
    bad = MINIMAL.format(out=tmp_path).replace("cells = 64", "cels = 64\ncolour = red")
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    message = str(err.value)
    assert "cels" in message and "cells" in message  # nearest valid key named
    assert "colour" in message
    assert "missing required key 'cells'" in message


def test_all_errors_reported_not_first_only(tmp_path):
    bad = MINIMAL.format(out=tmp_path).replace("extent = 8.0", "extent = -1")
    bad = bad.replace("mass = 1.0", "mass = -2")
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    assert len(err.value.errors) >= 2


def test_indicator_height_validation(tmp_path):
    bad = MINIMAL.format(out=tmp_path).replace(
        "kind = fermi_dirac\nmass = 1.0",
        "kind = indicator\nlo = -1\nhi = 1\nheight = 1.5")
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    assert "(0, 1]" in str(err.value) and "invariant region" in str(err.value)


def test_unknown_experiment_and_section(tmp_path):
    bad = MINIMAL.format(out=tmp_path) + "\n[experiments]\nnames = run, decaay_fit\n"
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    assert "decaay_fit" in str(err.value) and "decay_fit" in str(err.value)
    bad2 = MINIMAL.format(out=tmp_path) + "\n[experimnts]\nnames = run\n"
    with pytest.raises(ConfigError):
        parse_config(bad2)


def test_run_scenario_stationary_diagnostics(tmp_path):
    cfg = parse_config(MINIMAL.format(out=tmp_path) + "\n[experiments]\nnames = run\n")
    status = run_scenario(cfg)
    assert status == 0
    text = (tmp_path / "diagnostics.csv").read_text().splitlines()
    assert text[0] == ",".join(DIAGNOSTIC_COLUMNS)
    data = np.array([[float(x) for x in line.split(",")] for line in text[1:]])
    # equilibrium initial data: every column except t is constant
    for col in range(1, data.shape[1]):
        assert np.abs(data[:, col] - data[0, col]).max() <= 1e-10
    report = (tmp_path / "report_run.csv").read_text()
    assert "True" in report


def test_run_scenario_decay_fit(tmp_path):
    text = """
[grid]
geometry = cartesian1d
dim = 1
extent = 8.0
cells = 128

[initial]
kind = scaled_fermi_dirac
mass_star = {mstar}
factor = 0.5

[solver]
kind = fv
t_final = 3.0
output_stride = 50

[run]
output_dir = {out}

[experiments]
names = decay_fit

[experiment.decay_fit]
window_lo = 0.2
window_hi = 2.0
""".format(mstar=MASS_BETA1_N1, out=tmp_path)
    cfg = parse_config(text)
    assert run_scenario(cfg) == 0
    report = dict(
        line.split(",") for line in
        (tmp_path / "report_decay_fit.csv").read_text().splitlines()[1:]
    )
    assert float(report["slope"]) <= float(report["rate_bound"])
    assert report["bound_satisfied"] == "True"
    assert report["pass"] == "True"


def test_run_scenario_cross_check(tmp_path):
    text = """
[grid]
geometry = cartesian1d
dim = 1
extent = 8.0
cells = 128

[initial]
kind = scaled_fermi_dirac
mass_star = {mstar}
factor = 0.5

[solver]
kind = fv
t_final = 0.2

[run]
output_dir = {out}

[experiments]
names = cross_check

[experiment.cross_check]
time_nodes = 9
singular_quad_nodes = 16
""".format(mstar=MASS_BETA1_N1, out=tmp_path)
    cfg = parse_config(text)
    assert run_scenario(cfg) == 0
    lines = (tmp_path / "cross_check.csv").read_text().splitlines()
    assert lines[0] == "t,l1_difference"
    diffs = [float(line.split(",")[1]) for line in lines[1:]]
    assert max(diffs) <= 1e-2
    assert "True" in (tmp_path / "report_cross_check.csv").read_text()


def test_determinism_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    text = MINIMAL + "\n[experiments]\nnames = run, entropy_control\n"
    for out in (out1, out2):
        cfg = parse_config(text.format(out=out))
        run_scenario(cfg)
    for name in ("diagnostics.csv", "report_run.csv", "report_entropy_control.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_snapshot_round_trip(tmp_path, eq_beta1):
    path = tmp_path / "state.txt"
    write_snapshot(eq_beta1, path, time=0.25)
    state, t = read_snapshot(path)
    assert t == 0.25
    assert np.array_equal(state.values, eq_beta1.values)
    assert np.array_equal(state.grid.node, eq_beta1.grid.node)


def test_snapshot_hand_written_three_cells(tmp_path):
    # 3 cells on [-3, 3]: h = 2, nodes -2, 0, 2
    path = tmp_path / "tiny.txt"
    path.write_text("fdfp-snapshot v1\ncartesian1d,1,3,3,0\n-2,0.25\n0,0.5\n2,0.125\n")
    state, t = read_snapshot(path)
    assert t == 0.0
    assert np.allclose(state.grid.node, [-2.0, 0.0, 2.0])
    assert np.allclose(state.values, [0.25, 0.5, 0.125])


def test_snapshot_rejects_out_of_range_value(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("fdfp-snapshot v1\ncartesian1d,1,3,3,0\n-2,0.25\n0,1.2\n2,0.125\n")
    with pytest.raises(ValueError, match="row 4"):
        read_snapshot(path)


def test_snapshot_rejects_version_and_node_mismatch(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("fdfp-snapshot v2\ncartesian1d,1,3,3,0\n")
    with pytest.raises(ValueError):
        read_snapshot(path)
    path.write_text("fdfp-snapshot v1\ncartesian1d,1,3,3,0\n-2.5,0.25\n0,0.5\n2,0.125\n")
    with pytest.raises(ValueError, match="row 3"):
        read_snapshot(path)


def test_snapshot_info(tmp_path, eq_beta1):
    path = tmp_path / "state.txt"
    write_snapshot(eq_beta1, path, time=1.5)
    info = snapshot_info(path)
    assert info["time"] == 1.5
    assert info["cells"] == 256
    assert info["mass"] == pytest.approx(MASS_BETA1_N1, rel=0.01)


def test_build_initial_kinds(grid256):
    from fdfp.harness import InitialSpec

    ind = build_initial(InitialSpec("indicator", {"lo": -1.0, "hi": 1.0, "height": 0.5}), grid256)
    assert fdfp.integrate(ind) == pytest.approx(1.0, abs=1e-12)
    gp = build_initial(InitialSpec("gaussian_profile", {"mass": 1.0, "sigma": 1.0}), grid256)
    assert gp.values.max() <= 1.0
    assert fdfp.integrate(gp) == pytest.approx(1.0, rel=1e-6)
    sc = build_initial(InitialSpec("scaled_fermi_dirac", {"mass_star": MASS_BETA1_N1, "factor": 0.5}), grid256)
    assert sc.values.max() <= 0.5


def test_fit_exponential_exact():
    t = np.linspace(0, 2, 20)
    slope, intercept, r2 = fit_exponential(t, np.exp(-3 * t) * 2.0)
    assert slope == pytest.approx(-3.0, abs=1e-10)
    assert intercept == pytest.approx(math.log(2.0), abs=1e-10)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_exponential_constant_and_noisy(rng):
    t = np.linspace(0, 2, 30)
    slope, _, _ = fit_exponential(t, np.full(30, 1.7))
    assert abs(slope) <= 1e-12
    noisy = np.exp(-1.4 * t) * np.exp(rng.normal(0, 0.01, 30))
    slope, _, _ = fit_exponential(t, noisy)
    assert slope == pytest.approx(-1.4, rel=0.02)


def test_fit_exponential_validation():
    with pytest.raises(ValueError):
        fit_exponential([0, 1, 2], [1, 1, 1])
    with pytest.raises(ValueError):
        fit_exponential([0, 1, 2, 3], [1, 1, -1, 1])


def test_cli_check_and_exit_codes(tmp_path):
    cfg_path = tmp_path / "ok.cfg"
    cfg_path.write_text(MINIMAL.format(out=tmp_path / "out"))
    assert cli_main(["check", str(cfg_path)]) == 0
    bad_path = tmp_path / "bad.cfg"
    bad_path.write_text("[grid]\ngeometry = nope\n")
    assert cli_main(["check", str(bad_path)]) == 2
    assert cli_main(["check", str(tmp_path / "missing.cfg")]) == 2


def test_cli_run_and_snapshot_info(tmp_path, capsys):
    out = tmp_path / "out"
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(MINIMAL.format(out=out)
                        + "\n[experiments]\nnames = run\n")
    assert cli_main(["run", str(cfg_path), "--quiet"]) == 0
    assert (out / "diagnostics.csv").exists()

    eq = fdfp.equilibrium_state(1.0, fdfp.make_grid("cartesian1d", 1, 8.0, 64))
    snap = tmp_path / "s.txt"
    write_snapshot(eq, snap, time=0.0)
    assert cli_main(["snapshot-info", str(snap)]) == 0
    assert "cells: 64" in capsys.readouterr().out

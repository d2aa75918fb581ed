import csv
import json
import math
import re
from pathlib import Path

import numpy as np
import pytest

from fieldline import ConfigError
from fieldline.cli import main
from fieldline.config import config_from_dict, load_config, parse_override

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

UNIFORM = {
    "profile": {"name": "uniform", "b0": 1.0},
    "constants": {"k1": 0.0, "k2": 1.0, "k3": 1.0},
    "time": {"t_end": 6.283185307179586, "n_samples": 201},
}


def write_config(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(tmp_path, command, doc, *extra, out="out"):
    cfg = write_config(tmp_path, doc)
    return main([command, "--config", cfg, "--out", str(tmp_path / out), *extra])


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


# -- configuration ------------------------------------------------------------

def test_defaults_are_valid():
    cfg = config_from_dict({})
    assert cfg.method == "quadrature" and cfg.profile.name == "uniform"
    assert cfg.tolerances.ode_rel_tol == 1e-9 and cfg.tolerances.quad_tol == 1e-10


@pytest.mark.parametrize("doc,match", [
    ({"colour": 1}, "unknown key"),
    ({"time": {"t_end": 1.0, "steps": 3}}, "unknown key"),
    ({"method": "euler"}, "method must be"),
    ({"methods": ["ode", "rk4"]}, "unknown method"),
    ({"time": {"t_end": float("nan")}}, "finite"),
    ({"time": {"t_end": float("inf")}}, "finite"),
    ({"time": {"t_end": -1.0}}, "t_end"),
    ({"time": {"n_samples": 2.5}}, "integer"),
    ({"time": {"n_samples": True}}, "integer"),
    ({"profile": {"b0": "one"}}, "number"),
    ({"output": {"formats": ["csv", "xml"]}}, "format"),
    ({"output": {"plot": "yes"}}, "true or false"),
    ({"particle": {}, "constants": {}}, "not both"),
    ({"constants": {"direction": 0}}, "direction"),
    ({"time": None}, "object"),
])
def test_invalid_configs_are_rejected(doc, match):
    with pytest.raises(ConfigError, match=match):
        config_from_dict(doc)


def test_overrides_apply_in_order():
    cfg = config_from_dict(UNIFORM, ["time.t_end=3", "profile.name=exp_decay", "time.t_end=4.5"])
    assert cfg.time.t_end == 4.5 and cfg.profile.name == "exp_decay"
    assert config_from_dict(UNIFORM, ["constants=null", "particle.vy0=1"]).particle.vy0 == 1.0


def test_override_parsing():
    assert parse_override("a.b=1e-3") == (["a", "b"], 1e-3)
    assert parse_override("name=exp_decay") == (["name"], "exp_decay")
    assert parse_override("x=[1, 2]") == (["x"], [1, 2])
    for bad in ("novalue", "=3"):
        with pytest.raises(ConfigError):
            parse_override(bad)
    with pytest.raises(ConfigError, match="not a section"):
        config_from_dict({"method": "ode"}, ["method.x=1"])


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad)
    nan = tmp_path / "nan.json"
    nan.write_text('{"time": {"t_end": NaN}}')
    with pytest.raises(ConfigError, match="finite"):
        load_config(nan)


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    load_config(path)


# -- exit codes -----------------------------------------------------------------

def test_exit_0_writes_files(tmp_path):
    assert run(tmp_path, "trajectory", UNIFORM) == 0
    data = read_csv(tmp_path / "out" / "trajectory_quadrature.csv")
    assert set(data) >= {"t", "x", "y", "vx", "vy", "energy_residual", "momentum_residual"}
    np.testing.assert_allclose(np.hypot(data["x"] - 1, data["y"]), 1.0, atol=1e-9)
    doc = json.loads((tmp_path / "out" / "trajectory_quadrature.json").read_text())
    assert doc["metadata"]["method"] == "quadrature" and doc["metadata"]["orbit"] == "periodic"


def test_exit_2_on_config_error(tmp_path, capsys):
    assert run(tmp_path, "trajectory", {**UNIFORM, "bogus": 1}) == 2
    assert "configuration error" in capsys.readouterr().err
    assert main(["trajectory", "--config", str(tmp_path / "nope.json")]) == 2


def test_exit_2_on_bad_grid(tmp_path):
    doc = {"profile": {"name": "exp_decay"}, "grid": {"u_min": 1.0, "u_max": 0.0}}
    assert run(tmp_path, "field", doc) == 2
    doc = {"profile": {"name": "rational_ab", "a": 1.0, "b": 2.0}, "grid": {"u_min": -1.0, "u_max": 1.0}}
    assert run(tmp_path, "field", doc) == 2


def test_exit_3_names_failing_stage(tmp_path, capsys):
    doc = {**UNIFORM, "method": "ode", "tolerances": {"ode_max_steps": 5}}
    assert run(tmp_path, "trajectory", doc) == 3
    assert "ode stage" in capsys.readouterr().err


def test_exit_3_on_factorization_regime(tmp_path, capsys):
    doc = {"profile": {"name": "uniform", "axis": "radial"}, "susy": {"m_quantum": 1}}
    assert run(tmp_path, "susy", doc) == 3
    assert "OUT_OF_FACTORIZATION_REGIME" in capsys.readouterr().err


def test_exit_3_on_double_well(tmp_path, capsys):
    doc = {"profile": {"name": "rational_ab", "axis": "radial", "a": 1.0, "b": 2.0}}
    assert run(tmp_path, "susy", doc) == 3
    assert "swkb stage" in capsys.readouterr().err


def test_exit_4_on_invariant_breach(tmp_path, capsys):
    doc = {**UNIFORM, "tolerances": {"energy_check": 1e-30}}
    assert run(tmp_path, "trajectory", doc) == 4
    assert "energy residual" in capsys.readouterr().err
    # files are still written for inspection
    assert (tmp_path / "out" / "trajectory_quadrature.csv").exists()


def test_susy_needs_radial_profile(tmp_path):
    assert run(tmp_path, "susy", {"profile": {"name": "uniform"}}) == 2


def test_compare_needs_two_methods(tmp_path):
    assert run(tmp_path, "compare", UNIFORM) == 2


def test_unbounded_closed_form_is_numeric_failure(tmp_path):
    doc = {"profile": {"name": "exp_decay"}, "constants": {"k1": 2.0, "k2": 4.0, "k3": 8.0},
           "method": "closed-form", "time": {"t_end": 5.0, "n_samples": 11}}
    assert run(tmp_path, "trajectory", doc) == 0
    doc["constants"] = {"k1": 1.0, "k2": 0.1, "k3": 4.0}
    assert run(tmp_path, "trajectory", doc) == 3


# -- determinism and plots ----------------------------------------------------

def test_reruns_are_byte_identical(tmp_path):
    doc = {**UNIFORM, "method": "all", "output": {"plot": True}}
    assert run(tmp_path, "trajectory", doc, out="a") == 0
    assert run(tmp_path, "trajectory", doc, out="b") == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len(files) == 10
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_uses_17_significant_digits(tmp_path):
    assert run(tmp_path, "trajectory", UNIFORM) == 0
    lines = (tmp_path / "out" / "trajectory_quadrature.csv").read_text().splitlines()
    for cell in lines[5].split(","):
        assert float(f"{float(cell):.17g}") == float(cell)
        assert cell == f"{float(cell):.17g}"


def _svg_points(text):
    pts = re.search(r'points="([^"]+)"', text).group(1).split()
    return np.array([[float(v) for v in p.split(",")] for p in pts])


def test_svg_has_equal_aspect_and_closed_circle(tmp_path):
    assert run(tmp_path, "trajectory", UNIFORM, "--plot") == 0
    text = (tmp_path / "out" / "trajectory_quadrature.svg").read_text()
    px = _svg_points(text)
    data = read_csv(tmp_path / "out" / "trajectory_quadrature.csv")
    sx = np.ptp(px[:, 0]) / np.ptp(data["x"])
    sy = np.ptp(px[:, 1]) / np.ptp(data["y"])
    assert sx == pytest.approx(sy, rel=1e-4)
    # the path closes within the line width
    assert np.hypot(*(px[0] - px[-1])) < 1.0
    # y points up
    top = np.argmin(px[:, 1])
    assert data["y"][top] == pytest.approx(data["y"].max())


def test_svg_of_drifting_orbit_is_wider_than_tall(tmp_path):
    doc = {"profile": {"name": "exp_decay"}, "constants": {"k1": 2.0, "k2": 2.0, "k3": 8.0},
           "time": {"t_end": 50.0, "n_samples": 501}}
    assert run(tmp_path, "trajectory", doc, "--plot") == 0
    svg = (tmp_path / "out" / "trajectory_quadrature.svg").read_text()
    w, h = map(float, re.search(r'width="(\d+)" height="(\d+)"', svg).groups())
    assert w > 4 * h


def test_method_all_writes_comparison_report(tmp_path):
    assert run(tmp_path, "trajectory", {**UNIFORM, "method": "all"}) == 0
    rep = json.loads((tmp_path / "out" / "trajectory_comparison.json").read_text())
    pairs = {(p["a"], p["b"]): p for p in rep["pairs"]}
    assert pairs["quadrature", "closed-form"]["max_position_deviation"] < 1e-6
    assert pairs["quadrature", "ode"]["max_position_deviation"] < 1e-6
    assert set(rep["residuals"]) == {"quadrature", "closed-form", "ode"}


# -- field ----------------------------------------------------------------------

def test_field_decay_column(tmp_path):
    doc = {"profile": {"name": "exp_decay", "b0": 0.7}, "grid": {"u_min": 0, "u_max": 5, "n": 51}}
    assert run(tmp_path, "field", doc) == 0
    data = read_csv(tmp_path / "out" / "field.csv")
    np.testing.assert_allclose(data["B"], 0.7 * np.exp(-data["u"]), rtol=1e-13)
    assert list(data) == ["u", "f", "f_prime", "B"]


def test_zero_field_column(tmp_path):
    doc = {"profile": {"name": "zero_field"}, "grid": {"u_min": 0.5, "u_max": 5, "n": 31}}
    assert run(tmp_path, "field", doc) == 0
    assert np.all(read_csv(tmp_path / "out" / "field.csv")["B"] == 0.0)


def test_field_table_round_trip(tmp_path):
    doc = {"profile": {"name": "exp_decay", "b0": 1.0}, "grid": {"u_min": 0, "u_max": 5, "n": 501}}
    assert run(tmp_path, "field", doc, out="first") == 0
    table = tmp_path / "first" / "field.csv"
    again = {"profile": {"name": "field_table", "path": str(table)},
             "grid": {"u_min": 0, "u_max": 5, "n": 101}}
    assert run(tmp_path, "field", again, out="second") == 0
    got = read_csv(tmp_path / "second" / "field.csv")
    np.testing.assert_allclose(got["f"], -np.expm1(-got["u"]) / np.where(got["u"] > 0, got["u"], 1)
                               + (got["u"] == 0), atol=1e-6)
    np.testing.assert_allclose(got["B"], np.exp(-got["u"]), atol=1e-6)


# -- susy -----------------------------------------------------------------------

def _susy(tmp_path, doc):
    assert run(tmp_path, "susy", doc) == 0
    out = tmp_path / "out"
    verdict = json.loads((out / "susy_verdict.json").read_text())
    return verdict, read_csv(out / "susy_zero_mode.csv"), read_csv(out / "susy_spectrum.csv")


def test_susy_uniform_outputs(tmp_path):
    verdict, zm, spec = _susy(tmp_path, {"profile": {"name": "uniform", "axis": "radial"}})
    assert verdict["verdict"] == "NORMALIZABLE" and verdict["susy"] == "unbroken"
    assert verdict["paper_claim_agrees"] is True
    assert verdict["norm_value"] == pytest.approx(0.5, rel=1e-9)
    np.testing.assert_allclose(zm["log_psi"], 0.5 * np.log(zm["r"]) - zm["r"] ** 2 / 2, rtol=1e-12)
    np.testing.assert_allclose(spec["E_n"], [1, 3, 5, 7, 9, 11], rtol=1e-9)
    assert list(spec["n"]) == [0, 1, 2, 3, 4, 5]


def test_susy_radial_exp_records_disagreement(tmp_path):
    verdict, _, spec = _susy(tmp_path, {"profile": {"name": "radial_exp", "axis": "radial"}})
    assert verdict["verdict"] == "NORMALIZABLE"
    assert verdict["reference_claim"] == "NOT_NORMALIZABLE"
    assert verdict["paper_claim_agrees"] is False
    assert np.all(spec["residual"] < 1e-8)


def test_susy_reversed_field(tmp_path):
    doc = {"profile": {"name": "constant", "axis": "radial", "value": -1.0}, "susy": {"n_max": 2}}
    verdict, _, _ = _susy(tmp_path, doc)
    assert verdict["verdict"] == "NOT_NORMALIZABLE" and verdict["susy"] == "broken"
    assert verdict["norm_value"] is None


# -- compare ---------------------------------------------------------------------

def test_compare_uniform(tmp_path):
    doc = {**UNIFORM, "methods": ["quadrature", "closed-form"]}
    assert run(tmp_path, "compare", doc) == 0
    rep = json.loads((tmp_path / "out" / "compare_report.json").read_text())
    assert rep["pairs"][0]["max_position_deviation"] < 1e-6
    assert rep["constants"] == {"k1": 0.0, "k2": 1.0, "k3": 1.0}


def test_compare_identical_methods_is_zero(tmp_path):
    doc = {**UNIFORM, "methods": ["quadrature"]}
    assert run(tmp_path, "compare", doc, "--method", "quadrature") == 2
    from fieldline.cli import _pair_report
    from fieldline import trajectory_quadrature, make_builtin, ParticleParams
    tr = trajectory_quadrature(ParticleParams(vy0=1.0), make_builtin("uniform"), 3.0, 31)
    rep = _pair_report({"a": tr, "b": tr})
    assert rep["pairs"][0]["max_position_deviation"] == 0.0


def test_compare_decay_reference_adjudicates(tmp_path):
    cfg = str(CONFIGS / "decay_reference.json")
    assert main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "decay_report.json").read_text())
    assert rep["decay_curve_adjudication"]["verdict"] == "derived"
    assert rep["pairs"][0]["max_position_deviation"] < 1e-5
    assert math.isclose(rep["constants"]["k1"] + rep["constants"]["k2"], 1.118, rel_tol=1e-12)

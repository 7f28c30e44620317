from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from cpcgeom.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_NUMERIC, EXIT_PASS, main
from cpcgeom.errors import UsageError
from cpcgeom.report import GridSpec, Report, parse_t_range, parse_tolerances

SLICE = "slice(c=1,n=2)"
HORO = "rotational_horosphere(B=1,n=2)"
SPHERE_CYL = "cylinder_sphere(c=1,n=2,r=0.6)"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def structured(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "structured")
    return code, json.loads(out)


def test_analyze_slice_shows_zero_shape_operator(capsys):
    code, rep = structured(capsys, "analyze", "--entry", SLICE)
    assert code == EXIT_PASS and rep["summary"] == "pass"
    assert rep["checks"]["shape_operator_zero"]["status"] == "pass"
    assert rep["checks"]["nu_unit"]["measured"] == 0.0
    assert rep["tool"] == "cpcgeom" and rep["config"]["entry"] == SLICE


def test_report_fields(capsys):
    _, rep = structured(capsys, "analyze", "--entry", HORO)
    for chk in rep["checks"].values():
        assert set(chk) >= {"status", "measured", "tolerance"}
    assert {"tool", "version", "config", "checks", "summary"} <= set(rep)


def test_analyze_text(capsys):
    code, out, _ = run(capsys, "analyze", "--entry", HORO)
    assert code == EXIT_PASS
    assert out.splitlines()[-1] == "summary: pass"
    assert "PASS  expected_curvatures" in out


def test_reports_are_byte_stable(capsys):
    first = run(capsys, "analyze", "--entry", HORO, "--format", "structured")[1]
    second = run(capsys, "analyze", "--entry", HORO, "--format", "structured")[1]
    assert first == second


def test_failed_check_exit_code(capsys):
    code, rep = structured(capsys, "analyze", "--entry", HORO, "--tol", "structure=1e-300")
    assert code == EXIT_FAIL
    assert rep["summary"] == "fail" and rep["checks"]["structure_equations"]["status"] == "fail"


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--entry", "nope"],
        ["analyze", "--tol", "nope=1"],
        ["analyze", "--tol", "unit=-1"],
        ["analyze", "--tol", "unit"],
        ["analyze", "--grid", "1"],
        ["analyze", "--grid", "0:1:3"],
        ["parallel", "--t-range", "1:0:3"],
        ["suite", "--criteria", "11"],
        ["analyze", "--config", "/nonexistent/config.json"],
    ],
)
def test_configuration_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_CONFIG
    assert "configuration error" in err


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == EXIT_CONFIG


def test_invalid_json_config(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    code, _, err = run(capsys, "analyze", "--config", str(cfg))
    assert code == EXIT_CONFIG and "not valid JSON" in err


def test_config_file_custom_chart(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(
        json.dumps(
            {
                "chart": {"profile": {"kind": "lemma", "params": [1.0, 0.0, 0.0]}, "n": 2},
                "grid": "-0.3:0.3:3,0.1:0.8:3",
                "tolerances": {"structure": 1e-5},
            }
        )
    )
    code, rep = structured(capsys, "analyze", "--config", str(cfg))
    assert code == EXIT_PASS
    assert rep["config"]["tolerances"]["structure"] == 1e-5
    assert rep["data"]["points"] == 9


def test_config_file_builder_with_shear(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    spec = {"builder": "cylinder", "params": {"c": 1, "n": 2, "base": "sphere", "radius": 0.6}, "shear": 0.3}
    cfg.write_text(json.dumps({"chart": spec}))
    code, rep = structured(capsys, "frame", "--config", str(cfg))
    assert code == EXIT_PASS
    assert rep["data"]["chart"].endswith("~sheared")
    assert rep["data"]["max_adjacent_deviation"] > 0


def test_config_file_affine(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    spec = {
        "builder": "rotational_horosphere",
        "params": {"B": 1.0, "n": 2},
        "affine": {"matrix": [[1, 0], [0.2, 1]], "offset": [0, 0], "domain": [[-0.3, 0.3], [-0.3, 0.3]]},
    }
    cfg.write_text(json.dumps({"chart": spec}))
    code, rep = structured(capsys, "analyze", "--config", str(cfg))
    assert code == EXIT_PASS and "expected_curvatures" not in rep["checks"]


def test_bad_chart_spec(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"chart": {"builder": "cylinder", "params": {"c": 1, "n": 2, "base": "cone"}}}))
    assert run(capsys, "analyze", "--config", str(cfg))[0] == EXIT_CONFIG


def test_parallel_csv(tmp_path, capsys):
    out_csv = tmp_path / "curves.csv"
    code, rep = structured(capsys, "parallel", "--entry", HORO, "--t-range=-0.5:0.5:5", "--csv", str(out_csv))
    assert code == EXIT_PASS
    assert rep["checks"]["transport_spectrum"]["status"] == "pass"
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["t", "lambda_index", "predicted", "measured"]
    assert len(rows) == 1 + 5 * 2


def test_parallel_clips_at_focal_value(capsys):
    code, rep = structured(capsys, "parallel", "--entry", SPHERE_CYL, "--t-range=-2:2:5")
    assert code == EXIT_PASS
    assert any("clipped" in n for n in rep["notes"])
    assert max(rep["data"]["t_values"]) < 0.6


def test_parallel_beyond_focal_value_is_an_error(capsys):
    code, rep = structured(capsys, "parallel", "--entry", SPHERE_CYL, "--t-range=-2:2:5", "--no-clip")
    assert code == EXIT_NUMERIC
    assert rep["summary"] == "fail"
    assert any(c["status"] == "error" for c in rep["checks"].values())


def test_parallel_slice_is_trivial(capsys):
    code, rep = structured(capsys, "parallel", "--entry", SLICE)
    assert code == EXIT_PASS and any("trivial" in n for n in rep["notes"])


def test_parallel_negative_instance_agrees(capsys):
    code, rep = structured(capsys, "parallel", "--entry", "rotational_cubic(k=0.2,n=2)")
    assert code == EXIT_PASS
    assert rep["data"]["tnorm_constant"] is False and rep["data"]["curvatures_constant"] is False


def test_frame_dump(tmp_path, capsys):
    dump = tmp_path / "frame.csv"
    code, out, _ = run(capsys, "frame", "--entry", HORO, "--csv", str(dump))
    assert code == EXIT_PASS
    rows = list(csv.reader(dump.open()))
    assert rows[0][:4] == ["point", "u1", "u2", "vector"]
    assert len(rows) == 1 + 9 * 2
    assert not any(x == "-0" for r in rows for x in r)


def test_ode(capsys):
    code, rep = structured(capsys, "ode")
    assert code == EXIT_PASS
    assert rep["checks"]["affine_ode_exact"]["measured"] == 0.0
    assert rep["checks"]["spherical_obstruction_exceptions"]["measured"] == 0


def test_suite_subset(capsys):
    code, rep = structured(capsys, "suite", "--criteria", "1,6")
    assert code == EXIT_PASS
    assert len(rep["checks"]) == 2


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == EXIT_PASS and HORO in out


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.txt"
    code, out, _ = run(capsys, "analyze", "--entry", SLICE, "--out", str(target))
    assert code == EXIT_PASS and out == ""
    assert target.read_text().endswith("summary: pass\n")


def test_unwritable_output(capsys):
    code, _, err = run(capsys, "analyze", "--entry", SLICE, "--out", "/nonexistent/dir/r.txt")
    assert code == EXIT_CONFIG and "cannot write" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cpcgeom", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and SLICE in proc.stdout


def test_grid_spec_parsing():
    assert GridSpec.parse(None).count == 3
    assert GridSpec.parse("4").count == 4
    g = GridSpec.parse("0:1:3,-1:1:2")
    assert g.axes == [(0.0, 1.0, 3), (-1.0, 1.0, 2)]
    for bad in ["1", "a", "0:1", "0:1:1", "1:0:3"]:
        with pytest.raises(UsageError):
            GridSpec.parse(bad)


def test_t_range_and_tolerance_parsing():
    assert parse_t_range("-1:1:5") == (-1.0, 1.0, 5)
    assert parse_t_range(None) is None
    with pytest.raises(UsageError):
        parse_t_range("1:2")
    tol = parse_tolerances(["unit=1e-3", ("nu", 2e-3)])
    assert tol["unit"] == 1e-3 and tol["nu"] == 2e-3
    with pytest.raises(UsageError):
        parse_tolerances(["unit=0"])


def test_report_summary_and_rounding():
    rep = Report("analyze", {})
    rep.add("a", 1 / 3, 1.0)
    assert rep.passed
    rep.add("b", float("nan"), 1.0)
    assert not rep.passed
    d = rep.to_dict()
    assert d["checks"]["a"]["measured"] == 0.333333333333
    assert d["checks"]["b"]["measured"] == "nan"
    rep2 = Report("analyze", {})
    rep2.add_error("x", "boom")
    assert rep2.summary == "fail" and "ERROR x: boom" in rep2.render()


def test_full_suite_passes(capsys):
    code, out, _ = run(capsys, "suite")
    assert code == EXIT_PASS
    assert out.count("PASS") == 10

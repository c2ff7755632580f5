import json
import subprocess
import sys

import pytest

from wrinklesim import cli

pytestmark = pytest.mark.filterwarnings("ignore::wrinklesim.solver.StepSizeWarning")


def test_unknown_material_exits_2_and_lists_presets(capsys):
    code = cli.main(["simulate", "--scenario", "single_wrinkle_friction", "--material", "silk"])
    assert code == 2
    err = capsys.readouterr().err
    assert "cotton" in err and "polyester" in err


@pytest.mark.parametrize("argv", [
    ["sweep", "--scenario", "single_wrinkle_friction", "--holds"],
    ["sweep", "--scenario", "single_wrinkle_friction", "--holds", "1"],
    ["bench", "--sizes", "0"],
    ["validate", "--scenario", "no_such_scenario"],
    ["simulate", "--scenario", "cylinder_twist", "--n", "5"],
    ["simulate", "--scenario", "single_wrinkle_friction", "--h", "-1"],
])
def test_config_errors_exit_2(argv, tmp_path):
    assert cli.main(argv + ["--out", str(tmp_path)] if argv[0] != "validate" else argv) == 2


def test_bad_json_script_exits_2(tmp_path):
    p = tmp_path / "s.json"
    p.write_text("{not json")
    assert cli.main(["validate", "--scenario", str(p)]) == 2
    p.write_text(json.dumps({"events": [{"action": "fly"}]}))
    assert cli.main(["validate", "--scenario", str(p)]) == 2


def test_solver_failure_exits_1(tmp_path):
    script = {"mesh": {"type": "grid", "width": 0.1, "height": 0.1, "nx": 5, "ny": 5},
              "solver": {"cg_max_iters": 1, "cg_tol": 1e-12, "gravity": [0, 0, -9.81]},
              "events": [{"action": "wait", "duration": 0.02}]}
    p = tmp_path / "s.json"
    p.write_text(json.dumps(script))
    assert cli.main(["simulate", "--scenario", str(p), "--out", str(tmp_path / "o")]) == 1


def test_simulate_writes_artifacts_deterministically(tmp_path):
    argv = ["simulate", "--scenario", "single_wrinkle_friction", "--material", "cotton", "--hold", "500",
            "--n", "9"]
    assert cli.main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(argv + ["--out", str(tmp_path / "b")]) == 0
    a, b = tmp_path / "a", tmp_path / "b"
    for name in ("measurements.csv", "solver_stats.csv", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    objs = sorted((a / "snapshots").glob("*.obj"))
    assert len(objs) == 2
    for f in objs:
        assert f.read_bytes() == (b / "snapshots" / f.name).read_bytes()
    man = json.loads((a / "manifest.json").read_text())
    assert man["material"] == "cotton" and man["hold"] == 500 and man["script"]["events"]


def test_manifest_script_reproduces_run(tmp_path):
    assert cli.main(["simulate", "--scenario", "single_wrinkle_friction", "--n", "9", "--hold", "20",
                     "--out", str(tmp_path / "a")]) == 0
    script = json.loads((tmp_path / "a" / "manifest.json").read_text())["script"]
    (tmp_path / "s.json").write_text(json.dumps(script))
    assert cli.main(["simulate", "--scenario", str(tmp_path / "s.json"), "--out", str(tmp_path / "b")]) == 0
    for name in ("measurements.csv", "solver_stats.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_hardening_only_final_obj_independent_of_hold(tmp_path):
    base = ["simulate", "--scenario", "single_wrinkle_plastic", "--model", "hardening_only", "--n", "9"]
    assert cli.main(base + ["--hold", "1", "--out", str(tmp_path / "a")]) == 0
    assert cli.main(base + ["--hold", "500", "--out", str(tmp_path / "b")]) == 0
    fa = sorted((tmp_path / "a" / "snapshots").glob("*final.obj"))[0]
    fb = sorted((tmp_path / "b" / "snapshots").glob("*final.obj"))[0]
    assert fa.read_bytes() == fb.read_bytes()


def test_sweep_writes_sorted_curve(tmp_path):
    code = cli.main(["sweep", "--scenario", "single_wrinkle_friction", "--n", "9", "--holds", "100", "1",
                     "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "recovery_curve.csv").read_text().splitlines()
    assert lines[0] == "hold_s,log10_hold,recovery_pct"
    assert [float(l.split(",")[0]) for l in lines[1:]] == [1.0, 100.0]


def test_sweep_multiple_materials(tmp_path):
    code = cli.main(["sweep", "--scenario", "single_wrinkle_friction", "--n", "9", "--holds", "1", "10",
                     "--materials", "cotton", "polyester", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "recovery_curve_cotton.csv").exists()
    assert (tmp_path / "recovery_curve_polyester.csv").exists()


def test_bench_rows(tmp_path):
    assert cli.main(["bench", "--sizes", "50", "80", "--steps", "2", "--warmup", "1", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "timing.csv").read_text().splitlines()
    assert len(lines) == 5


def test_module_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "wrinklesim", "simulate", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for flag in ("--scenario", "--material", "--model", "--hold", "--out", "--threads", "--seed"):
        assert flag in out.stdout

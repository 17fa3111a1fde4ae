import json

import pytest

from rbfpower.cli import main, resolve_config


def run(args, capsys=None):
    code = main(args)
    err = capsys.readouterr().err if capsys else ""
    return code, err


def test_interpolate_single_center(tmp_path, capsys):
    c = tmp_path / "c.txt"
    c.write_text("0.5\n")
    code, _ = run(["interpolate", "--set", f"centers.file={c}",
                   "--set", "interpolate.values=[3]", "--out",
                   str(tmp_path / "o")], capsys)
    assert code == 0
    assert (tmp_path / "o" / "coefficients_a.csv").read_text() == \
        "index,a\n0,3.0\n"
    assert (tmp_path / "o" / "coefficients_b.csv").read_text() == "index,b\n"
    res = json.loads((tmp_path / "o" / "residual.json").read_text())
    assert res["backward_error"] < 1e-15


def test_malformed_centers_exit_2(tmp_path, capsys):
    c = tmp_path / "c.txt"
    c.write_text("0.1\n0.x\n")
    code, err = run(["interpolate", "--set", f"centers.file={c}",
                     "--set", "interpolate.values=[1,2]",
                     "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "c.txt:2" in err


def test_collinear_tps_exit_3(tmp_path, capsys):
    code, err = run(["interpolate", "--set", "kernel.family=thin_plate_spline",
                     "--set", "kernel.dimension=2",
                     "--set", "centers.points=[[0,0],[1,1],[2,2]]",
                     "--set", "interpolate.values=[1,2,3]",
                     "--out", str(tmp_path / "o")], capsys)
    assert code == 3 and "unisolvent" in err


def test_verify_identity_runs(tmp_path, capsys):
    base = ["verify-identity", "--set", "centers.points=[0,1.5,3,4.5,6]",
            "--set", "verify_identity.x=2.2"]
    code, _ = run(base + ["--out", str(tmp_path / "a")], capsys)
    doc = json.loads((tmp_path / "a" / "identity_report.json").read_text())
    assert code == 0 and len(doc["matching"]) == 3
    code, _ = run(base + ["--set", "verify_identity.mu=[1]",
                          "--out", str(tmp_path / "b")], capsys)
    doc = json.loads((tmp_path / "b" / "identity_report.json").read_text())
    assert code == 0 and len(doc["candidates"]) == 3


def test_verify_identity_norm_mu1_exit_2(tmp_path, capsys):
    code, err = run(["verify-identity", "--set", "kernel.family=norm",
                     "--set", "centers.points=[0,0.3,0.6,1]",
                     "--set", "verify_identity.x=0.4",
                     "--set", "verify_identity.mu=1",
                     "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "s_inf" in err


def test_convergence_outputs_and_level_minimum(tmp_path, capsys):
    code, _ = run(["convergence", "--set", "kernel.family=norm",
                   "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    study = json.loads((tmp_path / "o" / "study.json").read_text())
    assert study["within_window"] and study["predicted_exponent"] == 0.5
    assert len((tmp_path / "o" / "plot.dat").read_text().splitlines()) == 5
    code, _ = run(["convergence", "--set", "kernel.family=norm",
                   "--set", "convergence.levels=[3,5,9]",
                   "--out", str(tmp_path / "p")], capsys)
    assert code == 2


def test_unwritable_output_exit_4(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, err = run(["convergence", "--set", "kernel.family=norm",
                     "--out", str(blocker / "sub")], capsys)
    assert code == 4


def test_bound_check_cases(tmp_path, capsys):
    base = ["bound-check", "--set", "centers.points=[0,1,2,3,4,5]"]
    span = "bound_check.function={type: kernel_span, translates: [1.5, 2.2]}"
    code, _ = run(base + ["--set", span, "--set",
                          "bound_check.samples.count=100",
                          "--out", str(tmp_path / "a")], capsys)
    summary = json.loads((tmp_path / "a" / "bound_check.json").read_text())
    assert code == 0 and summary["violations"] == 0
    code, _ = run(base + ["--set", span, "--set",
                          "bound_check.samples.at_centers=true",
                          "--out", str(tmp_path / "b")], capsys)
    rows = (tmp_path / "b" / "bound_check.csv").read_text().splitlines()
    assert rows[0] == "x,lhs,rhs,margin"
    assert all(float(r.split(",")[1]) <= 1e-8 for r in rows[1:])
    code, err = run(base + ["--set", "bound_check.function={type: gaussian, "
                            "beta: 3.0}", "--out", str(tmp_path / "c")],
                    capsys)
    assert code == 3 and "diverges" in err


def test_power_function(tmp_path, capsys):
    code, _ = run(["power-function", "--set", "centers.points=[0,1,2,3]",
                   "--set", "power_function.samples.points=[0.5, 1.0]",
                   "--out", str(tmp_path / "o")], capsys)
    rows = (tmp_path / "o" / "power_function.csv").read_text().splitlines()
    assert code == 0 and rows[0] == "x,kappa_sq,kappa"
    assert abs(float(rows[2].split(",")[1])) < 1e-12


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("kernel: {family: norm}\nconvergence: {rho: 0.2}\n")
    r = resolve_config("convergence", cfg, ["convergence.samples=7"], seed=5)
    assert r["kernel"]["family"] == "norm" and r["convergence"]["rho"] == 0.2
    assert r["convergence"]["samples"] == 7 and r["seed"] == 5
    assert r["convergence"]["levels"] == [9, 17, 33, 65, 129]
    assert "tolerances" in r and "centers" not in r


def test_unknown_key_and_wrong_metadata(tmp_path, capsys):
    code, _ = run(["convergence", "--set", "bogus=1",
                   "--out", str(tmp_path / "o")], capsys)
    assert code == 2
    run(["convergence", "--set", "kernel.family=norm",
         "--out", str(tmp_path / "m")], capsys)
    code, err = run(["bound-check", "--config",
                     str(tmp_path / "m" / "metadata.json"),
                     "--out", str(tmp_path / "x")], capsys)
    assert code == 2 and "convergence" in err


def _outputs(d):
    out = {}
    for p in sorted(d.iterdir()):
        if p.name == "metadata.json":
            meta = json.loads(p.read_text())
            meta.pop("wall_clock_seconds")
            out[p.name] = meta
        else:
            out[p.name] = p.read_bytes()
    return out


@pytest.mark.parametrize("args", [
    ["convergence", "--set", "kernel.family=norm", "--workers", "2"],
    ["bound-check", "--set", "centers.points=[0,1,2,3,4]", "--seed", "99",
     "--set", "bound_check.function={type: kernel_span, translates: [1.1]}",
     "--set", "bound_check.samples.count=40"],
])
def test_rerun_from_metadata_is_bit_identical(tmp_path, capsys, args):
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main([args[0], "--config", str(tmp_path / "a" / "metadata.json"),
                 "--out", str(tmp_path / "b")]) == 0
    assert _outputs(tmp_path / "a") == _outputs(tmp_path / "b")

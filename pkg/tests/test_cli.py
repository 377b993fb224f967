import json

import pytest

from chemflood.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, main
from chemflood.riemann import WaveKind, solve_riemann

from test_config import CONFIGS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_model_validate_default(capsys):
    code, out, _ = run(capsys, "model", "validate", "--config", str(CONFIGS / "default.json"))
    assert code == EXIT_OK
    assert json.loads(out)["report"]["ok"] is True


def test_default_config_matches_shipped(capsys):
    code, out, _ = run(capsys, "model", "default-config")
    assert code == EXIT_OK
    assert json.loads(out) == json.loads((CONFIGS / "default.json").read_text())


def test_model_eval(capsys):
    code, out, _ = run(capsys, "model", "eval", "--s", "0.5", "--c", "0")
    rec = json.loads(out)
    assert code == EXIT_OK and rec["f"] == pytest.approx(0.5) and rec["a_c"] == pytest.approx(0.5)


def test_shock_classify_example(capsys):
    argv = ["shock", "classify", "--s-minus", "0.5", "--s-plus", "1", "--c-minus", "0", "--c-plus", "0"]
    code, out, _ = run(capsys, *argv)
    rec = json.loads(out)
    assert code == EXIT_OK and rec["verdict"] == "admissible"
    assert rec["shock"]["v"] == pytest.approx(1.0, abs=1e-12)
    assert run(capsys, *argv, "--expect", "admissible")[0] == EXIT_OK
    assert run(capsys, *argv, "--expect", "inadmissible")[0] == EXIT_FAIL


def test_inadmissible_shock_expectation_fails(capsys):
    # rarefaction-side jump from oil to water fails the entropy condition
    code, out, _ = run(capsys, "shock", "classify", "--s-minus", "0", "--s-plus", "1", "--c-minus", "0",
                       "--c-plus", "0", "--expect", "admissible")
    assert code == EXIT_FAIL and json.loads(out)["verdict"] == "inadmissible"


def test_error_exit_codes(capsys, tmp_path):
    bad = tmp_path / "cfg.json"
    bad.write_text(json.dumps({"schema": 1, "unknown": True}))
    code, _, err = run(capsys, "model", "validate", "--config", str(bad))
    assert code == EXIT_ERROR and "config $" in err
    assert run(capsys, "shock", "classify", "--s-minus", "0.5")[0] == EXIT_ERROR
    assert run(capsys, "bogus")[0] == EXIT_ERROR
    assert run(capsys, "riemann", "solve", "--left", "1,x", "--right", "0,0")[0] == EXIT_ERROR
    assert run(capsys, "riemann", "solve", "--left", "1.5,0", "--right", "0,0")[0] == EXIT_ERROR


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("CHEMFLOOD_THREADS", "zero")
    assert run(capsys, "model", "eval", "--s", "0.5", "--c", "0")[0] == EXIT_ERROR
    monkeypatch.setenv("CHEMFLOOD_THREADS", "1")
    assert run(capsys, "model", "eval", "--s", "0.5", "--c", "0")[0] == EXIT_OK


def test_riemann_solve_outputs(capsys, tmp_path):
    fan_p, prof_p = tmp_path / "fan.json", tmp_path / "profile.csv"
    code, _, _ = run(capsys, "riemann", "solve", "--left", "1,0", "--right", "0,1", "--out", str(fan_p),
                     "--profile", str(prof_p))
    assert code == EXIT_OK
    fan = json.loads(fan_p.read_text())
    assert "zeta-rarefaction" in [w["kind"] for w in fan["waves"]]
    lines = prof_p.read_text().splitlines()
    assert lines[0] == "xi,s,c" and len(lines) > 10
    assert all(float(r.split(",")[0]) >= 0 for r in lines[1:])


def test_riemann_from_config_lagrange(capsys):
    code, out, _ = run(capsys, "riemann", "solve", "--config", str(CONFIGS / "injection.json"), "--coords", "lagr")
    assert code == EXIT_OK and json.loads(out)["coords"] != "original"


def test_lagrange_eval_csv(capsys):
    code, out, _ = run(capsys, "lagrange", "eval", "--zeta", "0.5", "--n", "5")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "U,zeta,F,F_U,F_UU" and len(lines) == 6
    assert float(lines[1].split(",")[2]) == pytest.approx(-1.0)  # F(1, zeta) = -s U = -1


def shock_record(tmp_path, s_minus, s_plus, c_minus, c_plus):
    p = tmp_path / "shock.json"
    p.write_text(json.dumps({"s_minus": s_minus, "s_plus": s_plus, "c_minus": c_minus, "c_plus": c_plus}))
    return str(p)


def test_entropy_check(capsys, tmp_path):
    code, out, _ = run(capsys, "entropy", "check", "--shock", shock_record(tmp_path, 0.5, 1.0, 0.0, 0.0), "--n", "5",
                       "--expect", "admissible")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "k,residual" and len(lines) == 6
    assert max(float(r.split(",")[1]) for r in lines[1:]) <= 0.0
    # the reversed jump violates the inequality
    rec = shock_record(tmp_path, 1.0, 0.5, 0.0, 0.0)
    assert run(capsys, "entropy", "check", "--shock", rec, "--expect", "admissible")[0] == EXIT_FAIL
    w = [w for w in solve_riemann((1.0, 1.0), (0.0, 0.0)).waves if w.kind == WaveKind.ZETA_SHOCK][0]
    rec = shock_record(tmp_path, w.left[0], w.right[0], w.left[1], w.right[1])
    assert run(capsys, "entropy", "check", "--shock", rec)[0] == EXIT_OK
    # not a Rankine-Hugoniot pair
    assert run(capsys, "entropy", "check", "--shock", shock_record(tmp_path, 0.8, 0.6, 1.0, 0.0))[0] == EXIT_ERROR
    (tmp_path / "empty.json").write_text("{}")
    assert run(capsys, "entropy", "check", "--shock", str(tmp_path / "empty.json"))[0] == EXIT_ERROR


def zeta_shock_argv():
    w = [w for w in solve_riemann((1.0, 1.0), (0.0, 0.0)).waves if w.kind == WaveKind.ZETA_SHOCK][0]
    vals = (w.left[0], w.right[0], w.left[1], w.right[1])
    return ["shock", "classify", "--ode", *(a for k, v in zip(("--s-minus", "--s-plus", "--c-minus", "--c-plus"), vals)
                                            for a in (k, repr(v)))]


def test_c_shock_with_ode(capsys):
    code, out, _ = run(capsys, *zeta_shock_argv(), "--expect", "admissible")
    rec = json.loads(out)
    assert code == EXIT_OK and rec["ode"]["status"] == "yes"


@pytest.mark.parametrize("argv", [
    zeta_shock_argv(),
    ["shock", "portrait", "--c-minus", "1", "--c-plus", "0", "--v", "0.83", "--n", "41"],
    ["lagrange", "eval", "--zeta", "0.3"],
])
def test_deterministic_output(capsys, tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a)]) == EXIT_OK
    assert main(argv + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_viscous_and_verify_pipeline(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"schema": 1, "viscous": {"epsilon": 5e-3, "T": 0.4, "left": [1.0, 1.0],
                                                       "right": [0.0, 0.0], "N": 256, "n_frames": 9},
                               "verify": {"ns": [16, 32]}, "seed": 7}))
    frames, again = tmp_path / "frames", tmp_path / "again"
    assert run(capsys, "viscous", "run", "--config", str(cfg), "--frames", str(frames))[0] == EXIT_OK
    assert run(capsys, "viscous", "run", "--config", str(cfg), "--frames", str(again))[0] == EXIT_OK
    for p in sorted(frames.glob("frame_*.csv")):
        assert p.read_bytes() == (again / p.name).read_bytes()
    assert json.loads((frames / "run.json").read_text())["clip_events"] == 0
    code, out, _ = run(capsys, "verify", "contours", "--config", str(cfg), "--frames", str(frames), "--rects", "3")
    rec = json.loads(out)
    assert code == EXIT_OK and rec["seed"] == 7 and rec["n"] == [16, 32]
    # the front has not crossed the domain, so columns ahead stay dry: the verdict fails with exit 2
    code, out, _ = run(capsys, "verify", "zeroflow", "--config", str(cfg), "--frames", str(frames))
    rec = json.loads(out)
    assert code == EXIT_FAIL and rec["t0"]["never_wet"] > 0 and rec["omega0_drift"] < 0.02
    assert run(capsys, "viscous", "run")[0] == EXIT_ERROR


def test_suite_acceptance_subset(capsys, tmp_path):
    out = tmp_path / "acc.json"
    code, text, _ = run(capsys, "suite", "acceptance", "--only", "2,8", "--out", str(out))
    assert code == EXIT_OK
    assert text.splitlines()[0] == f"# seed={0xC0FFEE}"
    assert [r["number"] for r in json.loads(out.read_text())["results"]] == [2, 8]

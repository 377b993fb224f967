"""Batch command-line front end.

Exit codes: 0 success, 2 a validation or verdict check failed, 1 any error.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import acceptance, entropy, lagrange, model, riemann, shock, tw_ode, verify, viscous
from .config import DEFAULT_CONFIG, DEFAULT_SEED, RunConfig
from .errors import ChemFloodError, ConfigError, DomainError
from .grid import GridField

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class _Fail(Exception):
    """Raised by commands whose computation succeeded but whose verdict failed."""


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _emit_json(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _emit_csv(header, rows, out=None, seed=None):
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        if seed is not None:
            fh.write(f"# seed={seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    finally:
        if out:
            fh.close()


def _pair(text):
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 's,c', got {text!r}") from None
    return (a, b)


def _threads():
    raw = os.environ.get("CHEMFLOOD_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"CHEMFLOOD_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"CHEMFLOOD_THREADS must be a positive integer, got {raw!r}")
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return n


def _config(args) -> RunConfig:
    if getattr(args, "config", None):
        return RunConfig.load(args.config)
    return RunConfig.from_dict(DEFAULT_CONFIG)


# ---------------------------------------------------------------- model

def cmd_model_validate(args, cfg):
    rep = model.validate_model(cfg.model, n=args.n)
    _emit_json({"model": cfg.model.to_dict(), "report": rep.to_dict()}, args.out)
    if not rep.ok:
        raise _Fail("model validation failed")


def cmd_model_eval(args, cfg):
    m = cfg.model
    f, fs, fc = model.eval_flux(args.s, args.c, m)
    fss = m.f_ss(args.s, args.c)
    a, ac, acc = model.eval_adsorption(args.c, m)
    _emit_json({"s": args.s, "c": args.c, "f": f, "f_s": fs, "f_c": fc, "f_ss": fss, "a": a, "a_c": ac,
                "a_cc": acc}, args.out)


def cmd_config_default(args, cfg):
    _emit_json(DEFAULT_CONFIG, args.out)


# ---------------------------------------------------------------- lagrange

def cmd_lagrange_eval(args, cfg):
    U = np.linspace(args.U_min, args.U_max, args.n)
    F, FU, FUU = lagrange.eval_F(U, args.zeta, cfg.model)
    rows = [(u, args.zeta, a, b, c) for u, a, b, c in zip(U, F, FU, FUU)]
    _emit_csv(["U", "zeta", "F", "F_U", "F_UU"], rows, args.out)


# ---------------------------------------------------------------- shock

def _shock_from(args, cfg):
    if args.s_minus is None:
        if cfg.shock is None:
            raise ConfigError("give --s-minus/--s-plus/--c-minus/--c-plus or a config with a shock block")
        d = cfg.shock
        return shock.make_shock(d["s_minus"], d["s_plus"], d["c_minus"], d["c_plus"], d.get("v"), cfg.model)
    missing = [k for k in ("s_plus", "c_minus", "c_plus") if getattr(args, k) is None]
    if missing:
        raise ConfigError("missing " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return shock.make_shock(args.s_minus, args.s_plus, args.c_minus, args.c_plus, args.v, cfg.model)


def cmd_shock_classify(args, cfg):
    sh = _shock_from(args, cfg)
    v = shock.admissible(sh, cfg.model)
    rec = {"shock": sh.to_dict(), **v.to_dict()}
    if args.ode and sh.is_c_shock:
        r = tw_ode.connection_exists(sh, cfg.model)
        rec["ode"] = {"status": r.status, "min_distance": r.min_distance, "detail": r.detail}
    _emit_json(rec, args.out)
    if args.expect and rec["verdict"] != args.expect:
        raise _Fail(f"expected {args.expect}, got {rec['verdict']}")


def cmd_shock_portrait(args, cfg):
    pp = tw_ode.phase_portrait(args.c_minus, args.c_plus, args.v, cfg.model, n=args.n)
    rows = []
    for i, line in enumerate(pp.nullclines):
        rows += [("nullcline", i, s, c) for s, c in line]
    rows += [("critical", i, s, c) for i, (s, c) in enumerate(pp.critical_points)]
    for i, tr in enumerate(pp.trajectories):
        rows += [("trajectory", i, s, c) for s, c in zip(tr.s, tr.c)]
    _emit_csv(["kind", "idx", "s", "c"], rows, args.out)


# ---------------------------------------------------------------- entropy

def cmd_entropy_check(args, cfg):
    try:
        d = json.loads(Path(args.shock).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read shock record {args.shock}: {exc}") from None
    d = d.get("shock", d)
    try:
        sh = shock.make_shock(d["s_minus"], d["s_plus"], d["c_minus"], d["c_plus"], d.get("v"), cfg.model)
    except KeyError as exc:
        raise ConfigError(f"shock record lacks {exc}") from None
    shock.check_rh(sh, cfg.model)
    lsh = shock.map_shock(sh, cfg.model)
    if lsh.is_zeta_shock:
        lo, hi = sorted((lsh.zeta_minus, lsh.zeta_plus))
        k = np.linspace(lo, hi, args.n)
        res = entropy.zeta_shock_residual(lsh.zeta_minus, lsh.zeta_plus, k, cfg.model)
    else:
        if lsh.U_minus is None:
            raise DomainError("a shock into the dry state has no interior U-shock image")
        lo, hi = sorted((lsh.U_minus, lsh.U_plus))
        k = np.linspace(lo, hi, args.n)
        res = entropy.u_shock_residual(lsh, k, cfg.model)
    _emit_csv(["k", "residual"], zip(k, res), args.out)
    if np.max(res) > entropy.DEAD_BAND and args.expect == "admissible":
        raise _Fail("entropy inequality violated")


# ---------------------------------------------------------------- riemann

def cmd_riemann_solve(args, cfg):
    rb = cfg.riemann or {}
    left = args.left or (tuple(rb["left"]) if "left" in rb else None)
    right = args.right or (tuple(rb["right"]) if "right" in rb else None)
    if left is None or right is None:
        raise ConfigError("give --left and --right or a config with a riemann block")
    coords = args.coords or rb.get("coords", "orig")
    fan = riemann.solve_riemann(left, right, cfg.model, coords=coords)
    fan.check()
    _emit_json(fan.to_dict(), args.out)
    if args.profile:
        xi, st = fan.profile(args.n)
        if fan.coords == "original":
            keep = xi >= 0.0  # quarter plane
            xi, st = xi[keep], st[keep]
        head = ["xi", "s", "c"] if fan.coords == "original" else ["xi", "U", "zeta"]
        _emit_csv(head, [(a, b, c) for a, (b, c) in zip(xi, st)], args.profile)


# ---------------------------------------------------------------- viscous

def cmd_viscous_run(args, cfg):
    if cfg.viscous is None:
        raise ConfigError("viscous run needs a config with a viscous block")
    g = viscous.run(cfg.viscous, cfg.model)
    out = Path(args.frames or cfg.output or "frames")
    g.write_frames(out)
    meta = {k: v for k, v in g.meta.items() if k not in ("mass", "boundary_flux")}
    meta.update(config=cfg.to_dict(), n_frames=len(g.t))
    _emit_json(meta, out / "run.json")
    _emit_json({"frames": str(out), "steps": meta["steps"], "clip_events": meta["clip_events"],
                "max_step_conservation_error": meta["max_step_conservation_error"]})


# ---------------------------------------------------------------- verify

def cmd_verify_contours(args, cfg):
    g = GridField.read_frames(args.frames)
    smp = verify.grid_sampler(g)
    ns = tuple(cfg.verify.get("ns", verify.CONTOUR_NS))
    pad = 2.0 * g.dx
    rng = np.random.default_rng(cfg.seed)
    tlo = g.t[1] if len(g.t) > 1 else g.t[0]
    rects = verify.random_rects(rng, args.rects, g.x[-1] - g.x[0], tlo, g.t[-1], pad=pad)
    rects = [verify.Rect(r.x0 + g.x[0], r.x1 + g.x[0], r.t0, r.t1) for r in rects]
    study = verify.refinement_study(smp, rects, ns, cfg.model)
    _emit_json({"seed": cfg.seed, "frames": str(args.frames), "rects": len(rects), **study.to_dict()}, args.out)


def cmd_verify_zeroflow(args, cfg):
    g = GridField.read_frames(args.frames)
    th = args.threshold or cfg.verify.get("threshold", verify.DRY_THRESHOLD)
    x0 = cfg.verify.get("x0", 0.0)
    buf = cfg.verify.get("buffer_frames", verify.BUFFER_FRAMES)
    poly = verify.t0_extract(g, x0=x0, threshold=th, m=cfg.model)
    rec = {"seed": cfg.seed, "frames": str(args.frames), "threshold": th, "t0": poly.to_dict()}
    if not poly.empty:
        rec["omega0_drift"] = verify.omega0_concentration_check(g, poly, buf)
    _emit_json(rec, args.out)
    if not poly.finite:
        raise _Fail("zero-flow boundary is not finite in every column")


# ---------------------------------------------------------------- suite

def cmd_suite_acceptance(args, cfg):
    only = {int(v) for v in args.only.split(",")} if args.only else None
    results = acceptance.run_all(cfg.seed, only)
    print(f"# seed={cfg.seed}")
    for r in results:
        print(r.line())
    if args.out:
        _emit_json({"seed": cfg.seed, "results": [r.to_dict() for r in results]}, args.out)
    if not all(r.passed for r in results):
        raise _Fail("acceptance battery failed")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chemflood", description="Chemical flooding Riemann and admissibility toolkit.")
    sub = p.add_subparsers(dest="group", required=True)

    def group(name, help):
        g = sub.add_parser(name, help=help)
        return g.add_subparsers(dest="command", required=True)

    def cmd(gsub, name, fn, help):
        c = gsub.add_parser(name, help=help)
        c.add_argument("--config", help="JSON run configuration")
        c.add_argument("--out", help="output file (default stdout)")
        c.set_defaults(func=fn)
        return c

    g = group("model", "flux and adsorption models")
    c = cmd(g, "validate", cmd_model_validate, "grid check of the model assumptions")
    c.add_argument("--n", type=int, default=128)
    c = cmd(g, "eval", cmd_model_eval, "evaluate f, a and derivatives at a point")
    c.add_argument("--s", type=float, required=True)
    c.add_argument("--c", type=float, required=True)
    cmd(g, "default-config", cmd_config_default, "print the default configuration")

    g = group("lagrange", "Lagrange-coordinate flux")
    c = cmd(g, "eval", cmd_lagrange_eval, "tabulate F, F_U, F_UU on a U grid")
    c.add_argument("--zeta", type=float, required=True)
    c.add_argument("--U-min", type=float, default=1.0)
    c.add_argument("--U-max", type=float, default=5.0)
    c.add_argument("--n", type=int, default=65)

    g = group("shock", "shock admissibility")
    c = cmd(g, "classify", cmd_shock_classify, "admissibility verdict as JSON")
    for k in ("s-minus", "s-plus", "c-minus", "c-plus", "v"):
        c.add_argument(f"--{k}", type=float)
    c.add_argument("--expect", choices=["admissible", "inadmissible"])
    c.add_argument("--ode", action="store_true", help="also shoot the travelling-wave ODE (c-shocks)")
    c = cmd(g, "portrait", cmd_shock_portrait, "nullclines, critical points and orbits as CSV")
    c.add_argument("--c-minus", type=float, required=True)
    c.add_argument("--c-plus", type=float, required=True)
    c.add_argument("--v", type=float, required=True)
    c.add_argument("--n", type=int, default=201)

    g = group("entropy", "Kruzhkov-type entropy residuals")
    c = cmd(g, "check", cmd_entropy_check, "residual table over k for a JSON shock record")
    c.add_argument("--shock", required=True, help="JSON file with s_minus, s_plus, c_minus, c_plus[, v]")
    c.add_argument("--n", type=int, default=257)
    c.add_argument("--expect", choices=["admissible"])

    g = group("riemann", "Riemann solver")
    c = cmd(g, "solve", cmd_riemann_solve, "wave fan as JSON, optional profile CSV")
    c.add_argument("--left", type=_pair, help="injected state s,c")
    c.add_argument("--right", type=_pair, help="initial state s,c")
    c.add_argument("--coords", choices=["orig", "lagr"])
    c.add_argument("--profile", help="CSV of the self-similar profile")
    c.add_argument("--n", type=int, default=riemann.N_PROFILE)

    g = group("viscous", "vanishing-viscosity solver")
    c = cmd(g, "run", cmd_viscous_run, "integrate and write one CSV per frame")
    c.add_argument("--frames", help="output directory for frame CSVs")

    g = group("verify", "checks on frame directories")
    c = cmd(g, "contours", cmd_verify_contours, "contour residual refinement study")
    c.add_argument("--frames", required=True)
    c.add_argument("--rects", type=int, default=16)
    c = cmd(g, "zeroflow", cmd_verify_zeroflow, "zero-flow boundary and concentration drift")
    c.add_argument("--frames", required=True)
    c.add_argument("--threshold", type=float)

    g = group("suite", "batteries")
    c = cmd(g, "acceptance", cmd_suite_acceptance, "run the acceptance criteria")
    c.add_argument("--only", help="comma-separated criterion numbers")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        _threads()
        cfg = _config(args)
        args.func(args, cfg)
    except _Fail as exc:
        print(f"chemflood: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ChemFloodError, ValueError, OSError) as exc:
        print(f"chemflood: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # keep the exit-code contract for unforeseen failures
        print(f"chemflood: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

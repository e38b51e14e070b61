"""Command-line front end.

Every subcommand writes its artifacts into ``--out`` (default: the config's
``output.directory``, else the current directory) and prints the main
result to stdout. Exit status is 0 on success, 2 for configuration or
usage errors and 3 for numerical errors; errors are also reported as a
JSON object on stderr.
"""

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import analytic, io
from .config import parse_config
from .dynamics import estimate_moments, exact_L2, fit_lyapunov, log_state_histogram
from .ensemble import METRICS, EnsembleSpec, scatter_study
from .errors import ConfigError, MomentStabError
from .noise import NoiseModel, epsilon_squared
from .report import build_report
from .spectral import spectral_summary
from .structure import classify


def _load(args, need_system=True):
    if not args.config:
        raise ConfigError(f"{args.command} needs --config")
    raw = io.load_config(args.config)
    return parse_config(raw, seed=args.seed, need_system=need_system)


def _outdir(args, exp=None) -> str:
    d = args.out or (exp.output_dir if exp is not None and exp.output_dir else ".")
    if exp is not None and not args.out and exp.output_dir and not os.path.isabs(d) and args.config:
        d = os.path.join(os.path.dirname(os.path.abspath(args.config)), d)
    os.makedirs(d, exist_ok=True)
    return d


def _emit(obj, path, config):
    io.write_json(path, obj, config)
    sys.stdout.write(io.dumps(obj, config))


def _series_csv(path, series, config):
    io.write_csv(path, ["t", "p", "estimate", "stderr", "flagged_runs"], series.rows(), config)


def cmd_simulate(args):
    exp = _load(args)
    run = exp.run
    out = _outdir(args, exp)
    series = estimate_moments(exp.system, run.p_list, run.t_max, run.runs, run.seed, workers=args.threads)
    paths = [os.path.join(out, "moments.csv")]
    _series_csv(paths[0], series, exp.raw)
    if run.histogram_t is not None:
        spec = spectral_summary(exp.system.A)
        eps2 = epsilon_squared(exp.system.noise, spec, exp.system.A).eps2
        h = log_state_histogram(exp.system, int(run.histogram_t), run.runs, run.seed, eps2=eps2, workers=args.threads)
        paths.append(io.write_csv(os.path.join(out, "histogram.csv"), ["sample"], ([s] for s in h.samples), exp.raw))
        side = {k: getattr(h, k) for k in ("mean", "sd", "sign_flips", "runs", "t", "predicted_mean", "predicted_sd")}
        paths.append(io.write_json(os.path.join(out, "histogram.json"), side, exp.raw))
    print("\n".join(paths))


def cmd_lyapunov(args):
    exp = _load(args)
    run = exp.run
    out = _outdir(args, exp)
    series = estimate_moments(exp.system, run.p_list, run.t_max, run.runs, run.seed, workers=args.threads)
    _series_csv(os.path.join(out, "moments.csv"), series, exp.raw)
    window = run.fit_window or (run.t_max // 2, run.t_max)
    fits = []
    for p in run.p_list:
        f = fit_lyapunov(series, p, window)
        d = {"p": p, "L_p": f.L_p, "ci": f.ci, "window": list(f.window)}
        if f.caveat:
            d["caveat"] = f.caveat
        fits.append(d)
    _emit({"fits": fits}, os.path.join(out, "lyapunov.json"), exp.raw)


def cmd_iterate(args):
    exp = _load(args)
    r_max = args.r or exp.analysis.r
    sysm = exp.system
    spec = spectral_summary(sysm.A, r_max=max(r_max, 10))
    stats = epsilon_squared(sysm.noise, spec, sysm.A)
    rows = []
    top = r_max if sysm.noise.kind in ("UH", "T") else 1
    for r in range(1, top + 1):
        rows.append({"r": r, "L2": analytic.iteration_L2(spec, stats, sysm.noise, r).value})
    result = {"iteration": rows, "exact": exact_L2(sysm)}
    _emit(result, os.path.join(_outdir(args, exp), "iterate.json"), exp.raw)


def cmd_critical(args):
    exp = _load(args)
    sysm = exp.system
    spec = spectral_summary(sysm.A)
    stats = epsilon_squared(sysm.noise, spec, sysm.A)
    rep = analytic.critical_value(spec, stats, sysm.noise, A=sysm.A, seed=exp.run.seed)
    _emit(rep.to_dict(), os.path.join(_outdir(args, exp), "critical.json"), exp.raw)


def cmd_bounds(args):
    exp = _load(args)
    b = analytic.convergence_bounds(exp.system.A, exp.system.noise, seed=exp.run.seed)
    _emit(b, os.path.join(_outdir(args, exp), "bounds.json"), exp.raw)


def cmd_report(args):
    exp = _load(args)
    rep = build_report(exp, workers=args.threads)
    _emit(rep.to_dict(), os.path.join(_outdir(args, exp), "report.json"), exp.raw)


def cmd_phase(args):
    if args.n is None or args.n < 1:
        raise ConfigError("phase needs --n >= 1")
    grid = args.grid
    table = analytic.stability_diagram(args.n, args.noise, grid)
    cfg = {"command": "phase", "n": args.n, "noise": args.noise, "grid": grid}
    path = io.write_csv(os.path.join(_outdir(args), "phase.csv"), ["lambda", "bc2", "qc"], table.tolist(), cfg)
    print(path)


def cmd_classify(args):
    if args.matrix:
        A = io.read_matrix_csv(args.matrix)
        cfg = {"command": "classify", "matrix": A.tolist()}
    else:
        exp = _load(args)
        A = exp.system.A
        cfg = exp.raw
    cls = classify(A)
    _emit(cls.to_dict(), os.path.join(_outdir(args), "classify.json"), cfg)


def cmd_ensemble(args):
    if args.config:
        raw = io.load_config(args.config)
        ens = dict(raw.get("ensemble", {}))
        seed = args.seed if args.seed is not None else raw.get("run", {}).get("seed")
    else:
        ens = {"n": args.n, "generator": args.generator, "count": args.count}
        seed = args.seed
    if seed is None:
        raise ConfigError("ensemble needs a seed (--seed or run.seed)")
    metrics = ens.pop("metrics", list(METRICS))
    try:
        spec = EnsembleSpec(**ens)
    except TypeError as exc:
        raise ConfigError(f"bad ensemble section: {exc}") from exc
    table = scatter_study(spec, metrics, seed=int(seed))
    cfg = {"command": "ensemble", "ensemble": spec.to_dict(), "metrics": metrics, "seed": int(seed)}
    path = io.write_csv(os.path.join(_outdir(args), "ensemble.csv"), table.columns, table.rows, cfg)
    print(path)
    print(f"acceptance_rate: {table.acceptance_rate!r}")


def cmd_scalar(args):
    if args.a is None or args.b2 is None:
        raise ConfigError("scalar needs --a and --b2")
    rows = []
    summary = []
    for p in args.p:
        mom = analytic.noise_ratio_moments(args.a, args.b2, p, args.dist)
        exact = analytic.scalar_moment_exact(args.a, mom, p, np.arange(args.t_max + 1))
        rows.extend([t, p, float(m)] for t, m in enumerate(exact))
        approx = analytic.scalar_Lp_approx(args.a, args.b2, p)
        summary.append({"p": p, "L_exact": analytic.scalar_Lp_exact(args.a, mom, p).value, "L_approx": approx.value,
                        "validity": approx.validity})
    cfg = {"command": "scalar", "a": args.a, "b2": args.b2, "p": args.p, "t_max": args.t_max, "dist": args.dist}
    out = _outdir(args)
    io.write_csv(os.path.join(out, "scalar_moments.csv"), ["t", "p", "moment"], rows, cfg)
    _emit({"exponents": summary}, os.path.join(out, "scalar.json"), cfg)


COMMANDS = {
    "simulate": cmd_simulate,
    "lyapunov": cmd_lyapunov,
    "iterate": cmd_iterate,
    "critical": cmd_critical,
    "phase": cmd_phase,
    "bounds": cmd_bounds,
    "classify": cmd_classify,
    "ensemble": cmd_ensemble,
    "scalar": cmd_scalar,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, default=None, help="worker threads (results do not depend on it)")
    parser = argparse.ArgumentParser(prog="momentstab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "lyapunov", "critical", "bounds", "report"):
        sub.add_parser(name, parents=[common])
    it = sub.add_parser("iterate", parents=[common])
    it.add_argument("--r", type=int, help="largest iteration order")
    ph = sub.add_parser("phase", parents=[common])
    ph.add_argument("--n", type=int, required=True)
    ph.add_argument("--noise", choices=("UH", "T"), default="UH")
    ph.add_argument("--grid", type=int, default=99)
    cl = sub.add_parser("classify", parents=[common])
    cl.add_argument("--matrix", help="matrix CSV")
    en = sub.add_parser("ensemble", parents=[common])
    en.add_argument("--n", type=int, default=5)
    en.add_argument("--generator", default="normal")
    en.add_argument("--count", type=int, default=1000)
    sc = sub.add_parser("scalar", parents=[common])
    sc.add_argument("--a", type=float)
    sc.add_argument("--b2", type=float)
    sc.add_argument("--p", type=int, nargs="+", default=[1, 2])
    sc.add_argument("--t-max", type=int, default=50)
    sc.add_argument("--dist", choices=("normal", "uniform"), default="normal")
    return parser


def _fail(code: int, exc: Exception) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if getattr(exc, "residual", None) is not None:
        err["residual"] = exc.residual
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            COMMANDS[args.command](args)
    except ConfigError as exc:
        return _fail(2, exc)
    except MomentStabError as exc:
        return _fail(3, exc)
    except (ValueError, OSError) as exc:
        return _fail(2, exc)
    return 0


def run_command(argv) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())

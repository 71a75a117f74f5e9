"""Experiment runner: config parsing, run orchestration, trace emission.

Config files are flat sectioned key=value text (INI style, `#` comments).
All randomness flows from seeds named in the config. Trace files are
written to a temporary name and renamed, so a failed run leaves no
partial trace behind.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
import tempfile

import numpy as np

from . import algorithm, analysis, graph, metrics, oracle, problems, theory
from .errors import ConfigError, SonataError
from .textio import format_float

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 2


def _parse_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            cp.read_file(fh, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cp


def _get(cp, section, key, cast, default=None, required=False):
    if not cp.has_option(section, key):
        if required:
            raise ConfigError(f"missing [{section}] {key}")
        return default
    raw = cp.get(section, key)
    try:
        if cast is bool:
            return cp.getboolean(section, key)
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def build_problem(cp) -> problems.Problem:
    name = _get(cp, "problem", "name", str, required=True)
    m = _get(cp, "problem", "m", int, required=True)
    seed = _get(cp, "problem", "seed", int, required=True)
    if name == "lasso":
        return problems.make_lasso(
            m=m, n=_get(cp, "problem", "n", int, required=True),
            d=_get(cp, "problem", "d", int, required=True),
            sparsity=_get(cp, "problem", "sparsity", float, 0.4),
            noise_sd=_get(cp, "problem", "noise_sd", float, required=True),
            lam=_get(cp, "problem", "lambda", float, required=True), seed=seed)
    if name == "scad":
        return problems.make_scad(
            m=m, n=_get(cp, "problem", "n", int, required=True),
            d=_get(cp, "problem", "d", int, required=True),
            sparsity=_get(cp, "problem", "sparsity", float, 0.2),
            noise_sd=_get(cp, "problem", "noise_sd", float, required=True),
            lam=_get(cp, "problem", "lambda", float, required=True),
            a=_get(cp, "problem", "a", float, 3.7), seed=seed,
            scad_denominator=_get(cp, "problem", "scad_denominator", str,
                                  "continuous"))
    if name == "pca":
        return problems.make_pca(
            m=m, n=_get(cp, "problem", "n", int, required=True),
            d=_get(cp, "problem", "d", int, required=True), seed=seed)
    if name == "logistic":
        return problems.make_logistic(
            m=m, n=_get(cp, "problem", "n", int, required=True),
            d=_get(cp, "problem", "d", int, required=True), seed=seed)
    if name == "phase_retrieval":
        return problems.make_phase_retrieval(
            m=m, n=_get(cp, "problem", "n", int, required=True),
            d=_get(cp, "problem", "d", int, required=True),
            noise_sd=_get(cp, "problem", "noise_sd", float, 0.0), seed=seed)
    if name == "synthetic_kl":
        return problems.make_synthetic_kl(
            theta=_get(cp, "problem", "theta", float, required=True),
            m=m, seed=seed)
    raise ConfigError(f"[problem] name = {name!r} is not a known problem")


def build_gossip(cp, m: int):
    gtype = _get(cp, "graph", "type", str, "erdos_renyi")
    if gtype == "erdos_renyi":
        g = graph.erdos_renyi(m, _get(cp, "graph", "p", float, required=True),
                              _get(cp, "graph", "seed", int, required=True))
    elif gtype == "complete":
        g = graph.complete_graph(m)
    elif gtype == "path":
        g = graph.path_graph(m)
    else:
        raise ConfigError(f"[graph] type = {gtype!r} is not supported")
    rule = _get(cp, "gossip", "rule", str, "metropolis_hastings")
    if rule != "metropolis_hastings":
        raise ConfigError(f"[gossip] rule = {rule!r} is not supported")
    W = graph.metropolis_hastings(g)
    rho_target = _get(cp, "gossip", "rho_target", float)
    K = 1
    if rho_target is not None:
        W, K = graph.boost_mixing(W, rho_target)
    return W, K


def build_run_config(cp, problem, W) -> algorithm.RunConfig:
    mode = _get(cp, "algorithm", "mode", str, "tuned")
    common = dict(
        max_iters=_get(cp, "algorithm", "max_iters", int, 10_000),
        stop_tol=_get(cp, "algorithm", "stop_tol", float, 1e-13),
        seed=_get(cp, "algorithm", "seed", int, 0),
    )
    if mode == "tuned":
        safety = _get(cp, "algorithm", "safety", float, algorithm.DEFAULT_SAFETY)
        return algorithm.tune(problem, W, safety=safety, **common)
    if mode == "explicit":
        alpha = _get(cp, "algorithm", "alpha", float, required=True)
        # merit weights default to the tuned values so diagnostics stay
        # meaningful even with a hand-picked step size
        xi = _get(cp, "algorithm", "xi", float, problem.L)
        gamma_default = (1.0 + algorithm.GAMMA_MARGIN) \
            * (1.0 / (2.0 * xi) + problem.L * W.w_mx / problem.L_mx**2) \
            / max(1.0 - 5.0 * W.rho**2, 1e-12)
        gamma = _get(cp, "algorithm", "gamma", float, gamma_default)
        return algorithm.RunConfig(alpha=alpha, gamma=gamma, xi=xi,
                                   stop_on_dnorm=True, **common)
    raise ConfigError(f"[algorithm] mode = {mode!r} must be tuned or explicit")


def _reference(cp, problem, X0):
    if problem.bundle is not None and problem.bundle.kind == "synthetic_kl":
        # the synthetic family has a unique minimizer at the origin; the
        # centralized solver would only approach it sublinearly
        return oracle.ReferenceSolution(x_star=np.zeros(problem.d),
                                        u_star=0.0, residual=0.0, iterations=0)
    tol = _get(cp, "oracle", "tol", float, 1e-12)
    max_iters = _get(cp, "oracle", "max_iters", int, 500_000)
    x0 = X0.mean(axis=0)
    return oracle.centralized_prox_grad(problem, tol=tol, max_iters=max_iters,
                                        x0=x0)


def _atomic_write(path, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _summary_lines(trace, ref, fit, consts, K, reports=None):
    last = trace.records[-1]
    lines = {
        "iterations": last.nu,
        "final_dist": "" if last.dist_ref is None else format_float(last.dist_ref),
        "final_T": format_float(last.T) if math.isfinite(last.T) else "nan",
        "final_dnorm": format_float(last.dnorm),
        "final_lyapunov": format_float(last.lyap),
        "u_star": format_float(ref.u_star) if ref is not None else "",
        "oracle_residual": format_float(ref.residual) if ref is not None else "",
        "gossip_rounds": K,
        "fit_model": fit.model if fit is not None else "",
        "fit_value": format_float(fit.slope_or_exponent) if fit is not None else "",
        "fit_r_squared": format_float(fit.r_squared) if fit is not None else "",
    }
    for name in ("L", "L_mx", "w_mx", "rho", "alpha", "gamma", "xi",
                 "c1t", "c2t", "c3t", "c4t", "omega", "omega_prime",
                 "tau", "tau_prime"):
        v = getattr(consts, name)
        lines[name] = "" if v is None else format_float(v)
    if reports is not None:
        for rep in reports:
            lines[f"check_{rep.name}"] = "pass" if rep.passed else "FAIL"
    return "".join(f"{k} = {v}\n" for k, v in lines.items())


def _execute(config_path, out_dir, quiet, do_verify):
    cp = _parse_config(config_path)
    problem = build_problem(cp)
    W, K = build_gossip(cp, problem.m)
    cfg = build_run_config(cp, problem, W)

    rng = np.random.default_rng(cfg.seed)
    X0 = algorithm.sample_in_unit_ball(rng, problem.m, problem.d)
    ref = _reference(cp, problem, X0)

    trace = algorithm.run(problem, W, cfg, ref=ref.x_star, X0=X0,
                          verify=do_verify)
    reports = None
    if do_verify:
        reports = metrics.standard_checks(trace, problem, trace.constants)

    fit = None
    try:
        fit = analysis.select_model(trace)
    except (SonataError, ValueError):
        pass

    os.makedirs(out_dir, exist_ok=True)
    trace_name = _get(cp, "output", "trace", str, "trace.csv")
    summary_name = _get(cp, "output", "summary", str, "summary.txt")
    trace_path = os.path.join(out_dir, trace_name)
    lines = [",".join(metrics.CSV_COLUMNS)] + \
        [rec.csv_row() for rec in trace.records]
    _atomic_write(trace_path, "\n".join(lines) + "\n")
    _atomic_write(os.path.join(out_dir, summary_name),
                  _summary_lines(trace, ref, fit, trace.constants, K, reports))

    if not quiet:
        last = trace.records[-1]
        print(f"{problem.name}: {last.nu} iterations, "
              f"final_dist={last.dist_ref}, trace -> {trace_path}")
        if reports is not None:
            for rep in reports:
                status = "pass" if rep.passed else \
                    f"FAIL ({len(rep.violated_iters)} iters, " \
                    f"max violation {rep.max_violation:.3g})"
                print(f"  {rep.name}: {status}")
    if reports is not None and any(not rep.passed for rep in reports):
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_run(args) -> int:
    verify = args.verify
    return _execute(args.config, args.out, args.quiet, verify)


def cmd_verify(args) -> int:
    return _execute(args.config, args.out, args.quiet, do_verify=True)


def cmd_constants(args) -> int:
    consts = theory.constants(args.L, args.Lmx, args.wmx, args.rho,
                              args.alpha, args.gamma, args.xi,
                              kappa=args.kappa, theta=args.theta,
                              d=args.d, sanitize=args.sanitize, strict=False)
    fields = ("L", "L_mx", "w_mx", "rho", "alpha", "gamma", "xi",
              "c1t", "c2t", "c3t", "c4t", "c5t", "c6t", "c7t",
              "omega", "omega_prime", "tau", "tau_prime",
              "rho_condition_ok", "corollary_rho_ok")
    rows = []
    for name in fields:
        v = getattr(consts, name)
        if isinstance(v, bool):
            rows.append((name, str(v).lower()))
        elif v is None:
            rows.append((name, ""))
        else:
            rows.append((name, format_float(v)))
    width = max(len(n) for n, _ in rows)
    for name, val in rows:
        print(f"{name:<{width}}  {val}")
    print(",".join(n for n, _ in rows))
    print(",".join(v for _, v in rows))
    return EXIT_OK


def _sweep_one(task):
    config_path, section, key, value, out_dir, quiet, verify = task
    cp = _parse_config(config_path)
    if not cp.has_section(section):
        cp.add_section(section)
    cp.set(section, key, value)
    fd, tmp = tempfile.mkstemp(suffix=".cfg", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            cp.write(fh)
        return _execute(tmp, out_dir, quiet, verify)
    finally:
        os.unlink(tmp)


def cmd_sweep(args) -> int:
    if "." not in args.parameter:
        raise ConfigError("parameter must be section.key, e.g. algorithm.alpha")
    section, key = args.parameter.split(".", 1)
    values = [v for v in args.values.split(",") if v]
    tasks = [
        (args.config, section, key, v,
         os.path.join(args.out, f"{key}_{v}"), args.quiet, args.verify)
        for v in values
    ]
    if args.parallel > 1:
        import multiprocessing
        with multiprocessing.Pool(args.parallel) as pool:
            codes = pool.map(_sweep_one, tasks)
    else:
        codes = [_sweep_one(t) for t in tasks]
    return max(codes) if codes else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sonata",
        description="Decentralized gradient-tracking experiments and "
                    "convergence verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=".")
    p_run.add_argument("--quiet", action="store_true")
    p_run.add_argument("--verify", action="store_true",
                       help="also run the inequality suite")
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify",
                           help="run and check every descent inequality")
    p_ver.add_argument("--config", required=True)
    p_ver.add_argument("--out", default=".")
    p_ver.add_argument("--quiet", action="store_true")
    p_ver.set_defaults(func=cmd_verify)

    p_con = sub.add_parser("constants", help="evaluate the analysis constants")
    p_con.add_argument("--L", type=float, required=True)
    p_con.add_argument("--Lmx", type=float, required=True)
    p_con.add_argument("--wmx", type=float, required=True)
    p_con.add_argument("--rho", type=float, required=True)
    p_con.add_argument("--alpha", type=float, required=True)
    p_con.add_argument("--gamma", type=float, required=True)
    p_con.add_argument("--xi", type=float, required=True)
    p_con.add_argument("--kappa", type=float, default=None)
    p_con.add_argument("--theta", type=float, default=None)
    p_con.add_argument("--d", type=int, default=1)
    p_con.add_argument("--sanitize", action="store_true")
    p_con.set_defaults(func=cmd_constants)

    p_sw = sub.add_parser("sweep", help="repeat a run over parameter values")
    p_sw.add_argument("--config", required=True)
    p_sw.add_argument("--parameter", required=True,
                      help="section.key to override, e.g. algorithm.alpha")
    p_sw.add_argument("--values", required=True,
                      help="comma-separated override values")
    p_sw.add_argument("--out", default="sweep")
    p_sw.add_argument("--quiet", action="store_true")
    p_sw.add_argument("--verify", action="store_true")
    p_sw.add_argument("--parallel", type=int, default=1)
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SonataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: simulate, fit, evaluate, and report.

Subcommands
    dist          tabulate pdf / ccdf / Lorenz curves as CSV
    simulate      run the exchange model, write histogram CSV + manifest
    fit           fit histogram CSV or raw samples, write FitResult JSON
    inequality    evaluate gini/theil/mld/GE(theta) for given parameters
    reproduce-fig write the data behind the standard figure recipes

Exit codes: 0 success, 2 usage/config error, 3 numeric or existence error,
4 fit non-convergence.  The default output directory is $KAPPAWEALTH_OUT
(falling back to the working directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .distribution import KggParams, cdf, pdf, tail_params
from .errors import ConvergenceError, DomainError, ExistenceError, FittingError
from .fitting import fit_histogram, fit_mle, ks_statistic
from .inequality import gen_entropy, gini, lorenz, lorenz_dominates, mld, theil
from .simulator import SimConfig, WealthHistogram, log_binned_histogram, run

_FMT = "%.15g"


def _out_dir(args) -> str:
    d = args.out_dir or os.environ.get("KAPPAWEALTH_OUT") or "."
    os.makedirs(d, exist_ok=True)
    return d


def _params_from_args(args) -> KggParams:
    return KggParams(args.alpha, args.nu, args.beta, args.kappa)


def _add_param_flags(p) -> None:
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)


def _parse_log_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
        if not (0.0 < lo < hi and n >= 2):
            raise ValueError
    except ValueError:
        raise DomainError(f"bad --log-grid {spec!r}; expected lo:hi:n with 0<lo<hi")
    return np.geomspace(lo, hi, n)


def _write_csv(path, header: str, columns) -> None:
    rows = np.column_stack(columns)
    out = sys.stdout if path == "-" else open(path, "w")
    try:
        out.write(header + "\n")
        for row in rows:
            out.write(",".join(_FMT % v for v in row) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_dist(args) -> int:
    p = _params_from_args(args)
    dest = args.out or "-"
    if args.what == "lorenz":
        u = np.linspace(0.0, 1.0, args.points)
        _write_csv(dest, "u,L", (u, lorenz(u, p).L))
        return 0
    x = _parse_log_grid(args.log_grid)
    if args.what == "eval":
        _write_csv(dest, "x,pdf", (x, pdf(x, p)))
    else:
        _write_csv(dest, "x,ccdf", (x, 1.0 - cdf(x, p)))
    return 0


def cmd_simulate(args) -> int:
    try:
        with open(args.config) as fh:
            cfg = SimConfig.from_json(fh.read())
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: cannot load config {args.config}: {exc}", file=sys.stderr)
        return 2
    if args.homogeneous_lambda is not None:
        cfg.lambda_mode = "homogeneous"
        cfg.lambda_value = args.homogeneous_lambda
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.n_threads = args.threads

    res = run(cfg)
    out = _out_dir(args)
    hist_path = os.path.join(out, args.tag + "_hist.csv")
    res.histogram.to_csv(hist_path)
    outputs = {"histogram": hist_path}
    if args.dump_final:
        dump_path = os.path.join(out, args.tag + "_final.csv")
        with open(dump_path, "w") as fh:
            fh.write("realization,agent,wealth,lambda\n")
            for r in range(res.final_wealth.shape[0]):
                for a in range(res.final_wealth.shape[1]):
                    fh.write(f"{r},{a},{_FMT % res.final_wealth[r, a]},"
                             f"{_FMT % res.final_lambdas[r, a]}\n")
        outputs["final_states"] = dump_path

    manifest = {
        "config": json.loads(cfg.to_json()),
        "seed": cfg.seed,
        "outputs": outputs,
        "version": __version__,
        "wall_time_s": res.wall_time_s,
    }
    man_path = os.path.join(out, args.tag + "_manifest.json")
    with open(man_path, "w") as fh:
        json.dump(manifest, fh, indent=2)

    drift = np.max(np.abs(res.totals_final - res.totals_initial))
    exact = bool(np.all(res.totals_final == res.totals_initial))
    print(f"conservation: max|dM|={drift:.3g} exact={exact}")
    print(f"wall time: {res.wall_time_s:.1f}s")
    print(f"wrote {hist_path} and {man_path}")
    return 0


def _load_fit_input(path: str):
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("#") and "x_min=" in first:
        return WealthHistogram.from_csv(path), None
    return None, np.loadtxt(path, ndmin=1)


def _build_mask(h: WealthHistogram, args) -> np.ndarray:
    mask = h.counts >= args.min_count
    if args.mask_xmin is not None:
        mask &= h.bin_centers >= args.mask_xmin
    if args.mask_xmax is not None:
        mask &= h.bin_centers <= args.mask_xmax
    return mask


def _fit_report(fr, p: KggParams) -> str:
    lines = [
        f"method: {fr.method}",
        f"converged: {fr.converged}",
        f"objective: {fr.objective:.6g}",
        f"n_points_used: {fr.n_points_used}",
        f"alpha={p.alpha:.6g} nu={p.nu:.6g} beta={p.beta:.6g} kappa={p.kappa:.6g}",
        "tail: none (kappa ~ 0)" if fr.tail is None
        else f"tail: x0={fr.tail.x0:.6g} a={fr.tail.a:.6g}",
    ]
    try:
        lines.append(f"gini={gini(p):.6g} theil={theil(p):.6g} mld={mld(p):.6g}")
    except ExistenceError as exc:
        lines.append(f"inequality: not defined ({exc})")
    if not np.isnan(fr.ks_stat):
        lines.append(f"ks_stat={fr.ks_stat:.6g}")
    return "\n".join(lines)


def cmd_fit(args) -> int:
    hist, samples = _load_fit_input(args.data)
    init = None
    if args.init is not None:
        a, n, b, k = (float(v) for v in args.init.split(","))
        init = KggParams(a, n, b, k)

    if args.method == "histogram":
        if hist is None:
            hist = log_binned_histogram(samples, args.bins)
        fr = fit_histogram(hist, mask=_build_mask(hist, args), init=init,
                           seed=args.seed)
    else:
        if samples is None:
            print("error: --method mle needs a raw sample file, not a "
                  "histogram CSV", file=sys.stderr)
            return 2
        fr = fit_mle(samples, init=init, seed=args.seed)

    if samples is not None and np.isnan(fr.ks_stat):
        pos = samples[samples > 0]
        fr.ks_stat = ks_statistic(pos, fr.params)

    print(_fit_report(fr, fr.params))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(fr.to_json() + "\n")
        print(f"wrote {args.out}")
    return 0 if fr.converged else 4


def cmd_inequality(args) -> int:
    p = _params_from_args(args)
    rows = [("gini", gini(p)), ("theil", theil(p)), ("mld", mld(p))]
    for t in args.theta:
        if t == 0.0:
            rows.append(("GE(0)=mld", mld(p)))
        elif t == 1.0:
            rows.append(("GE(1)=theil", theil(p)))
        else:
            rows.append((f"GE({t:g})", gen_entropy(t, p)))
    for name, val in rows:
        print(f"{name}\t{_FMT % val}")
    return 0


# figure recipes: parameter sweeps from the standard captions
_FIG_SWEEPS = {
    1: ("alpha", (1.5, 2.0, 3.0), dict(nu=1.3, beta=1.2, kappa=0.75)),
    2: ("nu", (1.0, 1.3, 1.6), dict(alpha=2.0, beta=1.2, kappa=0.75)),
    3: ("beta", (0.8, 1.2, 2.0), dict(alpha=2.0, nu=1.3, kappa=0.75)),
    4: ("kappa", (0.30, 0.55, 0.80), dict(alpha=2.0, beta=1.2, nu=1.8)),
}


def cmd_reproduce_fig(args) -> int:
    out = _out_dir(args)
    n = args.number
    if n in _FIG_SWEEPS:
        name, values, fixed = _FIG_SWEEPS[n]
        x = np.geomspace(1e-2, 1e3, 400)
        for v in values:
            p = KggParams(**{name: v, **fixed})
            path = os.path.join(out, f"fig{n}_{name}{v:g}.csv")
            _write_csv(path, "x,pdf,ccdf", (x, pdf(x, p), 1.0 - cdf(x, p)))
            print(f"wrote {path}")
        return 0

    if n == 5:
        px = KggParams(2.0, 1.2, 1.0, 0.45)
        py = KggParams(1.5, 1.0, 1.0, 0.60)
        pz = KggParams(1.5, 1.2, 1.0, 0.50)
        u = np.linspace(0.0, 1.0, 401)
        path = os.path.join(out, "fig5_lorenz.csv")
        _write_csv(path, "u,L_x,L_y,L_z",
                   (u, lorenz(u, px).L, lorenz(u, py).L, lorenz(u, pz).L))
        print(f"wrote {path}")
        print(f"X vs Y: {lorenz_dominates(px, py)}")
        print(f"X vs Z: {lorenz_dominates(px, pz)} (curves cross)")
        return 0

    # figure 6: desk-scale heterogeneous run plus fit
    cfg = SimConfig(n_agents=1000, n_exchanges=10_000_000,
                    n_realizations=args.realizations, lambda_mode="uniform",
                    seed=args.seed or 0,
                    n_threads=args.threads or (os.cpu_count() or 1))
    res = run(cfg)
    hist_path = os.path.join(out, "fig6_hist.csv")
    res.histogram.to_csv(hist_path)
    fr = fit_histogram(res.histogram, mask=res.histogram.counts >= 10)
    fit_path = os.path.join(out, "fig6_fit.json")
    with open(fit_path, "w") as fh:
        fh.write(fr.to_json() + "\n")
    print(f"wrote {hist_path} and {fit_path}")
    print(_fit_report(fr, fr.params))
    return 0 if fr.converged else 4


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kappawealth",
        description="deformed generalized-gamma wealth modeling toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", help="tabulate pdf/ccdf/Lorenz curves")
    d.add_argument("what", choices=("eval", "ccdf", "lorenz"))
    _add_param_flags(d)
    d.add_argument("--log-grid", default="1e-2:1e3:200",
                   help="x grid as lo:hi:n (log-spaced)")
    d.add_argument("--points", type=int, default=201,
                   help="number of u points for lorenz")
    d.add_argument("--out", help="output CSV path (default stdout)")
    d.set_defaults(func=cmd_dist)

    s = sub.add_parser("simulate", help="run the kinetic exchange model")
    s.add_argument("config", help="SimConfig JSON file")
    s.add_argument("--lambda", dest="homogeneous_lambda", type=float,
                   help="override: homogeneous saving propensity")
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--tag", default="sim", help="output filename prefix")
    s.add_argument("--dump-final", action="store_true",
                   help="also write final agent states as CSV")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="fit a histogram CSV or raw sample file")
    f.add_argument("data")
    f.add_argument("--method", choices=("histogram", "mle"), default="histogram")
    f.add_argument("--mask-xmin", type=float)
    f.add_argument("--mask-xmax", type=float,
                   help="exclude bins above this (finite-size cutoff region)")
    f.add_argument("--min-count", type=int, default=1,
                   help="keep bins with at least this many counts")
    f.add_argument("--bins", type=int, default=60,
                   help="bin count when histogramming raw samples")
    f.add_argument("--init", help="starting point as alpha,nu,beta,kappa")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", help="write FitResult JSON here")
    f.set_defaults(func=cmd_fit)

    q = sub.add_parser("inequality", help="evaluate inequality measures")
    _add_param_flags(q)
    q.add_argument("--theta", type=float, nargs="*", default=[],
                   help="extra GE orders; 0 and 1 route to mld/theil")
    q.set_defaults(func=cmd_inequality)

    r = sub.add_parser("reproduce-fig", help="write standard figure data")
    r.add_argument("number", type=int, choices=range(1, 7))
    r.add_argument("--out-dir")
    r.add_argument("--seed", type=int)
    r.add_argument("--threads", type=int)
    r.add_argument("--realizations", type=int, default=25,
                   help="ensemble size for figure 6")
    r.set_defaults(func=cmd_reproduce_fig)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ExistenceError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FittingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

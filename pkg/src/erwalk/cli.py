"""Command-line front end.

One subcommand per workflow (fixed points, critical parameters, exact
distributions, Monte Carlo, trajectories, CGF, Legendre transform, phase
scans, decay exponents, current conservation).  Every run prints a short
human-readable summary; with ``--out`` it also writes the data file (CSV by
default), a ``<out>.meta.json`` sidecar echoing the full configuration, and
optionally a matplotlib plot script referencing the CSV by relative path
(the toolkit itself never renders images).

Exit codes: 0 success, 2 invalid arguments, 3 numerical or I/O failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, cgf, exact, io, paths, phase, sampling, urn
from .errors import (
    DomainBreachError,
    ErwalkError,
    NonConvergenceError,
    ResourceLimitError,
)

__all__ = ["build_parser", "run", "main"]

_ENV_THREADS = "ERWALK_THREADS"


def _default_threads() -> int:
    env = os.environ.get(_ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_urn_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--urn", choices=["majority", "linear", "kgw", "step"],
                   default="majority", help="urn-function variant (default majority)")
    p.add_argument("--k", type=int, default=3, help="number of drawn steps, odd (majority)")
    p.add_argument("--p", type=float, default=0.75, help="memory parameter (majority/step)")
    p.add_argument("--a", type=float, default=0.25, help="intercept (linear)")
    p.add_argument("--b", type=float, default=0.5, help="slope (linear)")
    p.add_argument("--J", type=float, default=1.0, help="coupling (kgw)")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--init", type=int, nargs=2, default=[2, 1], metavar=("TOTAL", "POS"),
                   help="initial condition: TOTAL frozen steps, POS positive (default 2 1)")
    p.add_argument("--out", type=Path, default=None, help="output data file")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--emit-plot-script", action="store_true",
                   help="also write <out>.plot.py (matplotlib, reads the CSV)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"thread cap (default: ${_ENV_THREADS} or machine parallelism; "
                        "results do not depend on it)")


def _spec_from_args(args) -> urn.UrnFunction:
    if args.urn == "majority":
        return urn.MajorityMemory(args.k, args.p)
    if args.urn == "linear":
        return urn.LinearUrn(args.a, args.b)
    if args.urn == "kgw":
        return urn.KgwUrn(args.J)
    return urn.StepLimitUrn(args.p)


def _spec_echo(spec: urn.UrnFunction) -> dict:
    if isinstance(spec, urn.MajorityMemory):
        return {"kind": "majority", "k": spec.k, "p": spec.p}
    if isinstance(spec, urn.LinearUrn):
        return {"kind": "linear", "a": spec.a, "b": spec.b}
    if isinstance(spec, urn.KgwUrn):
        return {"kind": "kgw", "J": spec.J}
    return {"kind": "step", "p": spec.p}


_PLOT_TEMPLATES = {
    "exact-dist": """\
import csv
import matplotlib.pyplot as plt

ys, lps = [], []
with open({csv!r}) as fh:
    for row in csv.DictReader(fh):
        ys.append(float(row["y"]))
        lps.append(float(row["log_prob"]))
plt.plot(ys, lps, lw=0.8)
plt.xlabel("y")
plt.ylabel("log probability")
plt.title({title!r})
plt.tight_layout()
plt.savefig({png!r}, dpi=150)
""",
    "entropy": """\
import csv
import matplotlib.pyplot as plt

ys, phis = [], []
with open({csv!r}) as fh:
    for row in csv.DictReader(fh):
        ys.append(float(row["y"]))
        phis.append(float(row["phi"]))
plt.plot(ys, phis, lw=0.9)
plt.xlabel("y")
plt.ylabel("phi")
plt.title({title!r})
plt.tight_layout()
plt.savefig({png!r}, dpi=150)
""",
    "cgf": """\
import csv
import matplotlib.pyplot as plt

ls, zs = [], []
with open({csv!r}) as fh:
    for row in csv.DictReader(fh):
        ls.append(float(row["lambda"]))
        zs.append(float(row["zeta"]))
plt.semilogx(ls, zs)
plt.xlabel("lambda")
plt.ylabel("zeta")
plt.title({title!r})
plt.tight_layout()
plt.savefig({png!r}, dpi=150)
""",
    "trajectory": """\
import csv
import matplotlib.pyplot as plt

ts, ps = [], []
with open({csv!r}) as fh:
    for row in csv.DictReader(fh):
        ts.append(float(row["tau"]))
        ps.append(float(row["psi"]))
plt.semilogx(ts, ps)
plt.xlabel("tau")
plt.ylabel("psi")
plt.title({title!r})
plt.tight_layout()
plt.savefig({png!r}, dpi=150)
""",
    "phase-scan": """\
import csv
from collections import defaultdict
import matplotlib.pyplot as plt

order = ["negative_entropy", "zero_entropy_plateau", "critical_line",
         "attractor", "unstable_line"]
pts = defaultdict(list)
with open({csv!r}) as fh:
    for row in csv.DictReader(fh):
        pts[row["region"]].append((float(row["p"]), float(row["x"])))
for name in order:
    if pts[name]:
        p, x = zip(*pts[name])
        plt.scatter(p, x, s=2, label=name)
plt.xlabel("p")
plt.ylabel("x")
plt.legend(markerscale=4, fontsize=7)
plt.title({title!r})
plt.tight_layout()
plt.savefig({png!r}, dpi=150)
""",
    "mc": """\
import csv
import matplotlib.pyplot as plt

ys = []
with open({csv!r}) as fh:
    for row in csv.DictReader(fh):
        ys.append(float(row["y_final"]))
plt.hist(ys, bins=80)
plt.xlabel("final share")
plt.ylabel("samples")
plt.title({title!r})
plt.tight_layout()
plt.savefig({png!r}, dpi=150)
""",
}


def _emit(args, command, header, rows, summary_json, extra_meta=None) -> None:
    """Write data file, sidecar and (optionally) the plot script."""
    if args.out is None:
        return
    meta = {
        "command": command,
        "tool": "erwalk",
        "version": __version__,
        "argv": list(args._argv),
        "seed": getattr(args, "seed", None),
        "init": list(getattr(args, "init", []) or []),
        "elapsed_seconds": time.time() - args._t0,
    }
    if hasattr(args, "urn"):
        meta["spec"] = _spec_echo(_spec_from_args(args))
    meta.update(extra_meta or {})
    if args.format == "csv":
        io.write_csv(args.out, header, rows)
    else:
        data = [dict(zip(header, row)) for row in rows]
        io.write_json(args.out, meta, {"rows": data, "summary": summary_json})
    io.write_sidecar(args.out, meta)
    if args.emit_plot_script and args.format == "csv":
        template = _PLOT_TEMPLATES.get(command)
        if template is not None:
            title = f"{command} ({', '.join(f'{k}={v}' for k, v in meta.get('spec', {}).items())})"
            script = template.format(csv=args.out.name, title=title,
                                     png=args.out.stem + ".png")
            Path(str(args.out) + ".plot.py").write_text(script, encoding="utf-8")


# ---------------------------------------------------------------- commands


def _cmd_fixed_points(args) -> int:
    spec = _spec_from_args(args)
    fps = urn.fixed_points(spec)
    header = ["y", "x", "derivative", "crossing"]
    rows = [[f.location, 2 * f.location - 1, f.derivative, f.crossing.value] for f in fps]
    for f in fps:
        print(f"y = {f.location:.12f}  x = {2 * f.location - 1:+.12f}  "
              f"slope = {f.derivative:.12g}  {f.crossing.value}-crossing")
    _emit(args, "fixed-points", header, rows, {"count": len(fps)})
    return 0


def _cmd_critical(args) -> int:
    k = math.inf if args.k <= 0 else args.k
    cp = urn.critical_params(k)
    fmt = lambda v: "none" if v is None else f"{v:.12f}"
    print(f"p_star = {fmt(cp.p_star)}")
    print(f"p_c = {fmt(cp.p_c)}")
    print(f"p_double_star = {fmt(cp.p_double_star)}")
    header = ["k", "p_star", "p_c", "p_double_star"]
    rows = [[args.k, *(v if v is not None else math.nan
                       for v in (cp.p_star, cp.p_c, cp.p_double_star))]]
    _emit(args, "critical", header, rows,
          {"p_star": cp.p_star, "p_c": cp.p_c, "p_double_star": cp.p_double_star})
    return 0


def _cmd_exact_dist(args) -> int:
    spec = _spec_from_args(args)
    table = exact.evolve(spec, exact.WalkInit(*args.init), args.n)
    header = ["N", "n", "y", "log_prob"]
    rows = [[table.N, int(n), n / table.N, lp]
            for n, lp in zip(table.counts, table.reachable_log_prob)]
    lse = float(np.max(table.reachable_log_prob))
    print(f"table at N = {table.N}: {table.counts.size} reachable atoms, "
          f"max log-probability {lse:.6f}")
    _emit(args, "exact-dist", header, rows, {"N": table.N})
    return 0


def _cmd_entropy(args) -> int:
    spec = _spec_from_args(args)
    table = exact.evolve(spec, exact.WalkInit(*args.init), args.n)
    curve = exact.entropy_profile(table)
    header = ["y", "phi", "method"]
    rows = [[y, ph, curve.method] for y, ph in zip(curve.y, curve.phi)]
    print(f"finite-N entropy profile at N = {args.n}: "
          f"min phi = {curve.phi.min():.6f}, max phi = {curve.phi.max():.6f}")
    _emit(args, "entropy", header, rows, {"N": args.n})
    return 0


def _cmd_mc(args) -> int:
    init = exact.WalkInit(*args.init)
    if args.mechanism == "direct":
        res = sampling.ensemble_direct(args.k, args.p, init, args.n, args.samples,
                                       args.seed, level=args.level, threads=args.threads)
    else:
        spec = _spec_from_args(args)
        res = sampling.ensemble(spec, init, args.n, args.samples, args.seed,
                                level=args.level, threads=args.threads)
    x = res.x_final
    print(f"{res.mechanism} ensemble: {res.samples} samples at N = {res.N}")
    print(f"mean y = {res.y_final.mean():.6f}   mean |x| = {np.abs(x).mean():.6f}   "
          f"P(x > 0) = {(x > 0).mean():.4f}")
    cs = res.crossing_summary
    if cs is not None:
        print(f"crossings of level {res.level}: mean {cs.mean:.2f}, "
              f"median {cs.median:.1f}, max {cs.max}")
    header = ["sample_index", "final_count", "y_final", "crossings"]
    crossings = res.crossings if res.crossings is not None else np.full(res.samples, -1)
    rows = [[i, int(c), c / res.N, int(cr)]
            for i, (c, cr) in enumerate(zip(res.finals, crossings))]
    _emit(args, "mc", header, rows, {
        "mechanism": res.mechanism, "samples": res.samples, "N": res.N,
        "mean_abs_x": float(np.abs(x).mean()), "fraction_positive": float((x > 0).mean()),
    })
    return 0


def _cmd_crossings(args) -> int:
    spec = _spec_from_args(args)
    init = exact.WalkInit(*args.init)
    res = sampling.crossing_stats(spec, init, args.n, args.samples, args.level,
                                  args.seed, t_start=args.t_start, threads=args.threads)
    cs = res.crossing_summary
    zero_frac = float((res.crossings == 0).mean())
    print(f"crossings of level {args.level} over t in [{args.t_start or init.total}, {args.n}]: "
          f"mean {cs.mean:.2f}, median {cs.median:.1f}, max {cs.max}, "
          f"zero-crossing fraction {zero_frac:.4f}")
    header = ["sample_index", "final_count", "y_final", "crossings"]
    rows = [[i, int(c), c / res.N, int(cr)]
            for i, (c, cr) in enumerate(zip(res.finals, res.crossings))]
    _emit(args, "mc", header, rows, {
        "level": args.level, "t_start": args.t_start,
        "crossings_mean": cs.mean, "crossings_median": cs.median,
        "crossings_max": cs.max, "zero_fraction": zero_frac,
    })
    return 0


def _cmd_trajectory(args) -> int:
    spec = _spec_from_args(args)
    traj = paths.zero_cost_path(spec, args.y, eps=args.eps)
    print(f"cost-free path to y = {args.y}: psi({traj.tau[0]:.2e}) = {traj.psi[0]:.8f}, "
          f"rate = {traj.rate:.3e}")
    header = ["tau", "psi", "phi", "local_cost"]
    rows = _trajectory_rows(spec, traj)
    _emit(args, "trajectory", header, rows, {"rate": traj.rate, "y": args.y})
    return 0


def _trajectory_rows(spec, traj):
    beta = np.asarray(spec.value(np.clip(traj.psi, 0.0, 1.0)), dtype=float)
    slopes = np.gradient(traj.phi, traj.tau)
    local = paths.bernoulli_kl(np.clip(slopes, 0.0, 1.0), beta)
    return [[t, ps, ph, lc] for t, ps, ph, lc in zip(traj.tau, traj.psi, traj.phi, local)]


def _cmd_optimal_path(args) -> int:
    spec = _spec_from_args(args)
    traj, rate = paths.optimal_path(spec, args.y, grid=(args.grid_t, args.grid_s))
    print(f"optimal path to y = {args.y} on a {args.grid_t}x{args.grid_s} grid: "
          f"rate = {rate:.8f} (entropy {-rate:.8f})")
    header = ["tau", "psi", "phi", "local_cost"]
    rows = _trajectory_rows(spec, traj)
    _emit(args, "trajectory", header, rows, {"rate": rate, "y": args.y,
                                             "grid": [args.grid_t, args.grid_s]})
    return 0


def _cgf_curve_from_args(args, spec):
    lam = np.geomspace(args.lambda_min, args.lambda_max, args.lambda_points)
    if args.method == "finite-n":
        table = exact.evolve(spec, exact.WalkInit(*args.init), args.n)
        return cgf.finite_n_cgf(table, lam)
    if args.method == "closed-form":
        if not (isinstance(spec, urn.MajorityMemory) and spec.k == 1):
            raise ValueError("closed-form CGF exists only for the single-draw walk (k = 1)")
        return cgf.closed_form_curve_k1(spec.p, lam)
    return cgf.cgf_ode(spec, lam, convention=args.convention)


def _cmd_cgf(args) -> int:
    spec = _spec_from_args(args)
    curve = _cgf_curve_from_args(args, spec)
    print(f"zeta via {curve.provenance}: zeta({curve.lambdas[0]:.4g}) = {curve.zeta[0]:.8f}, "
          f"zeta({curve.lambdas[-1]:.4g}) = {curve.zeta[-1]:.8f}")
    header = ["lambda", "zeta", "provenance"]
    rows = [[l, z, curve.provenance] for l, z in zip(curve.lambdas, curve.zeta)]
    _emit(args, "cgf", header, rows, {"provenance": curve.provenance})
    return 0


def _cmd_legendre(args) -> int:
    spec = _spec_from_args(args)
    curve = _cgf_curve_from_args(args, spec)
    ys = np.linspace(args.y_min, args.y_max, args.y_points)
    ent = cgf.legendre_entropy(curve, ys)
    print(f"phi via Legendre of {curve.provenance}: "
          f"phi({ys[0]:.3f}) = {ent.phi[0]:.6f}, phi({ys[-1]:.3f}) = {ent.phi[-1]:.6f}")
    header = ["y", "phi", "method"]
    rows = [[y, ph, ent.method] for y, ph in zip(ent.y, ent.phi)]
    _emit(args, "entropy", header, rows, {"method": ent.method})
    return 0


def _cmd_phase_scan(args) -> int:
    cells = phase.scan(args.k,
                       np.linspace(args.p_min, args.p_max, args.p_points),
                       np.linspace(args.x_min, args.x_max, args.x_points))
    counts: dict[str, int] = {}
    for c in cells:
        counts[c.region.value] = counts.get(c.region.value, 0) + 1
    print("cells by region: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    header = ["p", "x", "region", "is_p_star", "is_p_c", "is_p_double_star"]
    rows = [[c.p, c.x, c.region.value, c.is_p_star, c.is_p_c, c.is_p_double_star]
            for c in cells]
    _emit(args, "phase-scan", header, rows, {"cells": len(cells), "by_region": counts})
    return 0


def _cmd_decay_exponent(args) -> int:
    spec = _spec_from_args(args)
    init = exact.WalkInit(*args.init)
    n_list = sorted(args.n_list)
    masses = exact._interval_masses(spec, init, args.y1, args.y2, n_list)
    slope = np.polyfit(np.log(np.asarray(n_list, float)), masses, 1)[0]
    exponent = float(-slope)
    print(f"interval ({args.y1}, {args.y2}) mass decays like N^-{exponent:.4f} "
          f"over N in {n_list}")
    header = ["N", "log_interval_mass"]
    rows = [[n, m] for n, m in zip(n_list, masses)]
    _emit(args, "decay-exponent", header, rows,
          {"exponent": exponent, "y1": args.y1, "y2": args.y2, "n_list": n_list})
    return 0


def _cmd_current_check(args) -> int:
    spec = _spec_from_args(args)
    init = exact.WalkInit(*args.init)
    pairs = [(args.n, t) for t in args.tau]
    rep = paths.current_conservation_check(spec, args.y1, args.y2, pairs, init)
    flag = "" if rep.precondition_met else "  [not inside a zero-entropy band]"
    print(f"max |log-mass discrepancy| = {rep.max_abs_discrepancy:.4f}{flag}")
    header = ["N", "tau", "t_mid", "psi1", "psi2",
              "log_mass_final", "log_mass_mid", "discrepancy"]
    rows = [[r.N, r.tau, r.t_mid, r.psi1, r.psi2,
             r.log_mass_final, r.log_mass_mid, r.discrepancy] for r in rep.rows]
    _emit(args, "current-check", header, rows, {
        "max_abs_discrepancy": rep.max_abs_discrepancy,
        "precondition_met": rep.precondition_met,
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erwalk",
        description="Numerical toolkit for memory-reinforced random walks "
                    "driven by urn functions.",
    )
    parser.add_argument("--version", action="version", version=f"erwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_, urn_args=True):
        p = sub.add_parser(name, help=help_)
        if urn_args:
            _add_urn_args(p)
        _add_common_args(p)
        p.set_defaults(_fn=fn)
        return p

    cmd("fixed-points", _cmd_fixed_points, "solutions of pi(y) = y with crossing types")

    p = cmd("critical", _cmd_critical, "memory-parameter thresholds p*, p_c, p**",
            urn_args=False)
    p.add_argument("--k", type=int, default=3,
                   help="draw count, odd (<= 0 selects the step-function limit)")

    p = cmd("exact-dist", _cmd_exact_dist, "exact count distribution at time N")
    p.add_argument("--n", type=int, default=1000)

    p = cmd("entropy", _cmd_entropy, "finite-N entropy profile log P / N")
    p.add_argument("--n", type=int, default=4000)

    p = cmd("mc", _cmd_mc, "Monte-Carlo ensemble of final counts")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--mechanism", choices=["collapsed", "direct"], default="collapsed")
    p.add_argument("--level", type=float, default=None,
                   help="also count crossings of this share level")

    p = cmd("crossings", _cmd_crossings, "level-crossing statistics of the share")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.5)
    p.add_argument("--t-start", type=int, default=None,
                   help="count crossings only from this time on")

    p = cmd("trajectory", _cmd_trajectory, "cost-free backward trajectory to a share")
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--eps", type=float, default=1e-8)

    p = cmd("optimal-path", _cmd_optimal_path, "variational minimizer of the path cost")
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--grid-t", type=int, default=400)
    p.add_argument("--grid-s", type=int, default=400)

    for name, fn in (("cgf", _cmd_cgf), ("legendre", _cmd_legendre)):
        p = cmd(name, fn, "cumulant generating function" if name == "cgf"
                else "entropy density by Legendre transform of the CGF")
        p.add_argument("--method", choices=["ode", "finite-n", "closed-form"],
                       default="ode")
        p.add_argument("--convention", choices=[cgf.CONVENTION_STANDARD,
                                                cgf.CONVENTION_PRINTED],
                       default=cgf.CONVENTION_STANDARD)
        p.add_argument("--n", type=int, default=4000, help="table size for finite-n")
        p.add_argument("--lambda-min", type=float, default=1e-3)
        p.add_argument("--lambda-max", type=float, default=10.0)
        p.add_argument("--lambda-points", type=int, default=200)
        if name == "legendre":
            p.add_argument("--y-min", type=float, default=0.5)
            p.add_argument("--y-max", type=float, default=0.95)
            p.add_argument("--y-points", type=int, default=46)

    p = cmd("phase-scan", _cmd_phase_scan, "region classification on a (p, x) grid",
            urn_args=False)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--p-min", type=float, default=0.5 + 1e-3)
    p.add_argument("--p-max", type=float, default=1.0 - 1e-3)
    p.add_argument("--p-points", type=int, default=101)
    p.add_argument("--x-min", type=float, default=-1.0)
    p.add_argument("--x-max", type=float, default=1.0)
    p.add_argument("--x-points", type=int, default=201)

    p = cmd("decay-exponent", _cmd_decay_exponent,
            "polynomial decay exponent of an interval mass")
    p.add_argument("--y1", type=float, default=0.4)
    p.add_argument("--y2", type=float, default=0.6)
    p.add_argument("--n-list", type=int, nargs="+",
                   default=[1000, 2000, 4000, 8000, 16000])

    p = cmd("current-check", _cmd_current_check,
            "probability-current conservation along cost-free trajectories")
    p.add_argument("--y1", type=float, default=0.6)
    p.add_argument("--y2", type=float, default=0.7)
    p.add_argument("--n", type=int, default=8000)
    p.add_argument("--tau", type=float, nargs="+", default=[0.5])

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return int(exc.code or 0)
    args._argv = list(argv)
    args._t0 = time.time()
    if getattr(args, "threads", None) is None:
        args.threads = _default_threads()
    try:
        return args._fn(args)
    except (NonConvergenceError, DomainBreachError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ErwalkError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # user input must never produce a traceback
        print(f"unexpected failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

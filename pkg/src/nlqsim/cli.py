"""Command-line entry point wiring all modules.

Subcommands: discriminate, bounds, search, audit, optimize, gp-validity,
figures, validate.  All numeric output is CSV with 17 significant digits so
regeneration diffs are lossless; every run is deterministic given --seed
(default 0).  NLQSIM_THREADS caps worker parallelism for the check suite.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import bounds as bn
from . import discrimination as dc
from . import meanfield as mf
from . import nonlinearity as nl
from . import optimizer as op
from . import search as sr
from . import validation


def thread_count() -> int:
    raw = os.environ.get("NLQSIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map, threaded when NLQSIM_THREADS > 1."""
    workers = thread_count()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fmt(x: float) -> str:
    return f"{x:.17g}"


def write_text(path: str, text: str) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise SystemExit(f"cannot write output file {path!r}: {exc}")


@dataclass
class RunConfig:
    """Textual round-trippable run configuration (one subcommand)."""

    subcommand: str
    nonlinearity: str = "gp:1"
    alpha0: Optional[float] = None
    epsilon: Optional[float] = None
    n: Optional[int] = None
    atoms: Optional[float] = None
    t1: str = "auto"
    dim: Optional[int] = None
    restarts: Optional[int] = None
    seed: int = 0
    tol: Optional[float] = None
    out: Optional[str] = None
    quick: bool = False
    extra: dict = field(default_factory=dict)

    def to_argv(self) -> List[str]:
        argv = [self.subcommand, "--nonlinearity", self.nonlinearity,
                "--seed", str(self.seed), "--t1", self.t1]
        if self.alpha0 is not None:
            argv += ["--alpha0", fmt(self.alpha0)]
        if self.epsilon is not None:
            argv += ["--epsilon", fmt(self.epsilon)]
        if self.n is not None:
            argv += ["--n", str(self.n)]
        if self.atoms is not None:
            argv += ["--atoms", fmt(self.atoms)]
        if self.dim is not None:
            argv += ["--dim", str(self.dim)]
        if self.restarts is not None:
            argv += ["--restarts", str(self.restarts)]
        if self.tol is not None:
            argv += ["--tol", fmt(self.tol)]
        if self.out is not None:
            argv += ["--out", self.out]
        if self.quick:
            argv += ["--quick"]
        for k, v in sorted(self.extra.items()):
            argv += [f"--{k}", str(v)]
        return argv


def config_from_args(args) -> RunConfig:
    atoms = getattr(args, "atoms", None)
    if isinstance(atoms, list):
        atoms = atoms[0] if len(atoms) == 1 else tuple(atoms)
    return RunConfig(
        subcommand=args.command,
        nonlinearity=getattr(args, "nonlinearity", "gp:1"),
        alpha0=getattr(args, "alpha0", None),
        epsilon=getattr(args, "epsilon", None),
        n=getattr(args, "n", None),
        atoms=atoms,
        t1=getattr(args, "t1", "auto"),
        dim=getattr(args, "dim", None),
        restarts=getattr(args, "restarts", None),
        seed=getattr(args, "seed", 0),
        tol=getattr(args, "tol", None),
        out=getattr(args, "out", None),
        quick=getattr(args, "quick", False),
    )


def _tolerances(args):
    if getattr(args, "tol", None):
        return args.tol, args.tol * 1e-2
    return 1e-10, 1e-12


def _resolve_alpha0(args) -> float:
    if getattr(args, "alpha0", None) is not None:
        return args.alpha0
    if getattr(args, "epsilon", None) is not None:
        return dc.epsilon_to_alpha0(args.epsilon)
    raise SystemExit("provide --alpha0 or --epsilon")


def cmd_discriminate(args) -> int:
    n = nl.parse(args.nonlinearity)
    alpha0 = _resolve_alpha0(args)
    rtol, atol = _tolerances(args)
    policy = (dc.OrientationPolicy.REOPTIMIZED if args.policy == "reopt"
              else dc.OrientationPolicy.FIXED_OPTIMAL_GP)
    res = dc.time_to_overlap(n, alpha0, args.target_overlap,
                             orientation_policy=policy, rtol=rtol, atol=atol)
    print(f"nonlinearity = {n.spec_string()}")
    print(f"alpha0 = {fmt(alpha0)}")
    print(f"status = {res.status}")
    print(f"t_to_target = {fmt(res.t_perp)}")
    if res.status == "no_progress":
        print(f"diagnostic = {res.diagnostic}")
    if args.out:
        lines = ["t,gt,overlap"]
        for t, c in zip(res.trace.times, np.atleast_1d(res.trace.states)):
            lines.append(f"{fmt(t)},{fmt(n.g * t)},{fmt(float(c))}")
        write_text(args.out, "\n".join(lines) + "\n")
        print(f"trace written to {args.out}")
    return 0


def cmd_bounds(args) -> int:
    n = nl.parse(args.nonlinearity)
    kbar = nl.reduce(n)
    cert = bn.certify_growth(kbar, args.z0, args.delta, grid=args.grid)
    if isinstance(cert, bn.GrowthRefusal):
        g_local, c_rate = 0.0, 0.0
        print(f"growth certificate refused: {cert.reason}")
    else:
        g_local, c_rate = cert.g_local, bn.exp_growth_rate(cert)
        print(f"g_local = {fmt(g_local)}, nominal exponent = {fmt(c_rate)}, "
              f"certified exponent = {fmt(bn.certified_exp_rate(cert))}")

    est = bn.estimate_lipschitz(kbar, grid=args.grid)
    g_lip = args.g_lip if args.g_lip is not None else (est.g_lip if est.finite else None)
    if g_lip is None:
        print("no finite Lipschitz constant detected; pass --g-lip for the "
              "separation bound check")
        bound_ok, max_ratio = False, math.nan
    else:
        rep = bn.check_lipschitz_separation_bound(
            n, args.alpha0 or 1e-3, args.duration, g_lip=g_lip)
        bound_ok, max_ratio = rep.bound_ok, rep.max_ratio
        print(f"g_lip = {fmt(g_lip)}, bound_ok = {bound_ok}, "
              f"max ratio = {fmt(max_ratio)}")
    if args.out:
        row = {"nonlinearity": n.spec_string(), "z0": args.z0,
               "g_local": g_local, "c": c_rate,
               "bound_ok": bound_ok, "max_ratio": max_ratio}
        write_text(args.out, bn.bound_report_csv([row]))
        print(f"report written to {args.out}")
    return 0


def cmd_search(args) -> int:
    n = nl.parse(args.nonlinearity)
    if args.n is None:
        raise SystemExit("search requires --n")
    instance = sr.SearchInstance(args.n, marked=args.marked)
    rtol, _ = _tolerances(args)
    report = sr.run_search(instance, n, t1=args.t1, seed=args.seed, rtol=rtol)
    print(sr.SearchReport.csv_header())
    print(report.csv_row())
    if args.out:
        write_text(args.out, sr.SearchReport.csv_header() + "\n" + report.csv_row() + "\n")
        print(f"report written to {args.out}")
    return 0


def cmd_audit(args) -> int:
    n = nl.parse(args.nonlinearity)
    if args.n is None:
        raise SystemExit("audit requires --n")
    g = n.g if n.g > 0 else 1.0
    t1 = sr.default_t1(args.n, g) if args.t1 in ("auto", None) else float(args.t1)
    H = sr.search_schedule(args.n, n.g, t1)
    duration = args.duration
    if duration is None:
        rep = sr.run_search(sr.SearchInstance(args.n, marked=1),
                            nl.gross_pitaevskii(g), t1=t1, seed=args.seed)
        duration = rep.total_time
    audit = sr.lower_bound_audit(n, H, args.n, duration, samples=args.samples)
    print(f"N = {audit.N}, |kappa| bound g = {fmt(audit.g)}")
    print(f"bound_ok = {audit.bound_ok}, min margin = {fmt(audit.min_margin)}")
    if args.out:
        write_text(args.out, audit.to_csv())
        print(f"audit written to {args.out}")
    return 0


def cmd_optimize(args) -> int:
    n = nl.parse(args.nonlinearity)
    alpha = args.alpha if args.alpha is not None else (args.alpha0 or 0.5)
    dim = args.dim or 2
    restarts = args.restarts or 64
    base = op.optimize_orientation(n, alpha, 2, restarts=restarts, seed=args.seed)
    if dim == 2:
        result = base
    else:
        prev = base
        for d in range(3, dim + 1):
            prev = op.optimize_orientation(n, alpha, d, restarts=restarts,
                                           seed=args.seed + d, warm_start=prev)
        result = prev
    gap = result.best_rate - base.best_rate
    print(f"alpha = {fmt(alpha)}, dim = {dim}")
    print(f"best_rate = {fmt(result.best_rate)}")
    print(f"gap_vs_dim2 = {fmt(gap)}")
    if result.angles is not None:
        print(f"orientation (phi, theta) = ({fmt(result.angles[0])}, {fmt(result.angles[1])})")
    if args.out:
        text = "alpha,dim,best_rate,gap_vs_dim2\n" + \
            f"{fmt(alpha)},{dim},{fmt(result.best_rate)},{fmt(gap)}\n"
        write_text(args.out, text)
        print(f"result written to {args.out}")
    return 0


def cmd_gp_validity(args) -> int:
    if args.atoms is None:
        raise SystemExit("gp-validity requires --atoms")
    rows = []
    for atoms in args.atoms:
        p = mf.CondensateParams(int(atoms), U=args.interaction)
        rows.append({
            "n_atoms": p.n_atoms, "g": p.g,
            "t_star": mf.gp_validity_time(p, args.target_overlap),
            "scaling": mf.validity_scaling_constant(p, args.target_overlap),
        })
    print("N_atoms,g,t_star,t_star_times_N_over_logN")
    for r in rows:
        print(f"{r['n_atoms']},{fmt(r['g'])},{fmt(r['t_star'])},{fmt(r['scaling'])}")
    if args.out:
        write_text(args.out, mf.validity_csv(rows))
        print(f"table written to {args.out}")
    return 0


def _figure_text(which: str) -> str:
    if which == "fig3a":
        gts, overlap = dc.fig_overlap_vs_gt()
        lines = ["gt,overlap"]
        lines += [f"{fmt(t)},{fmt(c)}" for t, c in zip(gts, overlap)]
    elif which == "fig3b":
        alphas, gtp = dc.fig_tperp_vs_alpha0()
        lines = ["alpha0,gt_perp"]
        lines += [f"{fmt(a)},{fmt(t)}" for a, t in zip(alphas, gtp)]
    elif which == "fig4":
        cs, rl, rg = dc.fig_rate_comparison()
        lines = ["overlap,rate_log_g1,rate_gp_g2"]
        lines += [f"{fmt(c)},{fmt(a)},{fmt(b)}" for c, a, b in zip(cs, rl, rg)]
    else:
        raise SystemExit(f"unknown figure {which!r}")
    return "\n".join(lines) + "\n"


def cmd_figures(args) -> int:
    which = ["fig3a", "fig3b", "fig4"] if args.which == "all" else [args.which]
    outdir = args.out or "."
    if not os.path.isdir(outdir):
        raise SystemExit(f"output directory {outdir!r} does not exist")
    for w in which:
        path = os.path.join(outdir, f"{w}.csv")
        write_text(path, _figure_text(w))
        print(f"wrote {path}")
    return 0


def cmd_validate(args) -> int:
    ctx = validation.Context(quick=args.quick, seed=args.seed,
                             inject_bug=args.inject_bug)
    results = parallel_map(lambda fn: fn(ctx), validation.ALL_CHECKS)
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        lines.append(f"{r.name:<{width}}  {status}  {r.detail}")
    n_fail = sum(not r.ok for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        csv_lines = ["check,ok,detail"]
        csv_lines += [f"{r.name},{r.ok},\"{r.detail}\"" for r in results]
        write_text(args.out, "\n".join(csv_lines) + "\n")
    if n_fail:
        failing = ", ".join(r.name for r in results if not r.ok)
        sys.stdout.write(f"failing: {failing}\n")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlqsim",
        description="State discrimination and unstructured search under "
                    "amplitude nonlinearities of the Gross-Pitaevskii family",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        # The full documented flag set is accepted by every subcommand;
        # flags irrelevant to a given command are ignored by its handler.
        p.add_argument("--nonlinearity", default="gp:1",
                       help="kind:g spec (gp:1.0, log:0.5, sqrt, quartic, custom:file.csv)")
        p.add_argument("--alpha0", type=float, default=None,
                       help="initial separation angle")
        p.add_argument("--epsilon", type=float, default=None,
                       help="initial overlap deficit (overlap = 1 - epsilon)")
        p.add_argument("--n", type=int, default=None, help="catalog size N")
        p.add_argument("--atoms", type=float, nargs="+", default=None,
                       help="condensate atom counts")
        p.add_argument("--t1", default="auto", help="oracle time (auto or a float)")
        p.add_argument("--dim", type=int, default=None, help="embedding dimension")
        p.add_argument("--restarts", type=int, default=None,
                       help="optimizer restart count")
        p.add_argument("--seed", type=int, default=0, help="rng seed (default 0)")
        p.add_argument("--tol", type=float, default=None,
                       help="integrator relative tolerance override")
        p.add_argument("--out", default=None, help="output CSV path")
        p.add_argument("--quick", action="store_true",
                       help="reduced grids (validate)")

    p = sub.add_parser("discriminate", help="drive a qubit pair to a target overlap")
    common(p)
    p.add_argument("--target-overlap", type=float, default=0.0)
    p.add_argument("--policy", choices=["fixed", "reopt"], default="fixed")

    p = sub.add_parser("bounds", help="growth certificates and separation bounds")
    common(p)
    p.add_argument("--z0", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--grid", type=int, default=bn.DEFAULT_GRID)
    p.add_argument("--duration", type=float, default=5.0)
    p.add_argument("--g-lip", type=float, default=None,
                   help="Lipschitz proxy when no finite constant exists")

    p = sub.add_parser("search", help="run the search pipeline on one instance")
    common(p)
    p.add_argument("--marked", type=int, default=None, help="marked item (1-indexed)")

    p = sub.add_parser("audit", help="co-integrate marked/unmarked trajectories "
                                     "against the overlap-sum floor")
    common(p)
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--samples", type=int, default=200)

    p = sub.add_parser("optimize", help="orientation search over embeddings")
    common(p)
    p.add_argument("--alpha", type=float, default=None, help="pair separation angle")

    p = sub.add_parser("gp-validity", help="mean-field validity horizon table")
    common(p)
    p.add_argument("--interaction", type=float, default=1e-3,
                   help="interaction strength U (g = U * atoms)")
    p.add_argument("--target-overlap", type=float, default=0.0)

    p = sub.add_parser("figures", help="regenerate figure data CSVs")
    common(p)
    p.add_argument("--which", choices=["fig3a", "fig3b", "fig4", "all"], default="all")

    p = sub.add_parser("validate", help="run the named invariant checks")
    common(p)
    p.add_argument("--inject-bug", default=None, help=argparse.SUPPRESS)

    return parser


COMMANDS = {
    "discriminate": cmd_discriminate,
    "bounds": cmd_bounds,
    "search": cmd_search,
    "audit": cmd_audit,
    "optimize": cmd_optimize,
    "gp-validity": cmd_gp_validity,
    "figures": cmd_figures,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``preflearn run|sweep|verify-noise|demo``.

Exit codes: 0 success, 1 failed property check, 2 usage error, 3 learner abort.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from . import experiments as ex
from .errors import LearnerAbort, UsageError
from .noise import NoiseModel, check_inverse_poly_bound, convexity_margin, strong_convexity_gamma

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_ABORT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(args) -> ex.ExperimentConfig:
    cfg = ex.ExperimentConfig.from_json(args.config)
    if args.output:
        cfg.output = args.output
    if args.jsonl:
        cfg.jsonl = args.jsonl
    if args.deterministic:
        cfg.record_wall_time = False
    if args.workers:
        cfg.workers = args.workers
    return cfg


def _print_records(records) -> None:
    for r in records:
        print(
            f"trial {r.trial_index:4d}  n/queries={r.n_or_queries:<10d} e1={r.e1_estimate:.4g}"
            f"  e2={r.e2:.4g}  seminorm={r.seminorm_e2:.4g}  ok={r.success_flag}"
        )


def cmd_run(args) -> int:
    cfg = _load(args)
    records = ex.run_experiment(cfg)
    _print_records(records)
    if cfg.output:
        print(f"wrote {cfg.output}")
    return EXIT_ABORT if any("abort" in r.detail for r in records) else EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    result = ex.run_sweep(cfg)
    print(f"{'grid':>12} {'median e2':>12} {'IQR':>10} {'median |.|_S':>13} {'median n/q':>11} {'success':>8}")
    for s in result.summaries:
        print(
            f"{s.grid_value:>12.6g} {s.median_e2:>12.5g} {s.iqr_e2:>10.3g} {s.median_seminorm_e2:>13.5g}"
            f" {s.median_n_or_queries:>11.6g} {s.success_rate:>8.3f}"
        )
    label = "log-log slope of median seminorm vs n" if result.key == "n" else "queries per halving of eps"
    print(f"{label}: {result.slope:.4f}")
    if cfg.output:
        print(f"wrote {cfg.output} and {ex.summary_path(cfg.output)}")
    _, rows = result.flat()
    return EXIT_ABORT if any("abort" in r.detail for r in rows) else EXIT_OK


def cmd_verify_noise(args) -> int:
    nm = NoiseModel.logistic() if args.model == "logistic" else NoiseModel.gaussian()
    ok = True
    z = np.linspace(-10, 10, 1000)
    sym = float(np.max(np.abs(nm.cdf(z) + nm.cdf(-z) - 1)))
    ok &= sym <= 1e-12
    print(f"symmetry  max |F(z) + F(-z) - 1| on 1000 points of [-10, 10]: {sym:.3e}")

    grid = np.linspace(0.5 / args.points, 0.5, args.points)
    report = check_inverse_poly_bound(nm, grid)
    ok &= report.holds(1e-12)
    print(f"\n{'x':>10} {'F^-1(x)':>14} {'bound':>14} {'slack':>12}")
    step = max(1, args.points // 10)
    for k, (x, inv, bound, slack) in enumerate(report.rows()):
        if k % step == 0 or k == args.points - 1:
            print(f"{x:>10.4f} {inv:>14.6f} {bound:>14.6f} {slack:>12.3e}")
    print(f"max slack: {report.max_slack:.3e}")

    if nm.kind == "logistic":
        zz = np.linspace(-10, 10, 1001)
        f = nm.cdf(zz)
        ident = float(np.max(np.abs(convexity_margin(nm, zz) - f**3 * (1 - f))))
        ok &= ident <= 1e-12
        print(f"\nidentity  max |F'^2 - F''F - F^3(1-F)|: {ident:.3e}")
    gamma = strong_convexity_gamma(nm, args.bound)
    print(f"gamma on [-{args.bound:g}, {args.bound:g}]: {gamma:.6f}")
    ok &= gamma > 0
    print("\nall checks passed" if ok else "\nSOME CHECKS FAILED")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_demo(args) -> int:
    if args.which == "thm6":
        demo = ex.coordinate_dominant_demo(m=args.m, n=args.n, seed=args.seed)
        for s, h, e in zip(demo.w_stars, demo.w_hats, demo.e2):
            print(f"w* = {np.round(s.w, 4)}  ->  w_hat = {np.round(h.w, 6)}   e2 = {e:.4f}")
        print(f"labels identical: {demo.labels_identical}   outputs identical: {demo.outputs_identical}")
        print(f"max e2 = {demo.max_e2:.4f}  (>= sqrt(2)/2 = {math.sqrt(2) / 2:.4f}: {demo.max_e2 >= math.sqrt(2) / 2})")
        return EXIT_OK
    res = ex.small_margin_demo(seed=args.seed)
    print(f"{'margin':>10} {'labels needed':>14}")
    for mu, need in res["needs"].items():
        print(f"{mu:>10.0e} {need:>14d}")
    for r, q in zip(res["ratios"], res["quadratic_ratios"]):
        print(f"growth {r:10.2f}x   (quadratic prediction {q:.0f}x)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="preflearn", description="Learn simplex utility weights from pairwise comparisons.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn, help_ in (("run", cmd_run, "run one experiment"), ("sweep", cmd_sweep, "run a grid sweep")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="experiment config JSON")
        sp.add_argument("--output", help="CSV path (overrides the config)")
        sp.add_argument("--jsonl", help="optional per-trial JSONL detail path")
        sp.add_argument("--workers", type=int, help="parallel trial processes")
        sp.add_argument("--deterministic", action="store_true", help="write wall_seconds as 0")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("verify-noise", help="check noise c.d.f. properties")
    sp.add_argument("--model", choices=("logistic", "gaussian"), default="logistic")
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--bound", type=float, default=1.0, help="margin bound B for gamma")
    sp.set_defaults(func=cmd_verify_noise)
    sp = sub.add_parser("demo", help="counterexample demonstrations")
    sp.add_argument("--which", choices=("thm2", "thm6"), required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--n", type=int, default=500)
    sp.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"preflearn: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LearnerAbort as exc:
        print(f"preflearn: learner aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())

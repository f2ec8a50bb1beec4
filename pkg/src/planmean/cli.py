"""Command-line entry point: ``planmean run | summarize | allocate | check-concentration``.

All subcommands print delimited text on stdout. Configuration problems end
with exit status 2 and a single ``planmean: error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import fields

import numpy as np

from .allocation import SensitivityProfile, expected_pth_moment, gaussian_abs_moment, optimal_moment, optimal_scaling
from .bench import PRESETS, SummaryRow, load_config, read_rows, run_experiment, summarize, write_summary
from .concentration import tail_check
from .data import GeneratorConfig, generate

__all__ = ["main", "build_parser"]


def _floats(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planmean", description="Variance-aware private mean estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark grid from a JSON config or a preset")
    run.add_argument("config", nargs="?", help="JSON config file")
    run.add_argument("--preset", choices=sorted(PRESETS), help="start from a built-in desk-scale grid")
    run.add_argument("--seed", type=int, help="master seed (overrides the config)")
    run.add_argument("--out", help="results CSV (default: <name>.csv)")
    run.add_argument("--repetitions", type=int, help="override the repetition count")
    run.add_argument("--workers", type=int, help="worker processes (capped by PLANMEAN_MAX_WORKERS)")

    summ = sub.add_parser("summarize", help="per-group error statistics of a results CSV")
    summ.add_argument("results")
    summ.add_argument("--out", help="write the summary here instead of stdout")

    alloc = sub.add_parser("allocate", help="optimal noise scaling for queries with given sensitivities")
    alloc.add_argument("--deltas", type=_floats, required=True, help="comma-separated sensitivities")
    alloc.add_argument("--p", type=float, default=2.0)
    alloc.add_argument("--rho", type=float, default=1.0)

    conc = sub.add_parser("check-concentration", help="tail check of a synthetic generator")
    conc.add_argument("--family", default="gaussianA", choices=("gaussianA", "gaussianB", "gaussianC", "binary"))
    conc.add_argument("--n", type=int, default=100_000)
    conc.add_argument("--d", type=int, default=16)
    conc.add_argument("--alpha", type=float)
    conc.add_argument("--p", type=float, default=2.0)
    conc.add_argument("--seed", type=int, default=0)
    conc.add_argument("--t-grid", type=_floats, default=None, help="comma-separated thresholds")
    conc.add_argument("--upper-window", action="store_true",
                      help="use the largest admissible sigma_hat instead of the true sigma")
    return parser


def _print_summary(summary, stream) -> None:
    names = [f.name for f in fields(SummaryRow)]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(names)
    for s in summary:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (getattr(s, n) for n in names)])


def _cmd_run(args) -> int:
    if args.config is None and args.preset is None:
        raise ValueError("give a config file or --preset")
    config = load_config(args.config, preset=args.preset, seed=args.seed, repetitions=args.repetitions,
                         workers=args.workers)
    out = args.out or f"{config.name}.csv"
    rows = run_experiment(config, out)
    failures = sum(1 for r in rows if r.status != "ok")
    _print_summary(summarize(rows), sys.stdout)
    print(f"# wrote {len(rows)} rows to {out} ({failures} failed runs)", file=sys.stderr)
    return 0


def _cmd_summarize(args) -> int:
    summary = summarize(read_rows(args.results))
    if args.out:
        write_summary(summary, args.out)
    else:
        _print_summary(summary, sys.stdout)
    return 0


def _cmd_allocate(args) -> int:
    profile = SensitivityProfile(np.asarray(args.deltas), args.p)
    s = optimal_scaling(profile)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["query", "delta", "scale"])
    for i, (delta, scale) in enumerate(zip(profile.deltas, s)):
        writer.writerow([i, repr(float(delta)), repr(float(scale))])
    uniform = expected_pth_moment(profile, np.ones_like(s), args.rho)
    writer.writerow(["optimal_moment", "", repr(optimal_moment(profile, args.rho))])
    writer.writerow(["optimal_scaling_moment", "", repr(expected_pth_moment(profile, s, args.rho))])
    writer.writerow(["uniform_moment", "", repr(uniform)])
    return 0


def _cmd_check_concentration(args) -> int:
    config = GeneratorConfig(args.family, args.n, args.d, args.alpha)
    dataset = generate(config, np.random.default_rng(args.seed))
    p = args.p
    if args.family == "binary":
        # p-th central moment of a Bernoulli(q) coordinate
        q = dataset.mu
        sigma = (q * (1 - q) * ((1 - q) ** (p - 1) + q ** (p - 1))) ** (1.0 / p)
    else:
        sigma = np.sqrt(dataset.sigma2)
    sigma_hat = None
    if args.upper_window:
        r = 2.0 * p / (p + 2.0)
        sigma_hat = (sigma ** r + np.sum(sigma ** r) / sigma.size) ** (1.0 / r)
    report = tail_check(dataset.rows, dataset.mu, sigma, sigma_hat, p=p, t_grid=args.t_grid)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["t", "raw_fraction", "scaled_fraction", "out_of_domain"])
    for t, raw, scaled, flag in report.rows():
        writer.writerow([repr(t), repr(raw), repr(scaled), int(flag)])
    print(f"# raw_slope={report.raw_slope!r} scaled_slope={report.scaled_slope!r} passed={report.passed}")
    return 0


COMMANDS = {
    "run": _cmd_run,
    "summarize": _cmd_summarize,
    "allocate": _cmd_allocate,
    "check-concentration": _cmd_check_concentration,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"planmean: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

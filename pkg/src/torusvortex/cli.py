"""Command-line entry point.

    torusvortex run <preset|config-path> [--dt DT] [--t-end T] [--eps E1,E2]
                    [--grid M] [--out DIR] [--mode ode|pde|compare]

Exit codes: 0 ok, 2 invalid spec, 3 collision stop, 4 blow-up.

The only recognised environment variable is TORUSVORTEX_THREADS, which caps
the BLAS/FFT thread pools before numerics are loaded.
"""

import argparse
import os
import sys


def _apply_thread_env():
    threads = os.environ.get("TORUSVORTEX_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="torusvortex",
        description="Vortex dynamics of the nonlinear wave equation "
                    "on the unit torus")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a scenario preset or config file")
    run.add_argument("scenario",
                     help="preset name (fig1-left, fig1-right, fig2-left, "
                          "fig2-right) or path to a key=value config file")
    run.add_argument("--dt", type=float, default=None,
                     help="integration step of the reduced flow")
    run.add_argument("--t-end", type=float, default=None, dest="t_end",
                     help="time horizon")
    run.add_argument("--eps", default=None,
                     help="comma-separated core sizes for pde/compare modes")
    run.add_argument("--grid", type=int, default=None,
                     help="spatial resolution (power of two >= 64)")
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--mode", default=None,
                     choices=("ode", "pde", "compare"))
    return parser


def main(argv=None) -> int:
    _apply_thread_env()
    args = _build_parser().parse_args(argv)

    from .runner import (EXIT_BLOWUP, EXIT_INVALID_SPEC, run_scenario)
    from .scenarios import ScenarioError, apply_overrides, load_scenario
    from .wave import BlowUpError, TrackingError

    try:
        spec = load_scenario(args.scenario)
        eps = args.eps.split(",") if args.eps else None
        spec = apply_overrides(spec, dt=args.dt, t_end=args.t_end, eps=eps,
                               grid=args.grid, mode=args.mode,
                               output_dir=args.out)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID_SPEC
    except ValueError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID_SPEC

    try:
        result = run_scenario(spec)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID_SPEC
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except TrackingError as exc:
        print(f"tracking failure: {exc}", file=sys.stderr)
        return 1

    for message in result.messages:
        print(message)
    for path in result.files:
        print(f"wrote {path}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())

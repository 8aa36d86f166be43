"""Command-line entry points: relax, simulate, growth, diagnose."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from . import diagnostics as dg
from . import fileio
from . import growth as gr
from . import relax as rx
from .config import parse_config
from .errors import CheckpointError, ConfigurationError, ResolutionExhausted

EXIT_OK = 0
EXIT_T_MAX = 2
EXIT_FAILURE = 3
EXIT_USAGE = 64

_RELAX_EXIT = {"converged": EXIT_OK, "t_max": EXIT_T_MAX,
               "blowup": EXIT_FAILURE, "numerical_failure": EXIT_FAILURE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser():
    p = _Parser(prog="voigtmhd", description="Voigt-regularized MHD relaxation on the 3-torus.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in (("relax", "integrate until relaxed, t_max or failure"),
                           ("simulate", "fixed-horizon integration, no convergence verdict")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", required=True, help="TOML run configuration")
        s.add_argument("--resume", metavar="CHECKPOINT", help="continue from a checkpoint file")
        s.add_argument("--out", help="output directory (overrides output.dir)")
        s.add_argument("--no-figures", action="store_true", help="skip PNG figures")

    g = sub.add_parser("growth", help="gradient-growth example with exponential fit")
    g.add_argument("--config", help="TOML file with a [growth] section")
    g.add_argument("--model", choices=gr.MODELS)
    g.add_argument("--n", type=int)
    g.add_argument("--t-max", type=float)
    g.add_argument("--dt", type=float)
    g.add_argument("--sample-interval", type=float)
    g.add_argument("--fit-window", type=float, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--out", help="directory for growth.csv and growth.png")
    g.add_argument("--no-figures", action="store_true")

    d = sub.add_parser("diagnose", help="print diagnostics of one checkpoint as CSV")
    d.add_argument("--checkpoint", required=True)
    return p


def _run_relax(args, fixed_horizon):
    config = parse_config(args.config)
    if not isinstance(config, rx.RelaxationConfig):
        raise ConfigurationError(f"{args.config} is a growth config; use the growth subcommand")
    if args.out:
        config = dataclasses.replace(config, output_dir=args.out)
    if args.no_figures:
        config = dataclasses.replace(config, figures=False)
    if args.resume and not os.path.exists(args.resume):
        raise FileNotFoundError(f"checkpoint not found: {args.resume}")
    runner = rx.simulate if fixed_horizon else rx.run
    report = runner(config, resume_from=args.resume)
    for key, value in report.summary():
        print(f"{key}: {value}")
    if report.termination_reason in ("blowup", "numerical_failure"):
        return EXIT_FAILURE
    if fixed_horizon:
        return EXIT_OK
    return _RELAX_EXIT[report.termination_reason]


def _run_growth(args):
    base = parse_config(args.config) if args.config else gr.GrowthConfig()
    if not isinstance(base, gr.GrowthConfig):
        raise ConfigurationError(f"{args.config} has no [growth] section")
    overrides = {
        "model": args.model, "n": args.n, "t_max": args.t_max, "dt": args.dt,
        "sample_interval": args.sample_interval,
        "fit_window": tuple(args.fit_window) if args.fit_window else None,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if "t_max" in overrides and "fit_window" not in overrides and not args.config:
        overrides["fit_window"] = None
    config = dataclasses.replace(base, **overrides)
    series = gr.run(config)

    lines = ["t,axis_gradient,global_gradient,aliased_flag"]
    lines += [f"{t!r},{a!r},{g!r},{f}" for t, a, g, f in series.rows()]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "growth.csv"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
        if not args.no_figures:
            from .plotting import plot_growth
            fit = None if series.rate is None else (series.rate, series.prefactor, series.r_squared)
            plot_growth(series, os.path.join(args.out, "growth.png"), fit)
    else:
        print("\n".join(lines))
    lo, hi = config.fit_window
    if series.rate is None:
        raise ResolutionExhausted(f"fit window [{lo}, {hi}] is not fully resolved at n={config.n}")
    print(f"fit: model={config.model} n={config.n} window=[{lo}, {hi}] rate={series.rate:.6f} "
          f"prefactor={series.prefactor:.6f} r2={series.r_squared:.8f} truncated={series.truncated}")
    return EXIT_OK


def _run_diagnose(args):
    state = fileio.load_checkpoint(args.checkpoint)
    e_u, e_b = dg.voigt_energy(state)
    rec = dg.record(state, energy0=e_u + e_b, helicity0=dg.modified_helicity(state),
                    dissipation_cum=0.0)
    print(fileio.HEADER)
    print(fileio.format_row(rec))
    return EXIT_OK


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("relax", "simulate"):
            return _run_relax(args, fixed_horizon=args.command == "simulate")
        if args.command == "growth":
            return _run_growth(args)
        return _run_diagnose(args)
    except (ConfigurationError, CheckpointError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"voigtmhd {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResolutionExhausted as exc:
        print(f"voigtmhd {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

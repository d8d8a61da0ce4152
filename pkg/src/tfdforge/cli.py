"""Command-line entry point: ``tfdforge <subcommand> [flags]``.

Exit codes: 0 success, 2 optimiser did not converge (results still written),
1 error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments
from .experiments import ExperimentConfig, load_config

_FLAG_FIELDS = {
    "n": "n", "t": "t", "eps0": "eps0", "u": "u", "beta_min": "beta_min",
    "beta_max": "beta_max", "beta_steps": "beta_steps", "beta": "beta",
    "frequencies": "frequencies", "layers": "layers", "rank": "rank", "seed": "seed",
    "maxiter": "maxiter", "restarts": "restarts", "validate": "validate", "out": "out",
}


def _add_shared(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file or a previous output file")
    p.add_argument("--n", type=int, help="sites per copy (N)")
    p.add_argument("--t", type=float, help="hopping amplitude")
    p.add_argument("--eps0", type=float, help="on-site energy")
    p.add_argument("--u", type=float, action="append", help="interaction (repeatable)")
    p.add_argument("--beta-min", type=float)
    p.add_argument("--beta-max", type=float)
    p.add_argument("--beta-steps", type=int)
    p.add_argument("--beta", type=float, help="inverse temperature for vqe/spectrum")
    p.add_argument("--frequencies", choices=["free", "meanfield"])
    p.add_argument("--layers", type=int)
    p.add_argument("--rank", type=int, help="Schmidt truncation rank (default: full)")
    p.add_argument("--seed", type=int)
    p.add_argument("--maxiter", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--validate", action="store_true", default=None,
                   help="compare against the exact thermofield double")
    p.add_argument("--out", help="output path (stdout when omitted or '-')")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfdforge",
                                     description="Thermofield-double forging experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("overlap-sweep", "ground-state / TFD overlap over a beta grid"),
        ("vqe", "forged variational optimisation"),
        ("spectrum", "exact vs variational spectrum"),
        ("meanfield-bands", "free and mean-field frequencies"),
    ]:
        _add_shared(sub.add_parser(name, help=help_text))
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    data = load_config(args.config) if args.config else {}
    for flag, key in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_config(args)
        if not config.out:
            config.out = "-"
        if args.command == "overlap-sweep":
            experiments.run_overlap_sweep(config)
        elif args.command == "vqe":
            result = experiments.run_vqe_experiment(config)
            if not result["converged"]:
                logging.warning("optimiser did not converge; results written anyway")
                return 2
        elif args.command == "spectrum":
            experiments.run_spectrum_report(config)
        else:
            experiments.run_meanfield_bands(config)
    except Exception as exc:  # noqa: BLE001 - report and map to exit code 1
        logging.error("%s: %s", type(exc).__name__, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

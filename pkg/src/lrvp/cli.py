"""Command-line entry point: ``lrvp <experiment> [options]``.

Exit codes: 0 on success, 2 on configuration errors, 3 when a problem exceeds
the simulated hardware capacity or an enumeration budget.
"""

import argparse
import sys

from .config import EXPERIMENTS, build_config, parse_config_file, parse_override
from .errors import BudgetError, CapacityError, ConfigError
from .experiments import run_experiment, write_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrvp",
        description="Lattice-reduction aided vector-perturbation precoding experiments",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        exp = sub.add_parser(name, help=f"run the {name} experiment")
        exp.add_argument("--config", help="flat key = value configuration file")
        exp.add_argument("--seed", type=int, help="master 64-bit seed")
        exp.add_argument("--out", help="output CSV path (default <experiment>.csv)")
        exp.add_argument("--solvers", help="comma-separated solver list")
        exp.add_argument("--threads", type=int, help="worker threads (results are identical for any count)")
        exp.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override any config key (repeatable)",
        )
    return parser


def _cli_overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, text = item.split("=", 1)
        key, value = parse_override(key.strip(), text.strip())
        overrides[key] = value
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.solvers is not None:
        _, overrides["solvers"] = parse_override("solvers", args.solvers)
    return overrides


def _print_summary(experiment: str, summary: dict) -> None:
    if experiment == "ser-sweep":
        print(f"total symbols per point: {summary['total_symbols']}")
        snrs = summary["snr_db"]
        for name, curve in summary["ser"].items():
            pieces = ", ".join(f"{snr:g} dB: {ser:.3e}" for snr, ser in zip(snrs, curve))
            print(f"  {name}: {pieces}")
        return
    for key, entry in summary.items():
        extra = ""
        if "broken_chain_rate" in entry:
            extra = f", broken chains {entry['broken_chain_rate']:.4f}"
        print(
            f"  {key}: n={entry['n']} median={entry['median']:.6g} "
            f"q1={entry['q1']:.6g} q3={entry['q3']:.6g} outliers={entry['outliers']}{extra}"
        )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = build_config(args.experiment, file_values, _cli_overrides(args))
        records, summary = run_experiment(cfg)
        write_csv(records, cfg.out_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"{cfg.experiment}: {len(records)} rows -> {cfg.out_path}")
    _print_summary(cfg.experiment, summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())

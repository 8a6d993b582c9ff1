"""
Main file to launch the equilibrium batch CLI.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from cli.commands import check_rows, run_scenario
from cli.scenario import Scenario, load_scenario, scenario_from_mapping
from cli.tables import render_csv, write_output
from cli.verify import verify_file
from utils.errors import ConfigError, InvariantViolation, SolverError

logger = logging.getLogger("equilibria")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4

#######################################################################
## Argument parsing ###################################################
#######################################################################

# Flag destination -> scenario key
_DEMAND_FLAGS = {
    "family": "demand.family",
    "c": "demand.c",
    "m": "demand.m",
    "alpha": "demand.alpha",
    "kappa": "demand.kappa",
    "x0": "demand.x0",
    "a_max": "demand.a_max",
    "b": "solver.b",
}
_SOLVER_FLAGS = {
    "tau": "solver.tau",
    "tau1": "solver.tau1",
    "tau2": "solver.tau2",
    "tau3": "solver.tau3",
    "delta_b": "solver.delta_b",
    "prior": "solver.prior",
    "policy": "solver.policy",
    "tmax": "solver.tmax",
    "density": "solver.density",
    "branch": "solver.branch",
    "quad_n": "solver.quad_n",
    "tol": "solver.tol",
    "seed": "solver.seed",
}
_POLYEQ_VARIANTS = {
    "first-order": "first_order",
    "param-change": "param_change",
    "second-order": "second_order",
    "alt-discount": "alt_discount",
    "bounds": "bounds",
}


def _demand_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("demand")
    group.add_argument(
        "--family", required=True, help="linear | exp_convex | quad_concave | logistic"
    )
    for name in ("c", "m", "alpha", "kappa", "x0"):
        group.add_argument(f"--{name}", help=f"demand coefficient {name}")
    group.add_argument("--a-max", dest="a_max", help="upper end of the demand domain")
    group.add_argument("--b", help="demand parameter (default 0)")
    return parent


def _global_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--out", type=Path, help="output CSV (default: stdout)")
    parent.add_argument("--tol", help="solver tolerance")
    parent.add_argument("--seed", help="seed of the random root policy")
    parent.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level on stderr",
    )
    return parent


def build_parser() -> argparse.ArgumentParser:
    """
    Command-line parser with one subcommand per computation.
    """
    common = _global_parent()
    demand = _demand_parent()
    parser = argparse.ArgumentParser(
        prog="equilibria",
        description="Equilibria of economies with computationally constrained agents.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("ree", parents=[common, demand], help="rational-expectations point")

    polyeq = commands.add_parser("polyeq", help="polynomial-approximation equilibria")
    variants = polyeq.add_subparsers(dest="variant", required=True)
    for name in _POLYEQ_VARIANTS:
        sub = variants.add_parser(name, parents=[common, demand])
        if name in ("first-order", "second-order"):
            sub.add_argument("--tau", help="discount coefficient (default 1)")
        if name in ("param-change", "alt-discount"):
            sub.add_argument("--delta-b", dest="delta_b", help="parameter change")
        if name in ("param-change", "bounds"):
            sub.add_argument("--tau1", help="discount on ΔA² (default 1)")
            sub.add_argument("--tau2", help="discount on Δb² (default 0)")
            sub.add_argument("--tau3", help="discount on |ΔA||Δb| (default 0)")

    learn = commands.add_parser("learn", parents=[common, demand], help="learning trace")
    learn.add_argument("--prior", required=True, help="prior point μ")
    learn.add_argument("--policy", help="plus | minus | alternate | random:<seed>")
    learn.add_argument("--tmax", help="maximal number of periods (default 200)")

    asyminfo = commands.add_parser(
        "asyminfo", parents=[common, demand], help="dispersed-information equilibrium"
    )
    asyminfo.add_argument(
        "--density", required=True, help="uniform:lo,hi | gauss:mean,sd,lo,hi | point:at"
    )
    asyminfo.add_argument("--branch", help="plus | minus (default plus)")
    asyminfo.add_argument("--quad-n", dest="quad_n", help="Simpson nodes, odd >= 11")

    verify = commands.add_parser("verify", parents=[common], help="re-check a result CSV")
    verify.add_argument("path", type=Path)

    sweep = commands.add_parser("sweep", parents=[common], help="run a scenario file")
    sweep.add_argument("scenario", type=Path)
    return parser


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    """
    Translate direct-command flags into scenario keys.
    """
    if args.command == "polyeq":
        variant = _POLYEQ_VARIANTS[args.variant]
    else:
        variant = args.command
    values = {"solver.variant": variant}
    for flags in (_DEMAND_FLAGS, _SOLVER_FLAGS):
        for dest, key in flags.items():
            value = getattr(args, dest, None)
            if value is not None:
                values[key] = str(value)
    return scenario_from_mapping(values)


def _with_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    values = {**scenario.resolved()}
    if args.tol is not None:
        values["solver.tol"] = args.tol
    if args.seed is not None:
        values["solver.seed"] = args.seed
    if scenario.output.path is not None:
        values["output.path"] = str(scenario.output.path)
    return scenario_from_mapping(values)


#######################################################################
## Launch #############################################################
#######################################################################


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the CLI.

    Args:
        argv (Sequence[str] | None, optional): Arguments, defaults to
            ``sys.argv[1:]``.

    Returns:
        int: Exit status (0 ok, 2 configuration, 3 solver, 4 invariant).
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "verify":
            count = verify_file(args.path)
            sys.stdout.write(f"verified {count} rows\n")
            return EXIT_OK
        if args.command == "sweep":
            scenario = _with_overrides(load_scenario(args.scenario), args)
        else:
            scenario = scenario_from_args(args)
        df, notes = run_scenario(scenario)
        check_rows(df)
        text = render_csv(df, scenario.resolved(), notes)
        write_output(text, args.out or scenario.output.path)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except SolverError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_SOLVER
    except InvariantViolation as exc:
        logger.error("invariant violated: %s", exc)
        sys.stderr.write(f"offending row: {exc.row}\n")
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

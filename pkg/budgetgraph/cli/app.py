"""
Command-line entry point.

    simulate       run a configured batch of trials
    curves         time/budget tradeoff curves as CSV
    oracle         exact optimal success probability on a tiny instance
    coupling-test  validators for the coupling samplers and the FKG check
"""
import argparse
import logging
from typing import Optional, Sequence

from budgetgraph import __version__
from budgetgraph.cli.commands import fail, run_coupling_test, run_curves, run_oracle, run_simulate
from budgetgraph.config import Settings, load_settings
from budgetgraph.errors import ConfigError

logger = logging.getLogger(__name__)

COMMANDS = {
    "simulate": run_simulate,
    "curves": run_curves,
    "oracle": run_oracle,
    "coupling-test": run_coupling_test,
}


def _common(parser: argparse.ArgumentParser, settings: Settings) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master seed; mandatory in CI mode")
    parser.add_argument("--out-dir", default=settings.out_dir, help="output directory (default: %(default)s)")
    parser.add_argument("--log-level", default=settings.log_level, help="logging level (default: %(default)s)")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="budgetgraph", description="Budget-constrained random graph process experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{simulate,curves,oracle,coupling-test}")
    sub.required = True

    simulate = sub.add_parser("simulate", help="run a batch of trials from a config file")
    simulate.add_argument("--config", required=True, help="INI config with [process], [strategy], [checker]")
    simulate.add_argument("--jobs", type=int, default=settings.jobs, help="worker processes (default: %(default)s)")
    simulate.add_argument("--timing", action="store_true", help="record wall time in summary.csv")
    _common(simulate, settings)

    curves = sub.add_parser("curves", help="budget exponent curves as CSV")
    curves.add_argument("--clique", type=int, nargs="*", help="clique orders r")
    curves.add_argument("--pattern", nargs="*", help="patterns (K3, Pq^k:q=5,k=2 or a file)")
    curves.add_argument("--ham-power", type=int, nargs="*", help="Hamilton cycle powers k")
    curves.add_argument(
        "--kind",
        choices=["lower_bound", "strategy_budget_full", "strategy_budget_partial"],
        default="lower_bound",
    )
    curves.add_argument("--n", type=int, default=None, help="add the polylog correction for this n")
    curves.add_argument("--points", type=int, default=50, help="grid points (default: %(default)s)")
    curves.add_argument("--x", nargs="*", help="explicit grid values, e.g. 4/3 2")
    _common(curves, settings)

    oracle = sub.add_parser("oracle", help="exact optimal success probability")
    oracle.add_argument("--n", type=int, required=True)
    oracle.add_argument("--t", type=int, required=True)
    oracle.add_argument("--b", type=int, required=True)
    oracle.add_argument("--checker", default="triangle", help="named increasing property (default: %(default)s)")
    oracle.add_argument("--dump", action="store_true", help="include the value of every state")
    oracle.add_argument("--simulate", type=int, default=0, help="Monte Carlo trials of the optimal policy")
    _common(oracle, settings)

    coupling = sub.add_parser("coupling-test", help="coupling and FKG validators")
    coupling.add_argument("--test", choices=["multistage", "sandwich", "gnm", "fkg"], default="multistage")
    coupling.add_argument("--samples", type=int, default=100_000)
    coupling.add_argument("--n", type=int, default=4, help="vertices for the multistage law and the FKG catalogue")
    coupling.add_argument("--p", default="1/2", help="edge probability for the FKG catalogue")
    coupling.add_argument(
        "--stage-lengths", type=int, nargs="+", default=[2, 2], help="multistage edge counts t_1..t_k (default: %(default)s)"
    )
    coupling.add_argument(
        "--stage-p", type=float, nargs="+", default=[0.3, 0.3], help="multistage probabilities p_i (default: %(default)s)"
    )
    coupling.add_argument(
        "--stage-pbar", type=float, nargs="+", default=[0.05, 0.05], help="multistage surplus probabilities (default: %(default)s)"
    )
    _common(coupling, settings)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, configure logging and dispatch.

    Returns:
        0 on success, 2 on usage, config or parameter errors. Argument
        parsing errors exit with 2 through argparse.
    """
    try:
        settings = load_settings()
    except ConfigError as e:
        return fail(str(e))
    args = build_parser(settings).parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.seed is None:
        if settings.ci:
            return fail("--seed is required when BUDGETGRAPH_CI is set")
        logger.warning("no --seed given; using 0")
        args.seed = 0
    return COMMANDS[args.command](args)

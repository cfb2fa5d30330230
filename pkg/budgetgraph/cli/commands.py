"""Subcommand handlers; each returns the process exit code."""
import argparse
import logging
import sys
import time
from fractions import Fraction
from typing import List

from budgetgraph.bounds import BoundSpec, curve_table, exponent_grid
from budgetgraph.checkers import GRAPH_PROPERTIES
from budgetgraph.config import config_hash, load_config
from budgetgraph.couplings import fkg_catalogue, validate_gnm, validate_multistage, validate_sandwich
from budgetgraph.engine import run_batch
from budgetgraph.errors import BudgetGraphError
from budgetgraph.models import SummaryRow
from budgetgraph.oracle import optimal_success, simulate_policy_value
from budgetgraph.patterns import parse_pattern, pattern_stats
from budgetgraph.strategies.registry import build_strategy, strategy_params
from budgetgraph.utils import dumps, header_line, summary_csv, trials_jsonl, with_header, write_output

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2


def fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _arguments_hash(args: argparse.Namespace, keys: List[str]) -> str:
    """Config hash for subcommands driven by flags instead of a config file."""
    text = "".join(f"{key}={getattr(args, key)}\n" for key in sorted(keys))
    return config_hash(f"[{args.command}]\n{text}")


def run_simulate(args: argparse.Namespace) -> int:
    """Run a batch and write trials.jsonl, summary.csv and, if any, strategy_params.json."""
    try:
        config, digest = load_config(args.config)
        strategy = build_strategy(config)
        params = strategy_params(config)
        started = time.perf_counter()
        outcomes = run_batch(config, args.seed, jobs=args.jobs)
        elapsed = time.perf_counter() - started
    except BudgetGraphError as e:
        return fail(str(e))

    header = header_line(digest, args.seed)
    records = [outcome.to_record(i) for i, outcome in enumerate(outcomes)]
    row = SummaryRow(
        strategy=config.strategy.name,
        n=config.process.n,
        t=config.process.resolved_t,
        b=strategy.budget,
        trials=len(outcomes),
        successes=sum(o.success for o in outcomes),
        mean_budget_used=sum(o.budget_used for o in outcomes) / len(outcomes) if outcomes else 0.0,
        seconds=elapsed if args.timing else 0.0,
    )
    written = [
        write_output(args.out_dir, "trials.jsonl", trials_jsonl(header, records)),
        write_output(args.out_dir, "summary.csv", summary_csv(header, [row])),
    ]
    if params is not None:
        written.append(write_output(args.out_dir, "strategy_params.json", with_header(header, dumps(params))))
    for path in written:
        print(f"wrote {path}")
    print(f"{row.successes}/{row.trials} successes")
    return EXIT_OK


def _curve_specs(args: argparse.Namespace) -> List[BoundSpec]:
    specs = [BoundSpec("clique_factor", r, args.kind) for r in args.clique or []]
    for name in args.pattern or []:
        stats = pattern_stats(parse_pattern(name), name=name)
        specs.append(BoundSpec("f_factor", stats.max_one_density, args.kind, pattern_order=stats.order))
    specs.extend(BoundSpec("ham_power", k, args.kind) for k in args.ham_power or [])
    return specs


def run_curves(args: argparse.Namespace) -> int:
    """Write curves.csv for the requested families."""
    try:
        specs = _curve_specs(args)
        if args.x:
            grid = [Fraction(x) for x in args.x]
        elif specs:
            grid = exponent_grid(specs, args.points)
        else:
            grid = []
        table = curve_table(specs, grid, n=args.n)
    except (BudgetGraphError, ValueError) as e:
        return fail(str(e))
    digest = _arguments_hash(args, ["clique", "pattern", "ham_power", "kind", "n", "points", "x"])
    path = write_output(args.out_dir, "curves.csv", with_header(header_line(digest, args.seed), table))
    print(f"wrote {path}")
    return EXIT_OK


def run_oracle(args: argparse.Namespace) -> int:
    """Exact optimal success probability; optionally the full table and a Monte Carlo check."""
    if args.checker not in GRAPH_PROPERTIES:
        return fail(f"unknown checker '{args.checker}'; choose from {', '.join(sorted(GRAPH_PROPERTIES))}")
    checker = GRAPH_PROPERTIES[args.checker]
    try:
        result = optimal_success(args.n, args.t, args.b, checker, args.checker)
    except BudgetGraphError as e:
        return fail(str(e))
    payload = result.to_json() if args.dump else {"report": result.to_report().model_dump()}
    if args.simulate:
        payload["simulated_rate"] = simulate_policy_value(result, checker, args.simulate, args.seed)
    digest = _arguments_hash(args, ["n", "t", "b", "checker", "dump", "simulate"])
    path = write_output(args.out_dir, "oracle.json", with_header(header_line(digest, args.seed), dumps(payload)))
    print(f"wrote {path}")
    print(f"optimal success {payload['report']['value']}")
    return EXIT_OK


def run_coupling_test(args: argparse.Namespace) -> int:
    """Run one coupling validator and write its JSON report."""
    try:
        if args.test == "multistage":
            payload = validate_multistage(
                n=args.n,
                stage_lengths=args.stage_lengths,
                p_list=args.stage_p,
                pbar_list=args.stage_pbar,
                samples=args.samples,
                rng=args.seed,
            ).model_dump()
        elif args.test == "sandwich":
            payload = validate_sandwich(samples=args.samples, rng=args.seed).model_dump()
        elif args.test == "gnm":
            payload = validate_gnm(samples=args.samples, rng=args.seed).model_dump()
        else:
            payload = {"reports": [r.model_dump() for r in fkg_catalogue(args.n, args.p)]}
    except BudgetGraphError as e:
        return fail(str(e))
    digest = _arguments_hash(args, ["test", "samples", "n", "p", "stage_lengths", "stage_p", "stage_pbar"])
    name = f"coupling_{args.test}.json"
    path = write_output(args.out_dir, name, with_header(header_line(digest, args.seed), dumps(payload)))
    print(f"wrote {path}")
    return EXIT_OK

import json
import os
from typing import Any, Iterable, List, Optional

from budgetgraph import __version__
from budgetgraph.models import SummaryRow, TrialRecord

SUMMARY_COLUMNS = ("strategy", "n", "t", "b", "trials", "successes", "mean_budget_used", "seconds")


def header_line(config_hash: str, seed: Optional[int]) -> str:
    """
    Comment line opening every output file.

    Args:
        config_hash: Hash of the config or of the canonical subcommand arguments
        seed: Master seed, or None when the run used none

    Returns:
        The line, without a trailing newline
    """
    return f"# budgetgraph {__version__} config={config_hash} seed={'none' if seed is None else seed}"


def dumps(data: Any) -> str:
    """Compact JSON with sorted keys, so equal data gives equal bytes."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def trials_jsonl(header: str, records: Iterable[TrialRecord]) -> str:
    lines = [header]
    lines.extend(dumps(record.model_dump()) for record in records)
    return "\n".join(lines) + "\n"


def format_summary_row(row: SummaryRow) -> str:
    """One summary.csv row with fixed decimals."""
    return (
        f"{row.strategy},{row.n},{row.t},{row.b},{row.trials},{row.successes},"
        f"{row.mean_budget_used:.3f},{row.seconds:.3f}"
    )


def summary_csv(header: str, rows: List[SummaryRow]) -> str:
    lines = [header, ",".join(SUMMARY_COLUMNS)]
    lines.extend(format_summary_row(row) for row in rows)
    return "\n".join(lines) + "\n"


def with_header(header: str, body: str) -> str:
    """Prefix ``body`` with the header line."""
    return header + "\n" + body if body.endswith("\n") else header + "\n" + body + "\n"


def write_output(out_dir: str, name: str, text: str) -> str:
    """
    Write ``text`` to ``out_dir/name`` with '\\n' line endings.

    Returns:
        The path written
    """
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return path

"""
Environment defaults and experiment config parsing.

Environment variables (optionally seeded from a ``.env`` file by the entry
script):

    BUDGETGRAPH_CI         when truthy, --seed is mandatory
    BUDGETGRAPH_JOBS       default worker count
    BUDGETGRAPH_OUT_DIR    default output directory
    BUDGETGRAPH_LOG_LEVEL  logging level name
"""
import configparser
import hashlib
import logging
import os
from dataclasses import dataclass
from typing import Tuple

from pydantic import ValidationError

from budgetgraph.errors import ConfigError
from budgetgraph.models import ExperimentConfig

logger = logging.getLogger(__name__)

SECTIONS = ("process", "strategy", "checker")


@dataclass(frozen=True)
class Settings:
    ci: bool
    jobs: int
    out_dir: str
    log_level: str


def _truthy(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "on")


def load_settings() -> Settings:
    """Read the environment defaults."""
    jobs = os.getenv("BUDGETGRAPH_JOBS", "1")
    try:
        jobs_value = max(1, int(jobs))
    except ValueError:
        raise ConfigError("BUDGETGRAPH_JOBS", f"not an integer: {jobs!r}")
    return Settings(
        ci=_truthy(os.getenv("BUDGETGRAPH_CI", "")),
        jobs=jobs_value,
        out_dir=os.getenv("BUDGETGRAPH_OUT_DIR", "results"),
        log_level=os.getenv("BUDGETGRAPH_LOG_LEVEL", "WARNING").upper(),
    )


def canonical_config_text(parser: configparser.ConfigParser) -> str:
    """Sections and keys sorted, one ``key=value`` per line."""
    lines = []
    for section in sorted(parser.sections()):
        lines.append(f"[{section}]")
        for key in sorted(parser[section]):
            lines.append(f"{key}={parser[section][key].strip()}")
    return "\n".join(lines) + "\n"


def config_hash(canonical_text: str) -> str:
    return hashlib.sha256(canonical_text.encode("utf-8")).hexdigest()[:16]


def parse_config(text: str) -> Tuple[ExperimentConfig, str]:
    """
    Parse and validate an experiment config.

    Args:
        text: INI text with [process], [strategy] and [checker] sections

    Returns:
        Tuple of the validated config and its hash

    Raises:
        ConfigError: Naming the failing ``section.field``
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError("config", str(e)) from e
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(section, "unknown section")
    data = {
        section: {key: value.strip() for key, value in parser[section].items() if value.strip()}
        for section in parser.sections()
    }
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError(field, first["msg"]) from e
    return config, config_hash(canonical_config_text(parser))


def load_config(path: str) -> Tuple[ExperimentConfig, str]:
    """Read a config file from disk; a missing file is a ConfigError."""
    if not os.path.isfile(path):
        raise ConfigError("config", f"file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, fields

from edge_dynamics.errors import GossipDynError

THREADS_ENV = "GOSSIPDYN_THREADS"
DB_ENV = "GOSSIPDYN_DB"
LOG_LEVEL_ENV = "GOSSIPDYN_LOG_LEVEL"

LOG_FORMAT = "[%(name)s] %(message)s"


class ConfigError(GossipDynError, ValueError):
    """Bad flags, bad config file or bad family constants."""


def setup_logging(level: str | int | None = None):
    if level is None:
        level = os.getenv(LOG_LEVEL_ENV, "INFO")
    if isinstance(level, str):
        level = level.upper()
    # No-op when the root logger already has handlers
    logging.basicConfig(format=LOG_FORMAT)
    logging.getLogger().setLevel(level)


def thread_limit() -> int:
    raw = os.getenv(THREADS_ENV)
    if not raw:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1, got {value}")
    return value


def default_db_path() -> str | None:
    return os.getenv(DB_ENV) or None


def load_config(path: str) -> dict:
    """Load a JSON config file into a dict of flag values."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    # Allow "n-grid" as well as "n_grid"
    return {key.replace("-", "_"): value for key, value in data.items()}


def parse_grid(value) -> list[int]:
    """'64,128,256' or [64, 128, 256] -> [64, 128, 256]."""
    if isinstance(value, int):
        items = [value]
    elif isinstance(value, str):
        items = [part for part in value.split(",") if part.strip()]
    else:
        items = list(value)
    try:
        grid = [int(item) for item in items]
    except (TypeError, ValueError):
        raise ConfigError(f"grid must be a list of integers, got {value!r}")
    if not grid:
        raise ConfigError("grid is empty")
    if any(n < 1 for n in grid):
        raise ConfigError(f"grid values must be >= 1, got {grid}")
    return grid


@dataclass
class SweepConfig:
    """Everything one sweep, comparison or check needs; deterministic given seed."""

    family: "ParamFamily"
    n_grid: list[int] = field(default_factory=lambda: [64])
    trials: int = 100
    protocol: "Protocol" = "push"
    rate: "RateFamily | None" = None
    seed: int = 0
    cap: int | None = None
    threads: int | None = None

    def __post_init__(self):
        from protocols.rounds import Protocol

        from .families import default_rate, validate_rates

        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.cap is not None and self.cap < 1:
            raise ConfigError(f"cap must be >= 1, got {self.cap}")
        try:
            self.protocol = Protocol(self.protocol)
        except ValueError:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        self.n_grid = parse_grid(self.n_grid)
        self.family.validate(self.n_grid)
        if self.rate is None:
            self.rate = default_rate(self.protocol, self.family)
        validate_rates(self.rate, self.family, self.n_grid)
        if self.threads is None:
            self.threads = thread_limit()

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "family"}

"""
Monte Carlo sweeps over an n-grid.

Each trial owns its RNG streams, derived from (seed, n, trial index), so a
cell's results do not depend on how trials are scheduled across threads.
"""
from __future__ import annotations

import asyncio
import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, TypeVar

import numpy as np

from dynamic_graph import streams
from dynamic_graph.state import EdgeProcessSpec, init_coupled_stationary, init_stationary
from edge_dynamics.errors import DegenerateLawError
from edge_dynamics.params import IidEdgeParams
from markov_sst.stationary_times import refresh_coupling_steps
from protocols.rounds import InformedSet, Protocol, flood_round
from protocols.run import RunResult, default_cap, run, run_coupled_flood

from .config import ConfigError, SweepConfig
from .families import FamilyKind, RateFamily, rate_value

log = logging.getLogger("sweep")

T = TypeVar("T")

# Max over the grid of p50 / r(n) divided by the min
BOUNDED_RATIO_SLACK = 4.0


@dataclass(frozen=True)
class SweepRow:
    n: int
    protocol: str
    dynamics: str
    trials: int
    p10: float
    p50: float
    p90: float
    censored: int
    rate: float
    ratio: float
    seed: int
    iid_p50: float | None = None
    dep_iid_ratio: float | None = None


@dataclass
class SweepReport:
    rows: list[SweepRow]
    config: SweepConfig

    def records(self) -> list[dict]:
        return [asdict(row) for row in self.rows]

    def ratio_spread(self) -> float:
        """max / min of p50 / r(n) over the grid."""
        return ratio_spread(row.ratio for row in self.rows)


def ratio_spread(ratios) -> float:
    values = [r for r in ratios if r > 0 and math.isfinite(r)]
    if not values:
        return math.inf
    return max(values) / min(values)


def is_bounded(ratios, slack: float = BOUNDED_RATIO_SLACK) -> bool:
    return ratio_spread(ratios) <= slack


# -----------------------------
# Trial scheduling
# -----------------------------
async def _gather_trials(fn: Callable[[int], T], trials: int, threads: int) -> list[T]:
    """Run fn(index) for every trial index on worker threads; results in index order."""
    semaphore = asyncio.Semaphore(threads)

    async def one(index: int) -> T:
        async with semaphore:
            return await asyncio.to_thread(fn, index)

    return list(await asyncio.gather(*(one(i) for i in range(trials))))


def run_trials(fn: Callable[[int], T], trials: int, threads: int) -> list[T]:
    return asyncio.run(_gather_trials(fn, trials, threads))


def trial_source(trial_seed: int, n: int) -> int:
    return int(streams.generator(trial_seed, streams.SOURCE).integers(n))


def trial(spec: EdgeProcessSpec, protocol: Protocol, cap: int, seed: int, index: int) -> RunResult:
    """One trial on a fresh stationary start with a uniformly drawn source."""
    trial_seed = streams.derive_seed(seed, spec.n, index)
    state = init_stationary(spec, trial_seed)
    return run(state, protocol, trial_source(trial_seed, spec.n), cap)


def summarize(results: list[RunResult]) -> tuple[float, float, float, int]:
    """(p10, p50, p90, censored); censored trials count at the cap."""
    values = np.array([r.rounds_or_cap for r in results], dtype=float)
    p10, p50, p90 = np.quantile(values, [0.1, 0.5, 0.9])
    censored = sum(r.censored for r in results)
    return float(p10), float(p50), float(p90), censored


def _cell_rate(config: SweepConfig, n: int, pi1: float) -> float:
    if n < 2:
        return 0.0
    return rate_value(config.rate, n, pi1, config.family.k)


def _cell_cap(config: SweepConfig, rate: float) -> int:
    return config.cap if config.cap is not None else default_cap(rate)


def _sweep_cell(config: SweepConfig, spec: EdgeProcessSpec, dynamics: str) -> SweepRow:
    n = spec.n
    rate = _cell_rate(config, n, spec.pi1)
    cap = _cell_cap(config, rate)
    results = run_trials(lambda i: trial(spec, config.protocol, cap, config.seed, i), config.trials, config.threads)
    p10, p50, p90, censored = summarize(results)
    if censored:
        log.warning("n=%d: %d/%d trials censored at cap %d", n, censored, config.trials, cap)
    ratio = p50 / rate if rate > 0 else math.nan
    log.info("n=%d %s/%s: p50 %.6g, ratio %.6g", n, config.protocol.value, dynamics, p50, ratio)
    return SweepRow(n, config.protocol.value, dynamics, config.trials, p10, p50, p90, censored, rate, ratio, config.seed)


def run_sweep(config: SweepConfig) -> SweepReport:
    """Completion-time quantiles per n of the grid."""
    rows = [_sweep_cell(config, config.family.spec(n), config.family.dynamics) for n in config.n_grid]
    return SweepReport(rows, config)


# -----------------------------
# Dependent vs i.i.d.
# -----------------------------
def dependent_vs_iid(config: SweepConfig) -> SweepReport:
    """
    Matched sweeps on the dependent dynamics and on ER(pi1) with the exact pi1.

    Both sides use the same trial seeds, so the sources agree trial by trial.
    Each row keeps ratio = p50 / rate, iid_p50 holds the baseline median and
    dep_iid_ratio holds p50_dep / p50_iid.
    """
    rows = []
    for n in config.n_grid:
        spec = config.family.spec(n)
        pi1 = spec.pi1
        if pi1 <= 0.0:
            raise DegenerateLawError("degenerate stationary graph")
        dependent = _sweep_cell(config, spec, config.family.dynamics)
        baseline = _sweep_cell(config, EdgeProcessSpec(n, IidEdgeParams(pi1)), "iid")
        if baseline.p50 > 0:
            dep_iid_ratio = dependent.p50 / baseline.p50
        else:
            dep_iid_ratio = 1.0 if dependent.p50 == 0 else math.inf
        rows.append(
            SweepRow(n, dependent.protocol, dependent.dynamics, dependent.trials, dependent.p10, dependent.p50,
                     dependent.p90, dependent.censored, dependent.rate, dependent.ratio, dependent.seed, baseline.p50,
                     dep_iid_ratio)
        )
    return SweepReport(rows, config)


# -----------------------------
# Flood rate check
# -----------------------------
@dataclass(frozen=True)
class FloodRow:
    n: int
    trials: int
    p50: float
    rate: float
    ratio: float
    censored: int
    lower_p50: float | None = None
    dominance_failures: int = 0


def _completion_key(result: RunResult) -> float:
    return math.inf if result.censored else result.completion_rounds


def _coupled_trial(config: SweepConfig, n: int, cap: int, index: int) -> tuple[RunResult, RunResult]:
    trial_seed = streams.derive_seed(config.seed, n, index)
    lower, upper = init_coupled_stationary(config.family.lower_spec(n), config.family.spec(n), trial_seed)
    return run_coupled_flood(lower, upper, trial_source(trial_seed, n), cap)


def flood_rate_check(config: SweepConfig) -> list[FloodRow]:
    """
    p50 of Flood divided by the family's flood rate, per n.

    For the persistent family the coupled pair is run on shared seeds and every
    trial must finish on the upper graph no later than on the lower one.
    """
    if config.protocol != Protocol.FLOOD:
        raise ConfigError("flood_rate_check runs the flood protocol")
    rows = []
    for n in config.n_grid:
        spec = config.family.spec(n)
        rate = _cell_rate(config, n, spec.pi1)
        cap = _cell_cap(config, rate)
        if config.family.kind == FamilyKind.PERSISTENT:
            pairs = run_trials(lambda i: _coupled_trial(config, n, cap, i), config.trials, config.threads)
            lowers = [lo for lo, _ in pairs]
            uppers = [up for _, up in pairs]
            failures = sum(_completion_key(up) > _completion_key(lo) for lo, up in pairs)
            if failures:
                log.warning("n=%d: %d trials finished later on the larger graph", n, failures)
            lower_p50 = summarize(lowers)[1]
        else:
            uppers = run_trials(lambda i: trial(spec, Protocol.FLOOD, cap, config.seed, i), config.trials, config.threads)
            failures, lower_p50 = 0, None
        _, p50, _, censored = summarize(uppers)
        ratio = p50 / rate if rate > 0 else math.nan
        log.info("n=%d flood: p50 %.6g, ratio %.6g", n, p50, ratio)
        rows.append(FloodRow(n, config.trials, p50, rate, ratio, censored, lower_p50, failures))
    return rows


# -----------------------------
# Strategy check
# -----------------------------
@dataclass(frozen=True)
class StrategyTrial:
    full: int | None
    subsampled: int | None
    subsampled_time: int | None

    @property
    def dominated(self) -> bool:
        """Full completion no later than the subsampled completion time, when the latter exists."""
        if self.subsampled_time is None:
            return True
        return self.full is not None and self.full <= self.subsampled_time


@dataclass(frozen=True)
class StrategyRow:
    n: int
    trials: int
    p50_full: float
    p50_subsampled: float
    p50_subsampled_time: float
    censored: int
    violations: int


def strategy_trial(spec: EdgeProcessSpec, cap: int, seed: int, index: int) -> StrategyTrial:
    """
    Flood on every snapshot and, separately, only on snapshots at stationary times.

    Times count steps of the refresh coupling; with Delta < 0 a step is two
    chain steps. The subsampled snapshots are i.i.d. ER(pi1) graphs.
    """
    n = spec.n
    if n == 1:
        return StrategyTrial(0, 0, 0)
    trial_seed = streams.derive_seed(seed, n, index)
    state = init_stationary(spec, trial_seed)
    source = trial_source(trial_seed, n)
    informed_full = InformedSet.single(n, source)
    informed_sub = InformedSet.single(n, source)
    full = None
    sub_rounds = 0
    for step in refresh_coupling_steps(state):
        if full is None:
            informed_full = flood_round(step.snapshot, informed_full)
            if informed_full.count == n:
                full = step.time
        if step.stationary:
            informed_sub = flood_round(step.snapshot, informed_sub)
            sub_rounds += 1
            if informed_sub.count == n:
                return StrategyTrial(full, sub_rounds, step.time)
        if step.time >= cap:
            return StrategyTrial(full, None, None)


def _median_or_cap(values, cap: int) -> float:
    return float(np.median([cap if v is None else v for v in values]))


def strategy_check(config: SweepConfig) -> list[StrategyRow]:
    if config.family.dynamics != "markov":
        raise ConfigError("the strategy check needs an edge-Markovian family")
    rows = []
    for n in config.n_grid:
        spec = config.family.spec(n)
        rate = rate_value(RateFamily.FLOOD_RATE, n, spec.pi1) if n >= 2 else 0.0
        cap = _cell_cap(config, rate)
        trials = run_trials(lambda i: strategy_trial(spec, cap, config.seed, i), config.trials, config.threads)
        violations = sum(not t.dominated for t in trials)
        censored = sum(t.subsampled_time is None for t in trials)
        if violations:
            log.warning("n=%d: %d trials where the full run finished after the subsampled one", n, violations)
        rows.append(StrategyRow(
            n, config.trials,
            _median_or_cap((t.full for t in trials), cap),
            _median_or_cap((t.subsampled for t in trials), cap),
            _median_or_cap((t.subsampled_time for t in trials), cap),
            censored, violations,
        ))
        log.info("n=%d strategy: p50 full %.6g, p50 subsampled time %.6g", n, rows[-1].p50_full, rows[-1].p50_subsampled_time)
    return rows

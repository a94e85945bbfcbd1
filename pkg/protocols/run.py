from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator

from dynamic_graph import streams
from dynamic_graph.snapshot import GraphSnapshot
from dynamic_graph.state import DynamicGraphState, advance, coupled_advance
from edge_dynamics.errors import CouplingError, InvalidParamsError

from .rounds import InformedSet, Protocol, apply_round, flood_round

log = logging.getLogger("protocols")

MIN_CAP = 1000


def default_cap(rate: float) -> int:
    """max(1000, 50 * r(n)) rounds."""
    return max(MIN_CAP, int(50 * rate))


@dataclass(frozen=True)
class RunResult:
    """Completion record of one trial; completion_rounds is None when censored."""

    completion_rounds: int | None
    cap: int
    informed_trajectory: tuple[int, ...]
    protocol: Protocol
    seed: int

    @property
    def censored(self) -> bool:
        return self.completion_rounds is None

    @property
    def rounds_or_cap(self) -> int:
        """Completion time with censored runs reported at the cap."""
        return self.cap if self.completion_rounds is None else self.completion_rounds


def run_sequence(
    snapshots: Iterable[GraphSnapshot],
    n: int,
    protocol: Protocol,
    source: int,
    cap: int,
    seed: int,
) -> RunResult:
    """Spread a rumor over a given sequence of snapshots, one round per snapshot."""
    if cap < 1:
        raise InvalidParamsError(f"cap must be >= 1, got {cap}")
    protocol = Protocol(protocol)
    informed = InformedSet.single(n, source)
    trajectory = [informed.count]
    rounds = 0
    feed: Iterator[GraphSnapshot] = iter(snapshots)

    while informed.count < n and rounds < cap:
        snapshot = next(feed)
        rng = streams.generator(seed, streams.PROTOCOL, rounds + 1)
        informed = apply_round(protocol, snapshot, informed, rng)
        rounds += 1
        trajectory.append(informed.count)

    completion = rounds if informed.count == n else None
    if completion is None:
        log.debug("%s censored at %d rounds (%d/%d informed)", protocol.value, cap, informed.count, n)
    return RunResult(completion, cap, tuple(trajectory), protocol, seed)


def _evolve(state: DynamicGraphState) -> Iterator[GraphSnapshot]:
    while True:
        yield advance(state)


def run(state: DynamicGraphState, protocol: Protocol, source: int, cap: int) -> RunResult:
    """
    Run a protocol to completion on an evolving graph.

    The graph advances first and each round acts on the fresh snapshot, so
    the time-0 snapshot is never used.
    """
    return run_sequence(_evolve(state), state.n, protocol, source, cap, state.seed)


def run_coupled_flood(
    lower: DynamicGraphState, upper: DynamicGraphState, source: int, cap: int
) -> tuple[RunResult, RunResult]:
    """Flood on a monotone-coupled pair; both edge and informed sets stay nested."""
    if cap < 1:
        raise InvalidParamsError(f"cap must be >= 1, got {cap}")
    n = lower.n
    informed_lo = InformedSet.single(n, source)
    informed_up = InformedSet.single(n, source)
    traj_lo, traj_up = [1], [1]
    done_lo = 0 if n == 1 else None
    done_up = 0 if n == 1 else None
    rounds = 0

    while (done_lo is None or done_up is None) and rounds < cap:
        snap_lo, snap_up = coupled_advance(lower, upper)
        rounds += 1
        if not snap_lo.issubset(snap_up):
            raise CouplingError(f"edge containment violated at round {rounds}")
        informed_lo = flood_round(snap_lo, informed_lo)
        informed_up = flood_round(snap_up, informed_up)
        if not informed_lo.issubset(informed_up):
            raise CouplingError(f"informed containment violated at round {rounds}")
        traj_lo.append(informed_lo.count)
        traj_up.append(informed_up.count)
        if done_lo is None and informed_lo.count == n:
            done_lo = rounds
        if done_up is None and informed_up.count == n:
            done_up = rounds

    return (
        RunResult(done_lo, cap, tuple(traj_lo), Protocol.FLOOD, lower.seed),
        RunResult(done_up, cap, tuple(traj_up), Protocol.FLOOD, upper.seed),
    )

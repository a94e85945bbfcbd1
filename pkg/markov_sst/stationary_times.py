"""
Strong stationary times for the edge-Markovian graph.

Two constructions live here. sample_strong_uniform_time draws a time whose
law is exactly the worst-case separation profile; it is used to check the
bounds. refresh_coupling_run realises stationary times inside a running
simulation through the representation P = Delta * I + (1 - Delta) * Lambda:
each step an edge refreshes to an independent stationary draw with
probability 1 - Delta and otherwise keeps its bit.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from dynamic_graph import streams
from dynamic_graph.snapshot import GraphSnapshot
from dynamic_graph.state import DynamicGraphState, EdgeProcessSpec, init_stationary
from edge_dynamics.errors import DegenerateLawError, InvalidParamsError
from edge_dynamics.markov import delta, markov_stationary
from edge_dynamics.params import MarkovEdgeParams

from .separation import SeparationProfile, graph_separation

log = logging.getLogger("sst")


# -----------------------------
# Law-level strong uniform time
# -----------------------------
def _check_finite(profile: SeparationProfile):
    if abs(delta(profile.params)) >= 1.0:
        raise DegenerateLawError("no finite strong uniform time (periodic or frozen chain)")


def sample_strong_uniform_times(profile: SeparationProfile, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draws of T with P(T > k) = s(k), by inverse CDF on the profile."""
    _check_finite(profile)
    u = 1.0 - rng.random(size)  # uniform on (0, 1]
    # T = min{k : s(k) < U}
    draws = np.searchsorted(-profile.values, -u, side="right")
    for i in np.flatnonzero(draws > profile.k_max):
        k = profile.k_max + 1
        while graph_separation(profile.params, profile.n_edges, k) >= u[i]:
            k += 1
        draws[i] = k
    return draws


def sample_strong_uniform_time(profile: SeparationProfile, rng: np.random.Generator) -> int:
    return int(sample_strong_uniform_times(profile, rng, 1)[0])


# -----------------------------
# Refresh coupling
# -----------------------------
@dataclass
class StationaryTimeRecord:
    """Stationary times t_0 = 0 < t_1 < ... and the snapshots seen at them."""

    times: list[int] = field(default_factory=lambda: [0])
    snapshots_at_times: list[GraphSnapshot] = field(default_factory=list)

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(np.asarray(self.times))


def refresh_parameters(params: MarkovEdgeParams) -> tuple[float, float, int]:
    """(keep probability, lambda1, step length) of the refresh representation."""
    d = delta(params)
    if abs(d) >= 1.0:
        raise DegenerateLawError("refresh coupling needs |Delta| < 1")
    lam1 = markov_stationary(params)[1]
    # For Delta < 0 work with P^2, whose Delta parameter is Delta^2 >= 0
    if d < 0.0:
        return d * d, lam1, 2
    return d, lam1, 1


@dataclass(frozen=True)
class RefreshStep:
    time: int
    snapshot: GraphSnapshot
    stationary: bool


def refresh_coupling_steps(state: DynamicGraphState) -> Iterator[RefreshStep]:
    """
    Evolve the graph through the refresh coupling, one block at a time.

    One uniform per edge per block: the edge refreshes iff u < 1 - Delta and
    the refreshed value is 1 iff u < (1 - Delta) * lambda1. Conditioned on a
    refresh, u / (1 - Delta) is uniform, so the new value is independent of
    the refresh pattern.
    """
    if state.spec.kind != "markov":
        raise InvalidParamsError("refresh coupling needs edge-Markovian dynamics")
    keep, lam1, step = refresh_parameters(state.spec.params)
    m = state.spec.n_edges
    refreshed = np.zeros(m, dtype=bool)

    while True:
        u = streams.edge_uniforms(state.seed, streams.REFRESH, state.time + step, m)
        hit = u < 1.0 - keep
        state.bits = np.where(hit, u < (1.0 - keep) * lam1, state.bits)
        state.time += step
        refreshed |= hit
        stationary = bool(refreshed.all())
        if stationary:
            refreshed[:] = False
        yield RefreshStep(state.time, state.snapshot(), stationary)


def refresh_coupling_run(state: DynamicGraphState, count: int, keep_snapshots: bool = True) -> StationaryTimeRecord:
    """Record t_0 = 0 and the next `count` times at which every edge has refreshed."""
    if count < 0:
        raise InvalidParamsError("count must be >= 0")
    record = StationaryTimeRecord(times=[state.time])
    if count == 0:
        return record
    for step in refresh_coupling_steps(state):
        if step.stationary:
            record.times.append(step.time)
            if keep_snapshots:
                record.snapshots_at_times.append(step.snapshot)
            if len(record.times) > count:
                break
    return record


# -----------------------------
# Block argument
# -----------------------------
def chernoff_tail_bound(s_ratio: float, r: float) -> float:
    """exp(-(1 - 1/s)^2 * s * r / 2)."""
    if s_ratio <= 1.0:
        raise InvalidParamsError(f"the block bound needs s > 1, got {s_ratio}")
    if r <= 0.0:
        raise InvalidParamsError(f"r must be positive, got {r}")
    return math.exp(-((1.0 - 1.0 / s_ratio) ** 2) * s_ratio * r / 2.0)


@dataclass(frozen=True)
class BlockTailEstimate:
    exceed_fraction: float
    trials: int
    blocks: int
    horizon: float
    spacings: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0, dtype=np.int64))


def block_tail_estimate(
    params: MarkovEdgeParams, n: int, C: float, D: float, r: float, trials: int, seed: int
) -> BlockTailEstimate:
    """Empirical P(t_{ceil(C r)} > D r) from independent refresh-coupled runs, with every spacing seen."""
    blocks = math.ceil(C * r)
    horizon = D * r
    spec = EdgeProcessSpec(n, params)
    exceed = 0
    spacings = []
    for trial in range(trials):
        state = init_stationary(spec, streams.derive_seed(seed, n, trial))
        record = refresh_coupling_run(state, blocks, keep_snapshots=False)
        exceed += record.times[blocks] > horizon
        spacings.append(record.spacings)
    log.debug("block tail n=%d: %d/%d runs beyond %.2f", n, exceed, trials, horizon)
    return BlockTailEstimate(exceed / trials, trials, blocks, horizon, np.concatenate(spacings))


def refresh_spacing_survival(params: MarkovEdgeParams, n_edges: int, k: int) -> float:
    """P(t_i - t_{i-1} > k): some edge has kept its bit for every block up to k."""
    keep, _, step = refresh_parameters(params)
    blocks = k // step
    if blocks <= 0:
        return 1.0
    if keep == 0.0:
        return 0.0
    return -math.expm1(n_edges * math.log1p(-(keep**blocks)))

"""
Coupling from the past for the edge-renewal graph.

Going backward from an anchor time, the first time at which every edge's
uniform is at most 1 - alpha forces a renewal on all edges regardless of
their past. From there the forward replay through step_renewal (the same
update the simulator uses) yields an exact stationary sample at the anchor.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from dynamic_graph import streams
from dynamic_graph.snapshot import GraphSnapshot, edge_count_for
from edge_dynamics.errors import CoalescenceError, InvalidParamsError
from edge_dynamics.params import RenewalEdgeParams
from edge_dynamics.renewal import constant_hazard, step_renewal_array
from markov_sst.stationary_times import chernoff_tail_bound

from .window import UniformWindow

log = logging.getLogger("cftp")

MAX_DEPTH_LIMIT = 10_000_000


@dataclass(frozen=True)
class CftpResult:
    theta0: int
    sample: GraphSnapshot
    work: int
    anchor: int = 0


@dataclass
class BackwardStationaryTimes:
    """t_1 = 0 > t_2 > ... > t_N, each with an independent perfect sample."""

    times: list[int] = field(default_factory=list)
    samples: list[GraphSnapshot] = field(default_factory=list)
    depths: list[int] = field(default_factory=list)

    @property
    def spacings(self) -> np.ndarray:
        return -np.diff(np.asarray(self.times))


def coalescence_probability(alpha: float, n: int) -> float:
    """Probability (1 - alpha)^C(n,2) that one backward step coalesces."""
    return (1.0 - alpha) ** edge_count_for(n)


def default_depth_limit(alpha: float, n: int) -> int:
    """50 expected coalescence waits."""
    success = coalescence_probability(alpha, n)
    if success <= 0.0:
        return MAX_DEPTH_LIMIT
    return int(min(MAX_DEPTH_LIMIT, math.ceil(50.0 / success)))


def coalescing_depth(
    params: RenewalEdgeParams,
    n: int,
    window: UniformWindow,
    anchor: int = 0,
    depth_limit: int | None = None,
) -> int:
    """Smallest i >= 0 with U_{anchor - i}^e <= 1 - alpha for every edge e."""
    limit = default_depth_limit(params.minorization_alpha, n) if depth_limit is None else depth_limit
    threshold = 1.0 - params.minorization_alpha
    for i in range(limit + 1):
        if np.all(window.row(anchor - i) <= threshold):
            return i
    raise CoalescenceError(f"coalescence not found within limit {limit}")


def replay(
    params: RenewalEdgeParams,
    window: UniformWindow,
    start: int,
    anchor: int,
    ages: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Roll edge ages forward from time start to anchor with the window's uniforms."""
    bits = ages > 1
    for t in range(start + 1, anchor + 1):
        bits, ages = step_renewal_array(ages, params, window.row(t))
    return bits, ages


def perfect_sample(
    params: RenewalEdgeParams,
    n: int,
    seed: int,
    anchor: int = 0,
    window: UniformWindow | None = None,
    depth_limit: int | None = None,
) -> CftpResult:
    """Exact draw from the stationary edge-renewal graph at the anchor time."""
    if window is None:
        window = UniformWindow(seed, edge_count_for(n))
    before = window.consumed
    theta0 = coalescing_depth(params, n, window, anchor, depth_limit)

    # Every edge renews at anchor - theta0
    renewed = np.ones(window.n_edges, dtype=np.int64)
    bits, _ = replay(params, window, anchor - theta0, anchor, renewed)
    return CftpResult(theta0, GraphSnapshot(n, bits), window.consumed - before, anchor)


def sample_from_arbitrary_past(
    params: RenewalEdgeParams,
    n: int,
    seed: int,
    ages: np.ndarray,
    anchor: int = 0,
) -> GraphSnapshot:
    """Start one step before coalescence from the given ages and roll forward."""
    window = UniformWindow(seed, edge_count_for(n))
    theta0 = coalescing_depth(params, n, window, anchor)
    bits, _ = replay(params, window, anchor - theta0 - 1, anchor, np.asarray(ages, dtype=np.int64))
    return GraphSnapshot(n, bits)


def backward_stationary_times(
    params: RenewalEdgeParams,
    n: int,
    count: int,
    seed: int,
    with_samples: bool = True,
) -> BackwardStationaryTimes:
    """
    Chain CFTP passes backward: anchor at 0, then one step before each coalescence.

    Passes read disjoint stretches of the window, so their samples are independent.
    """
    if count < 1:
        raise InvalidParamsError(f"count must be >= 1, got {count}")
    window = UniformWindow(seed, edge_count_for(n))
    result = BackwardStationaryTimes()
    anchor = 0
    for _ in range(count):
        if with_samples:
            pass_ = perfect_sample(params, n, seed, anchor, window)
            depth = pass_.theta0
            result.samples.append(pass_.sample)
        else:
            depth = coalescing_depth(params, n, window, anchor)
        result.times.append(anchor)
        result.depths.append(depth)
        window.release_above(anchor - depth)
        anchor = anchor - depth - 1
    return result


# -----------------------------
# Tail certificate
# -----------------------------
@dataclass(frozen=True)
class TailCertificate:
    bound: float
    empirical: float
    s_ratio: float
    alpha_graph: float
    blocks: int
    horizon: float
    trials: int


def cftp_tail_certificate(
    alpha_n: float, n: int, C: float, D: float, r: float, trials: int = 1000, seed: int = 0
) -> TailCertificate:
    """
    Chernoff bound on P(-t_{C r} > D r) next to its empirical frequency.

    Spacings are geometric with success probability (1 - alpha_n)^C(n,2), so
    only alpha_n matters; the empirical side uses the constant hazard 1 - alpha_n.
    """
    s_ratio = D / C - 1.0
    bound = chernoff_tail_bound(s_ratio, r)
    params = constant_hazard(1.0 - alpha_n)
    blocks = max(1, math.ceil(C * r))
    horizon = D * r
    exceed = 0
    for trial in range(trials):
        times = backward_stationary_times(params, n, blocks, streams.derive_seed(seed, n, trial), with_samples=False)
        exceed += -times.times[-1] > horizon
    alpha_graph = 1.0 - coalescence_probability(alpha_n, n)
    log.info("tail certificate n=%d: bound %.3g, empirical %.3g", n, bound, exceed / trials)
    return TailCertificate(bound, exceed / trials, s_ratio, alpha_graph, blocks, horizon, trials)


# -----------------------------
# Validation report
# -----------------------------
def validation_report(params: RenewalEdgeParams, n: int, samples: int, seed: int) -> dict:
    """{theta0_histogram, marginal_estimate, pi1_expected, ks_statistics} over independent passes."""
    m = edge_count_for(n)
    depths = np.empty(samples, dtype=np.int64)
    present = 0
    for i in range(samples):
        result = perfect_sample(params, n, streams.derive_seed(seed, n, i))
        depths[i] = result.theta0
        present += result.sample.edge_count

    success = coalescence_probability(params.minorization_alpha, n)
    ks = np.arange(0, int(depths.max()) + 1)
    empirical = np.array([(depths > k).mean() for k in ks])
    expected = (1.0 - success) ** (ks + 1)
    values, counts = np.unique(depths, return_counts=True)
    return {
        "theta0_histogram": {int(v): int(c) for v, c in zip(values, counts)},
        "marginal_estimate": present / (samples * m) if m else 0.0,
        "pi1_expected": params.pi1,
        "ks_statistics": {"theta0": float(np.abs(empirical - expected).max()), "samples": samples},
    }

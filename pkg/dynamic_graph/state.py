from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from edge_dynamics.errors import CouplingError, InvalidParamsError
from edge_dynamics.markov import markov_stationary, step_markov_array
from edge_dynamics.params import (
    EdgeParams,
    EdgeState,
    IidEdgeParams,
    MarkovEdgeParams,
    RenewalEdgeParams,
)
from edge_dynamics.renewal import delay_to_state, stationary_delay_samples, step_renewal_array

from . import streams
from .snapshot import GraphSnapshot, edge_count_for

log = logging.getLogger("graph")


@dataclass(frozen=True)
class EdgeProcessSpec:
    """Per-edge dynamics shared by all C(n, 2) edges of [n]."""

    n: int
    params: EdgeParams
    # Stateless binomial sampling of present edges; i.i.d. dynamics only
    sparse_iid: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParamsError(f"n must be >= 1, got {self.n}")
        if not isinstance(self.params, (IidEdgeParams, MarkovEdgeParams, RenewalEdgeParams)):
            raise InvalidParamsError(f"unsupported edge params {type(self.params).__name__}")
        if self.sparse_iid and not isinstance(self.params, IidEdgeParams):
            raise InvalidParamsError("the sparse fast path exists only for i.i.d. edges")

    @property
    def kind(self) -> str:
        if isinstance(self.params, IidEdgeParams):
            return "iid"
        if isinstance(self.params, MarkovEdgeParams):
            return "markov"
        return "renewal"

    @property
    def n_edges(self) -> int:
        return edge_count_for(self.n)

    @property
    def pi1(self) -> float:
        return self.params.pi1


@dataclass
class DynamicGraphState:
    """Joint state of every edge process, confined to a single trial."""

    spec: EdgeProcessSpec
    seed: int
    bits: np.ndarray
    ages: np.ndarray | None = None
    time: int = 0

    @property
    def n(self) -> int:
        return self.spec.n

    def snapshot(self) -> GraphSnapshot:
        return GraphSnapshot(self.spec.n, self.bits)

    def edge_state(self, index: int) -> EdgeState:
        kind = self.spec.kind
        if kind == "markov":
            return EdgeState("markov", markov_bit=int(self.bits[index]))
        if kind == "renewal":
            return EdgeState("renewal", renewal_age=int(self.ages[index]))
        return EdgeState("iid")


def init_stationary(spec: EdgeProcessSpec, seed: int) -> DynamicGraphState:
    """Draw the time-0 edge states from the stationary law of each edge."""
    m = spec.n_edges
    u = streams.edge_uniforms(seed, streams.INIT, 0, m)
    params = spec.params
    ages = None

    if isinstance(params, IidEdgeParams):
        bits = u < params.p
    elif isinstance(params, MarkovEdgeParams):
        bits = u < markov_stationary(params)[1]
    else:
        bits, ages = delay_to_state(stationary_delay_samples(params, u))

    return DynamicGraphState(spec=spec, seed=seed, bits=np.asarray(bits, dtype=bool), ages=ages)


def advance(state: DynamicGraphState) -> GraphSnapshot:
    """Move every edge one step forward and return the new snapshot."""
    spec = state.spec
    params = spec.params
    m = spec.n_edges
    t = state.time + 1

    if isinstance(params, IidEdgeParams) and spec.sparse_iid:
        rng = streams.generator(state.seed, streams.EDGES, t)
        bits = np.zeros(m, dtype=bool)
        bits[rng.choice(m, size=rng.binomial(m, params.p), replace=False)] = True
    else:
        u = streams.edge_uniforms(state.seed, streams.EDGES, t, m)
        if isinstance(params, IidEdgeParams):
            bits = u < params.p
        elif isinstance(params, MarkovEdgeParams):
            bits = step_markov_array(state.bits, params, u)
        else:
            bits, state.ages = step_renewal_array(state.ages, params, u)

    state.bits = np.asarray(bits, dtype=bool)
    state.time = t
    return state.snapshot()


# -----------------------------
# Monotone coupling
# -----------------------------
def _check_dominance(lower: DynamicGraphState, upper: DynamicGraphState):
    if lower.spec.kind != "markov" or upper.spec.kind != "markov":
        raise CouplingError("monotone coupling needs edge-Markovian dynamics on both sides")
    if lower.spec.n != upper.spec.n:
        raise CouplingError("coupled graphs must share the vertex set")
    lo, up = lower.spec.params, upper.spec.params
    # P_lower(1|x') <= P_upper(1|x'') for every x' <= x''
    if not (lo.p <= up.p and lo.p <= 1.0 - up.q and 1.0 - lo.q <= 1.0 - up.q):
        raise CouplingError("no monotone coupling under these parameters")


def init_coupled_stationary(
    lower_spec: EdgeProcessSpec, upper_spec: EdgeProcessSpec, seed: int
) -> tuple[DynamicGraphState, DynamicGraphState]:
    """Stationary starts for a coupled pair, lower's edges contained in upper's."""
    lower = DynamicGraphState(lower_spec, seed, np.zeros(lower_spec.n_edges, dtype=bool))
    upper = DynamicGraphState(upper_spec, seed, np.zeros(upper_spec.n_edges, dtype=bool))
    _check_dominance(lower, upper)

    u = streams.edge_uniforms(seed, streams.INIT, 0, lower_spec.n_edges)
    lower.bits = u < markov_stationary(lower_spec.params)[1]
    upper.bits = u < markov_stationary(upper_spec.params)[1]
    if np.any(lower.bits & ~upper.bits):
        raise CouplingError("stationary laws are not ordered; lower is not contained in upper")
    return lower, upper


def coupled_advance(
    lower: DynamicGraphState, upper: DynamicGraphState
) -> tuple[GraphSnapshot, GraphSnapshot]:
    """Advance both graphs with one common uniform per edge."""
    _check_dominance(lower, upper)
    if lower.time != upper.time:
        raise CouplingError(f"coupled graphs out of step ({lower.time} vs {upper.time})")

    t = lower.time + 1
    u = streams.edge_uniforms(lower.seed, streams.EDGES, t, lower.spec.n_edges)
    lower.bits = step_markov_array(lower.bits, lower.spec.params, u)
    upper.bits = step_markov_array(upper.bits, upper.spec.params, u)
    lower.time = upper.time = t

    if np.any(lower.bits & ~upper.bits):
        log.warning("containment lost at round %d", t)
    return lower.snapshot(), upper.snapshot()

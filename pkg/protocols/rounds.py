"""
Synchronous rumor-spreading rounds.

Every round reads the informed set as it was at the start of the round.
Vertices without neighbours in the snapshot do nothing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from dynamic_graph.snapshot import GraphSnapshot, edge_endpoints
from edge_dynamics.errors import InvalidParamsError


class Protocol(str, Enum):
    PUSH = "push"
    PULL = "pull"
    PUSH_PULL = "pushpull"
    FLOOD = "flood"


@dataclass(frozen=True, eq=False)
class InformedSet:
    """Informed vertices as a boolean mask over [n]."""

    mask: np.ndarray
    count: int = field(init=False)

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "count", int(mask.sum()))

    @classmethod
    def single(cls, n: int, source: int) -> "InformedSet":
        if not 0 <= source < n:
            raise InvalidParamsError(f"source {source} outside [0, {n})")
        mask = np.zeros(n, dtype=bool)
        mask[source] = True
        return cls(mask)

    @property
    def n(self) -> int:
        return len(self.mask)

    def issubset(self, other: "InformedSet") -> bool:
        return bool(np.all(~self.mask | other.mask))

    def __eq__(self, other) -> bool:
        return isinstance(other, InformedSet) and np.array_equal(self.mask, other.mask)

    def __contains__(self, v: int) -> bool:
        return bool(self.mask[v])


def _pick_neighbors(snapshot: GraphSnapshot, vertices: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Uniform neighbour of each vertex, choosing by its own uniform in u."""
    indptr, indices = snapshot.indptr, snapshot.indices
    degree = indptr[vertices + 1] - indptr[vertices]
    offset = np.minimum((u[vertices] * degree).astype(np.int64), degree - 1)
    return indices[indptr[vertices] + offset]


def push_targets(snapshot: GraphSnapshot, informed: InformedSet, u: np.ndarray) -> InformedSet:
    """Push with explicit per-vertex uniforms."""
    senders = np.flatnonzero(informed.mask & (snapshot.degree > 0))
    mask = informed.mask.copy()
    mask[_pick_neighbors(snapshot, senders, u)] = True
    return InformedSet(mask)


def pull_targets(snapshot: GraphSnapshot, informed: InformedSet, u: np.ndarray) -> InformedSet:
    """Pull with explicit per-vertex uniforms."""
    askers = np.flatnonzero(~informed.mask & (snapshot.degree > 0))
    picks = _pick_neighbors(snapshot, askers, u)
    mask = informed.mask.copy()
    mask[askers[informed.mask[picks]]] = True
    return InformedSet(mask)


def push_round(snapshot: GraphSnapshot, informed: InformedSet, rng: np.random.Generator) -> InformedSet:
    return push_targets(snapshot, informed, rng.random(snapshot.n))


def pull_round(snapshot: GraphSnapshot, informed: InformedSet, rng: np.random.Generator) -> InformedSet:
    return pull_targets(snapshot, informed, rng.random(snapshot.n))


def push_pull_targets(
    snapshot: GraphSnapshot, informed: InformedSet, u_push: np.ndarray, u_pull: np.ndarray
) -> InformedSet:
    pushed = push_targets(snapshot, informed, u_push)
    pulled = pull_targets(snapshot, informed, u_pull)
    return InformedSet(pushed.mask | pulled.mask)


def push_pull_round(snapshot: GraphSnapshot, informed: InformedSet, rng: np.random.Generator) -> InformedSet:
    u_push = rng.random(snapshot.n)
    u_pull = rng.random(snapshot.n)
    return push_pull_targets(snapshot, informed, u_push, u_pull)


def flood_round(snapshot: GraphSnapshot, informed: InformedSet) -> InformedSet:
    """Informed vertices inform every neighbour."""
    rows, cols = edge_endpoints(snapshot.n)
    present = snapshot.presence
    mask = informed.mask.copy()
    mask[cols[present & informed.mask[rows]]] = True
    mask[rows[present & informed.mask[cols]]] = True
    return InformedSet(mask)


def apply_round(
    protocol: Protocol, snapshot: GraphSnapshot, informed: InformedSet, rng: np.random.Generator
) -> InformedSet:
    match Protocol(protocol):
        case Protocol.PUSH:
            return push_round(snapshot, informed, rng)
        case Protocol.PULL:
            return pull_round(snapshot, informed, rng)
        case Protocol.PUSH_PULL:
            return push_pull_round(snapshot, informed, rng)
        case Protocol.FLOOD:
            return flood_round(snapshot, informed)
    raise InvalidParamsError(f"unknown protocol {protocol!r}")

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable

import numpy as np

from edge_dynamics.errors import InvalidParamsError


def edge_count_for(n: int) -> int:
    return n * (n - 1) // 2


def edge_index(x: int, y: int, n: int) -> int:
    """Canonical index of the undirected edge {x, y}."""
    if x == y:
        raise InvalidParamsError("self-loops have no edge index")
    if x > y:
        x, y = y, x
    return x * n - x * (x + 1) // 2 + (y - x - 1)


@lru_cache(maxsize=32)
def edge_endpoints(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint arrays (x, y), x < y, ordered by canonical edge index."""
    rows, cols = np.triu_indices(n, k=1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@dataclass(frozen=True, eq=False)
class GraphSnapshot:
    """Edge set of [n] at one time step."""

    n: int
    presence: np.ndarray

    def __post_init__(self):
        presence = np.asarray(self.presence, dtype=bool)
        if presence.shape != (edge_count_for(self.n),):
            raise InvalidParamsError(
                f"presence must have length {edge_count_for(self.n)} for n={self.n}"
            )
        presence = presence.copy()
        presence.setflags(write=False)
        object.__setattr__(self, "presence", presence)

    # -----------------------------
    # Constructors
    # -----------------------------
    @classmethod
    def empty(cls, n: int) -> "GraphSnapshot":
        return cls(n, np.zeros(edge_count_for(n), dtype=bool))

    @classmethod
    def complete(cls, n: int) -> "GraphSnapshot":
        return cls(n, np.ones(edge_count_for(n), dtype=bool))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "GraphSnapshot":
        presence = np.zeros(edge_count_for(n), dtype=bool)
        for x, y in edges:
            if not (0 <= x < n and 0 <= y < n):
                raise InvalidParamsError(f"edge ({x}, {y}) outside [0, {n})")
            presence[edge_index(x, y, n)] = True
        return cls(n, presence)

    # -----------------------------
    # Derived adjacency
    # -----------------------------
    @property
    def edge_count(self) -> int:
        return int(self.presence.sum())

    @cached_property
    def _csr(self) -> tuple[np.ndarray, np.ndarray]:
        rows, cols = edge_endpoints(self.n)
        present = np.flatnonzero(self.presence)
        src = np.concatenate((rows[present], cols[present]))
        dst = np.concatenate((cols[present], rows[present]))
        order = np.argsort(src, kind="stable")
        degree = np.bincount(src, minlength=self.n)
        indptr = np.concatenate(([0], np.cumsum(degree)))
        return indptr, dst[order]

    @property
    def indptr(self) -> np.ndarray:
        return self._csr[0]

    @property
    def indices(self) -> np.ndarray:
        return self._csr[1]

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> frozenset[int]:
        if not 0 <= v < self.n:
            raise InvalidParamsError(f"vertex {v} outside [0, {self.n})")
        indptr, indices = self._csr
        return frozenset(int(u) for u in indices[indptr[v]:indptr[v + 1]])

    def issubset(self, other: "GraphSnapshot") -> bool:
        return bool(np.all(~self.presence | other.presence))

    def __eq__(self, other) -> bool:
        return isinstance(other, GraphSnapshot) and self.n == other.n and np.array_equal(self.presence, other.presence)

    def to_edge_list(self) -> str:
        """Debug export: one "u v" pair per line."""
        rows, cols = edge_endpoints(self.n)
        present = np.flatnonzero(self.presence)
        return "".join(f"{rows[i]} {cols[i]}\n" for i in present)

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal

import numpy as np

from .errors import InvalidParamsError

# Hazard callables take an integer array of gap lengths (>= 1) and return
# an array of the same shape, or a scalar that broadcasts.
Hazard = Callable[[np.ndarray], np.ndarray | float]

DEFAULT_HORIZON = 1_000_000
DEFAULT_TOL = 1e-12

# Number of hazard values checked against the minorization at construction
_HAZARD_CHECKED = 4096


@dataclass(frozen=True)
class IidEdgeParams:
    """Edge present independently with probability p at every step."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParamsError(f"p must lie in [0, 1], got {self.p}")

    @property
    def pi1(self) -> float:
        return float(self.p)


@dataclass(frozen=True)
class MarkovEdgeParams:
    """Two-state edge chain with p = P(1|0) (birth) and q = P(0|1) (death)."""

    p: float
    q: float

    def __post_init__(self):
        for name, value in (("p", self.p), ("q", self.q)):
            if not 0.0 <= value <= 1.0:
                raise InvalidParamsError(f"{name} must lie in [0, 1], got {value}")

    @property
    def pi1(self) -> float:
        from .markov import markov_stationary

        return markov_stationary(self)[1]


@dataclass(frozen=True)
class RenewalEdgeParams:
    """
    Binary renewal edge process driven by a discrete hazard.

    hazard(i) is the probability that an inter-renewal gap equals i given
    it is at least i. Renewal instants are the steps where the edge is
    absent (state 0).
    """

    hazard: Hazard
    minorization_alpha: float
    truncation_horizon: int = DEFAULT_HORIZON
    label: str = "custom"
    tol: float = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        alpha = self.minorization_alpha
        if not 0.0 <= alpha < 1.0:
            raise InvalidParamsError(f"minorization alpha must lie in [0, 1), got {alpha}")
        if self.truncation_horizon < 1:
            raise InvalidParamsError("truncation horizon must be >= 1")

        head = hazard_values(self, np.arange(1, min(self.truncation_horizon, _HAZARD_CHECKED) + 1))
        if np.any(head <= 0.0) or np.any(head > 1.0):
            raise InvalidParamsError("hazard values must lie in (0, 1]")
        if np.any(head < 1.0 - alpha - 1e-12):
            raise InvalidParamsError(
                f"hazard falls below 1 - alpha = {1.0 - alpha:.6g}; minorization does not hold"
            )

    @cached_property
    def mean_gap(self) -> float:
        from .renewal import renewal_mean

        return renewal_mean(self, self.tol)

    @property
    def pi1(self) -> float:
        return 1.0 - 1.0 / self.mean_gap


EdgeParams = IidEdgeParams | MarkovEdgeParams | RenewalEdgeParams


def hazard_values(params: RenewalEdgeParams, ages) -> np.ndarray:
    """Evaluate the hazard on an array of gap lengths."""
    ages = np.asarray(ages)
    values = np.asarray(params.hazard(ages), dtype=float)
    return np.broadcast_to(values, ages.shape).astype(float, copy=False)


@dataclass(frozen=True)
class EdgeState:
    """Sufficient statistic of one edge: a Markov bit, a renewal age, or nothing."""

    kind: Literal["iid", "markov", "renewal"]
    markov_bit: int | None = None
    renewal_age: int | None = None

    def __post_init__(self):
        if self.kind == "markov" and self.markov_bit not in (0, 1):
            raise InvalidParamsError("markov edge state needs a bit in {0, 1}")
        if self.kind == "renewal" and (self.renewal_age is None or self.renewal_age < 1):
            raise InvalidParamsError("renewal age must be >= 1")

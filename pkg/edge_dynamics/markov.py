from __future__ import annotations

import numpy as np

from .errors import DegenerateLawError
from .params import MarkovEdgeParams


def markov_stationary(params: MarkovEdgeParams) -> tuple[float, float]:
    """Return (lambda0, lambda1), the unique stationary law of the edge chain."""
    total = params.p + params.q
    if total <= 0.0:
        raise DegenerateLawError("no unique stationary law (p = q = 0)")
    return params.q / total, params.p / total


def delta(params: MarkovEdgeParams) -> float:
    """Second eigenvalue 1 - p - q of the two-state transition matrix."""
    return 1.0 - params.p - params.q


def rho(params: MarkovEdgeParams) -> float:
    lam0, lam1 = markov_stationary(params)
    if lam0 <= 0.0 or lam1 <= 0.0:
        raise DegenerateLawError("degenerate stationary law")
    return max(lam0 / lam1, lam1 / lam0, 1.0)


def step_markov(bit: int, params: MarkovEdgeParams, u: float) -> int:
    """Threshold update: the next bit is 1 iff u < P(1 | bit)."""
    threshold = 1.0 - params.q if bit else params.p
    return int(u < threshold)


def step_markov_array(bits: np.ndarray, params: MarkovEdgeParams, u: np.ndarray) -> np.ndarray:
    """Vectorised step_markov over an array of edge bits."""
    threshold = np.where(bits, 1.0 - params.q, params.p)
    return u < threshold

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, InvalidParamsError
from .params import DEFAULT_HORIZON, DEFAULT_TOL, RenewalEdgeParams, hazard_values


# -----------------------------
# Hazard families
# -----------------------------
def constant_hazard(c: float, horizon: int = DEFAULT_HORIZON) -> RenewalEdgeParams:
    """Geometric gaps: every step renews with probability c."""
    if not 0.0 < c <= 1.0:
        raise InvalidParamsError(f"constant hazard must lie in (0, 1], got {c}")
    return RenewalEdgeParams(
        hazard=lambda i: c,
        minorization_alpha=1.0 - c,
        truncation_horizon=horizon,
        label=f"constant({c:g})",
    )


def example_hazard(n_lambda: float, horizon: int = DEFAULT_HORIZON) -> RenewalEdgeParams:
    """
    Hazard 1 - (i + 2) / ((i + 1) * n_lambda).

    The hazard increases in i, so its infimum sits at i = 1 and
    alpha = 1.5 / n_lambda.
    """
    if n_lambda <= 1.5:
        raise InvalidParamsError(f"example hazard needs n^lambda > 1.5, got {n_lambda}")
    return RenewalEdgeParams(
        hazard=lambda i: 1.0 - (i + 2.0) / ((i + 1.0) * n_lambda),
        minorization_alpha=1.5 / n_lambda,
        truncation_horizon=horizon,
        label=f"example({n_lambda:g})",
    )


def linear_hazard(h0: float, slope: float, horizon: int = DEFAULT_HORIZON) -> RenewalEdgeParams:
    """Hazard rising linearly from h0 and capped at 1."""
    if not 0.0 < h0 <= 1.0 or slope < 0.0:
        raise InvalidParamsError("linear hazard needs 0 < h0 <= 1 and slope >= 0")
    return RenewalEdgeParams(
        hazard=lambda i: np.minimum(1.0, h0 + slope * (np.asarray(i, dtype=float) - 1.0)),
        minorization_alpha=1.0 - h0,
        truncation_horizon=horizon,
        label=f"linear({h0:g},{slope:g})",
    )


# -----------------------------
# Gap law and survival
# -----------------------------
def survival(params: RenewalEdgeParams, k: int) -> float:
    """P(gap >= k) = prod_{j<k} (1 - h(j))."""
    if k < 1:
        raise InvalidParamsError(f"survival index must be >= 1, got {k}")
    if k == 1:
        return 1.0
    return float(np.prod(1.0 - hazard_values(params, np.arange(1, k))))


def gap_distribution(params: RenewalEdgeParams, i: int) -> float:
    if i < 1:
        raise InvalidParamsError(f"gap length must be >= 1, got {i}")
    return float(hazard_values(params, np.array([i]))[0]) * survival(params, i)


def _terms_needed(alpha: float, tol: float) -> int:
    # Tail after k terms is bounded by alpha^k / (1 - alpha).
    if alpha == 0.0:
        return 1
    return max(1, math.ceil(math.log(tol * (1.0 - alpha)) / math.log(alpha)))


@lru_cache(maxsize=64)
def survival_table(params: RenewalEdgeParams, tol: float = DEFAULT_TOL) -> np.ndarray:
    """survival(1), ..., survival(K) with the neglected tail below tol."""
    k_needed = _terms_needed(params.minorization_alpha, tol)
    if k_needed > params.truncation_horizon:
        raise ConvergenceError(
            f"nonconvergent mean: {k_needed} terms needed, horizon is {params.truncation_horizon}"
        )
    keep = 1.0 - hazard_values(params, np.arange(1, k_needed))
    table = np.empty(k_needed)
    table[0] = 1.0
    table[1:] = np.cumprod(keep)
    table.setflags(write=False)
    return table


def renewal_mean(params: RenewalEdgeParams, tol: float = DEFAULT_TOL) -> float:
    """Mean gap mu = sum_{k>=1} survival(k), truncated at the geometric envelope."""
    return float(survival_table(params, tol).sum())


# -----------------------------
# Stationary delay
# -----------------------------
@lru_cache(maxsize=64)
def _delay_cdf(params: RenewalEdgeParams) -> np.ndarray:
    table = survival_table(params, params.tol)
    cdf = np.cumsum(table / params.mean_gap)
    cdf.setflags(write=False)
    return cdf


def stationary_delay_sample(params: RenewalEdgeParams, u: float) -> int:
    """Inverse-CDF draw of the delay t with P(t) = survival(t + 1) / mu."""
    return int(stationary_delay_samples(params, np.asarray([u]))[0])


def stationary_delay_samples(params: RenewalEdgeParams, u: np.ndarray) -> np.ndarray:
    cdf = _delay_cdf(params)
    draws = np.searchsorted(cdf, u, side="right")
    return np.minimum(draws, len(cdf) - 1)


def delay_to_state(delay: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Map a stationary delay to (bit, age).

    The delay law equals the stationary law of the time since the last
    renewal, so delay 0 is a renewal now and delay t > 0 is t steps after it.
    """
    delay = np.asarray(delay)
    bits = delay > 0
    ages = delay + 1
    return bits, ages


# -----------------------------
# Update rule
# -----------------------------
def step_renewal(age: int, params: RenewalEdgeParams, u: float) -> tuple[int, int]:
    """Renew (state 0, age 1) iff u < h(age); u <= 1 - alpha always renews."""
    h = float(hazard_values(params, np.array([age]))[0])
    if u < h or u <= 1.0 - params.minorization_alpha:
        return 0, 1
    return 1, age + 1


def step_renewal_array(
    ages: np.ndarray, params: RenewalEdgeParams, u: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    h = hazard_values(params, ages)
    renew = (u < h) | (u <= 1.0 - params.minorization_alpha)
    return ~renew, np.where(renew, 1, ages + 1)

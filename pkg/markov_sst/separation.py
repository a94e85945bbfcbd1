"""
Separation distances of the product edge-Markov chain and their upper bounds.

The product chain's separation is computed through the single-edge
formula s(k) = 1 - (1 - s_edge(k))^|E|; the 2^|E| joint states are never
enumerated.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from edge_dynamics.errors import DegenerateLawError, InvalidParamsError
from edge_dynamics.markov import delta, markov_stationary, rho
from edge_dynamics.params import MarkovEdgeParams

PROFILE_TOL = 1e-16
PROFILE_MAX_K = 1_000_000


def _deviation(params: MarkovEdgeParams, k) -> np.ndarray:
    """Delta^k * (1{x=y} - lambda(y)), indexed [..., x, y]."""
    lam = np.asarray(markov_stationary(params))
    power = np.power(delta(params), np.asarray(k, dtype=float))[..., None, None]
    return power * (np.eye(2) - lam[None, :])


def two_state_power(params: MarkovEdgeParams, k: int) -> np.ndarray:
    """k-step transition matrix, rows indexed by the start state."""
    if k < 0:
        raise InvalidParamsError(f"k must be >= 0, got {k}")
    if k == 0 or params.p + params.q == 0.0:
        return np.eye(2)
    lam = np.asarray(markov_stationary(params))
    return lam[None, :] + _deviation(params, k)


def _edge_separation_many(params: MarkovEdgeParams, ks: np.ndarray) -> np.ndarray:
    lam = np.asarray(markov_stationary(params))
    if np.any(lam <= 0.0):
        raise DegenerateLawError("degenerate stationary law")
    # 1 - P^k(y|x) / lambda(y) = -Delta^k (1{x=y} - lambda(y)) / lambda(y)
    deficits = -_deviation(params, ks) / lam[None, None, :]
    return np.maximum(deficits.reshape(len(ks), 4).max(axis=1), 0.0)


def edge_separation(params: MarkovEdgeParams, k: int) -> float:
    """s_edge(k) = 1 - min over (x, y) of P^k(y|x) / lambda(y)."""
    if k < 1:
        raise InvalidParamsError(f"k must be >= 1, got {k}")
    return float(_edge_separation_many(params, np.array([k]))[0])


def _product(s_edge, n_edges: int):
    # 1 - (1 - s)^|E| without cancellation
    with np.errstate(divide="ignore"):
        return -np.expm1(n_edges * np.log1p(-np.asarray(s_edge, dtype=float)))


def graph_separation(params: MarkovEdgeParams, n_edges: int, k: int) -> float:
    return float(_product(edge_separation(params, k), n_edges))


def rho_envelope(params: MarkovEdgeParams, k: int) -> float:
    """rho * |Delta|^k, the single-edge upper bound."""
    return rho(params) * abs(delta(params)) ** k


def product_bound(params: MarkovEdgeParams, n_edges: int, k: int) -> float:
    """1 - (1 - rho |Delta|^k)^|E|, or 1 where the envelope exceeds 1."""
    envelope = rho_envelope(params, k)
    if envelope >= 1.0:
        return 1.0
    return float(_product(envelope, n_edges))


# -----------------------------
# The polynomial bound chain
# -----------------------------
class UbsBound(NamedTuple):
    mid: float
    outer: float
    valid: bool


def ubs_bound(n: int, M: float, alpha_family: float, k: int, t: float, l: float, rho: float = 1.0) -> UbsBound:
    """
    mid = rho * n^2 (M / n^alpha)^k and outer = n^(-t (k - l)).

    rho = 1 gives the bound as usually printed; passing the chain's rho
    gives the form that actually dominates the exact separation.
    """
    if min(M, alpha_family, t) <= 0 or l < 0:
        raise InvalidParamsError("M, alpha_family and t must be positive, l non-negative")
    log_n = math.log(n)
    mid = math.exp(math.log(rho) + 2.0 * log_n + k * (math.log(M) - alpha_family * log_n))
    outer = math.exp(-t * (k - l) * log_n)
    return UbsBound(mid, outer, k > l and mid <= outer * (1.0 + 1e-12))


@dataclass(frozen=True)
class UbsConstants:
    t: float
    l: float
    k_start: int


def find_ubs_constants(n0: int, M: float, alpha_family: float, k0: int = 4, rho_exponent: float = 0.0) -> UbsConstants:
    """
    Find (t, l) with rho * n^2 (M/n^alpha)^k <= n^(-t (k - l)) for all n >= n0, k >= k_start.

    rho is assumed to be at most n^rho_exponent. Writing beta(n) = alpha -
    log M / log n, the requirement is (2 + r) - k beta <= -t (k - l).
    """
    if n0 < 2:
        raise InvalidParamsError("n0 must be >= 2")
    beta = alpha_family - max(0.0, math.log(M) / math.log(n0))
    if beta <= 0.0:
        raise InvalidParamsError(f"no (t, l) exists: M / n^alpha does not decay from n0={n0}")
    t = beta / 2.0
    l = max(0.0, (2.0 + rho_exponent) / t - k0)
    k_start = max(k0, math.floor(l) + 1)
    return UbsConstants(t, l, k_start)


# -----------------------------
# Profiles
# -----------------------------
@dataclass(frozen=True)
class SeparationProfile:
    """Exact s(k) for k = 0..K; s(0) = 1 from any fixed start."""

    params: MarkovEdgeParams
    n_edges: int
    values: np.ndarray
    bound_values: dict[int, float] = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    def s(self, k: int) -> float:
        if k <= self.k_max:
            return float(self.values[k])
        return graph_separation(self.params, self.n_edges, k)

    def to_csv(self, n: int | None = None, M: float | None = None, alpha_family: float | None = None) -> str:
        """Columns k, s_exact, s_bound_rho, s_bound_ubs."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["k", "s_exact", "s_bound_rho", "s_bound_ubs"])
        for k in range(1, self.k_max + 1):
            ubs = self.bound_values.get(k, "")
            writer.writerow(
                [k, f"{self.values[k]:.6g}", f"{product_bound(self.params, self.n_edges, k):.6g}",
                 f"{ubs:.6g}" if ubs != "" else ""]
            )
        return buffer.getvalue()


def build_profile(
    params: MarkovEdgeParams,
    n_edges: int,
    k_max: int | None = None,
    tol: float = PROFILE_TOL,
    ubs: tuple[int, float, float, float] | None = None,
) -> SeparationProfile:
    """
    Tabulate s(k) up to k_max, or until s(k) < tol when k_max is None.

    ubs = (n, M, alpha_family, rho) fills bound_values with the mid term.
    """
    if n_edges < 1:
        raise InvalidParamsError("a separation profile needs at least one edge")
    if k_max is None:
        if abs(delta(params)) >= 1.0:
            raise DegenerateLawError("no finite strong uniform time (|Delta| = 1)")
        abs_delta = abs(delta(params))
        if abs_delta == 0.0:
            k_max = 1
        else:
            # s(k) <= |E| rho |Delta|^k
            needed = (math.log(tol) - math.log(n_edges * rho(params))) / math.log(abs_delta)
            k_max = int(min(PROFILE_MAX_K, max(1, math.ceil(needed))))

    ks = np.arange(1, k_max + 1)
    values = np.empty(k_max + 1)
    values[0] = 1.0
    values[1:] = _product(_edge_separation_many(params, ks), n_edges)
    # Guard monotonicity against last-ulp noise
    values = np.minimum.accumulate(values)
    values.setflags(write=False)

    bounds = {}
    if ubs is not None:
        n, M, alpha_family, chain_rho = ubs
        bounds = {int(k): ubs_bound(n, M, alpha_family, int(k), 1.0, 0.0, chain_rho).mid for k in ks}
    return SeparationProfile(params, n_edges, values, bounds)

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from dynamic_graph.snapshot import edge_count_for
from edge_dynamics.errors import InvalidParamsError
from edge_dynamics.markov import rho
from edge_dynamics.params import MarkovEdgeParams
from markov_sst.separation import (
    build_profile,
    find_ubs_constants,
    product_bound,
    rho_envelope,
    ubs_bound,
)
from markov_sst.stationary_times import chernoff_tail_bound

from .config import ConfigError
from .families import ParamFamily

log = logging.getLogger("sst")

FLOAT_SLACK = 1e-12


@dataclass(frozen=True)
class BoundRow:
    n: int
    k: int
    s_exact: float
    rho_envelope: float
    product_bound: float
    ubs_mid: float | None
    ubs_mid_rho: float | None
    ubs_outer: float | None
    ubs_valid: bool | None
    chernoff: float | None

    @property
    def consistent(self) -> bool:
        """s_exact below every bound that applies to it."""
        ok = self.s_exact <= self.product_bound + FLOAT_SLACK
        if self.ubs_mid_rho is not None and self.ubs_mid_rho <= 1.0:
            ok = ok and self.s_exact <= self.ubs_mid_rho + FLOAT_SLACK
        return ok


def _rho_exponent(family: ParamFamily, n_grid: list[int]) -> float:
    exponents = [math.log(rho(family.edge_params(n))) / math.log(n) for n in n_grid if n >= 2]
    return max([0.0, *exponents])


def bound_report(
    family: ParamFamily,
    n_grid: list[int],
    k_grid: list[int],
    C: float = 5.0,
    D: float = 25.0,
) -> list[BoundRow]:
    """
    Exact separation next to each of its upper bounds for every (n, k).

    The polynomial columns are filled for families with (M, alpha_family)
    constants; the Chernoff column uses r = log n and s = D/C - 1 - l.
    """
    if family.dynamics != "markov":
        raise ConfigError("separation bounds need an edge-Markovian family")
    if not k_grid or min(k_grid) < 1:
        raise ConfigError("k grid must hold integers >= 1")
    family.validate(n_grid)

    constants = family.ubs_constants()
    found = None
    if constants is not None:
        M, alpha_family = constants
        try:
            found = find_ubs_constants(max(2, min(n_grid)), M, alpha_family, rho_exponent=_rho_exponent(family, n_grid))
        except InvalidParamsError as e:
            log.warning("no polynomial bound constants: %s", e)

    rows = []
    k_max = max(k_grid)
    for n in n_grid:
        params: MarkovEdgeParams = family.edge_params(n)
        m = edge_count_for(n)
        if m == 0:
            continue
        profile = build_profile(params, m, k_max=k_max)
        chain_rho = rho(params)
        chernoff = None
        if found is not None and n >= 2:
            s_ratio = D / C - 1.0 - found.l
            if s_ratio > 1.0:
                chernoff = chernoff_tail_bound(s_ratio, math.log(n))
        for k in k_grid:
            mid = mid_rho = outer = valid = None
            if constants is not None and found is not None:
                M, alpha_family = constants
                printed = ubs_bound(n, M, alpha_family, k, found.t, found.l)
                corrected = ubs_bound(n, M, alpha_family, k, found.t, found.l, chain_rho)
                mid, mid_rho, outer, valid = printed.mid, corrected.mid, corrected.outer, corrected.valid
            rows.append(BoundRow(
                n, k, profile.s(k), rho_envelope(params, k), product_bound(params, m, k),
                mid, mid_rho, outer, valid, chernoff,
            ))
    bad = [row for row in rows if not row.consistent]
    if bad:
        log.warning("%d rows where the exact separation exceeds a bound", len(bad))
    return rows

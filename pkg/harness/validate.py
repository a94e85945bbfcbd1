"""
Statistical validation suites for the stationary-time constructions.

Every check compares an empirical statistic to a stated tolerance and
reports pass or fail; the CLI exits 3 when any check fails.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from dynamic_graph import streams
from dynamic_graph.snapshot import edge_count_for
from dynamic_graph.state import EdgeProcessSpec, init_stationary
from edge_dynamics.params import MarkovEdgeParams, RenewalEdgeParams
from markov_sst.separation import build_profile, two_state_power
from markov_sst.stationary_times import (
    refresh_coupling_run,
    refresh_coupling_steps,
    refresh_parameters,
    sample_strong_uniform_times,
)
from renewal_cftp.cftp import (
    backward_stationary_times,
    coalescence_probability,
    perfect_sample,
    sample_from_arbitrary_past,
)

log = logging.getLogger("sst")

SIGMAS = 4.0
DKW_DELTA = 1e-4
CHI_SQUARE_P = 1e-4


@dataclass(frozen=True)
class Check:
    name: str
    statistic: float
    threshold: float
    passed: bool


@dataclass
class ValidationReport:
    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, statistic: float, threshold: float, passed: bool):
        check = Check(name, float(statistic), float(threshold), bool(passed))
        self.checks.append(check)
        if not check.passed:
            log.warning("%s: %s failed (%.6g vs %.6g)", self.suite, name, statistic, threshold)

    def records(self) -> list[dict]:
        return [asdict(check) for check in self.checks]


def dkw_epsilon(samples: int, delta: float = DKW_DELTA) -> float:
    """Half-width of the DKW band holding with probability 1 - delta."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * samples))


def survival_curve(draws: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Empirical P(X > k) for each k."""
    ordered = np.sort(draws)
    return 1.0 - np.searchsorted(ordered, ks, side="right") / len(ordered)


def bernoulli_deviation(hits: float, total: int, p: float) -> tuple[float, float]:
    """(|mean - p|, 4 sigma) for a Bernoulli(p) sample of the given size."""
    sigma = math.sqrt(p * (1.0 - p) / total) if total else 0.0
    return abs(hits / total - p), SIGMAS * sigma


# -----------------------------
# Markov strong stationary times
# -----------------------------
def _transition_counts(params: MarkovEdgeParams, n: int, steps: int, seed: int) -> tuple[np.ndarray, int]:
    state = init_stationary(EdgeProcessSpec(n, params), seed)
    counts = np.zeros((2, 2), dtype=np.int64)
    previous = state.bits.copy()
    step_length = refresh_parameters(params)[2]
    for i, step in enumerate(refresh_coupling_steps(state)):
        current = step.snapshot.presence
        np.add.at(counts, (previous.astype(int), current.astype(int)), 1)
        previous = current
        if i + 1 >= steps:
            break
    return counts, step_length


def sst_suite(
    params: MarkovEdgeParams,
    n: int = 6,
    samples: int = 100_000,
    steps: int = 20_000,
    stationary_times: int = 200,
    seed: int = 0,
) -> ValidationReport:
    report = ValidationReport("sst-validate")
    m = edge_count_for(n)

    # Strong uniform time draws against the exact profile
    profile = build_profile(params, m)
    draws = sample_strong_uniform_times(profile, streams.generator(seed, streams.STRONG_TIME), samples)
    ks = np.arange(0, max(profile.k_max, int(draws.max())) + 1)
    expected = np.array([profile.s(int(k)) for k in ks])
    gap = np.abs(survival_curve(draws, ks) - expected).max()
    eps = dkw_epsilon(samples)
    report.add("strong uniform time survival", gap, eps, gap <= eps)

    # Refresh-coupled transitions follow P (or P^2 when Delta < 0)
    counts, step_length = _transition_counts(params, n, steps, seed)
    matrix = two_state_power(params, step_length)
    for x in (0, 1):
        total = counts[x].sum()
        support = matrix[x] > 0.0
        if total == 0 or support.sum() < 2:
            report.add(f"transitions from {x} off support", counts[x][~support].sum(), 0, counts[x][~support].sum() == 0)
            continue
        observed = counts[x][support]
        expected_counts = matrix[x][support] / matrix[x][support].sum() * total
        p_value = stats.chisquare(observed, expected_counts).pvalue
        report.add(f"transitions from {x} chi-square p", p_value, CHI_SQUARE_P, p_value > CHI_SQUARE_P)

    # Snapshots at stationary times are i.i.d. ER(lambda1)
    state = init_stationary(EdgeProcessSpec(n, params), streams.derive_seed(seed, n, 1))
    record = refresh_coupling_run(state, stationary_times)
    matrix_bits = np.array([snap.presence for snap in record.snapshots_at_times], dtype=float)
    lam1 = refresh_parameters(params)[1]
    deviation, band = bernoulli_deviation(matrix_bits.sum(), matrix_bits.size, lam1)
    report.add("stationary-time marginal", deviation, band, deviation <= band)

    before, after = matrix_bits[:-1].ravel(), matrix_bits[1:].ravel()
    if before.std() > 0 and after.std() > 0:
        corr = abs(np.corrcoef(before, after)[0, 1])
        band = SIGMAS / math.sqrt(len(before))
        report.add("stationary-time lag-1 correlation", corr, band, corr <= band)
    return report


# -----------------------------
# Coupling from the past
# -----------------------------
def cftp_suite(
    params: RenewalEdgeParams,
    n: int = 4,
    samples: int = 10_000,
    seeds: int = 100,
    assignments: int = 5,
    spacings: int = 10_000,
    seed: int = 0,
) -> ValidationReport:
    report = ValidationReport("cftp-validate")
    m = edge_count_for(n)
    alpha = params.minorization_alpha
    success = coalescence_probability(alpha, n)

    # Marginal presence and theta0 law over independent passes
    present = 0
    depths = np.empty(samples, dtype=np.int64)
    for i in range(samples):
        result = perfect_sample(params, n, streams.derive_seed(seed, n, i))
        present += result.sample.edge_count
        depths[i] = result.theta0
    deviation, band = bernoulli_deviation(present, samples * m, params.pi1)
    report.add("perfect sample marginal", deviation, band, deviation <= band)

    ks = np.arange(0, int(depths.max()) + 1)
    gap = np.abs(survival_curve(depths, ks) - (1.0 - success) ** (ks + 1)).max()
    eps = dkw_epsilon(samples)
    report.add("theta0 survival", gap, eps, gap <= eps)

    # Time-0 sample does not depend on the state before coalescence
    mismatches = 0
    for i in range(seeds):
        pass_seed = streams.derive_seed(seed, n, samples + i)
        reference = perfect_sample(params, n, pass_seed).sample
        rng = streams.generator(pass_seed, streams.TRIAL)
        for _ in range(assignments):
            ages = rng.integers(1, 50, size=m)
            if sample_from_arbitrary_past(params, n, pass_seed, ages) != reference:
                mismatches += 1
    report.add("past independence mismatches", mismatches, 0, mismatches == 0)

    # Backward spacings are geometric with success (1 - alpha)^C(n,2)
    times = backward_stationary_times(params, n, spacings + 1, seed, with_samples=False)
    gaps = times.spacings
    ks = np.arange(0, int(gaps.max()) + 1)
    gap = np.abs(survival_curve(gaps, ks) - (1.0 - success) ** ks).max()
    eps = dkw_epsilon(len(gaps))
    report.add("backward spacing survival", gap, eps, gap <= eps)
    return report

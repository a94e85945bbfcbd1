import math

import numpy as np
import pytest

from dynamic_graph import streams
from dynamic_graph.snapshot import GraphSnapshot, edge_count_for
from edge_dynamics.errors import CoalescenceError, InvalidParamsError
from edge_dynamics.renewal import constant_hazard, example_hazard
from renewal_cftp.cftp import (
    backward_stationary_times,
    cftp_tail_certificate,
    coalescence_probability,
    coalescing_depth,
    default_depth_limit,
    perfect_sample,
    sample_from_arbitrary_past,
    validation_report,
)
from renewal_cftp.window import UniformWindow


def test_window_cells_are_fixed():
    window = UniformWindow(3, 6)
    row = window.row(-4)
    assert window.row(-4) is row
    assert window.consumed == 6
    assert window.cell(2, -4) == float(row[2])
    assert np.array_equal(UniformWindow(3, 6).row(-4), row)
    with pytest.raises(ValueError):
        row[0] = 0.5


def test_window_release():
    window = UniformWindow(0, 3)
    for t in range(0, -5, -1):
        window.row(t)
    window.release_above(-2)
    assert window.consumed == 15
    window.row(-1)
    assert window.consumed == 18


def test_certain_renewal_coalesces_immediately():
    params = constant_hazard(1.0)
    result = perfect_sample(params, 5, seed=1)
    assert result.theta0 == 0
    assert result.sample == GraphSnapshot.empty(5)
    assert result.work == edge_count_for(5)


def test_coalescing_depth_rows_all_below_threshold():
    params = constant_hazard(0.5)
    window = UniformWindow(8, edge_count_for(4))
    depth = coalescing_depth(params, 4, window)
    assert np.all(window.row(-depth) <= 0.5)
    for i in range(depth):
        assert not np.all(window.row(-i) <= 0.5)


def test_depth_limit_raises():
    params = constant_hazard(0.5)
    window = UniformWindow(0, edge_count_for(10))
    with pytest.raises(CoalescenceError):
        coalescing_depth(params, 10, window, depth_limit=0)


def test_default_depth_limit():
    assert default_depth_limit(0.5, 3) == 400
    assert default_depth_limit(0.99, 40) == 10_000_000


@pytest.mark.parametrize("params", [constant_hazard(0.5), example_hazard(4)], ids=["constant", "example"])
def test_past_independence(params):
    n = 4
    m = edge_count_for(n)
    for seed in range(200):
        reference = perfect_sample(params, n, seed).sample
        rng = np.random.default_rng(seed)
        for _ in range(5):
            ages = rng.integers(1, 40, size=m)
            assert sample_from_arbitrary_past(params, n, seed, ages) == reference


@pytest.mark.parametrize("params", [constant_hazard(0.5), example_hazard(4)], ids=["constant", "example"])
def test_perfect_sample_marginal(params):
    n, samples = 4, 1500
    m = edge_count_for(n)
    present = sum(perfect_sample(params, n, streams.derive_seed(5, n, i)).sample.edge_count for i in range(samples))
    pi1 = params.pi1
    sigma = math.sqrt(pi1 * (1 - pi1) / (samples * m))
    assert abs(present / (samples * m) - pi1) <= 4 * sigma


def test_backward_times_are_decreasing_and_geometric():
    params = constant_hazard(0.5)
    n = 3
    times = backward_stationary_times(params, n, 3001, seed=4, with_samples=False)
    assert times.times[0] == 0
    assert np.all(np.diff(times.times) < 0)
    gaps = times.spacings
    success = coalescence_probability(0.5, n)
    ks = np.arange(0, gaps.max() + 1)
    empirical = np.array([(gaps > k).mean() for k in ks])
    eps = math.sqrt(math.log(2 / 1e-4) / (2 * len(gaps)))
    assert np.abs(empirical - (1 - success) ** ks).max() <= eps


def test_backward_passes_carry_samples():
    times = backward_stationary_times(example_hazard(4), 4, 10, seed=2)
    assert len(times.samples) == 10
    assert times.spacings.tolist() == [d + 1 for d in times.depths[:-1]]
    with pytest.raises(InvalidParamsError):
        backward_stationary_times(example_hazard(4), 4, 0, seed=2)


def test_tail_certificate_holds():
    certificate = cftp_tail_certificate(0.01, 8, 5.0, 25.0, math.log(8), trials=200, seed=1)
    assert certificate.s_ratio == 4.0
    assert certificate.empirical <= certificate.bound
    assert certificate.alpha_graph == pytest.approx(1 - 0.99**28)


def test_validation_report_fields():
    report = validation_report(constant_hazard(0.5), 3, 200, seed=0)
    assert set(report) == {"theta0_histogram", "marginal_estimate", "pi1_expected", "ks_statistics"}
    assert sum(report["theta0_histogram"].values()) == 200
    assert report["pi1_expected"] == pytest.approx(0.5)

import asyncio
import json
import math

import pytest

from edge_dynamics.errors import DegenerateLawError
from edge_dynamics.params import MarkovEdgeParams
from edge_dynamics.renewal import constant_hazard
from harness import database, export
from harness.bounds import bound_report
from harness.config import ConfigError, SweepConfig, load_config, parse_grid, thread_limit
from harness.families import ParamFamily, PowerLaw, RateFamily, rate_value
from harness.sweep import (
    dependent_vs_iid,
    flood_rate_check,
    is_bounded,
    ratio_spread,
    run_sweep,
    strategy_check,
)
from harness.validate import cftp_suite, dkw_epsilon, sst_suite


def fastmix_family(**overrides) -> ParamFamily:
    values = dict(kind="fastmix", f=PowerLaw(1.0, 2.0), g=PowerLaw(0.0), M=1.0, alpha_family=2.0)
    values.update(overrides)
    return ParamFamily(**values)


# -----------------------------
# Families and rates
# -----------------------------
def test_power_law_parse():
    assert PowerLaw.parse("1/n^2") == PowerLaw(1.0, 2.0)
    assert PowerLaw.parse("3/n") == PowerLaw(3.0, 1.0)
    assert PowerLaw.parse("0.5") == PowerLaw(0.5, 0.0)
    assert PowerLaw(2.0, 1.0)(8) == 0.25
    assert PowerLaw(1.0, 2.0).limit == 0.0


def test_family_params():
    assert ParamFamily("sparse", a=1.0, k=1.5).edge_params(64).p == pytest.approx(1 / 512)
    persistent = ParamFamily("persistent", a=1.0, k=2.0, alpha=0.3)
    assert persistent.edge_params(10).q == pytest.approx(0.7)
    assert persistent.lower_spec(10).params == MarkovEdgeParams(0.01, 1.0)
    assert ParamFamily("renewal", hazard="0.5").edge_params(8).pi1 == pytest.approx(0.5)
    example = ParamFamily("renewal", hazard="example", lam=1.0).edge_params(100)
    assert example.minorization_alpha == pytest.approx(0.015)
    assert ParamFamily("pq").dynamics == "markov"
    assert ParamFamily("iid").dynamics == "iid"
    assert fastmix_family(g=PowerLaw(0.2)).gamma_limit == 0.2


def test_unknown_family():
    with pytest.raises(ConfigError):
        ParamFamily("banana")


def test_fastmix_hypothesis_checked():
    fastmix_family().validate([8, 16, 32])
    with pytest.raises(ConfigError, match="exceeds"):
        fastmix_family(f=PowerLaw(1.0, 1.0)).validate([8])


def test_family_constants_positive():
    with pytest.raises(ConfigError):
        ParamFamily("sparse", a=-1.0).validate([8])
    with pytest.raises(ConfigError):
        fastmix_family(M=0.0).validate([8])


def test_rate_values():
    assert rate_value(RateFamily.LOG, 100, 0.5) == pytest.approx(math.log(100))
    assert rate_value(RateFamily.FLOOD_RATE, 100, 0.5) == pytest.approx(math.log(100) / math.log(51))
    assert rate_value(RateFamily.PUSH_RATE, 100, 0.001) == pytest.approx(math.log(100) / 0.1)
    assert rate_value(RateFamily.SPARSE_PUSH, 64, 0.0, k=1.5) == pytest.approx(8 * math.log(64))
    assert rate_value(RateFamily.PERSISTENT_FLOOD, 64, 0.0, k=2.0) == pytest.approx(math.log(64) / math.log1p(1 / 64))


def test_rates_validated_before_trials():
    # pi1 = 0 makes the push rate infinite
    with pytest.raises(ConfigError, match="rate"):
        SweepConfig(family=ParamFamily("pq", p=0.0, q=1.0), n_grid=[16], protocol="push")


def test_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig(family=ParamFamily("pq"), trials=0)
    with pytest.raises(ConfigError):
        SweepConfig(family=ParamFamily("pq"), protocol="shout")
    with pytest.raises(ConfigError):
        SweepConfig(family=ParamFamily("pq"), cap=0)


def test_parse_grid():
    assert parse_grid("64,128, 256") == [64, 128, 256]
    assert parse_grid([8, 16]) == [8, 16]
    with pytest.raises(ConfigError):
        parse_grid("")
    with pytest.raises(ConfigError):
        parse_grid("8,x")


def test_load_config(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({"n-grid": "16,32", "trials": 5}))
    assert load_config(str(path)) == {"n_grid": "16,32", "trials": 5}
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_thread_limit(monkeypatch):
    monkeypatch.setenv("GOSSIPDYN_THREADS", "3")
    assert thread_limit() == 3
    monkeypatch.setenv("GOSSIPDYN_THREADS", "0")
    with pytest.raises(ConfigError):
        thread_limit()
    monkeypatch.delenv("GOSSIPDYN_THREADS")
    assert thread_limit() >= 1


# -----------------------------
# Sweeps
# -----------------------------
def test_flood_on_complete_graph_takes_one_round():
    config = SweepConfig(family=ParamFamily("complete"), n_grid=[8, 16, 32], trials=10, protocol="flood", seed=1)
    report = run_sweep(config)
    assert [row.n for row in report.rows] == [8, 16, 32]
    for row in report.rows:
        assert (row.p10, row.p50, row.p90) == (1.0, 1.0, 1.0)
        assert row.censored == 0
        assert row.ratio == pytest.approx(1.0 / row.rate)


def test_sweep_independent_of_thread_count():
    family = ParamFamily("pq", p=0.3, q=0.3)
    one = run_sweep(SweepConfig(family=family, n_grid=[16, 24], trials=12, protocol="pushpull", seed=4, threads=1))
    many = run_sweep(SweepConfig(family=family, n_grid=[16, 24], trials=12, protocol="pushpull", seed=4, threads=4))
    assert one.records() == many.records()


def test_sweep_rows_consistent():
    config = SweepConfig(family=ParamFamily("pq", p=0.05, q=0.9), n_grid=[16], trials=20, protocol="push", cap=3)
    row = run_sweep(config).rows[0]
    assert row.p10 <= row.p50 <= row.p90 <= 3
    assert 0 <= row.censored <= row.trials


def test_push_rate_ratio_bounded():
    config = SweepConfig(family=ParamFamily("pq", p=0.5, q=0.5), n_grid=[16, 32, 64], trials=40, protocol="push", seed=3)
    report = run_sweep(config)
    assert report.ratio_spread() <= 4.0


def test_sparse_push_rate_ratio_bounded():
    family = ParamFamily("sparse", a=1.0, k=1.5)
    config = SweepConfig(family=family, n_grid=[64, 128, 256], trials=30, protocol="push", seed=10)
    report = run_sweep(config)
    assert config.rate == RateFamily.SPARSE_PUSH
    assert report.ratio_spread() <= 4.0
    assert all(row.censored == 0 for row in report.rows)


@pytest.mark.parametrize("protocol", ["pull", "pushpull"])
def test_sparse_fastmix_log_rate_bounded(protocol):
    # pi1 close to 4/n
    family = fastmix_family(f=PowerLaw(4.0, 1.0), g=PowerLaw(0.0), M=4.0, alpha_family=1.0)
    config = SweepConfig(family=family, n_grid=[128, 256, 512], trials=30, protocol=protocol, seed=11)
    report = run_sweep(config)
    assert config.rate == RateFamily.LOG
    assert report.ratio_spread() <= 4.0
    assert all(row.censored == 0 for row in report.rows)


def test_ratio_spread():
    assert ratio_spread([1.0, 2.0, 4.0]) == 4.0
    assert is_bounded([1.0, 3.9])
    assert not is_bounded([0.5, 3.0])
    assert ratio_spread([]) == math.inf


def test_iid_family_against_itself():
    family = ParamFamily("iid", iid_p=PowerLaw(0.3))
    report = dependent_vs_iid(SweepConfig(family=family, n_grid=[16, 32], trials=15, protocol="push", seed=2))
    for row in report.rows:
        assert row.iid_p50 == row.p50
        assert row.dep_iid_ratio == 1.0
        assert row.ratio == pytest.approx(row.p50 / row.rate)


def test_markov_dynamics_against_iid_baseline():
    config = SweepConfig(family=ParamFamily("pq", p=0.3, q=0.3), n_grid=[64, 128], trials=30, protocol="push", seed=12)
    plain = run_sweep(config)
    report = dependent_vs_iid(config)
    for row, plain_row in zip(report.rows, plain.rows):
        assert row.p50 == plain_row.p50
        assert row.ratio == pytest.approx(row.p50 / row.rate)
        assert row.dep_iid_ratio == pytest.approx(row.p50 / row.iid_p50)
        assert 0.5 <= row.dep_iid_ratio <= 2.0
    records = report.records()
    assert export.sweep_columns(records)[-2:] == ["iid_p50", "dep_iid_ratio"]


def test_dependent_vs_iid_needs_edges():
    config = SweepConfig(family=ParamFamily("pq", p=0.0, q=1.0), n_grid=[8], trials=2, rate=RateFamily.LOG)
    with pytest.raises(DegenerateLawError, match="degenerate stationary graph"):
        dependent_vs_iid(config)


def test_persistent_pair_dominance():
    family = ParamFamily("persistent", a=1.0, k=2.0, alpha=0.3)
    rows = flood_rate_check(SweepConfig(family=family, n_grid=[16], trials=30, protocol="flood", cap=80, seed=6))
    assert rows[0].dominance_failures == 0
    assert rows[0].lower_p50 >= rows[0].p50


def test_flood_check_needs_flood():
    with pytest.raises(ConfigError):
        flood_rate_check(SweepConfig(family=ParamFamily("pq"), n_grid=[8], trials=2, protocol="push"))


@pytest.mark.parametrize("p, q", [(0.2, 0.3), (0.5, 0.5), (0.9, 0.6)])
def test_strategy_domination(p, q):
    rows = strategy_check(SweepConfig(family=ParamFamily("pq", p=p, q=q), n_grid=[16], trials=20, protocol="flood"))
    assert rows[0].violations == 0
    assert rows[0].p50_full <= rows[0].p50_subsampled_time


# -----------------------------
# Bounds
# -----------------------------
def test_bound_report_fastmix():
    rows = bound_report(fastmix_family(), [8, 16, 32], list(range(4, 60)))
    assert len(rows) == 3 * 56
    for row in rows:
        assert row.consistent
        assert row.ubs_valid
        assert row.chernoff is not None


def test_bound_report_zero_delta():
    rows = bound_report(ParamFamily("pq", p=0.5, q=0.5), [8], [1, 2, 3])
    assert [row.s_exact for row in rows] == [0.0, 0.0, 0.0]
    assert all(row.ubs_mid is None for row in rows)


def test_bound_report_needs_markov():
    with pytest.raises(ConfigError):
        bound_report(ParamFamily("renewal", hazard="0.5"), [8], [4])


# -----------------------------
# Validation suites
# -----------------------------
def test_dkw_epsilon():
    assert dkw_epsilon(100_000) < 0.01


def test_sst_suite_passes():
    report = sst_suite(MarkovEdgeParams(0.375, 0.375), n=6, samples=20_000, steps=3000, stationary_times=100, seed=1)
    assert report.passed, report.records()
    assert len(report.checks) == 5


def test_sst_suite_two_step_chain():
    report = sst_suite(MarkovEdgeParams(0.9, 0.6), n=5, samples=10_000, steps=2000, stationary_times=100, seed=2)
    assert report.passed, report.records()


def test_cftp_suite_passes():
    report = cftp_suite(constant_hazard(0.5), n=3, samples=2000, seeds=20, spacings=2000, seed=3)
    assert report.passed, report.records()
    assert {check.name for check in report.checks} >= {"perfect sample marginal", "past independence mismatches"}


# -----------------------------
# Export and storage
# -----------------------------
def test_render_csv_six_significant_digits():
    text = export.render_csv([{"n": 8, "ratio": 0.123456789, "note": None}], ["n", "ratio", "note"])
    assert text == "n,ratio,note\n8,0.123457,\n"


def test_render_json_drops_nan():
    rows = json.loads(export.render_json([{"n": 8, "ratio": math.nan, "p50": 2.0}]))
    assert rows == [{"n": 8, "ratio": None, "p50": 2.0}]


def test_sweep_columns():
    assert export.sweep_columns([{"iid_p50": None}]) == export.SWEEP_COLUMNS
    assert export.sweep_columns([{"iid_p50": 3.0, "dep_iid_ratio": 1.2}])[-2:] == ["iid_p50", "dep_iid_ratio"]


def test_render_document_rounds_nested_values():
    document = json.loads(export.render_document({"report": {"ks": 0.123456789, "bad": math.inf}, "rows": [1.0 / 3]}))
    assert document == {"report": {"ks": 0.123457, "bad": None}, "rows": [0.333333]}


def test_write_output_to_file(tmp_path):
    path = tmp_path / "out.csv"
    asyncio.run(export.write_output("a,b\n1,2\n", str(path)))
    assert path.read_text() == "a,b\n1,2\n"


def test_database_store_and_read(tmp_path):
    db_path = str(tmp_path / "results.db")
    config = SweepConfig(family=ParamFamily("complete"), n_grid=[4, 8], trials=3, protocol="flood")
    records = run_sweep(config).records()
    asyncio.run(database.save_rows(db_path, "run-1", records))
    stored = asyncio.run(database.get_rows(db_path, "run-1"))
    assert [row["n"] for row in stored] == [4, 8]
    assert stored[0]["p50"] == 1.0
    assert asyncio.run(database.get_rows(db_path, "other")) == []

import json

import pytest

from edge_dynamics.markov import delta
from harness.cli import EXIT_CONFIG, EXIT_OK, build_family, build_parser, main, merge_options

SWEEP_HEADER = "n,protocol,dynamics,trials,p10,p50,p90,censored,rate,ratio,seed"


@pytest.fixture(autouse=True)
def no_default_db(monkeypatch):
    monkeypatch.delenv("GOSSIPDYN_DB", raising=False)


def run_cli(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_sweep_example(capsys):
    code, out = run_cli(
        capsys, "sweep", "--protocol", "push", "--dynamics", "markov", "--family", "pq", "--p", "0.5", "--q", "0.5",
        "--n-grid", "64,128,256", "--trials", "100", "--seed", "7",
    )
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == SWEEP_HEADER
    assert [line.split(",")[0] for line in lines[1:]] == ["64", "128", "256"]


def test_sweep_rerun_is_byte_identical(capsys):
    argv = ["sweep", "--family", "pq", "--p", "0.2", "--q", "0.4", "--n-grid", "16,32", "--trials", "15", "--seed", "3"]
    _, first = run_cli(capsys, *argv, "--threads", "1")
    _, second = run_cli(capsys, *argv, "--threads", "3")
    assert first == second


def test_simulate_single_vertex(capsys):
    code, out = run_cli(capsys, "simulate", "--n", "1", "--format", "json")
    document = json.loads(out)
    assert code == EXIT_OK
    assert document["completion"] == 0
    assert document["trajectory"] == [1]


def test_simulate_trajectory_csv(capsys):
    code, out = run_cli(capsys, "simulate", "--n", "16", "--family", "complete", "--protocol", "flood", "--source", "3")
    assert code == EXIT_OK
    assert out.splitlines() == ["round,informed", "0,1", "1,16"]


def test_unknown_flag_is_config_error(capsys):
    assert main(["sweep", "--bogus", "1"]) == EXIT_CONFIG
    assert "usage" in capsys.readouterr().err


def test_fastmix_hypothesis_violation(capsys):
    code = main(["sweep", "--family", "fastmix", "--f", "1/n", "--g", "0", "--n-grid", "8"])
    assert code == EXIT_CONFIG


def test_dynamics_family_mismatch():
    assert main(["sweep", "--family", "renewal", "--dynamics", "markov"]) == EXIT_CONFIG


def test_separation_rows(capsys):
    code, out = run_cli(capsys, "separation", "--family", "fastmix", "--n-grid", "8,16", "--k-grid", "4:10")
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0].startswith("n,k,s_exact")
    assert len(lines) == 1 + 2 * 7


def test_sst_validate_small(capsys):
    code, out = run_cli(
        capsys, "sst-validate", "--p", "0.375", "--q", "0.375", "--samples", "20000", "--steps", "2000",
        "--stationary-times", "100", "--seed", "1",
    )
    assert code == EXIT_OK
    assert out.splitlines()[0] == "name,statistic,threshold,passed"


def test_cftp_validate_small(capsys):
    code, out = run_cli(capsys, "cftp-validate", "--hazard", "0.5", "--n", "3", "--samples", "2000", "--seeds", "10")
    assert code == EXIT_OK
    assert "false" not in out


def test_validate_defaults_are_mixing_chains():
    sst = merge_options(build_parser().parse_args(["sst-validate"]))
    params = build_family(sst).edge_params(sst["n"])
    assert sst["n"] == 6
    assert delta(params) == pytest.approx(0.25)

    cftp = merge_options(build_parser().parse_args(["cftp-validate"]))
    params = build_family(cftp).edge_params(cftp["n"])
    assert cftp["n"] == 4
    assert params.minorization_alpha == pytest.approx(0.5)
    assert params.pi1 == pytest.approx(0.5)


def test_cftp_validate_json_report(capsys):
    code, out = run_cli(
        capsys, "cftp-validate", "--n", "3", "--samples", "2000", "--seeds", "10", "--format", "json",
    )
    document = json.loads(out)
    assert code == EXIT_OK
    assert document["passed"] is True
    assert {"theta0_histogram", "marginal_estimate", "pi1_expected", "ks_statistics"} <= set(document)
    assert document["pi1_expected"] == 0.5
    assert sum(document["theta0_histogram"].values()) == 2000
    assert abs(document["marginal_estimate"] - 0.5) < 0.05
    assert {check["name"] for check in document["checks"]} >= {"perfect sample marginal"}


def test_out_file_and_json(tmp_path, capsys):
    path = tmp_path / "sweep.json"
    code, out = run_cli(
        capsys, "sweep", "--family", "complete", "--protocol", "flood", "--n-grid", "8,16", "--trials", "5",
        "--format", "json", "--out", str(path),
    )
    rows = json.loads(path.read_text())
    assert code == EXIT_OK
    assert out == ""
    assert [row["p50"] for row in rows] == [1.0, 1.0]


def test_config_file(tmp_path, capsys):
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps({"family": "pq", "p": 0.3, "q": 0.3, "n-grid": "16,24", "trials": 5}))
    code, out = run_cli(capsys, "sweep", "--config", str(config), "--trials", "7")
    rows = out.splitlines()[1:]
    assert code == EXIT_OK
    assert [row.split(",")[0] for row in rows] == ["16", "24"]
    assert all(row.split(",")[3] == "7" for row in rows)


def test_missing_config_file():
    assert main(["sweep", "--config", "/nonexistent/sweep.json"]) == EXIT_CONFIG


def test_flood_check_persistent(capsys):
    code, out = run_cli(
        capsys, "flood-check", "--family", "persistent", "--a", "1", "--k", "2", "--alpha", "0.3", "--n-grid", "16",
        "--trials", "10", "--cap", "60",
    )
    assert code == EXIT_OK
    assert out.splitlines()[0].endswith("lower_p50,dominance_failures")


def test_sweep_stored_in_database(tmp_path, capsys):
    import asyncio

    from harness import database

    db_path = str(tmp_path / "runs.db")
    code, _ = run_cli(
        capsys, "sweep", "--family", "complete", "--protocol", "flood", "--n-grid", "4,8", "--trials", "3",
        "--db", db_path, "--run-id", "smoke",
    )
    assert code == EXIT_OK
    stored = asyncio.run(database.get_rows(db_path, "smoke"))
    assert [row["n"] for row in stored] == [4, 8]


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "sweep" in capsys.readouterr().out

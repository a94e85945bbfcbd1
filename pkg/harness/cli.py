"""
Command-line entry: python gossipdyn.py <subcommand> [flags].

Exit codes: 0 success, 1 configuration or usage error, 2 runtime error,
3 when a validation check fails its tolerance.
"""
from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from dataclasses import asdict

from dynamic_graph import streams
from dynamic_graph.state import init_stationary
from edge_dynamics.errors import GossipDynError, InvalidParamsError
from edge_dynamics.params import MarkovEdgeParams, RenewalEdgeParams
from protocols.rounds import Protocol
from protocols.run import default_cap, run
from renewal_cftp.cftp import validation_report

from . import database, export
from .bounds import bound_report
from .config import ConfigError, SweepConfig, default_db_path, load_config, parse_grid, setup_logging
from .families import FamilyKind, ParamFamily, PowerLaw, RateFamily, rate_value
from .sweep import dependent_vs_iid, flood_rate_check, run_sweep, strategy_check
from .validate import cftp_suite, sst_suite

log = logging.getLogger("cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_VALIDATION = 3

DEFAULTS = {
    "n": 64,
    "n_grid": "64",
    "k_grid": "4:200",
    "trials": 100,
    "protocol": "push",
    "dynamics": None,
    "family": None,
    "p": 0.5,
    "q": 0.5,
    "f": "1/n^2",
    "g": "0",
    "M": 1.0,
    "alpha_family": 2.0,
    "a": 1.0,
    "k": 1.5,
    "alpha": 0.3,
    "lam": 1.0,
    "hazard": "constant",
    "iid_p": None,
    "rate": None,
    "seed": 0,
    "cap": None,
    "threads": None,
    "source": None,
    "C": 5.0,
    "D": 25.0,
    "samples": None,
    "steps": 20_000,
    "stationary_times": 200,
    "seeds": 100,
    "format": "csv",
    "out": None,
    "db": None,
    "run_id": None,
}

# Per-subcommand defaults, applied before the config file
COMMAND_DEFAULTS = {
    "sst-validate": {"n": 6, "p": 0.375, "q": 0.375},
    "cftp-validate": {"n": 4, "dynamics": "renewal", "hazard": "0.5"},
}


class UsageError(ConfigError):
    pass


class Parser(argparse.ArgumentParser):
    """argparse that reports bad flags as a configuration error instead of exiting 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common_flags() -> argparse.ArgumentParser:
    # Every default is None so config-file values can fill the gaps
    common = argparse.ArgumentParser(add_help=False)
    add = common.add_argument
    add("--config", help="JSON file with flag values; flags given here override it")
    add("--n", type=int)
    add("--n-grid", dest="n_grid")
    add("--trials", type=int)
    add("--protocol", choices=[p.value for p in Protocol])
    add("--dynamics", choices=["iid", "markov", "renewal"])
    add("--family", choices=[k.value for k in FamilyKind])
    add("--p", type=float)
    add("--q", type=float)
    add("--f", help="f(n) as c or c/n^e")
    add("--g", help="g(n) as c or c/n^e")
    add("--M", type=float)
    add("--alpha-family", dest="alpha_family", type=float)
    add("--a", type=float)
    add("--k", type=float)
    add("--alpha", type=float)
    add("--lam", type=float)
    add("--hazard", help="constant, example, or a number in (0, 1]")
    add("--iid-p", dest="iid_p", help="p(n) as c or c/n^e")
    add("--rate", choices=[r.value for r in RateFamily])
    add("--seed", type=int)
    add("--cap", type=int)
    add("--threads", type=int)
    add("--format", choices=["csv", "json"])
    add("--out")
    add("-v", "--verbose", action="store_true", default=None)
    add("--quiet", action="store_true", default=None)
    return common


def build_parser() -> Parser:
    common = _common_flags()
    parser = Parser(prog="gossipdyn", description="Rumor spreading on dynamic random graphs")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    simulate = sub.add_parser("simulate", parents=[common], help="one trial, prints the informed trajectory")
    simulate.add_argument("--source", type=int)

    for name, text in (("sweep", "completion-time quantiles over an n-grid"),
                       ("compare", "dependent dynamics against ER(pi1)")):
        command = sub.add_parser(name, parents=[common], help=text)
        command.add_argument("--db", help="store rows in this sqlite database")
        command.add_argument("--run-id", dest="run_id")

    sub.add_parser("flood-check", parents=[common], help="flood completion against its rate, coupled pair for persistent")
    sub.add_parser("strategy", parents=[common], help="flood on every snapshot against flood at stationary times")

    separation = sub.add_parser("separation", parents=[common], help="exact separation next to its bounds")
    separation.add_argument("--k-grid", dest="k_grid", help="comma list or lo:hi")
    separation.add_argument("--C", type=float)
    separation.add_argument("--D", type=float)

    sst = sub.add_parser("sst-validate", parents=[common], help="strong stationary time statistical checks")
    sst.add_argument("--samples", type=int)
    sst.add_argument("--steps", type=int)
    sst.add_argument("--stationary-times", dest="stationary_times", type=int)

    cftp = sub.add_parser("cftp-validate", parents=[common], help="coupling from the past statistical checks")
    cftp.add_argument("--samples", type=int)
    cftp.add_argument("--seeds", type=int)
    return parser


# -----------------------------
# Option assembly
# -----------------------------
def merge_options(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    options = {**DEFAULTS, **COMMAND_DEFAULTS.get(args.command, {})}
    if args.config:
        options.update(load_config(args.config))
    options.update({key: value for key, value in vars(args).items() if value is not None})
    return options


def parse_k_grid(value) -> list[int]:
    if isinstance(value, str) and ":" in value:
        lo, hi = value.split(":", 1)
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise ConfigError(f"bad k range {value!r}")
    return parse_grid(value)


def _power_law(value) -> PowerLaw:
    if isinstance(value, (int, float)):
        return PowerLaw(float(value))
    try:
        return PowerLaw.parse(str(value))
    except ValueError:
        raise ConfigError(f"bad power law {value!r}; use c or c/n^e")


def build_family(options: dict) -> ParamFamily:
    dynamics = options.get("dynamics")
    kind = options.get("family")
    if kind is None:
        kind = {"iid": "iid", "renewal": "renewal"}.get(dynamics, "pq")
    iid_p = options.get("iid_p")
    if iid_p is None:
        iid_p = options["p"]
    family = ParamFamily(
        kind=kind,
        p=float(options["p"]),
        q=float(options["q"]),
        f=_power_law(options["f"]),
        g=_power_law(options["g"]),
        M=float(options["M"]),
        alpha_family=float(options["alpha_family"]),
        a=float(options["a"]),
        k=float(options["k"]),
        alpha=float(options["alpha"]),
        lam=float(options["lam"]),
        hazard=str(options["hazard"]),
        iid_p=_power_law(iid_p),
    )
    if dynamics is not None and family.dynamics != dynamics:
        raise ConfigError(f"family {family.kind.value} has {family.dynamics} dynamics, not {dynamics}")
    return family


def build_config(options: dict, n_grid=None) -> SweepConfig:
    rate = options.get("rate")
    if rate is not None:
        try:
            rate = RateFamily(rate)
        except ValueError:
            raise ConfigError(f"unknown rate family {rate!r}")
    config = SweepConfig(
        family=build_family(options),
        n_grid=parse_grid(n_grid if n_grid is not None else options["n_grid"]),
        trials=int(options["trials"]),
        protocol=options["protocol"],
        rate=rate,
        seed=int(options["seed"]),
        cap=options["cap"],
        threads=options["threads"],
    )
    log.debug("config %s (family %s)", config.to_dict(), config.family.kind.value)
    return config


def _emit(records: list[dict], options: dict, columns: list[str] | None = None):
    asyncio.run(export.write_output(export.render(records, options["format"], columns), options["out"]))


# -----------------------------
# Subcommands
# -----------------------------
def cmd_simulate(options: dict) -> int:
    config = build_config(options, n_grid=[options["n"]])
    n = options["n"]
    spec = config.family.spec(n)
    rate = rate_value(config.rate, n, spec.pi1, config.family.k) if n >= 2 else 0.0
    cap = config.cap if config.cap is not None else default_cap(rate)
    source = options["source"]
    if source is None:
        source = int(streams.generator(config.seed, streams.SOURCE).integers(n))
    if not 0 <= source < n:
        raise ConfigError(f"source {source} outside [0, {n})")

    result = run(init_stationary(spec, config.seed), config.protocol, source, cap)
    completion = "CENSORED" if result.censored else result.completion_rounds
    log.info("completion %s (cap %d)", completion, cap)
    if options["format"] == "json":
        record = {"n": n, "protocol": config.protocol.value, "source": source, "seed": config.seed,
                  "cap": cap, "completion": completion, "trajectory": list(result.informed_trajectory)}
        asyncio.run(export.write_output(export.render_document(record), options["out"]))
        return EXIT_OK
    records = [{"round": i, "informed": count} for i, count in enumerate(result.informed_trajectory)]
    _emit(records, options, ["round", "informed"])
    return EXIT_OK


def _store(records: list[dict], options: dict, config: SweepConfig, command: str):
    db_path = options.get("db") or default_db_path()
    if not db_path:
        return
    run_id = options.get("run_id") or f"{command}-{config.family.kind.value}-{config.protocol.value}-seed{config.seed}"
    asyncio.run(database.save_rows(db_path, run_id, records))


def cmd_sweep(options: dict) -> int:
    config = build_config(options)
    records = run_sweep(config).records()
    _emit(records, options, export.sweep_columns(records))
    _store(records, options, config, "sweep")
    return EXIT_OK


def cmd_compare(options: dict) -> int:
    config = build_config(options)
    records = dependent_vs_iid(config).records()
    _emit(records, options, export.sweep_columns(records))
    _store(records, options, config, "compare")
    return EXIT_OK


def cmd_flood_check(options: dict) -> int:
    options = {**options, "protocol": "flood"}
    rows = flood_rate_check(build_config(options))
    _emit([asdict(row) for row in rows], options)
    return EXIT_VALIDATION if any(row.dominance_failures for row in rows) else EXIT_OK


def cmd_strategy(options: dict) -> int:
    options = {**options, "protocol": "flood"}
    rows = strategy_check(build_config(options))
    _emit([asdict(row) for row in rows], options)
    return EXIT_VALIDATION if any(row.violations for row in rows) else EXIT_OK


def cmd_separation(options: dict) -> int:
    family = build_family(options)
    rows = bound_report(family, parse_grid(options["n_grid"]), parse_k_grid(options["k_grid"]),
                        float(options["C"]), float(options["D"]))
    _emit([asdict(row) for row in rows], options)
    return EXIT_OK if all(row.consistent for row in rows) else EXIT_VALIDATION


def _validation_exit(report, options: dict) -> int:
    _emit(report.records(), options, ["name", "statistic", "threshold", "passed"])
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_sst_validate(options: dict) -> int:
    family = build_family(options)
    n = int(options["n"])
    params = family.edge_params(n)
    if not isinstance(params, MarkovEdgeParams):
        raise ConfigError("sst-validate needs an edge-Markovian family")
    report = sst_suite(params, n, options["samples"] or 100_000, int(options["steps"]),
                       int(options["stationary_times"]), int(options["seed"]))
    return _validation_exit(report, options)


def cmd_cftp_validate(options: dict) -> int:
    family = build_family(options)
    n = int(options["n"])
    params = family.edge_params(n)
    if not isinstance(params, RenewalEdgeParams):
        raise ConfigError("cftp-validate needs a renewal family")
    samples = options["samples"] or 10_000
    seed = int(options["seed"])
    report = cftp_suite(params, n, samples, int(options["seeds"]), spacings=samples, seed=seed)
    if options["format"] != "json":
        return _validation_exit(report, options)
    document = {"checks": report.records(), "passed": report.passed,
                **validation_report(params, n, samples, streams.derive_seed(seed, streams.CFTP))}
    asyncio.run(export.write_output(export.render_document(document), options["out"]))
    return EXIT_OK if report.passed else EXIT_VALIDATION


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "flood-check": cmd_flood_check,
    "strategy": cmd_strategy,
    "separation": cmd_separation,
    "sst-validate": cmd_sst_validate,
    "cftp-validate": cmd_cftp_validate,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"gossipdyn: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    if args.verbose:
        setup_logging("DEBUG")
    elif args.quiet:
        setup_logging("WARNING")
    else:
        setup_logging()

    try:
        options = merge_options(args)
        return COMMANDS[args.command](options)
    except (ConfigError, InvalidParamsError) as e:
        log.error("%s", e)
        return EXIT_CONFIG
    except (GossipDynError, RuntimeError, OSError) as e:
        log.error("%s", e)
        return EXIT_RUNTIME
    except (ValueError, TypeError) as e:
        # Malformed values in a config file
        log.error("bad option value: %s", e)
        return EXIT_CONFIG

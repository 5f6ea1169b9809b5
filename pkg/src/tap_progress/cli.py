"""Config-driven command line front end.

Subcommands: bound, simulate, verify, queue, mtr, tap-trace. Each loads a
TOML scenario file, runs the corresponding experiment, writes CSV (floats
at 17 significant digits; rates in 1/seconds, times in seconds) plus a
human-readable summary, and signals results through the exit code:
0 = all requested checks satisfied, 1 = checks violated,
2 = configuration or domain error.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

import numpy as np

from . import analytic, engine, mm1, mtr, stats, tap
from .rng import RngStream

OUTPUT_DIR_ENV = "TAP_PROGRESS_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

# Minimum trials before any DKW-based claim is made.
MIN_TRIALS_FOR_DKW = 1000


class ConfigError(Exception):
    """Config file missing, unparsable, or violating the schema."""


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}")


def _section(config: dict, name: str) -> dict:
    if name not in config:
        raise ConfigError(f"missing config section [{name}]")
    return config[name]


def _key(section: dict, section_name: str, key: str, kind):
    if key not in section:
        raise ConfigError(f"missing config key {section_name}.{key}")
    value = section[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(
            f"config key {section_name}.{key} must be {kind.__name__}, got {value!r}"
        )
    return value


def _mtr_config(config: dict) -> analytic.MtrConfig:
    sec = _section(config, "mtr")
    return analytic.MtrConfig(
        meeting_rate=_key(sec, "mtr", "meeting_rate", float),
        node_count=_key(sec, "mtr", "node_count", int),
    )


def _queue_config(config: dict) -> analytic.Mm1Config:
    sec = _section(config, "queue")
    return analytic.Mm1Config(
        arrival_rate=_key(sec, "queue", "arrival_rate", float),
        service_rate=_key(sec, "queue", "service_rate", float),
    )


def _scenario(config: dict, args) -> engine.ScenarioConfig:
    sec = _section(config, "scenario")
    trials = args.trials if args.trials is not None else _key(sec, "scenario", "trials", int)
    seed = args.seed if args.seed is not None else _key(sec, "scenario", "seed", int)
    source = sec.get("processing_source", "analytic")
    try:
        source = engine.ProcessingSource(source)
    except ValueError:
        raise ConfigError(
            f"config key scenario.processing_source must be one of "
            f"{[s.value for s in engine.ProcessingSource]}, got {source!r}"
        )
    return engine.ScenarioConfig(
        replica_count=_key(sec, "scenario", "replica_count", int),
        mtr=_mtr_config(config),
        queue=_queue_config(config),
        trials=trials,
        seed=seed,
        processing_source=source,
    )


def _grid(config: dict) -> tuple[list[tuple[float, float]], float]:
    sec = _section(config, "grid")
    xs = _key(sec, "grid", "x", list)
    ys = _key(sec, "grid", "y", list)
    if not xs or not ys:
        raise ConfigError("config keys grid.x and grid.y must be non-empty lists")
    confidence = sec.get("confidence", 0.99)
    pairs = [(float(x), float(y)) for x in xs for y in ys]
    return pairs, float(confidence)


def _out_dir(args) -> Path:
    base = args.output_dir or os.environ.get(OUTPUT_DIR_ENV, ".")
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_bound(config: dict, args) -> int:
    """Pure analytic bound table over the (x, y) grid; no randomness."""
    sec = _section(config, "scenario")
    replica_count = _key(sec, "scenario", "replica_count", int)
    n_m = analytic.message_count(replica_count)
    trans_rate = analytic.mtr_delay_dist(_mtr_config(config)).rate
    proc_rate = analytic.mm1_sojourn_dist(_queue_config(config)).rate
    pairs, _ = _grid(config)

    out = _out_dir(args) / "bound.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x_seconds", "y_seconds", "analytic_bound"])
        for x, y in pairs:
            b = analytic.progress_bound(x, y, n_m, trans_rate, proc_rate)
            writer.writerow([f"{x:.17g}", f"{y:.17g}", f"{b:.17g}"])
    print(f"wrote {len(pairs)} bound rows to {out}")
    return EXIT_OK


def cmd_verify(config: dict, args) -> int:
    """Monte Carlo check of the bound on every grid point."""
    cfg = _scenario(config, args)
    pairs, confidence = _grid(config)
    if cfg.trials < MIN_TRIALS_FOR_DKW:
        raise ConfigError(
            f"{cfg.trials} trials is insufficient for a DKW claim at "
            f"confidence {confidence}; use at least {MIN_TRIALS_FOR_DKW}"
        )
    report = engine.verify_bound(cfg, pairs, confidence, jobs=args.jobs)
    out = _out_dir(args) / "verify.csv"
    engine.write_bound_csv(report, out)

    n_ok = sum(p.satisfied for p in report.grid)
    print(f"trials={report.trials} confidence={report.confidence}")
    print(f"implication_violations={report.implication_violations}")
    print(f"delay_correlation={report.delay_correlation:.5f}")
    if report.all_satisfied:
        print(f"SATISFIED {n_ok}/{len(report.grid)}")
        return EXIT_OK
    for p in report.grid:
        if not p.satisfied:
            print(
                f"VIOLATED x={p.x} y={p.y} bound={p.analytic_bound:.6f} "
                f"empirical={p.empirical_prob:.6f} eps={p.dkw_epsilon:.6f}"
            )
    print(f"SATISFIED {n_ok}/{len(report.grid)}")
    return EXIT_CHECK_FAILED


def cmd_simulate(config: dict, args) -> int:
    """Monte Carlo progress-time samples and summary statistics."""
    cfg = _scenario(config, args)
    t_d, t_p = engine.run_progress_trials(cfg, jobs=args.jobs)
    t_s = t_d + t_p
    out = _out_dir(args) / "samples.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["total_transmission_seconds", "total_processing_seconds", "total_seconds"])
        for a, b, c in zip(t_d, t_p, t_s):
            writer.writerow([f"{a:.17g}", f"{b:.17g}", f"{c:.17g}"])
    print(f"trials={cfg.trials} messages_per_trial={cfg.n_messages}")
    print(f"mean_total={t_s.mean():.6f} median_total={np.median(t_s):.6f}")
    print(f"wrote samples to {out}")
    return EXIT_OK


def cmd_queue(config: dict, args) -> int:
    """Queue simulation with the sojourn-distribution fit check."""
    queue_cfg = _queue_config(config)
    sec = _section(config, "queue_run")
    horizon = _key(sec, "queue_run", "horizon", float)
    seed = args.seed if args.seed is not None else _key(sec, "queue_run", "seed", int)
    confidence = sec.get("confidence", 0.99)

    trace = mm1.simulate_queue(queue_cfg, horizon, RngStream(seed))
    out_dir = _out_dir(args)
    mm1.write_events_csv(trace, out_dir / "queue_events.csv")
    fit = mm1.sojourn_fit(trace, queue_cfg, confidence=float(confidence))
    lambda_t, t_t, n_t = mm1.trace_stats(trace)
    with open(out_dir / "queue_fit.txt", "w") as fh:
        for k, v in [
            ("arrivals", trace.arrivals),
            ("windowed_arrival_rate", lambda_t),
            ("windowed_mean_sojourn", t_t),
            ("windowed_mean_occupancy", n_t),
            ("ks_stat", fit.ks_stat),
            ("dkw_eps", fit.dkw_eps),
            ("within_band", fit.within_band),
            ("sample_mean", fit.sample_mean),
            ("expected_mean", fit.expected_mean),
            ("n_used", fit.n_used),
            ("thinning", fit.thinning),
            ("lag1_autocorr", fit.lag1_autocorr),
        ]:
            fh.write(f"{k}={v}\n")
    print(
        f"arrivals={trace.arrivals} ks={fit.ks_stat:.5f} eps={fit.dkw_eps:.5f} "
        f"within_band={fit.within_band}"
    )
    return EXIT_OK if fit.within_band else EXIT_CHECK_FAILED


def cmd_mtr(config: dict, args) -> int:
    """Delivery-delay samples with a CDF agreement check."""
    mtr_cfg = _mtr_config(config)
    sec = _section(config, "mtr_run")
    samples = args.trials if args.trials is not None else _key(sec, "mtr_run", "samples", int)
    seed = args.seed if args.seed is not None else _key(sec, "mtr_run", "seed", int)
    mode_name = sec.get("mode", "min_of_meetings")
    confidence = sec.get("confidence", 0.99)
    try:
        mode = mtr.DeliveryMode(mode_name)
    except ValueError:
        raise ConfigError(
            f"config key mtr_run.mode must be one of "
            f"{[m.value for m in mtr.DeliveryMode]}, got {mode_name!r}"
        )

    delays = mtr.delivery_delay_batch(mtr_cfg, mode, samples, RngStream(seed))
    out = _out_dir(args) / "mtr_delays.csv"
    mtr.write_delays_csv(delays, out)
    ks = stats.ks_distance(
        stats.EmpiricalCdf(delays), lambda t: analytic.mtr_delivery_cdf(mtr_cfg, t)
    )
    eps = stats.dkw_epsilon(samples, float(confidence))
    # the agreement check applies to the mode whose law the CDF describes
    checked = mode is mtr.DeliveryMode.MIN_OF_MEETINGS
    ok = (not checked) or ks <= eps
    print(f"samples={samples} mode={mode.value} ks={ks:.5f} eps={eps:.5f} ok={ok}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_tap_trace(config: dict, args) -> int:
    """One full propagation round with exact message accounting."""
    sec = _section(config, "scenario")
    replica_count = _key(sec, "scenario", "replica_count", int)
    if replica_count < 1:
        raise ConfigError(f"scenario.replica_count must be >= 1, got {replica_count}")
    value = tap.KnowledgeValue(owner_set=tuple(sec.get("owners", ["o1"])))

    trace = tap.run_tap_trace(value, replica_count)
    out = _out_dir(args) / "tap_trace.csv"
    tap.write_trace_csv(trace, out)
    expected = analytic.message_count(replica_count)
    print(f"replicas={replica_count} messages={trace.message_count} expected={expected}")
    if trace.complete and trace.message_count == expected:
        print("E2-ACHIEVED")
        return EXIT_OK
    print("INCOMPLETE")
    return EXIT_CHECK_FAILED


COMMANDS = {
    "bound": cmd_bound,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "queue": cmd_queue,
    "mtr": cmd_mtr,
    "tap-trace": cmd_tap_trace,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tap-progress",
        description="Knowledge-propagation timing experiments: analytic bounds vs simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("-c", "--config", required=True, help="TOML scenario file")
        p.add_argument(
            "-o",
            "--output-dir",
            default=None,
            help=f"output directory (default: ${OUTPUT_DIR_ENV} or cwd)",
        )
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--trials", type=int, default=None, help="override the trial count")
        p.add_argument("--jobs", type=int, default=1, help="parallel trial chunks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        return COMMANDS[args.command](config, args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())

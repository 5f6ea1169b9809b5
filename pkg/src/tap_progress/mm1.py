"""Discrete-event simulation of a single-server FIFO queue.

Poisson arrivals, exponential service, one server. The simulator validates
empirically what the closed forms in tap_progress.analytic assume: the
occupancy/arrival-rate/sojourn identity, the steady-state mean queue
length and delay, and the exponential shape of the sojourn distribution.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .analytic import ExpDist, Mm1Config, exp_cdf, mm1_mean_delay
from .rng import RngStream
from .stats import EmpiricalCdf, autocorrelation, dkw_epsilon, ks_distance, thin

__all__ = [
    "QueueTrace",
    "FitReport",
    "simulate_queue",
    "trace_stats",
    "little_identity_residual",
    "truncate_at_empty",
    "sojourn_fit",
    "write_events_csv",
]

# Defaults for distribution checks on sojourn samples; see sojourn_fit.
SOJOURN_THINNING = 20
WARMUP_FRACTION = 0.01


@dataclass(frozen=True)
class QueueTrace:
    """Exact record of one queue run over [0, horizon].

    arrival_times covers every arrival in the window; departure_times the
    matching departures (may exceed horizon for messages still in system).
    sojourns lists departure - arrival for messages that departed within
    the window, in arrival (= departure, FIFO) order.
    """

    horizon: float
    arrival_times: np.ndarray
    departure_times: np.ndarray
    occupancy_integral: float

    @property
    def arrivals(self) -> int:
        return int(self.arrival_times.size)

    @property
    def departed_mask(self) -> np.ndarray:
        return self.departure_times <= self.horizon

    @property
    def sojourns(self) -> np.ndarray:
        mask = self.departed_mask
        return self.departure_times[mask] - self.arrival_times[mask]

    @property
    def end_occupancy(self) -> int:
        return int(np.count_nonzero(~self.departed_mask))


@dataclass(frozen=True)
class FitReport:
    """Distribution check of thinned sojourn samples against an exponential."""

    ks_stat: float
    dkw_eps: float
    within_band: bool
    sample_mean: float
    expected_mean: float
    n_used: int
    thinning: int
    lag1_autocorr: float


def _occupancy_integral(arrivals: np.ndarray, departures: np.ndarray, horizon: float) -> float:
    """Integral of the occupancy process over [0, horizon] by event sweep."""
    dep_in = departures[departures <= horizon]
    times = np.concatenate([arrivals, dep_in])
    deltas = np.concatenate([np.ones(arrivals.size), -np.ones(dep_in.size)])
    # ties: arrival before departure (larger occupancy), then by index
    order = np.lexsort((-deltas, times))
    times = times[order]
    occupancy = np.cumsum(deltas[order])
    widths = np.diff(np.append(times, horizon))
    return float(np.dot(occupancy, widths))


def simulate_queue(cfg: Mm1Config, horizon: float, rng: RngStream) -> QueueTrace:
    """Run the queue over [0, horizon] with the given stream.

    Draw order is fixed (all interarrivals, then one service time per
    arrival), so a trace is a pure function of (cfg, horizon, stream).
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")

    # draw interarrival blocks until the cumulative time passes the horizon
    expected = cfg.arrival_rate * horizon
    block = int(expected + 10.0 * np.sqrt(expected) + 64)
    gaps = []
    total = 0.0
    while total <= horizon:
        g = -np.log1p(-rng.uniform(block)) / cfg.arrival_rate
        gaps.append(g)
        total += float(g.sum())
    arrivals = np.cumsum(np.concatenate(gaps))
    arrivals = arrivals[arrivals <= horizon]
    n = arrivals.size
    if n == 0:
        return QueueTrace(horizon, arrivals, arrivals.copy(), 0.0)

    services = -np.log1p(-rng.uniform(n)) / cfg.service_rate
    # FIFO single server: departure_i = max(arrival_i, departure_{i-1}) + service_i,
    # vectorized via dep_i = cumserv_i + max_{j<=i}(arrival_j - cumserv_{j-1})
    cumserv = np.cumsum(services)
    departures = cumserv + np.maximum.accumulate(arrivals - (cumserv - services))

    integral = _occupancy_integral(arrivals, departures, horizon)
    return QueueTrace(horizon, arrivals, departures, integral)


def trace_stats(trace: QueueTrace) -> tuple[float, float, float]:
    """Windowed averages: arrival rate, sojourn of departed messages, occupancy."""
    lambda_t = trace.arrivals / trace.horizon
    if trace.arrivals == 0:
        # lambda_t is trivially 0 but the mean sojourn has no definition
        raise ValueError("no arrivals: windowed mean sojourn is undefined")
    sojourns = trace.sojourns
    t_t = float(sojourns.sum() / trace.arrivals)
    n_t = trace.occupancy_integral / trace.horizon
    return lambda_t, t_t, n_t


def little_identity_residual(trace: QueueTrace) -> float:
    """|occupancy integral - total in-system time of all messages|.

    The area under the occupancy curve equals the summed sojourns of
    departed messages plus (horizon - arrival) for messages still in
    system; the residual is pure floating-point accumulation error.
    """
    mask = trace.departed_mask
    total_time = float(trace.sojourns.sum()) + float(
        (trace.horizon - trace.arrival_times[~mask]).sum()
    )
    return abs(trace.occupancy_integral - total_time)


def truncate_at_empty(trace: QueueTrace) -> QueueTrace:
    """Cut the trace at the last instant the system empties.

    At that instant every arrival has departed, so the in-system
    correction in the occupancy identity is exactly zero.
    """
    arr, dep = trace.arrival_times, trace.departure_times
    if arr.size == 0:
        return trace
    # system is empty right after departure i iff the next arrival is later
    next_arrival = np.append(arr[1:], np.inf)
    empty_after = np.flatnonzero((dep < next_arrival) & (dep <= trace.horizon))
    if empty_after.size == 0:
        raise ValueError("system never empties within the horizon")
    last = int(empty_after[-1])
    new_horizon = float(dep[last])
    arr_cut = arr[: last + 1]
    dep_cut = dep[: last + 1]
    integral = _occupancy_integral(arr_cut, dep_cut, new_horizon)
    return QueueTrace(new_horizon, arr_cut, dep_cut, integral)


def sojourn_fit(
    trace: QueueTrace,
    cfg: Mm1Config,
    confidence: float = 0.99,
    thinning: int = SOJOURN_THINNING,
    warmup_fraction: float = WARMUP_FRACTION,
) -> FitReport:
    """Check departed sojourns against the exponential steady-state law.

    Consecutive sojourns within a busy period are correlated, so the DKW
    band is applied to a thinned subsample; the leading warmup fraction of
    departures is discarded for stationarity.
    """
    sojourns = trace.sojourns
    if sojourns.size < 1000:
        raise ValueError(f"need >= 1000 departed messages, got {sojourns.size}")
    warm = int(warmup_fraction * sojourns.size)
    stationary = sojourns[warm:]
    thinned = thin(stationary, thinning)

    ref_dist = ExpDist(rate=cfg.service_rate - cfg.arrival_rate)
    ks = ks_distance(EmpiricalCdf(thinned), lambda t: exp_cdf(ref_dist, t))
    eps = dkw_epsilon(thinned.size, confidence)
    return FitReport(
        ks_stat=ks,
        dkw_eps=eps,
        within_band=ks <= eps,
        sample_mean=float(stationary.mean()),
        expected_mean=mm1_mean_delay(cfg),
        n_used=int(thinned.size),
        thinning=thinning,
        lag1_autocorr=autocorrelation(thinned),
    )


def write_events_csv(trace: QueueTrace, path) -> None:
    """Export the event sequence as CSV: time, kind, message_id, occupancy."""
    arr, dep = trace.arrival_times, trace.departure_times
    dep_mask = dep <= trace.horizon
    times = np.concatenate([arr, dep[dep_mask]])
    kinds = np.concatenate([np.zeros(arr.size, dtype=int), np.ones(int(dep_mask.sum()), dtype=int)])
    ids = np.concatenate([np.arange(arr.size), np.flatnonzero(dep_mask)])
    order = np.lexsort((ids, kinds, times))
    occupancy = np.cumsum(np.where(kinds[order] == 0, 1, -1))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_seconds", "kind", "message_id", "occupancy_after"])
        for t, k, i, n in zip(times[order], kinds[order], ids[order], occupancy):
            writer.writerow([f"{t:.17g}", "Arrival" if k == 0 else "Departure", i, n])

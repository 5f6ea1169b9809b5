"""Closed-form delay distributions and the timely-progress bound.

Exponential and Erlang CDFs, the multicopy two-hop relay (MTR) delivery
distribution, M/M/1 steady-state quantities, and the Erlang-product lower
bound on the probability that a full propagation round finishes in time.
All functions here are pure; all rates are in 1/seconds, all times in
seconds.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .rng import RngStream

__all__ = [
    "ExpDist",
    "ErlangDist",
    "MtrConfig",
    "Mm1Config",
    "InstabilityError",
    "exp_cdf",
    "exp_sample",
    "erlang_cdf",
    "mtr_delivery_cdf",
    "mtr_delay_dist",
    "mm1_mean_queue_len",
    "mm1_mean_delay",
    "mm1_sojourn_dist",
    "message_count",
    "progress_bound",
]

# Utilization above which closed forms stay valid but simulations converge
# slowly enough to deserve a warning.
HEAVY_TRAFFIC_UTILIZATION = 0.99


class InstabilityError(ValueError):
    """Raised when an M/M/1 configuration has arrival_rate >= service_rate."""


@dataclass(frozen=True)
class ExpDist:
    """Exponential distribution with a positive rate (1/seconds)."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")


@dataclass(frozen=True)
class ErlangDist:
    """Erlang distribution: sum of `shape` i.i.d. exponentials of `rate`."""

    shape: int
    rate: float

    def __post_init__(self):
        if not (isinstance(self.shape, (int, np.integer)) and self.shape >= 1):
            raise ValueError(f"shape must be a positive integer, got {self.shape}")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")


@dataclass(frozen=True)
class MtrConfig:
    """Two-hop relay network: pairwise meeting rate and node count.

    node_count is the total number of mobile nodes (source, destination and
    node_count - 2 relays); the derived relay_paths = node_count - 1 counts
    the independent ways a message copy can reach the destination.
    """

    meeting_rate: float
    node_count: int

    def __post_init__(self):
        if not self.meeting_rate > 0:
            raise ValueError(f"meeting_rate must be positive, got {self.meeting_rate}")
        if not (isinstance(self.node_count, (int, np.integer)) and self.node_count >= 2):
            raise ValueError(f"node_count must be an integer >= 2, got {self.node_count}")

    @property
    def relay_paths(self) -> int:
        # node_count - 1: the direct source path plus node_count - 2 relays
        return self.node_count - 1


@dataclass(frozen=True)
class Mm1Config:
    """Single-server FIFO queue with Poisson arrivals and exponential service.

    Requires arrival_rate < service_rate; the steady-state formulas are
    undefined for an unstable queue, so instability is a construction error.
    """

    arrival_rate: float
    service_rate: float

    def __post_init__(self):
        if not self.arrival_rate > 0:
            raise ValueError(f"arrival_rate must be positive, got {self.arrival_rate}")
        if not self.service_rate > 0:
            raise ValueError(f"service_rate must be positive, got {self.service_rate}")
        if self.arrival_rate >= self.service_rate:
            raise InstabilityError(
                f"unstable queue: arrival_rate {self.arrival_rate} >= "
                f"service_rate {self.service_rate}"
            )
        if self.utilization > HEAVY_TRAFFIC_UTILIZATION:
            warnings.warn(
                f"heavy-traffic queue (utilization {self.utilization:.4f} > "
                f"{HEAVY_TRAFFIC_UTILIZATION}): formulas remain valid but "
                "simulations converge slowly",
                stacklevel=3,
            )

    @property
    def utilization(self) -> float:
        return self.arrival_rate / self.service_rate


def _check_nonneg_time(t) -> None:
    if np.any(np.asarray(t) < 0):
        raise ValueError(f"time must be nonnegative, got {t}")


def exp_cdf(d: ExpDist, t):
    """P(X <= t) = 1 - e^(-rate*t) for X exponential. Accepts array t."""
    _check_nonneg_time(t)
    return -np.expm1(-d.rate * np.asarray(t, dtype=float))


def exp_sample(d: ExpDist, rng: RngStream, size=None):
    """Inverse-transform exponential draws: -ln(1-u)/rate, u uniform [0,1)."""
    u = rng.uniform(size)
    return -np.log1p(-u) / d.rate


def erlang_cdf(d: ErlangDist, t):
    """Erlang CDF: 1 - sum_{n=0}^{shape-1} e^(-rate*t) (rate*t)^n / n!.

    The partial Poisson sum is accumulated with the term recurrence
    term_{n+1} = term_n * x / (n+1), which is stable for shapes up to ~1e4;
    for x large enough that e^(-x) underflows, terms are accumulated in
    log space instead. The result is clamped to [0, 1].
    """
    t_arr = np.asarray(t, dtype=float)
    _check_nonneg_time(t_arr)
    if t_arr.ndim == 0:
        return float(_erlang_cdf_scalar(d.shape, d.rate * float(t_arr)))

    x = d.rate * t_arr.ravel()
    out = np.empty_like(x)
    small = x < 700.0
    if np.any(small):
        xs = x[small]
        term = np.exp(-xs)
        total = term.copy()
        for n in range(1, d.shape):
            term *= xs / n
            total += term
        out[small] = np.clip(1.0 - total, 0.0, 1.0)
    for i in np.flatnonzero(~small):
        out[i] = _erlang_cdf_scalar(d.shape, float(x[i]))
    return out.reshape(t_arr.shape)


def _erlang_cdf_scalar(k: int, x: float) -> float:
    if x == 0.0:
        return 0.0
    if x < 700.0:
        term = math.exp(-x)
        total = term
        for n in range(1, k):
            term *= x / n
            total += term
    else:
        # e^(-x) underflows; sum scaled by the largest log-term
        logs = [-x + n * math.log(x) - math.lgamma(n + 1) for n in range(k)]
        peak = max(logs)
        if peak < -745.0:  # entire tail below double-precision underflow
            return 1.0
        total = math.exp(peak) * math.fsum(math.exp(l - peak) for l in logs)
    return min(1.0, max(0.0, 1.0 - total))


def mtr_delivery_cdf(cfg: MtrConfig, t):
    """CDF of the two-hop relay delivery delay.

    1 - (1 - (1 - e^(-meeting_rate*t)))^relay_paths, i.e. the minimum of
    relay_paths i.i.d. exponential inter-meeting times; algebraically equal
    to exp_cdf at rate meeting_rate * relay_paths.
    """
    _check_nonneg_time(t)
    m = cfg.relay_paths
    survival = 1.0 - (1.0 - np.exp(-cfg.meeting_rate * np.asarray(t, dtype=float)))
    return 1.0 - survival**m


def mtr_delay_dist(cfg: MtrConfig) -> ExpDist:
    """Per-message delivery delay: exponential at rate meeting_rate * relay_paths."""
    return ExpDist(rate=cfg.meeting_rate * cfg.relay_paths)


def mm1_mean_queue_len(cfg: Mm1Config) -> float:
    """Steady-state mean number of messages in system: rho / (1 - rho)."""
    return cfg.arrival_rate / (cfg.service_rate - cfg.arrival_rate)


def mm1_mean_delay(cfg: Mm1Config) -> float:
    """Steady-state mean sojourn time: 1 / (service_rate - arrival_rate)."""
    return 1.0 / (cfg.service_rate - cfg.arrival_rate)


def mm1_sojourn_dist(cfg: Mm1Config) -> ExpDist:
    """Steady-state sojourn distribution: exponential at service_rate - arrival_rate.

    The exponential form is validated empirically by the queue simulator
    (see tap_progress.mm1), not assumed silently.
    """
    return ExpDist(rate=cfg.service_rate - cfg.arrival_rate)


def message_count(replica_count: int) -> int:
    """Messages needed for one full propagation round: 4 per replica."""
    if not (isinstance(replica_count, (int, np.integer)) and replica_count >= 1):
        raise ValueError(f"replica_count must be a positive integer, got {replica_count}")
    return 4 * int(replica_count)


def progress_bound(
    x: float, y: float, n_messages: int, trans_rate: float, proc_rate: float
) -> float:
    """Lower bound on P(total propagation time <= x + y).

    Product of two Erlang CDFs: total transmission delay <= x times total
    processing delay <= y, both with shape n_messages.
    """
    fx = erlang_cdf(ErlangDist(shape=n_messages, rate=trans_rate), x)
    fy = erlang_cdf(ErlangDist(shape=n_messages, rate=proc_rate), y)
    return fx * fy

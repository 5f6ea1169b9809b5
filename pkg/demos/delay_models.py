"""Compare the two delay models against their closed forms.

Transmission: a message reaches its destination through the fastest of
several relay paths, each an exponential inter-meeting time; the minimum
is itself exponential at the summed rate. Processing: a message's time in
a stable M/M/1 queue is exponential at (service rate - arrival rate).
Both claims are checked here by simulation with DKW confidence bands.

Run: python demos/delay_models.py
"""
import numpy as np

from tap_progress import (
    EmpiricalCdf,
    Mm1Config,
    MtrConfig,
    RngStream,
    dkw_epsilon,
    ks_distance,
    mm1_mean_delay,
    mm1_mean_queue_len,
    mtr_delivery_cdf,
    simulate_queue,
    sojourn_fit,
    trace_stats,
    truncate_at_empty,
)
from tap_progress.mtr import DeliveryMode, delivery_delay_batch

print("=== transmission: relay delivery delays ===")
cfg = MtrConfig(meeting_rate=0.1, node_count=6)
n = 100_000
delays = delivery_delay_batch(cfg, DeliveryMode.MIN_OF_MEETINGS, n, RngStream(11))
ks = ks_distance(EmpiricalCdf(delays), lambda t: mtr_delivery_cdf(cfg, t))
eps = dkw_epsilon(n, 0.99)
print(f"meeting rate 0.1, {cfg.node_count} nodes -> effective rate "
      f"{cfg.meeting_rate * cfg.relay_paths}")
print(f"sample mean {delays.mean():.4f} (analytic {1 / (cfg.meeting_rate * cfg.relay_paths):.4f})")
print(f"KS distance {ks:.5f} vs 99% DKW radius {eps:.5f} -> inside band: {ks <= eps}")

# charging the source->relay handoff makes delivery strictly slower
strict = delivery_delay_batch(cfg, DeliveryMode.STRICT_TWO_HOP, n, RngStream(12))
print(f"strict two-hop mean {strict.mean():.4f} (pre-loaded relays {delays.mean():.4f})")

print("\n=== processing: M/M/1 sojourn times ===")
queue = Mm1Config(arrival_rate=1.0, service_rate=2.0)
trace = truncate_at_empty(simulate_queue(queue, 120_000.0, RngStream(7)))
lam, t_t, n_t = trace_stats(trace)
print(f"{trace.arrivals} arrivals over {trace.horizon:.0f}s")
print(f"windowed: rate {lam:.4f}, mean sojourn {t_t:.4f}, mean occupancy {n_t:.4f}")
print(f"closed form: occupancy {mm1_mean_queue_len(queue):.4f}, "
      f"delay {mm1_mean_delay(queue):.4f}")
print(f"occupancy = rate x delay identity gap: {abs(n_t - lam * t_t):.2e}")

fit = sojourn_fit(trace, queue)
print(f"sojourn law: KS {fit.ks_stat:.5f} vs DKW {fit.dkw_eps:.5f} "
      f"(thinned x{fit.thinning}, n={fit.n_used}) -> exponential fit: {fit.within_band}")

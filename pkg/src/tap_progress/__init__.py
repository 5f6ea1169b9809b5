"""Knowledge-propagation timing toolkit.

Analytic delay distributions and the Erlang-product progress bound, the
two-phase acknowledge protocol state machines, Monte Carlo simulators for
two-hop relay delivery and M/M/1 processing, and an end-to-end harness
that checks the analytic bound against simulation.
"""

from .analytic import (
    ErlangDist,
    ExpDist,
    InstabilityError,
    Mm1Config,
    MtrConfig,
    erlang_cdf,
    exp_cdf,
    exp_sample,
    message_count,
    mm1_mean_delay,
    mm1_mean_queue_len,
    mm1_sojourn_dist,
    mtr_delay_dist,
    mtr_delivery_cdf,
    progress_bound,
)
from .engine import (
    BoundReport,
    ProcessingSource,
    ProgressSample,
    ScenarioConfig,
    best_split_bound,
    empirical_progress_cdf,
    run_progress_trials,
    sample_progress_time,
    verify_bound,
)
from .mm1 import QueueTrace, simulate_queue, sojourn_fit, trace_stats, truncate_at_empty
from .mtr import DeliveryMode, delivery_delay_batch, sample_delivery_delay
from .rng import RngStream
from .stats import EmpiricalCdf, dkw_epsilon, ks_distance
from .tap import KnowledgeValue, TapMessage, run_tap_trace

__version__ = "0.1.0"

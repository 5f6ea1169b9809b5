"""Check the analytic progress-time bound against end-to-end simulation.

Worst case, a propagation round waits for every one of its 4R messages to
be transmitted and processed in sequence. Both delay totals are Erlang
sums, so for any budget split (x, y) the product of the two Erlang CDFs
lower-bounds the probability that the round finishes within x + y. The
grid below confirms the bound on 100k simulated rounds, then scans for the
best split of a fixed total budget.

Run: python demos/progress_bound_check.py
"""
from tap_progress import (
    Mm1Config,
    MtrConfig,
    ScenarioConfig,
    best_split_bound,
    verify_bound,
)

scenario = ScenarioConfig(
    replica_count=3,
    mtr=MtrConfig(meeting_rate=0.5, node_count=5),
    queue=Mm1Config(arrival_rate=1.0, service_rate=3.0),
    trials=100_000,
    seed=42,
)
grid = [(x, y) for x in (2.0, 4.0, 6.0, 8.0, 10.0) for y in (2.0, 4.0, 6.0, 8.0, 10.0)]

report = verify_bound(scenario, grid, confidence=0.99)
print(f"{scenario.n_messages} messages per round, {report.trials} rounds simulated")
print(f"sample-level implication violations: {report.implication_violations}")
print(f"transmission/processing correlation: {report.delay_correlation:+.4f}")
print()
print("   x      y   bound     empirical  ok")
for p in report.grid:
    print(f"{p.x:5.1f} {p.y:6.1f}   {p.analytic_bound:.5f}   {p.empirical_prob:.5f}  "
          f"{'yes' if p.satisfied else 'NO'}")
print(f"\nbound satisfied at {sum(p.satisfied for p in report.grid)}/{len(report.grid)} points "
      f"(DKW radius {report.grid[0].dkw_epsilon:.5f})")

print("\nbest budget split for a fixed deadline:")
for total in (8.0, 12.0, 16.0):
    x, y, b = best_split_bound(scenario, total, 201)
    print(f"  deadline {total:5.1f}s: transmit <= {x:.2f}s, process <= {y:.2f}s "
          f"-> P(done) >= {b:.4f}")

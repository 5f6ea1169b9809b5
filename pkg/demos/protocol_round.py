"""Walk through one knowledge-propagation round and its message accounting.

The propagator pushes a value to every replica in two phases: learn/learnt
establishes that everyone knows the value, all-know/ack establishes that
everyone knows that everyone knows it. The message count is exactly 4 per
replica, which is what makes the timing analysis tractable: the number of
delays to sum is deterministic.

Run: python demos/protocol_round.py
"""
from tap_progress import KnowledgeValue, message_count, run_tap_trace

value = KnowledgeValue(owner_set=("aircraft-7", "aircraft-12"))

for replicas in (1, 3, 5):
    trace = run_tap_trace(value, replicas)
    print(f"\n--- {replicas} replica(s): {trace.message_count} messages "
          f"(expected {message_count(replicas)}) ---")
    for i, msg in enumerate(trace.log):
        print(f"  {i:2d}  {msg.kind.value:8s} {msg.sender} -> {msg.receiver}")
    print(f"  propagator phase: {trace.propagator.phase.value}")
    print(f"  all replicas at full knowledge: "
          f"{all(r.knows_all_know for r in trace.replicas.values())}")

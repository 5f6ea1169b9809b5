"""Two-phase acknowledge knowledge-propagation state machines.

One propagator spreads a value to a set of replicas in two phases: learn /
learnt, then all-know / ack. Completion means every replica knows that
every replica knows the value. Message accounting is exact: a full round
costs 4 messages per replica.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

__all__ = [
    "MessageKind",
    "KnowledgeValue",
    "TapMessage",
    "Phase",
    "PropagatorState",
    "ReplicaState",
    "TraceSummary",
    "ProtocolError",
    "propagator_start",
    "replica_receive",
    "propagator_receive",
    "run_tap_trace",
    "write_trace_csv",
]


class ProtocolError(RuntimeError):
    """Violation of the protocol's ordering or membership contract."""


class MessageKind(str, Enum):
    LEARN = "Learn"
    LEARNT = "Learnt"
    ALL_KNOW = "AllKnow"
    ACK = "Ack"


class Phase(str, Enum):
    LEARNING = "Learning"
    ALL_KNOWING = "AllKnowing"
    DONE = "Done"


@dataclass(frozen=True)
class KnowledgeValue:
    """The value being propagated: a non-empty set of owner identifiers."""

    owner_set: tuple[str, ...]

    def __post_init__(self):
        if not self.owner_set:
            raise ValueError("owner_set must be non-empty")
        if len(set(self.owner_set)) != len(self.owner_set):
            raise ValueError(f"owner_set has duplicates: {self.owner_set}")


@dataclass(frozen=True)
class TapMessage:
    kind: MessageKind
    sender: str
    receiver: str
    value: Optional[KnowledgeValue] = None  # payload on Learn/AllKnow only


@dataclass(frozen=True)
class PropagatorState:
    value: KnowledgeValue
    replicas: frozenset[str]
    phase: Phase = Phase.LEARNING
    learnt_from: frozenset[str] = frozenset()
    acked_from: frozenset[str] = frozenset()
    sent_count: int = 0
    received_count: int = 0


@dataclass(frozen=True)
class ReplicaState:
    id: str
    knows_value: Optional[KnowledgeValue] = None
    knows_all_know: bool = False

    def __post_init__(self):
        if self.knows_all_know and self.knows_value is None:
            raise ValueError("cannot know all-know without knowing the value")


@dataclass
class TraceSummary:
    """Ordered message log of one complete propagation round."""

    log: list[TapMessage] = field(default_factory=list)
    propagator: Optional[PropagatorState] = None
    replicas: dict[str, ReplicaState] = field(default_factory=dict)

    @property
    def message_count(self) -> int:
        return len(self.log)

    @property
    def complete(self) -> bool:
        return (
            self.propagator is not None
            and self.propagator.phase is Phase.DONE
            and all(r.knows_all_know for r in self.replicas.values())
        )


def _ordered(ids) -> list[str]:
    # ascending-id order keeps emission and delivery deterministic
    return sorted(ids)


def propagator_start(
    value: KnowledgeValue, replicas, propagator_id: str = "p"
) -> tuple[PropagatorState, list[TapMessage]]:
    """Begin phase 1: one learn message per replica."""
    replica_set = frozenset(replicas)
    if not replica_set:
        raise ValueError("replica set must be non-empty")
    out = [
        TapMessage(MessageKind.LEARN, propagator_id, rid, value) for rid in _ordered(replica_set)
    ]
    state = PropagatorState(value=value, replicas=replica_set, sent_count=len(out))
    return state, out


def replica_receive(
    state: ReplicaState, msg: TapMessage
) -> tuple[ReplicaState, Optional[TapMessage]]:
    """Handle a learn or all-know message; reply iff the knowledge is held.

    Re-delivery of a learn re-emits the learnt reply with unchanged state.
    An all-know before any learn is an ordering violation (cannot happen
    under reliable FIFO per-pair delivery).
    """
    if msg.receiver != state.id:
        raise ProtocolError(f"message for {msg.receiver} delivered to replica {state.id}")
    if msg.kind is MessageKind.LEARN:
        new_state = replace(state, knows_value=msg.value)
        reply = TapMessage(MessageKind.LEARNT, state.id, msg.sender)
        return new_state, reply
    if msg.kind is MessageKind.ALL_KNOW:
        if state.knows_value is None:
            raise ProtocolError(f"replica {state.id} received all-know before any learn")
        new_state = replace(state, knows_all_know=True)
        reply = TapMessage(MessageKind.ACK, state.id, msg.sender)
        return new_state, reply
    raise ProtocolError(f"replica {state.id} cannot handle {msg.kind.value}")


def propagator_receive(
    state: PropagatorState, msg: TapMessage
) -> tuple[PropagatorState, list[TapMessage]]:
    """Handle a learnt or ack reply; advance phases when a set completes.

    Duplicate replies are absorbed without re-emission.
    """
    if msg.sender not in state.replicas:
        raise ProtocolError(f"reply from {msg.sender}, not in the replica set")
    if msg.kind is MessageKind.LEARNT:
        if msg.sender in state.learnt_from:
            return state, []
        learnt = state.learnt_from | {msg.sender}
        new_state = replace(state, learnt_from=learnt, received_count=state.received_count + 1)
        if learnt == state.replicas and state.phase is Phase.LEARNING:
            out = [
                TapMessage(MessageKind.ALL_KNOW, msg.receiver, rid, state.value)
                for rid in _ordered(state.replicas)
            ]
            new_state = replace(
                new_state, phase=Phase.ALL_KNOWING, sent_count=new_state.sent_count + len(out)
            )
            return new_state, out
        return new_state, []
    if msg.kind is MessageKind.ACK:
        if msg.sender in state.acked_from:
            return state, []
        acked = state.acked_from | {msg.sender}
        new_state = replace(state, acked_from=acked, received_count=state.received_count + 1)
        if acked == state.replicas and state.phase is Phase.ALL_KNOWING:
            new_state = replace(new_state, phase=Phase.DONE)
        return new_state, []
    raise ProtocolError(f"propagator cannot handle {msg.kind.value}")


def run_tap_trace(
    value: KnowledgeValue,
    replica_count: int,
    propagator_id: str = "p",
    reply_order: Optional[list[str]] = None,
) -> TraceSummary:
    """Drive one round to completion under instantaneous reliable delivery.

    Replicas are named r1..rN. reply_order, when given, permutes the order
    in which replica replies reach the propagator in each phase (final
    states and counts are order-insensitive; only the log order changes).
    """
    if replica_count < 1:
        raise ValueError(f"replica_count must be >= 1, got {replica_count}")
    ids = [f"r{i}" for i in range(1, replica_count + 1)]
    order = list(reply_order) if reply_order is not None else ids
    if sorted(order) != sorted(ids):
        raise ValueError(f"reply_order must permute {ids}, got {order}")

    trace = TraceSummary(replicas={rid: ReplicaState(id=rid) for rid in ids})

    def deliver_to_replicas(msgs):
        replies = {}
        for msg in msgs:
            new_rep, reply = replica_receive(trace.replicas[msg.receiver], msg)
            trace.replicas[msg.receiver] = new_rep
            replies[msg.receiver] = reply
        return replies

    prop, learns = propagator_start(value, ids, propagator_id)
    trace.log.extend(learns)

    # phase 1: learnt replies reach the propagator in the given order;
    # the last one triggers the all-know broadcast
    replies = deliver_to_replicas(learns)
    all_knows: list[TapMessage] = []
    for rid in order:
        trace.log.append(replies[rid])
        prop, out = propagator_receive(prop, replies[rid])
        trace.log.extend(out)
        all_knows.extend(out)

    # phase 2: ack replies; the last one concludes the round
    replies = deliver_to_replicas(all_knows)
    for rid in order:
        trace.log.append(replies[rid])
        prop, out = propagator_receive(prop, replies[rid])
        trace.log.extend(out)

    trace.propagator = prop
    return trace


def write_trace_csv(trace: TraceSummary, path) -> None:
    """Export the message log as CSV: sequence, time, kind, from, to."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sequence", "time_seconds", "kind", "from", "to"])
        for i, msg in enumerate(trace.log):
            # instantaneous delivery: all events at logical time 0
            writer.writerow([i, "0", msg.kind.value, msg.sender, msg.receiver])

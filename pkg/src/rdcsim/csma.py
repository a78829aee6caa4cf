"""Retransmission layer above the RDC MAC: FIFO queue, linear backoff, drop policy."""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .medium import ContractViolation
from .mac.frames import MacStatus


class Action(Enum):
    DONE = "done"
    RETRY = "retry"
    DROP = "drop"


@dataclass(frozen=True)
class CsmaConfig:
    max_retx: int = 5
    queue_capacity: int = 8
    backoff_jitter: bool = False

    def __post_init__(self):
        if self.max_retx < 0:
            raise ValueError("max_retx must be >= 0")
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be >= 1")


@dataclass
class PendingPacket:
    packet: object
    dest: int
    enqueue_time: int
    attempts_noack: int = 0
    attempts_total: int = 0
    cause_history: list = field(default_factory=list)


def csma_on_result(pending, result, now, config, wake_interval, next_wake, jitter=0):
    """Decide what happens to the queue head after a MAC attempt.

    Returns ``(Action, retry_time)``; ``retry_time`` is None unless RETRY.
    Only NO_ACK outcomes count toward the drop limit.
    """
    pending.attempts_total += 1
    status = result.status
    if status is MacStatus.OK:
        return Action.DONE, None
    if status is MacStatus.POSTPONED or status is MacStatus.COLLISION:
        pending.cause_history.append(status)
        return Action.RETRY, next_wake
    if status is MacStatus.NO_ACK:
        pending.attempts_noack += 1
        if pending.attempts_noack > config.max_retx:
            return Action.DROP, None
        pending.cause_history.append(status)
        return Action.RETRY, now + pending.attempts_noack * wake_interval + jitter
    raise ContractViolation(f"unexpected MAC status {status!r}")


class Csma:
    def __init__(self, node, sim, mac, config: CsmaConfig, rng=None, on_done=None,
                 on_drop=None, on_attempt=None):
        self.node = node
        self.sim = sim
        self.mac = mac
        self.config = config
        self.rng = rng
        self.queue: deque[PendingPacket] = deque()
        self.on_done = on_done
        self.on_drop = on_drop
        self.on_attempt = on_attempt
        self.queue_drops = 0
        self.limit_drops = 0
        self._sending = False
        self._retry = None

    def enqueue(self, packet, dest) -> bool:
        if len(self.queue) >= self.config.queue_capacity:
            self.queue_drops += 1
            if self.on_drop is not None:
                self.on_drop(packet, "queue")
            return False
        self.queue.append(PendingPacket(packet, dest, self.sim.now))
        if len(self.queue) == 1:
            self._try_send()
        return True

    def __len__(self):
        return len(self.queue)

    def _try_send(self):
        self._retry = None
        if self._sending or not self.queue:
            return
        head = self.queue[0]
        self._sending = True
        # only the first attempt and NO_ACK retries wait for the phase-lock estimate;
        # a retry after contention goes out at the own wake-up it was scheduled for
        last = head.cause_history[-1] if head.cause_history else None
        align = last is None or last is MacStatus.NO_ACK
        self.mac.send(head.dest, head.packet, self._on_result, align=align)

    def _on_result(self, result):
        self._sending = False
        head = self.queue[0]
        now = self.sim.now
        w = self.mac.timing.wake_interval
        jitter = 0
        if self.config.backoff_jitter and result.status is MacStatus.NO_ACK and self.rng is not None:
            jitter = int(self.rng.integers(0, max(w // 10, 1)))
        action, at = csma_on_result(head, result, now, self.config, w,
                                    self.mac.next_wake_after(now), jitter)
        if self.on_attempt is not None:
            self.on_attempt(head, result, action)
        if action is Action.RETRY:
            self._retry = self.sim.schedule(at, self._try_send)
            return
        self.queue.popleft()
        if action is Action.DROP:
            self.limit_drops += 1
            if self.on_drop is not None:
                self.on_drop(head.packet, "limit")
        elif self.on_done is not None:
            self.on_done(head)
        if self.queue:
            self._try_send()

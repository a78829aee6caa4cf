"""Discrete-event core: integer microsecond clock, FIFO-stable event queue, seeded RNG streams."""

import heapq
from itertools import count

import numpy as np

US = 1
MS = 1000
SECOND = 1_000_000


def ms(value: float) -> int:
    """Convert milliseconds to integer simulation time (µs)."""
    return round(value * MS)


def to_ms(t: int) -> float:
    return t / MS


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock."""


class Event:
    __slots__ = ("fire_at", "sequence", "action", "args", "owner", "cancelled", "fired")

    def __init__(self, fire_at, sequence, action, args, owner=None):
        self.fire_at = fire_at
        self.sequence = sequence
        self.action = action
        self.args = args
        self.owner = owner
        self.cancelled = False
        self.fired = False

    def __repr__(self):
        return f"Event(t={self.fire_at}, seq={self.sequence}, action={getattr(self.action, '__name__', self.action)})"


class Simulator:
    """Single-threaded event loop over a virtual clock.

    Events with the same ``fire_at`` run in insertion order.
    """

    def __init__(self):
        self.now = 0
        self.executed = 0
        self._heap = []
        self._seq = count()

    def schedule(self, fire_at: int, action, *args, owner=None) -> Event:
        if fire_at < self.now:
            raise SchedulingError(f"cannot schedule at {fire_at} < now={self.now}")
        ev = Event(fire_at, next(self._seq), action, args, owner)
        heapq.heappush(self._heap, (fire_at, ev.sequence, ev))
        return ev

    def call_later(self, delay: int, action, *args, owner=None) -> Event:
        return self.schedule(self.now + delay, action, *args, owner=owner)

    def cancel(self, event) -> bool:
        if event is None or event.fired or event.cancelled:
            return False
        event.cancelled = True
        return True

    def pending(self) -> int:
        return sum(1 for _, _, ev in self._heap if not ev.cancelled)

    def run_until(self, t_end: int) -> int:
        if t_end < self.now:
            raise SchedulingError(f"t_end={t_end} is before now={self.now}")
        heap = self._heap
        pop = heapq.heappop
        n = 0
        while heap and heap[0][0] <= t_end:
            fire_at, _, ev = pop(heap)
            if ev.cancelled:
                continue
            self.now = fire_at
            ev.fired = True
            ev.action(*ev.args)
            n += 1
        self.now = t_end
        self.executed += n
        return n


class RngStreams:
    """Independent, reproducible generators derived from one 64-bit seed.

    Topology placement, traffic selection and each node draw from separate
    substreams so changing one never perturbs the others.
    """

    TOPOLOGY = 0
    TRAFFIC = 1
    NODE = 2

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF

    def stream(self, *key: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=key)))

    def topology(self, attempt: int = 0) -> np.random.Generator:
        return self.stream(self.TOPOLOGY, attempt)

    def traffic(self) -> np.random.Generator:
        return self.stream(self.TRAFFIC)

    def node(self, node_id: int) -> np.random.Generator:
        return self.stream(self.NODE, node_id)

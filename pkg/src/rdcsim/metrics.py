"""Traffic generation and the per-run metric ledger."""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .engine import SECOND
from .mac.frames import MacStatus
from .medium import LISTEN, RX, SLEEP, TX


class TrafficMode(Enum):
    PAIRS = "pairs"
    COLLECT = "collect"


@dataclass(frozen=True)
class TrafficProfile:
    mode: TrafficMode
    send_interval: int
    jitter: float = 1.0
    active_count: int = 10

    def __post_init__(self):
        if self.send_interval <= 0:
            raise ValueError("send interval must be positive")


def pair_send_times(rng, interval: int, start: int, end: int, window: int = None,
                    jitter: int = 0) -> list[int]:
    """Fixed-interval schedule with a uniform initial offset in [0, window).

    ``window`` defaults to the interval itself. With ``jitter`` > 0 every packet is
    further delayed by a fresh uniform draw in [0, jitter).
    """
    first = start + int(rng.integers(0, window or interval))
    base = range(first, end, interval)
    if not jitter:
        return list(base)
    out = (t + int(d) for t, d in zip(base, rng.integers(0, jitter, size=len(base))))
    return [t for t in out if t < end]


def collect_send_times(rng, interval: int, start: int, end: int, jitter=1.0) -> list[int]:
    """One packet per interval window, at a uniform position within the window."""
    out = []
    t = start
    span = max(int(interval * jitter), 1)
    while t < end:
        at = t + int(rng.integers(0, span))
        if at < end:
            out.append(at)
        t += interval
    return out


def choose_active(rng, candidates, count) -> list:
    candidates = sorted(candidates)
    if count > len(candidates):
        raise ValueError("more active senders than candidate nodes")
    idx = rng.choice(len(candidates), size=count, replace=False)
    return sorted(candidates[i] for i in idx)


def generate_traffic(profile: TrafficProfile, rng, senders, start: int, end: int) -> dict:
    """Map each sender to its list of packet creation times."""
    if profile.mode is TrafficMode.PAIRS:
        return {s: pair_send_times(rng, profile.send_interval, start, end) for s in sorted(senders)}
    active = choose_active(rng, senders, profile.active_count)
    return {s: collect_send_times(rng, profile.send_interval, start, end, profile.jitter)
            for s in active}


@dataclass
class PacketRecord:
    origin: int
    dest: int
    created: int
    delivered_at: int = None
    dropped: str = None


@dataclass
class MetricLedger:
    packets: dict = field(default_factory=dict)
    mac_attempts: int = 0
    mac_transmissions: int = 0
    hop_successes: int = 0
    status_counts: dict = field(default_factory=lambda: {s: 0 for s in MacStatus})
    causes: dict = field(default_factory=lambda: {s: 0 for s in MacStatus if s is not MacStatus.OK})
    csma_enqueued: int = 0
    drops_limit: int = 0
    drops_queue: int = 0
    duplicates: int = 0
    state_time: dict = field(default_factory=dict)
    duration: int = 0

    def originate(self, packet):
        self.packets[packet.id] = PacketRecord(packet.origin, packet.dest, packet.created)

    def deliver(self, packet, now):
        rec = self.packets[packet.id]
        if rec.delivered_at is None:
            rec.delivered_at = now

    def attempt(self, result, action, retry_cause=None):
        self.mac_attempts += 1
        self.status_counts[result.status] += 1
        if result.transmitted:
            self.mac_transmissions += 1
        if result.status is MacStatus.OK:
            self.hop_successes += 1
        if retry_cause is not None:
            self.causes[retry_cause] += 1

    def drop(self, packet, reason):
        if reason == "limit":
            self.drops_limit += 1
        else:
            self.drops_queue += 1
        rec = self.packets.get(packet.id)
        if rec is not None and rec.dropped is None:
            rec.dropped = reason

    def latencies_ms(self) -> np.ndarray:
        return np.array([(r.delivered_at - r.created) / 1000 for r in self.packets.values()
                         if r.delivered_at is not None], dtype=float)


def compute_pdr(ledger: MetricLedger):
    n = len(ledger.packets)
    if n == 0:
        return None
    delivered = sum(1 for r in ledger.packets.values() if r.delivered_at is not None)
    return delivered / n


def compute_etx(ledger: MetricLedger):
    """MAC send attempts per successful hop delivery.

    Postponed attempts count: a postponement is a retransmission cause just like a
    collision or a missing ACK, so every retransmission raises ETX.
    """
    if ledger.hop_successes == 0:
        return None
    return ledger.mac_attempts / ledger.hop_successes


def retx_breakdown(causes) -> dict:
    """Percent share of each retransmission cause; exact before conversion to float."""
    if isinstance(causes, dict):
        counts = {s: causes.get(s, 0) for s in (MacStatus.POSTPONED, MacStatus.COLLISION,
                                                MacStatus.NO_ACK)}
    else:
        counts = {s: 0 for s in (MacStatus.POSTPONED, MacStatus.COLLISION, MacStatus.NO_ACK)}
        for c in causes:
            counts[c] += 1
    total = sum(counts.values())
    if total == 0:
        return {}
    return {s: Fraction(100 * c, total) for s, c in counts.items()}


LATENCY_KEYS = ("mean", "sd", "p10", "p25", "p50", "p75", "p90", "max")


def latency_stats(samples) -> dict:
    a = np.asarray(samples, dtype=float)
    if a.size == 0:
        return {}
    p10, p25, p50, p75, p90 = np.percentile(a, [10, 25, 50, 75, 90])
    return {"mean": float(a.mean()), "sd": float(a.std()), "median": float(p50),
            "p10": float(p10), "p25": float(p25), "p50": float(p50), "p75": float(p75),
            "p90": float(p90), "max": float(a.max())}


def duty_cycle_report(state_time: dict, duration: int) -> dict:
    """Average per-node share of time (percent) in LISTEN, TX and RX."""
    if not state_time or duration <= 0:
        return {}
    out = {}
    for name, idx in (("listen", LISTEN), ("tx", TX), ("rx", RX), ("sleep", SLEEP)):
        out[name] = 100 * float(np.mean([st[idx] for st in state_time.values()])) / duration
    return out


def conservation(ledger: MetricLedger, queued_ids: set) -> dict:
    """Classify every originated packet as delivered, queued, dropped or lost.

    A packet counts once, by its most advanced copy: delivered beats still
    queued somewhere, which beats dropped.
    """
    out = {"originated": len(ledger.packets), "delivered": 0, "queued": 0, "dropped": 0, "lost": 0}
    for pid, rec in ledger.packets.items():
        if rec.delivered_at is not None:
            out["delivered"] += 1
        elif pid in queued_ids:
            out["queued"] += 1
        elif rec.dropped is not None:
            out["dropped"] += 1
        else:
            out["lost"] += 1
    return out


def to_seconds(us: int) -> float:
    return us / SECOND

"""Unit Disk Graph Medium with an interference ring and constant (zero) loss.

A frame reaches every node within ``tx_range``; nodes out to
``interference_range`` cannot decode it but sense the channel as busy and have
their own receptions corrupted. Overlapping frames always corrupt each other
(no capture). A receiver must be listening when a frame starts to decode it.
"""

import math
from enum import Enum
from typing import NamedTuple

SLEEP, LISTEN, RX, TX = 0, 1, 2, 3
STATE_NAMES = ("SLEEP", "LISTEN", "RX", "TX")


class ContractViolation(RuntimeError):
    pass


class DeliveryStatus(Enum):
    RECEIVED = "received"
    CORRUPTED = "corrupted"
    NOT_LISTENING = "not_listening"
    OUT_OF_RANGE = "out_of_range"


class Position(NamedTuple):
    x: float
    y: float


class RadioGeometry(NamedTuple):
    tx_range: float = 50.0
    interference_range: float = 100.0

    def check(self):
        if not self.interference_range >= self.tx_range > 0:
            raise ValueError("need interference_range >= tx_range > 0")
        return self


class AirFrame:
    __slots__ = ("frame", "transmitter", "start", "end", "receptions", "outcomes")

    def __init__(self, frame, transmitter, start):
        self.frame = frame
        self.transmitter = transmitter
        self.start = start
        self.end = start + frame.duration
        self.receptions = []
        self.outcomes = {}


class Reception:
    __slots__ = ("receiver", "airframe", "corrupted", "active")

    def __init__(self, receiver, airframe, corrupted):
        self.receiver = receiver
        self.airframe = airframe
        self.corrupted = corrupted
        self.active = True

    @property
    def frame(self):
        return self.airframe.frame


class NullListener:
    def on_rx_start(self, rx): pass
    def on_rx_header(self, rx): pass
    def on_rx_end(self, rx, ok): pass
    def on_tx_end(self, airframe): pass


class Radio:
    """Physical radio state of one node plus its state-time accumulators."""

    __slots__ = ("node", "on", "tx", "receptions", "busy_count", "busy_since",
                 "idle_since", "busy_until", "state", "state_since", "state_time", "listener")

    def __init__(self, node):
        self.node = node
        self.on = False
        self.tx = None
        self.receptions = []
        self.busy_count = 0
        self.busy_since = 0
        self.idle_since = 0
        self.busy_until = 0
        self.state = SLEEP
        self.state_since = 0
        self.state_time = [0, 0, 0, 0]
        self.listener = NullListener()

    @property
    def listening(self):
        return self.on and self.tx is None


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


class Medium:
    def __init__(self, sim, positions: dict, geometry: RadioGeometry = RadioGeometry()):
        self.sim = sim
        self.geometry = geometry.check()
        self.positions = {k: Position(*v) for k, v in positions.items()}
        self.radios = {k: Radio(k) for k in self.positions}
        # reach[t] = [(radio, in_tx_range)] for every other node inside t's interference disk
        self.reach = {}
        for a, pa in self.positions.items():
            lst = []
            for b, pb in self.positions.items():
                if a == b:
                    continue
                d = distance(pa, pb)
                if d <= geometry.interference_range:
                    lst.append((self.radios[b], d <= geometry.tx_range))
            self.reach[a] = lst
        self.header_duration = 0
        self.frames_sent = 0

    # -- topology queries -------------------------------------------------

    def in_tx_range(self, a, b) -> bool:
        return distance(self.positions[a], self.positions[b]) <= self.geometry.tx_range

    def tx_neighbors(self, node) -> list:
        return [r.node for r, in_tx in self.reach[node] if in_tx]

    # -- radio control ----------------------------------------------------

    def attach(self, node, listener):
        self.radios[node].listener = listener

    def _retally(self, r):
        if r.tx is not None:
            s = TX
        elif r.on:
            s = RX if r.receptions else LISTEN
        else:
            s = SLEEP
        if s != r.state:
            now = self.sim.now
            r.state_time[r.state] += now - r.state_since
            r.state = s
            r.state_since = now

    def _abort_receptions(self, r):
        for rx in r.receptions:
            rx.active = False
            rx.airframe.outcomes[r.node] = DeliveryStatus.NOT_LISTENING
        r.receptions = []

    def turn_on(self, node):
        r = self.radios[node]
        if not r.on:
            r.on = True
            self._retally(r)

    def turn_off(self, node):
        r = self.radios[node]
        if r.tx is not None:
            raise ContractViolation(f"node {node} cannot power down while transmitting")
        if r.receptions:
            self._abort_receptions(r)
        if r.on:
            r.on = False
        self._retally(r)

    def abort_reception(self, rx):
        r = self.radios[rx.receiver]
        if rx.active:
            rx.active = False
            r.receptions.remove(rx)
            rx.airframe.outcomes[r.node] = DeliveryStatus.NOT_LISTENING
            self._retally(r)

    # -- channel sensing --------------------------------------------------

    def channel_busy(self, node, at=None) -> bool:
        """Instantaneous carrier sense; ``at`` must be the current time."""
        r = self.radios[node]
        if not r.on:
            raise ContractViolation(f"node {node} senses the channel with its radio off")
        if at is not None and at != self.sim.now:
            raise ContractViolation("channel_busy can only be evaluated at the current time")
        return r.busy_count > 0

    def busy_since(self, node, t0: int) -> bool:
        """True iff the channel at ``node`` was busy at any instant in [t0, now]."""
        r = self.radios[node]
        return r.busy_count > 0 or r.idle_since > t0

    def cca(self, node, duration: int, callback):
        """Clear channel assessment over [now, now + duration]; calls callback(busy)."""
        r = self.radios[node]
        if not r.on:
            raise ContractViolation(f"node {node} runs a CCA with its radio off")
        start = self.sim.now
        return self.sim.schedule(start + duration, self._cca_done, node, start, callback)

    def _cca_done(self, node, start, callback):
        callback(self.busy_since(node, start))

    # -- transmission -----------------------------------------------------

    def begin_transmission(self, node, frame, at=None) -> AirFrame:
        sim = self.sim
        now = sim.now
        if at is not None and at != now:
            raise ContractViolation("transmissions start at the current time")
        r = self.radios[node]
        if r.tx is not None:
            raise ContractViolation(f"node {node} is already transmitting")
        if r.receptions:
            self._abort_receptions(r)
        r.on = True
        af = AirFrame(frame, node, now)
        r.tx = af
        self._retally(r)
        self.frames_sent += 1
        end = af.end
        started = []
        for nb, in_tx in self.reach[node]:
            was_busy = nb.busy_count > 0
            nb.busy_count += 1
            if not was_busy:
                nb.busy_since = now
            if end > nb.busy_until:
                nb.busy_until = end
            if nb.receptions:
                for rx in nb.receptions:
                    rx.corrupted = True
            if in_tx:
                if nb.on and nb.tx is None:
                    rx = Reception(nb.node, af, was_busy)
                    nb.receptions.append(rx)
                    af.receptions.append(rx)
                    self._retally(nb)
                    started.append(rx)
                else:
                    af.outcomes[nb.node] = DeliveryStatus.NOT_LISTENING
        sim.schedule(end, self._end_transmission, af)
        if started and frame.duration > self.header_duration > 0:
            sim.schedule(now + self.header_duration, self._header, af)
        for rx in started:
            if rx.active:
                self.radios[rx.receiver].listener.on_rx_start(rx)
        return af

    def _header(self, af):
        for rx in list(af.receptions):
            if rx.active and not rx.corrupted:
                self.radios[rx.receiver].listener.on_rx_header(rx)

    def _end_transmission(self, af):
        now = self.sim.now
        r = self.radios[af.transmitter]
        r.tx = None
        self._retally(r)
        for nb, _ in self.reach[af.transmitter]:
            nb.busy_count -= 1
            if nb.busy_count == 0:
                nb.idle_since = now
        finished = []
        for rx in af.receptions:
            if rx.active:
                rx.active = False
                nb = self.radios[rx.receiver]
                nb.receptions.remove(rx)
                self._retally(nb)
                af.outcomes[rx.receiver] = (
                    DeliveryStatus.CORRUPTED if rx.corrupted else DeliveryStatus.RECEIVED)
                finished.append(rx)
        for rx in finished:
            self.radios[rx.receiver].listener.on_rx_end(rx, not rx.corrupted)
        r.listener.on_tx_end(af)

    def outcome(self, af, node) -> DeliveryStatus:
        return af.outcomes.get(node, DeliveryStatus.OUT_OF_RANGE)

    # -- accounting -------------------------------------------------------

    def finalize(self):
        now = self.sim.now
        for r in self.radios.values():
            r.state_time[r.state] += now - r.state_since
            r.state_since = now

    def state_times(self, node) -> dict:
        r = self.radios[node]
        return dict(zip(STATE_NAMES, r.state_time))


# -- topology file: one node per line, "id x y is_sink" -----------------------

def write_topology(path, positions: dict, sink=None):
    with open(path, "w") as fh:
        for node in sorted(positions):
            x, y = positions[node]
            fh.write(f"{node} {x:.3f} {y:.3f} {1 if node == sink else 0}\n")


def read_topology(path):
    positions, sink = {}, None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 'id x y is_sink'")
            node = int(parts[0])
            positions[node] = Position(float(parts[1]), float(parts[2]))
            if int(parts[3]):
                sink = node
    return positions, sink

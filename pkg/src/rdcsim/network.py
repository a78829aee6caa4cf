"""Wires per-node MAC and CSMA instances to routing and the metric ledger."""

from functools import partial

from .csma import Action, Csma, CsmaConfig
from .mac.frames import BROADCAST, Packet
from .mac.rdc import RdcMac
from .metrics import MetricLedger


class Network:
    def __init__(self, sim, medium, timing, protocol, next_hop, rngs,
                 csma_config: CsmaConfig = CsmaConfig(), ledger: MetricLedger = None):
        self.sim = sim
        self.medium = medium
        self.timing = timing
        self.protocol = protocol
        self.next_hop = next_hop
        self.ledger = ledger if ledger is not None else MetricLedger()
        self.macs = {}
        self.csmas = {}
        self.seen = {}
        self.beacons_received = 0
        self._next_id = 0
        for nid in sorted(medium.radios):
            rng = rngs.node(nid)
            phase = int(rng.integers(0, timing.wake_interval))
            mac = RdcMac(nid, sim, medium, timing, protocol, phase,
                         deliver=partial(self._receive, nid))
            self.macs[nid] = mac
            self.csmas[nid] = Csma(nid, sim, mac, csma_config, rng,
                                   on_drop=self._drop, on_attempt=self._attempt)
            self.seen[nid] = set()

    def start(self):
        for mac in self.macs.values():
            mac.start()

    def _new_packet(self, origin, dest, beacon=False):
        p = Packet(self._next_id, origin, dest, self.sim.now, beacon)
        self._next_id += 1
        return p

    def originate(self, origin, dest) -> Packet:
        packet = self._new_packet(origin, dest)
        self.ledger.originate(packet)
        self.seen[origin].add(packet.id)
        self._forward(origin, packet)
        return packet

    def send_beacon(self, node) -> Packet:
        packet = self._new_packet(node, BROADCAST, beacon=True)
        self.csmas[node].enqueue(packet, BROADCAST)
        return packet

    def _forward(self, node, packet):
        if packet.dest == node:
            self.ledger.deliver(packet, self.sim.now)
            return
        nh = self.next_hop(node, packet.dest)
        if self.csmas[node].enqueue(packet, nh):
            self.ledger.csma_enqueued += 1

    def _receive(self, node, packet, sender):
        if packet.is_beacon:
            self.beacons_received += 1
            return
        seen = self.seen[node]
        if packet.id in seen:
            self.ledger.duplicates += 1
            return
        seen.add(packet.id)
        self._forward(node, packet)

    def _drop(self, packet, reason):
        if not packet.is_beacon:
            self.ledger.drop(packet, reason)

    def _attempt(self, pending, result, action):
        if pending.packet.is_beacon:
            return
        cause = pending.cause_history[-1] if action is Action.RETRY else None
        self.ledger.attempt(result, action, cause)

    def queued_packet_ids(self) -> set:
        return {p.packet.id for c in self.csmas.values() for p in c.queue if not p.packet.is_beacon}

    def finalize(self):
        self.medium.finalize()
        self.ledger.duration = self.sim.now
        self.ledger.state_time = {n: list(r.state_time) for n, r in self.medium.radios.items()}

from dataclasses import dataclass
from enum import Enum, IntEnum

BROADCAST = -1


class FrameKind(IntEnum):
    STROBE = 0
    STROBE_ACK = 1
    DATA = 2
    DATA_ACK = 3


class MacStatus(Enum):
    OK = "ok"
    POSTPONED = "postponed"
    COLLISION = "collision"
    NO_ACK = "noack"


class Packet:
    """Network-layer payload carried by DATA frames."""

    __slots__ = ("id", "origin", "dest", "created", "is_beacon")

    def __init__(self, id, origin, dest, created, is_beacon=False):
        self.id = id
        self.origin = origin
        self.dest = dest
        self.created = created
        self.is_beacon = is_beacon

    def __repr__(self):
        return f"Packet({self.id}: {self.origin}->{self.dest} @{self.created})"


class Frame:
    __slots__ = ("kind", "source", "destination", "duration", "payload_ref", "wants_data_ack")

    def __init__(self, kind, source, destination, duration, payload_ref=None, wants_data_ack=False):
        if kind == FrameKind.DATA and duration <= 0:
            raise ValueError("DATA frame needs a positive duration")
        self.kind = kind
        self.source = source
        self.destination = destination
        self.duration = duration
        self.payload_ref = payload_ref
        self.wants_data_ack = wants_data_ack

    @property
    def is_broadcast(self):
        return self.destination == BROADCAST

    def __repr__(self):
        return f"Frame({self.kind.name} {self.source}->{self.destination} dur={self.duration})"


@dataclass
class MacResult:
    status: MacStatus
    tx_frames_sent: int
    finished_at: int
    strobes_sent: int = 0
    data_sent: int = 0

    @property
    def transmitted(self) -> bool:
        return self.tx_frames_sent > 0

from dataclasses import dataclass
from enum import Enum


class Base(Enum):
    XMAC = "xmac"
    CONTIKIMAC = "contikimac"


@dataclass(frozen=True)
class ProtocolConfig:
    base: Base
    cca_collision_avoidance: bool
    phaselock: bool
    name: str = ""

    def __post_init__(self):
        if self.base is Base.CONTIKIMAC and not (self.cca_collision_avoidance and self.phaselock):
            raise ValueError("ContikiMAC always runs CCA collision avoidance and phase-lock")

    @property
    def is_contikimac(self) -> bool:
        return self.base is Base.CONTIKIMAC


PROTOCOLS = {
    "contikimac": ProtocolConfig(Base.CONTIKIMAC, True, True, "contikimac"),
    "xmac": ProtocolConfig(Base.XMAC, False, False, "xmac"),
    "xmac-c": ProtocolConfig(Base.XMAC, True, False, "xmac-c"),
    "xmac-p": ProtocolConfig(Base.XMAC, False, True, "xmac-p"),
    "xmac-cp": ProtocolConfig(Base.XMAC, True, True, "xmac-cp"),
}

DISPLAY_NAMES = {
    "contikimac": "ContikiMAC",
    "xmac": "X-MAC",
    "xmac-c": "X-MAC-C",
    "xmac-p": "X-MAC-P",
    "xmac-cp": "X-MAC-CP",
}


def get_protocol(name: str) -> ProtocolConfig:
    try:
        return PROTOCOLS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; choose from {' | '.join(PROTOCOLS)}") from None

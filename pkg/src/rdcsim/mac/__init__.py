from .config import PROTOCOLS, Base, ProtocolConfig, get_protocol
from .frames import BROADCAST, Frame, FrameKind, MacResult, MacStatus, Packet
from .phaselock import PhaseEntry, PhaseTable, phase_update, phase_wait
from .rdc import RdcMac
from .timing import PRESETS, SEC423, TABLE3, MacTiming, get_preset, two_cca_sweep, validate_timing

__all__ = [
    "BROADCAST", "Base", "Frame", "FrameKind", "MacResult", "MacStatus", "MacTiming",
    "PRESETS", "PROTOCOLS", "Packet", "PhaseEntry", "PhaseTable", "ProtocolConfig",
    "RdcMac", "SEC423", "TABLE3", "get_preset", "get_protocol", "phase_update",
    "phase_wait", "two_cca_sweep", "validate_timing",
]

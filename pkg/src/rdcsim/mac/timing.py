"""Radio timing parameters, the two presets, and constraint checks."""

from dataclasses import dataclass, field, replace

import numpy as np

from ..engine import ms


@dataclass(frozen=True)
class MacTiming:
    """All durations are integer microseconds.

    Symbol mapping: ``inter_frame`` is Ti, ``cca_duration`` Tr,
    ``cca_interval`` Tc, ``ack_send`` Ta, ``ack_detect`` the ACK detection
    time and ``shortest_frame`` Ts.
    """

    wake_interval: int = ms(125)
    inter_frame: int = ms(0.4)
    cca_duration: int = ms(0.1)
    cca_interval: int = ms(0.5)
    ack_send: int = ms(0.1)
    ack_detect: int = ms(0.1)
    shortest_frame: int = ms(3.5)
    data_duration: int = ms(3.5)
    strobe_duration: int = ms(0.7)
    strobe_interval: int = ms(3.9)
    strobe_to_data: int = ms(0.9)
    ack_duration: int = ms(0.35)
    header_duration: int = ms(0.32)
    xmac_active_ratio: float = 0.05
    cca_count: int = 2
    max_mac_wait: int = None
    phase_guard: int = ms(2)
    # X-MAC variants anchor on the strobe-ACK, which already trails the wake-up
    xmac_phase_guard: int = ms(1)
    # radio receive-to-transmit switch after the pre-transmission CCA
    tx_turnaround: int = ms(0.192)
    fast_sleep_max_listen: int = None
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        if self.max_mac_wait is None:
            object.__setattr__(self, "max_mac_wait", self.wake_interval)
        if self.fast_sleep_max_listen is None:
            object.__setattr__(self, "fast_sleep_max_listen", self.wake_interval)

    @property
    def xmac_active(self) -> int:
        return round(self.wake_interval * self.xmac_active_ratio)

    @property
    def cca_span(self) -> int:
        """Time covered by ``cca_count`` CCAs spaced by ``cca_interval``."""
        return self.cca_count * self.cca_duration + (self.cca_count - 1) * self.cca_interval

    @property
    def xmac_cca_span(self) -> int:
        # X-MAC's silent gap between strobes is strobe_interval, so back-to-back
        # CCAs must cover it plus one CCA on each side.
        return self.strobe_interval + 2 * self.cca_duration

    @property
    def contikimac_tx_time(self) -> int:
        return self.data_duration + self.inter_frame + self.data_duration

    @property
    def xmac_cp_tx_time(self) -> int:
        return (self.strobe_duration + self.strobe_interval + self.strobe_duration
                + self.strobe_to_data + self.data_duration)

    def with_(self, **changes) -> "MacTiming":
        return replace(self, **changes)


TABLE3 = MacTiming(name="table3")
SEC423 = MacTiming(inter_frame=ms(0.9), cca_interval=ms(1.0), name="sec423")

PRESETS = {"table3": TABLE3, "sec423": SEC423}


def get_preset(name: str) -> MacTiming:
    key = name.lower().removeprefix("config-")
    try:
        return PRESETS[key]
    except KeyError:
        raise ValueError(f"unknown timing preset {name!r}; choose from {sorted(PRESETS)}") from None


CONSTRAINTS = (
    "Space for ACKs",
    "Detect frame with only 2 CCAs",
    "Non-zero CCA duration",
    "Minimum frame duration",
)


def validate_timing(t: MacTiming) -> list[str]:
    """Return the names of the violated links in Ta+Td < Ti < Tc < Tc+2Tr < Ts."""
    violations = []
    if not t.ack_send + t.ack_detect < t.inter_frame:
        violations.append(CONSTRAINTS[0])
    if not t.inter_frame < t.cca_interval:
        violations.append(CONSTRAINTS[1])
    if not t.cca_interval < t.cca_interval + 2 * t.cca_duration:
        violations.append(CONSTRAINTS[2])
    if not t.cca_interval + 2 * t.cca_duration < t.shortest_frame:
        violations.append(CONSTRAINTS[3])
    return violations


def _window_busy(a, b, period, frame):
    """Vectorised: does any frame [k*period, k*period+frame) touch [a, b]?"""
    pos = np.mod(a, period)
    in_frame = pos < frame
    next_start = a - pos + period
    return in_frame | (next_start <= b)


def two_cca_sweep(t: MacTiming, frame_duration: int = None, step: int = 1) -> np.ndarray:
    """Wake-up offsets (µs, within one wake interval) at which two CCAs miss a stream.

    The stream repeats frames of ``frame_duration`` separated by ``inter_frame``;
    CCAs occupy [w, w+Tr] and [w+Tr+Tc, w+2Tr+Tc].
    """
    frame = t.shortest_frame if frame_duration is None else frame_duration
    period = frame + t.inter_frame
    w = np.arange(0, t.wake_interval, step, dtype=np.int64)
    first = _window_busy(w, w + t.cca_duration, period, frame)
    second_start = w + t.cca_duration + t.cca_interval
    second = _window_busy(second_start, second_start + t.cca_duration, period, frame)
    return w[~(first | second)]

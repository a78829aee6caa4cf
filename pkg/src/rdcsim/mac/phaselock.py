from dataclasses import dataclass


@dataclass
class PhaseEntry:
    phase: int
    last_update: int
    valid: bool = True
    noacks: int = 0


class PhaseTable:
    """Per-neighbour estimate of the wake-up phase, learned from ACK timing."""

    def __init__(self, wake_interval: int, max_noacks: int = 3):
        self.wake_interval = wake_interval
        self.max_noacks = max_noacks
        self.entries: dict[int, PhaseEntry] = {}

    def __contains__(self, neighbor):
        entry = self.entries.get(neighbor)
        return entry is not None and entry.valid

    def __getitem__(self, neighbor) -> PhaseEntry:
        return self.entries[neighbor]

    def update(self, neighbor, ack_rx_time: int):
        phase_update(self, neighbor, ack_rx_time)

    def wait(self, neighbor, now: int, guard: int):
        return phase_wait(self, neighbor, now, guard)

    def record_noack(self, neighbor):
        entry = self.entries.get(neighbor)
        if entry is None or not entry.valid:
            return
        entry.noacks += 1
        if entry.noacks >= self.max_noacks:
            entry.valid = False


def phase_update(table: PhaseTable, neighbor, ack_rx_time: int):
    table.entries[neighbor] = PhaseEntry(
        phase=ack_rx_time % table.wake_interval, last_update=ack_rx_time
    )


def phase_wait(table: PhaseTable, neighbor, now: int, guard: int):
    """Delay until (next estimated wake-up - guard), or None without a valid estimate."""
    entry = table.entries.get(neighbor)
    if entry is None or not entry.valid:
        return None
    target = (entry.phase - guard) % table.wake_interval
    return (target - now) % table.wake_interval

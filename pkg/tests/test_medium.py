import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdcsim.engine import Simulator, ms
from rdcsim.mac.frames import Frame, FrameKind
from rdcsim.medium import (LISTEN, RX, SLEEP, TX, ContractViolation, DeliveryStatus, Medium,
                           RadioGeometry, read_topology, write_topology)


def data(src, dst, dur=ms(3.5)):
    return Frame(FrameKind.DATA, src, dst, dur)


def medium(positions):
    sim = Simulator()
    return sim, Medium(sim, positions)


def test_in_range_clean_channel_is_received():
    sim, m = medium({0: (0, 0), 1: (25, 0)})
    m.turn_on(1)
    af = m.begin_transmission(0, data(0, 1))
    sim.run_until(ms(10))
    assert m.outcome(af, 1) is DeliveryStatus.RECEIVED


def test_interference_ring_corrupts_but_never_receives():
    # node 2 sits 75 m from the receiver: inside interference range, outside tx range
    sim, m = medium({0: (0, 0), 1: (40, 0), 2: (115, 0)})
    for n in (1, 2):
        m.turn_on(n)
    af0 = m.begin_transmission(0, data(0, 1))
    sim.run_until(ms(1))
    af2 = m.begin_transmission(2, data(2, 1))
    sim.run_until(ms(10))
    assert m.outcome(af0, 1) is DeliveryStatus.CORRUPTED
    assert m.outcome(af2, 1) is DeliveryStatus.OUT_OF_RANGE


def test_beyond_interference_range_is_silent():
    sim, m = medium({0: (0, 0), 1: (150, 0)})
    m.turn_on(1)
    af = m.begin_transmission(0, data(0, 1))
    sim.run_until(ms(1))
    assert m.channel_busy(1) is False
    sim.run_until(ms(10))
    assert m.outcome(af, 1) is DeliveryStatus.OUT_OF_RANGE


def test_receiver_turned_on_mid_frame_does_not_decode():
    sim, m = medium({0: (0, 0), 1: (10, 0)})
    af = m.begin_transmission(0, data(0, 1))
    sim.run_until(ms(1))
    m.turn_on(1)
    sim.run_until(ms(10))
    assert m.outcome(af, 1) is DeliveryStatus.NOT_LISTENING


def test_overlapping_in_range_frames_both_lost():
    sim, m = medium({0: (0, 0), 1: (20, 0), 2: (40, 0)})
    m.turn_on(1)
    a = m.begin_transmission(0, data(0, 1))
    sim.run_until(ms(2))
    b = m.begin_transmission(2, data(2, 1))
    sim.run_until(ms(10))
    assert m.outcome(a, 1) is DeliveryStatus.CORRUPTED
    # the second frame started while the radio was already busy
    assert m.outcome(b, 1) is DeliveryStatus.CORRUPTED


def test_channel_busy_follows_frames_and_gaps():
    sim, m = medium({0: (0, 0), 1: (10, 0)})
    m.turn_on(1)
    assert m.channel_busy(1) is False
    m.begin_transmission(0, data(0, 1))
    sim.run_until(ms(1.75))
    assert m.channel_busy(1) is True
    sim.run_until(ms(3.7))  # inside a 0.4 ms inter-frame gap
    assert m.channel_busy(1) is False


def test_channel_busy_with_radio_off_is_a_contract_violation():
    _, m = medium({0: (0, 0), 1: (10, 0)})
    with pytest.raises(ContractViolation):
        m.channel_busy(1)


def test_double_transmit_is_a_contract_violation():
    _, m = medium({0: (0, 0), 1: (10, 0)})
    m.begin_transmission(0, data(0, 1))
    with pytest.raises(ContractViolation):
        m.begin_transmission(0, data(0, 1))


def test_cca_any_overlap_rule():
    sim, m = medium({0: (0, 0), 1: (10, 0)})
    m.turn_on(1)
    out = []
    m.cca(1, ms(0.1), out.append)
    sim.run_until(ms(0.2))
    assert out == [False]
    m.cca(1, ms(0.1), out.append)
    sim.schedule(sim.now + 50, m.begin_transmission, 0, data(0, 1))
    sim.run_until(ms(0.4))
    assert out == [False, True]


def test_geometry_must_be_ordered():
    with pytest.raises(ValueError):
        RadioGeometry(tx_range=60, interference_range=50).check()


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 140), st.floats(0, 140))
def test_reciprocity(x, y):
    sim, m = medium({0: (0, 0), 1: (x, y)})
    assert m.in_tx_range(0, 1) == m.in_tx_range(1, 0)
    m.turn_on(1)
    a = m.begin_transmission(0, data(0, 1))
    sim.run_until(ms(5))
    m.turn_off(1)
    m.turn_on(0)
    b = m.begin_transmission(1, data(1, 0))
    sim.run_until(ms(10))
    assert m.outcome(a, 1) == m.outcome(b, 0)


def _stream(sim, m, start, frame, gap, until):
    t = start
    while t < until:
        sim.schedule(t, m.begin_transmission, 0, data(0, 1, frame))
        t += frame + gap


def test_two_ccas_detect_a_stream_at_every_offset_on_the_medium():
    # real medium, 0.1 ms steps over one frame period
    frame, gap, tr, tc = ms(3.5), ms(0.4), ms(0.1), ms(0.5)
    for off in range(0, frame + gap, 100):
        sim, m = medium({0: (0, 0), 1: (10, 0)})
        m.turn_on(1)
        _stream(sim, m, 0, frame, gap, ms(20))
        w = ms(8) + off
        res = []
        sim.schedule(w, m.cca, 1, tr, res.append)
        sim.schedule(w + tr + tc, m.cca, 1, tr, res.append)
        sim.run_until(ms(20))
        assert any(res), f"missed stream at offset {off} us"


def test_state_times_sum_to_elapsed_time():
    sim, m = medium({0: (0, 0), 1: (10, 0)})
    m.turn_on(1)
    sim.run_until(ms(1))
    m.begin_transmission(0, data(0, 1))
    sim.run_until(ms(6))
    m.turn_off(1)
    sim.run_until(ms(9))
    m.finalize()
    for node in (0, 1):
        assert sum(m.radios[node].state_time) == ms(9)
    st1 = m.radios[1].state_time
    assert st1[RX] == ms(3.5) and st1[LISTEN] == ms(2.5) and st1[SLEEP] == ms(3)
    assert m.radios[0].state_time[TX] == ms(3.5)


def test_topology_file_round_trip(tmp_path):
    pos = {1: (0.0, 0.0), 2: (12.5, 40.25)}
    p = tmp_path / "topo.txt"
    write_topology(p, pos, sink=1)
    got, sink = read_topology(p)
    assert sink == 1
    assert {k: tuple(v) for k, v in got.items()} == pos

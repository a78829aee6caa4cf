"""Per-node radio duty-cycling state machine for ContikiMAC and the X-MAC family.

A node is in one of four modes:

* IDLE  radio off, waiting for the next periodic wake-up or a send request
* WAKE  periodic listen (X-MAC active period, ContikiMAC CCA probe and fast sleep)
* RECV  engaged by an incoming transfer (sending an ACK, waiting for data)
* SEND  running its own transmission procedure
"""

from ..medium import ContractViolation
from .frames import BROADCAST, Frame, FrameKind, MacResult, MacStatus
from .phaselock import PhaseTable, phase_update, phase_wait

IDLE, WAKE, RECV, SEND = 0, 1, 2, 3

STROBE = FrameKind.STROBE
STROBE_ACK = FrameKind.STROBE_ACK
DATA = FrameKind.DATA
DATA_ACK = FrameKind.DATA_ACK

# SendOp.phase
PRE_CCA, STROBING, DATA_TX, STREAM = range(4)


class SendRequest:
    __slots__ = ("dest", "packet", "callback", "wants_data_ack", "phase_ready", "strobe_seen")

    def __init__(self, dest, packet, callback, wants_data_ack):
        self.dest = dest
        self.packet = packet
        self.callback = callback
        self.wants_data_ack = wants_data_ack
        self.phase_ready = False
        # a strobe was overheard in the active period during which this request was pending
        self.strobe_seen = False

    @property
    def broadcast(self):
        return self.dest == BROADCAST


class SendOp:
    __slots__ = ("req", "start", "tx_start", "phase", "frames", "strobes", "data",
                 "last_start", "last_end", "timer", "done", "cca_from", "foreign")

    def __init__(self, req, start):
        self.req = req
        self.start = start
        self.tx_start = None
        self.phase = PRE_CCA
        self.frames = 0
        self.strobes = 0
        self.data = 0
        self.last_start = None
        self.last_end = None
        self.timer = None
        self.done = False
        self.cca_from = start
        self.foreign = False


class RdcMac:
    def __init__(self, node, sim, medium, timing, config, wake_phase, deliver=None):
        self.node = node
        self.sim = sim
        self.medium = medium
        self.timing = timing
        self.config = config
        self.contiki = config.is_contikimac
        self.wake_phase = wake_phase % timing.wake_interval
        self.deliver = deliver
        self.radio = medium.radios[node]
        self.phase_table = PhaseTable(timing.wake_interval)
        self.mode = IDLE
        self.strobe_seen = False
        self.detected = False
        self.active_over = False
        self.wake_started = 0
        self.fs_deadline = 0
        self._timer = None
        self._ack_then = None
        self._acking = False
        self._request = None
        self._op = None
        self._phase_timer = None
        self._kick = None
        # optional hook: called as hook(dest, anchor_time, ack_time) on phase updates
        self.phase_hook = None
        self.wakeups = 0
        medium.attach(node, self)

    # -- schedule ----------------------------------------------------------

    def start(self):
        first = self.next_wake_at_or_after(self.sim.now)
        self.sim.schedule(first, self._wake)

    def next_wake_at_or_after(self, t):
        w = self.timing.wake_interval
        k = -((self.wake_phase - t) // w)
        return self.wake_phase + max(k, 0) * w

    def next_wake_after(self, t):
        return self.next_wake_at_or_after(t + 1)

    def _set_timer(self, at, action, *args):
        if self._timer is not None:
            self._timer.cancelled = True
        self._timer = self.sim.schedule(at, action, *args)

    def _clear_timer(self):
        if self._timer is not None:
            self._timer.cancelled = True
            self._timer = None

    # -- wake-up procedures --------------------------------------------------

    def _wake(self):
        sim = self.sim
        now = sim.now
        sim.schedule(now + self.timing.wake_interval, self._wake)
        self.strobe_seen = False
        if self.mode != IDLE:
            return
        self.wakeups += 1
        self.mode = WAKE
        self.wake_started = now
        self.detected = False
        self.active_over = False
        self.medium.turn_on(self.node)
        if self.contiki:
            self._set_timer(now + self.timing.cca_span, self._probe_done)
        else:
            self._set_timer(now + self.timing.xmac_active, self._active_end)

    def _probe_done(self):
        self._timer = None
        if self.radio.receptions or self.medium.busy_since(self.node, self.wake_started):
            self._detect()
            if not self.radio.receptions:
                self._fs_check()
        else:
            self._sleep()

    def _detect(self):
        if not self.detected:
            self.detected = True
            self.fs_deadline = self.sim.now + self.timing.fast_sleep_max_listen

    def _fs_check(self):
        """Fast-sleep: leave the radio on only while the activity can be a legal stream."""
        self._timer = None
        if self.mode != WAKE:
            return
        r = self.radio
        if r.receptions:
            return
        now = self.sim.now
        if now >= self.fs_deadline:
            self._sleep()
            return
        t = self.timing
        if r.busy_count:
            if now - r.busy_since > t.data_duration:
                self._sleep()
                return
            nxt = min(r.busy_until + t.inter_frame + 1, r.busy_since + t.data_duration + 1)
        else:
            if now - r.idle_since > t.inter_frame:
                self._sleep()
                return
            nxt = r.idle_since + t.inter_frame + 1
        self._set_timer(min(nxt, self.fs_deadline), self._fs_check)

    def _active_end(self):
        self._timer = None
        if self.mode != WAKE:
            return
        if self.radio.receptions:
            self.active_over = True
        else:
            self._sleep()

    def _sleep(self):
        self._clear_timer()
        if self.strobe_seen and self._request is not None:
            self._request.strobe_seen = True
        self.strobe_seen = False
        self.mode = IDLE
        self.medium.turn_off(self.node)
        self._service_request()

    # -- medium callbacks: reception ------------------------------------------

    def on_rx_start(self, rx):
        if self.contiki and self.mode == WAKE:
            if self._timer is not None and self._timer.action == self._probe_done:
                self._clear_timer()
            elif self._timer is not None:
                self._clear_timer()
            self._detect()

    def on_rx_header(self, rx):
        if self.mode != WAKE:
            return
        f = rx.airframe.frame
        dest = f.destination
        if dest == self.node or dest == BROADCAST:
            return
        if f.kind == STROBE:
            self.strobe_seen = True
            self._sleep()
        elif f.kind == DATA:
            self._sleep()

    def on_rx_end(self, rx, ok):
        mode = self.mode
        if mode == SEND:
            if ok:
                self._send_rx(rx.airframe.frame)
            return
        if mode == IDLE:
            return
        if ok:
            f = rx.airframe.frame
            if self.contiki:
                if self._contiki_rx(f):
                    return
            elif self._xmac_rx(f):
                return
        if self.mode == WAKE:
            if self.contiki:
                if self.detected and self._timer is None:
                    self._fs_check()
            elif self.active_over and not self.radio.receptions:
                self._sleep()

    def _contiki_rx(self, f):
        if f.kind != DATA:
            return False
        if f.destination == self.node:
            self._send_ack(DATA_ACK, f, self._sleep)
            self._up(f)
            return True
        if f.destination == BROADCAST:
            self._sleep()
            self._up(f)
            return True
        return False

    def _xmac_rx(self, f):
        kind = f.kind
        if kind == STROBE:
            if f.destination == self.node:
                self._send_ack(STROBE_ACK, f, self._await_data)
                return True
            if f.destination == BROADCAST:
                self.strobe_seen = True
                if self.mode != RECV:
                    self.mode = RECV
                    t = self.timing
                    self._set_timer(self.sim.now + t.wake_interval + 3 * t.strobe_interval
                                    + t.data_duration, self._recv_timeout)
                return True
            return False
        if kind == DATA:
            if f.destination == self.node:
                if f.wants_data_ack:
                    self._send_ack(DATA_ACK, f, self._sleep)
                else:
                    self._sleep()
                self._up(f)
                return True
            if f.destination == BROADCAST:
                self._sleep()
                self._up(f)
                return True
        return False

    def _up(self, f):
        if self.deliver is not None:
            self.deliver(f.payload_ref, f.source)

    def _send_ack(self, kind, f, then):
        self.mode = RECV
        self._acking = True
        self._set_timer(self.sim.now + self.timing.ack_send, self._ack_tx, kind, f, then)

    def _ack_tx(self, kind, f, then):
        self._timer = None
        self._ack_then = then
        ack = Frame(kind, self.node, f.source, self.timing.ack_duration, payload_ref=f.payload_ref)
        self.medium.begin_transmission(self.node, ack)

    def _await_data(self):
        t = self.timing
        wait = t.strobe_to_data - t.ack_send - t.ack_duration + t.data_duration + t.inter_frame
        self._set_timer(self.sim.now + wait, self._recv_timeout)

    def _recv_timeout(self):
        self._timer = None
        if self.mode != RECV:
            return
        if self.radio.receptions:
            end = max(rx.airframe.end for rx in self.radio.receptions)
            self._set_timer(end + 1, self._recv_timeout)
            return
        self._sleep()

    # -- medium callback: end of own transmission --------------------------------

    def on_tx_end(self, af):
        if self.mode == SEND and self._op is not None:
            if self.contiki:
                self._c_after_frame()
            else:
                self._x_after_tx()
        elif self._ack_then is not None:
            then, self._ack_then = self._ack_then, None
            self._acking = False
            then()

    # -- transmission ----------------------------------------------------------

    @property
    def busy(self) -> bool:
        return self._request is not None

    def send(self, dest, packet, callback, wants_data_ack=True, align=True):
        """Start an asynchronous transmission; ``callback(MacResult)`` fires on completion.

        With ``align`` false the phase-lock estimate is not used to delay the start.
        """
        if self._request is not None:
            raise ContractViolation(f"node {self.node} is already sending")
        req = SendRequest(dest, packet, callback, wants_data_ack and dest != BROADCAST)
        self._request = req
        cfg = self.config
        if align and cfg.phaselock and not req.broadcast:
            span = self.pre_tx_cca_span if cfg.cca_collision_avoidance else 0
            delay = phase_wait(self.phase_table, dest, self.sim.now, self.guard_time + span)
            if delay:
                self._phase_timer = self.sim.schedule(self.sim.now + delay, self._phase_ready)
                return
        self._service_request()

    @property
    def guard_time(self):
        return self.timing.phase_guard if self.contiki else self.timing.xmac_phase_guard

    @property
    def pre_tx_cca_span(self):
        """Time from the start of the send procedure to the first frame on air."""
        t = self.timing
        if self.contiki:
            return t.cca_count * (t.cca_duration + t.cca_interval) + t.tx_turnaround
        return t.xmac_cca_span + t.tx_turnaround

    def _phase_ready(self):
        self._phase_timer = None
        req = self._request
        req.phase_ready = True
        # an idle wake-up is preempted so the phase-locked start is not lost
        if self.mode == WAKE and not self.receiving:
            self._clear_timer()
            self.mode = IDLE
        self._service_request()

    @property
    def receiving(self) -> bool:
        """True while an incoming transfer is in progress (an ACK being sent excluded)."""
        if self.radio.receptions:
            return True
        if self.mode == RECV:
            return not self._acking
        return self.mode == WAKE and self.detected

    def _service_request(self):
        if (self._request is None or self._op is not None or self._phase_timer is not None
                or self._kick is not None):
            return
        if self.mode == IDLE:
            self._kick = self.sim.schedule(self.sim.now, self._begin_send)
        elif self.receiving:
            # a packet is pending in the radio: the transmission is postponed
            self._kick = self.sim.schedule(self.sim.now, self._postpone_now)

    def _postpone_now(self):
        self._kick = None
        req = self._request
        if req is None or self._op is not None:
            return
        if self.mode == IDLE:
            self._begin_send()
            return
        self._request = None
        req.callback(MacResult(MacStatus.POSTPONED, 0, self.sim.now))
        self._service_request()

    def _begin_send(self):
        self._kick = None
        if self.mode != IDLE or self._request is None or self._op is not None:
            return
        req = self._request
        now = self.sim.now
        self.mode = SEND
        op = self._op = SendOp(req, now)
        cfg = self.config
        if not self.contiki and not cfg.cca_collision_avoidance and req.strobe_seen:
            self._finish(MacStatus.POSTPONED)
            return
        if self.contiki:
            self._c_cca(0)
            return
        self.medium.turn_on(self.node)
        if cfg.cca_collision_avoidance:
            op.timer = self.sim.schedule(now + self.pre_tx_cca_span, self._pre_cca_done)
        else:
            self._start_tx()

    def _c_cca(self, i):
        # ContikiMAC checks the channel in short windows with the radio off in between;
        # the stream starts one CCA interval after the last check
        op = self._op
        op.timer = None
        op.cca_from = self.sim.now
        self.medium.turn_on(self.node)
        op.timer = self.sim.schedule(self.sim.now + self.timing.cca_duration, self._c_cca_end, i)

    def _c_cca_end(self, i):
        op = self._op
        op.timer = None
        busy = self.radio.receptions or self.medium.busy_since(self.node, op.cca_from)
        self.medium.turn_off(self.node)
        if busy:
            self._finish(MacStatus.POSTPONED)
            return
        t = self.timing
        if i + 1 < t.cca_count:
            op.timer = self.sim.schedule(self.sim.now + t.cca_interval, self._c_cca, i + 1)
        else:
            op.timer = self.sim.schedule(self.sim.now + t.cca_interval + t.tx_turnaround,
                                         self._start_tx)

    def _pre_cca_done(self):
        op = self._op
        op.timer = None
        if self.radio.receptions or self.medium.busy_since(self.node, op.start):
            self._finish(MacStatus.POSTPONED)
        else:
            op.timer = self.sim.schedule(self.sim.now + self.timing.tx_turnaround, self._start_tx)

    def _start_tx(self):
        op = self._op
        op.timer = None
        self.medium.turn_on(self.node)
        op.tx_start = self.sim.now
        if self.contiki:
            op.phase = STREAM
            self._c_frame()
        else:
            op.phase = STROBING
            self._x_strobe()

    def _op_timer(self, at, action, *args):
        op = self._op
        if op.timer is not None:
            op.timer.cancelled = True
        op.timer = self.sim.schedule(at, action, *args)

    # ContikiMAC: repeat the full data frame until it is acknowledged

    @property
    def _c_stream_limit(self):
        # a wake-up just before the limit lands mid-frame and needs one more whole frame
        t = self.timing
        return t.max_mac_wait + t.data_duration + t.inter_frame

    def _c_frame(self):
        op = self._op
        op.timer = None
        req = op.req
        now = self.sim.now
        op.last_start = now
        op.frames += 1
        op.data += 1
        f = Frame(DATA, self.node, req.dest, self.timing.data_duration,
                  payload_ref=req.packet, wants_data_ack=req.wants_data_ack)
        self.medium.begin_transmission(self.node, f)

    def _c_after_frame(self):
        op = self._op
        t = self.timing
        te = self.sim.now
        op.last_end = te
        if op.req.broadcast:
            if te + t.inter_frame - op.tx_start >= self._c_stream_limit:
                self._finish(MacStatus.OK)
            else:
                self._op_timer(te + t.inter_frame, self._c_frame)
            return
        self._op_timer(te + t.ack_send + t.ack_detect, self._c_ack_check, te)

    def _c_ack_check(self, te):
        op = self._op
        op.timer = None
        t = self.timing
        if self.radio.receptions or self.medium.busy_since(self.node, te + t.ack_send):
            self._op_timer(te + t.ack_send + t.ack_duration + 1, self._ack_verdict)
        elif te + t.inter_frame - op.tx_start >= self._c_stream_limit:
            self._finish(MacStatus.NO_ACK)
        else:
            self._op_timer(te + t.inter_frame, self._c_frame)

    def _ack_verdict(self):
        # activity where the ACK was expected but no valid ACK decoded
        self._op.timer = None
        self._finish(MacStatus.COLLISION)

    # X-MAC: strobe until a strobe-ACK arrives, then send the data frame

    def _x_strobe(self):
        op = self._op
        op.timer = None
        req = op.req
        op.last_start = self.sim.now
        op.frames += 1
        op.strobes += 1
        f = Frame(STROBE, self.node, req.dest, self.timing.strobe_duration, payload_ref=req.packet)
        self.medium.begin_transmission(self.node, f)

    def _x_after_tx(self):
        op = self._op
        t = self.timing
        now = self.sim.now
        op.last_end = now
        if op.phase == STROBING:
            if op.req.broadcast:
                if now + t.strobe_interval - op.tx_start >= t.max_mac_wait + 2 * t.strobe_interval:
                    self._op_timer(now + t.strobe_to_data, self._x_data)
                else:
                    self._op_timer(now + t.strobe_interval, self._x_strobe)
            else:
                self._op_timer(now + t.strobe_interval, self._x_gap_end, now)
        else:
            if op.req.broadcast or not op.req.wants_data_ack:
                self._finish(MacStatus.OK)
            else:
                self._op_timer(now + t.ack_send + t.ack_duration + t.ack_detect,
                               self._x_data_ack_verdict, now)

    def _x_gap_end(self, te):
        op = self._op
        op.timer = None
        t = self.timing
        if op.foreign:
            # a strobe or data frame of another transfer was decoded: give up now
            self._finish(MacStatus.COLLISION)
            return
        if te + t.strobe_interval - op.tx_start >= t.max_mac_wait:
            # classified by what was heard where the last strobe-ACK was expected
            busy = self.radio.receptions or self.medium.busy_since(self.node, te)
            self._finish(MacStatus.COLLISION if busy else MacStatus.NO_ACK)
        else:
            self._x_strobe()

    def _x_strobe_acked(self):
        op = self._op
        t = self.timing
        if self.config.phaselock:
            self._phase_learn(op.req.dest, self.sim.now, self.sim.now)
        t_data = op.last_end + t.strobe_to_data
        if self.config.cca_collision_avoidance:
            self._op_timer(t_data, self._x_data_cca, t_data - t.cca_duration)
        else:
            self._op_timer(t_data, self._x_data)

    def _x_data_cca(self, window_start):
        self._op.timer = None
        if self.radio.receptions or self.medium.busy_since(self.node, window_start):
            self._finish(MacStatus.COLLISION)
        else:
            self._x_data()

    def _x_data(self):
        op = self._op
        op.timer = None
        req = op.req
        op.phase = DATA_TX
        op.frames += 1
        op.data += 1
        op.last_start = self.sim.now
        f = Frame(DATA, self.node, req.dest, self.timing.data_duration,
                  payload_ref=req.packet, wants_data_ack=req.wants_data_ack)
        self.medium.begin_transmission(self.node, f)

    def _x_data_ack_verdict(self, td):
        self._op.timer = None
        if self.radio.receptions or self.medium.busy_since(self.node, td):
            self._finish(MacStatus.COLLISION)
        else:
            self._finish(MacStatus.NO_ACK)

    # ACKs seen while sending

    def _send_rx(self, f):
        op = self._op
        if op is None or op.done:
            return
        req = op.req
        if f.destination != self.node or f.source != req.dest or f.payload_ref is not req.packet:
            if not self.contiki and op.phase == STROBING and f.kind in (STROBE, DATA):
                op.foreign = True
            return
        if f.kind == DATA_ACK:
            if self.contiki and op.phase == STREAM or not self.contiki and op.phase == DATA_TX:
                self._finish(MacStatus.OK)
        elif f.kind == STROBE_ACK and not self.contiki and op.phase == STROBING:
            self._x_strobe_acked()

    def _phase_learn(self, dest, anchor, ack_time):
        phase_update(self.phase_table, dest, anchor)
        if self.phase_hook is not None:
            self.phase_hook(dest, anchor, ack_time)

    def _finish(self, status):
        op = self._op
        op.done = True
        if op.timer is not None:
            op.timer.cancelled = True
            op.timer = None
        req = op.req
        now = self.sim.now
        if not req.broadcast and self.config.phaselock:
            if status is MacStatus.OK:
                if self.contiki:
                    # anchor on the frame that preceded the acknowledged one: that is
                    # the frame the receiver's wake-up CCA caught
                    t = self.timing
                    anchor = op.last_start - (t.data_duration + t.inter_frame)
                    self._phase_learn(req.dest, anchor, now)
                entry = self.phase_table.entries.get(req.dest)
                if entry is not None:
                    entry.noacks = 0
            elif status is MacStatus.NO_ACK:
                self.phase_table.record_noack(req.dest)
        result = MacResult(status, op.frames, now, op.strobes, op.data)
        self._op = None
        self._request = None
        self.mode = IDLE
        self.medium.turn_off(self.node)
        req.callback(result)
        self._service_request()

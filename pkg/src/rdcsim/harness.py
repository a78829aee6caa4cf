"""Scenario parsing, single runs, multi-seed campaigns, aggregation and reports."""

import csv
import io
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .csma import CsmaConfig
from .engine import SECOND, RngStreams, Simulator
from .mac.config import DISPLAY_NAMES, get_protocol
from .mac.timing import MacTiming, get_preset
from .medium import Medium, RadioGeometry
from .metrics import (MetricLedger, TrafficMode, TrafficProfile, collect_send_times,
                      choose_active, compute_etx, compute_pdr, conservation,
                      duty_cycle_report, latency_stats, pair_send_times, retx_breakdown)
from .mac.frames import MacStatus
from .network import Network
from .routing import COLLECT_SIDE, StarTopology, random_collect_topology


class Kind(Enum):
    STAR = "star"
    COLLECT = "collect"


RATES = {"high": 5, "moderate": 10, "low": 15}


@dataclass(frozen=True)
class Scenario:
    kind: Kind = Kind.STAR
    protocol: str = "contikimac"
    n: int = 14
    node_count: int = 49
    interval: int = 5 * SECOND
    rate: str = "high"
    runs: int = 25
    duration: int = 240 * SECOND
    seed_base: int = 1
    max_retx: int = 5
    active: int = 10
    preset: str = "table3"
    warmup: int = 0
    drain: int = 10 * SECOND
    beacons: bool = False
    queue_capacity: int = 8
    backoff_jitter: bool = False
    side: float = COLLECT_SIDE
    offset_window: int = None
    send_jitter: int = 0
    beacon_interval: int = 0

    @property
    def label(self) -> str:
        if self.kind is Kind.STAR:
            return f"star-n{self.n}-{self.rate}"
        return f"collect-{self.node_count}"

    @property
    def timing(self) -> MacTiming:
        return get_preset(self.preset)

    @property
    def end_of_traffic(self) -> int:
        return self.warmup + self.duration

    @property
    def total_time(self) -> int:
        return self.warmup + self.duration + self.drain


class ScenarioError(ValueError):
    pass


# send_jitter: each packet leaves up to 1 s after its slot so that a run does not
# replay one frozen sender/receiver phase configuration for every period
STAR_DEFAULTS = dict(runs=25, duration=240 * SECOND, max_retx=5, warmup=0, beacons=False,
                     send_jitter=SECOND)
COLLECT_DEFAULTS = dict(runs=50, node_count=49, active=10, max_retx=4, interval=15 * SECOND,
                        rate="low", duration=240 * SECOND, warmup=30 * SECOND, beacons=True)

_PAIR = re.compile(r"([A-Za-z_][\w-]*)\s*=\s*([^\s=]+)")
_INT_KEYS = {"n": "n", "node_count": "node_count", "nodes": "node_count", "runs": "runs",
             "seed_base": "seed_base", "seed": "seed_base", "max_retx": "max_retx",
             "active": "active", "queue_capacity": "queue_capacity"}
_SECOND_KEYS = {"duration": "duration", "warmup": "warmup", "drain": "drain",
                "interval": "interval", "offset_window": "offset_window",
                "send_jitter": "send_jitter", "beacon_interval": "beacon_interval"}
_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _parse_seconds(key, value) -> int:
    v = value.lower()
    scale = SECOND
    if v.endswith("ms"):
        v, scale = v[:-2], 1000
    elif v.endswith("s"):
        v = v[:-1]
    try:
        out = round(float(v) * scale)
    except ValueError:
        raise ScenarioError(f"{key}: expected a duration, got {value!r}") from None
    if out < 0:
        raise ScenarioError(f"{key} must be non-negative")
    return out


def parse_scenario(text: str) -> Scenario:
    """Parse ``key = value`` settings (one per line or several per line, ``#`` comments)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        pairs = _PAIR.findall(line)
        leftover = _PAIR.sub("", line).strip()
        if not pairs or leftover:
            raise ScenarioError(f"line {lineno}: malformed setting {line!r}")
        for k, v in pairs:
            raw[k.lower().replace("-", "_")] = v
    kind_s = raw.pop("kind", "star").lower()
    try:
        kind = Kind(kind_s)
    except ValueError:
        raise ScenarioError(f"unknown scenario kind {kind_s!r}") from None
    values = dict(STAR_DEFAULTS if kind is Kind.STAR else COLLECT_DEFAULTS)
    values["kind"] = kind
    for key, value in raw.items():
        if key in _INT_KEYS:
            try:
                values[_INT_KEYS[key]] = int(value)
            except ValueError:
                raise ScenarioError(f"{key}: expected an integer, got {value!r}") from None
        elif key in _SECOND_KEYS:
            values[_SECOND_KEYS[key]] = _parse_seconds(key, value)
        elif key == "rate":
            rate = value.lower()
            if rate not in RATES:
                raise ScenarioError(f"unknown rate {value!r}; choose from {sorted(RATES)}")
            values["rate"] = rate
            values["interval"] = RATES[rate] * SECOND
        elif key == "protocol":
            try:
                values["protocol"] = get_protocol(value).name
            except ValueError as e:
                raise ScenarioError(str(e)) from None
        elif key == "preset":
            try:
                values["preset"] = get_preset(value).name
            except ValueError as e:
                raise ScenarioError(str(e)) from None
        elif key in ("beacons", "backoff_jitter"):
            if value.lower() not in _BOOL:
                raise ScenarioError(f"{key}: expected a boolean, got {value!r}")
            values[key] = _BOOL[value.lower()]
        elif key == "side":
            values["side"] = float(value)
        else:
            raise ScenarioError(f"unknown setting {key!r}")
    if "interval" in raw and "rate" not in raw:
        secs = values["interval"] / SECOND
        values["rate"] = next((r for r, s in RATES.items() if s == secs), f"{secs:g}s")
    scn = Scenario(**values)
    check_scenario(scn)
    return scn


def check_scenario(scn: Scenario):
    if scn.kind is Kind.STAR and (scn.n < 2 or scn.n % 2):
        raise ScenarioError(f"star size N must be a positive even number, got {scn.n}")
    if scn.kind is Kind.COLLECT and not 0 < scn.active <= scn.node_count - 1:
        raise ScenarioError("active senders must be between 1 and node_count - 1")
    if scn.runs < 1:
        raise ScenarioError("runs must be >= 1")
    if scn.max_retx < 0:
        raise ScenarioError("max_retx must be >= 0")
    if scn.interval <= 0 or scn.duration <= 0:
        raise ScenarioError("interval and duration must be positive")


# -- single run ------------------------------------------------------------------

@dataclass
class RunResult:
    run: int
    seed: int
    scenario: Scenario
    ledger: MetricLedger
    conservation: dict
    regenerations: int = 0
    mean_rank: float = None
    events: int = 0
    extra: dict = field(default_factory=dict)

    def metrics(self) -> dict:
        return run_metrics(self)


def build_network(scn: Scenario, seed: int, geometry=RadioGeometry()):
    rngs = RngStreams(seed)
    timing = scn.timing
    protocol = get_protocol(scn.protocol)
    sim = Simulator()
    info = {"regenerations": 0, "mean_rank": None}
    if scn.kind is Kind.STAR:
        topo = StarTopology.build(scn.n, geometry)
        positions, next_hop = topo.positions, topo.next_hop
        info["pairs"] = topo.pairs
    else:
        positions, tree, regen = random_collect_topology(
            rngs.topology, scn.node_count, scn.side, geometry)
        next_hop = tree.next_hop
        info.update(regenerations=regen, mean_rank=tree.mean_rank(), tree=tree)
    medium = Medium(sim, positions, geometry)
    medium.header_duration = timing.header_duration
    csma_cfg = CsmaConfig(scn.max_retx, scn.queue_capacity, scn.backoff_jitter)
    net = Network(sim, medium, timing, protocol, next_hop, rngs, csma_cfg)
    return sim, net, rngs, info


def _schedule_traffic(scn, sim, net, rngs, info):
    rng = rngs.traffic()
    start, end = scn.warmup, scn.end_of_traffic
    if scn.beacons:
        latest = max(scn.warmup - 2 * SECOND, 1)
        for node in sorted(net.macs):
            sim.schedule(int(rng.integers(0, latest)), net.send_beacon, node)
        if scn.beacon_interval:
            # periodic routing maintenance broadcasts while traffic flows
            for node in sorted(net.macs):
                for t in collect_send_times(rng, scn.beacon_interval, start, end):
                    sim.schedule(t, net.send_beacon, node)
    if scn.kind is Kind.STAR:
        for s, d in info["pairs"]:
            for t in pair_send_times(rng, scn.interval, start, end, scn.offset_window,
                                     scn.send_jitter):
                sim.schedule(t, net.originate, s, d)
    else:
        sink = info["tree"].sink
        candidates = [n for n in net.macs if n != sink]
        for s in choose_active(rng, candidates, scn.active):
            for t in collect_send_times(rng, scn.interval, start, end):
                sim.schedule(t, net.originate, s, sink)


def run_once(scn: Scenario, run: int = 0) -> RunResult:
    seed = scn.seed_base + run
    sim, net, rngs, info = build_network(scn, seed)
    net.start()
    _schedule_traffic(scn, sim, net, rngs, info)
    events = sim.run_until(scn.total_time)
    net.finalize()
    cons = conservation(net.ledger, net.queued_packet_ids())
    return RunResult(run, seed, scn, net.ledger, cons, info["regenerations"], info["mean_rank"],
                     events)


# -- metrics and reports ---------------------------------------------------------

CSV_FIELDS = ("run", "seed", "protocol", "scenario", "pdr", "etx", "latency_mean_ms",
              "latency_sd_ms", "latency_p10_ms", "latency_p25_ms", "latency_p50_ms",
              "latency_p75_ms", "latency_p90_ms", "latency_max_ms", "retx_postponed_pct",
              "retx_collision_pct", "retx_noack_pct", "listen_pct", "tx_pct", "rx_pct",
              "csma_dropped_pct")
METRIC_FIELDS = CSV_FIELDS[4:]


def run_metrics(res: RunResult) -> dict:
    led = res.ledger
    lat = latency_stats(led.latencies_ms())
    br = retx_breakdown(led.causes)
    duty = duty_cycle_report(led.state_time, led.duration)
    offered = led.csma_enqueued + led.drops_queue
    row = {
        "run": res.run, "seed": res.seed, "protocol": res.scenario.protocol,
        "scenario": res.scenario.label,
        "pdr": compute_pdr(led), "etx": compute_etx(led),
        "retx_postponed_pct": float(br[MacStatus.POSTPONED]) if br else None,
        "retx_collision_pct": float(br[MacStatus.COLLISION]) if br else None,
        "retx_noack_pct": float(br[MacStatus.NO_ACK]) if br else None,
        "listen_pct": duty.get("listen"), "tx_pct": duty.get("tx"), "rx_pct": duty.get("rx"),
        "csma_dropped_pct": 100 * (led.drops_limit + led.drops_queue) / offered if offered else None,
    }
    for k in ("mean", "sd", "p10", "p25", "p50", "p75", "p90", "max"):
        row[f"latency_{k}_ms"] = lat.get(k)
    return row


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([_fmt(r.get(k)) for k in CSV_FIELDS])
    return buf.getvalue()


@dataclass
class AggregateReport:
    scenario: Scenario
    runs: int
    mean: dict
    sd: dict
    rows: list = field(default_factory=list)
    results: list = field(default_factory=list)
    # campaign-wide latency percentiles over all delivered packets
    pooled_latency: dict = field(default_factory=dict)


def aggregate(rows, scenario=None, results=None) -> AggregateReport:
    mean, sd = {}, {}
    for k in METRIC_FIELDS:
        vals = np.array([r[k] for r in rows if r.get(k) is not None], dtype=float)
        if vals.size == 0:
            mean[k] = sd[k] = None
            continue
        mean[k] = float(vals.mean())
        sd[k] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    pooled = {}
    if results:
        samples = np.concatenate([r.ledger.latencies_ms() for r in results])
        pooled = latency_stats(samples)
    return AggregateReport(scenario, len(rows), mean, sd, list(rows), list(results or []), pooled)


def _run_index(args):
    scn, i = args
    return run_once(scn, i)


def run_experiment(scn: Scenario, runs=None, seed=None, workers=1, keep_results=True):
    """Run a multi-seed campaign; run i uses seed ``seed_base + i``."""
    if runs is not None:
        scn = replace(scn, runs=runs)
    if seed is not None:
        scn = replace(scn, seed_base=seed)
    check_scenario(scn)
    jobs = [(scn, i) for i in range(scn.runs)]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_index, jobs))
    else:
        results = [_run_index(j) for j in jobs]
    rows = [r.metrics() for r in results]
    return aggregate(rows, scn, results if keep_results else None)


def emit_report(reports, fmt="csv", out_dir=None) -> dict:
    """Write aggregate reports as CSV (one row per protocol x scenario) or a text table.

    Returns a mapping of written file name to contents; nothing is written when
    ``out_dir`` is None.
    """
    if not reports:
        raise ValueError("no reports to emit")
    if fmt == "csv":
        name, text = "aggregate.csv", aggregate_csv(reports)
    elif fmt == "table":
        name, text = "summary.txt", aggregate_table(reports)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    out = {name: text}
    per_run = "".join(rows_to_csv(r.rows) if i == 0 else rows_to_csv(r.rows).split("\n", 1)[1]
                      for i, r in enumerate(reports))
    out["runs.csv"] = per_run
    if out_dir is not None:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for fname, text in out.items():
            (d / fname).write_text(text)
    return out


def aggregate_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["protocol", "scenario", "runs"]
    for k in METRIC_FIELDS:
        header += [f"{k}_mean", f"{k}_sd"]
    w.writerow(header)
    for rep in reports:
        line = [rep.scenario.protocol, rep.scenario.label, rep.runs]
        for k in METRIC_FIELDS:
            line += [_fmt(rep.mean[k]), _fmt(rep.sd[k])]
        w.writerow(line)
    return buf.getvalue()


def _pm(mean, sd, scale=1.0, digits=2):
    if mean is None:
        return "-"
    return f"{mean * scale:.{digits}f} (+/- {sd * scale:.{digits}f})"


def aggregate_table(reports) -> str:
    head = (f"{'Protocol':<12}{'Scenario':<18}{'PDR (%)':<22}{'ETX':<20}{'Latency (s)':<20}"
            f"{'LISTEN (%)':<20}{'TX (%)':<20}{'RX (%)':<20}")
    lines = [head, "-" * len(head)]
    for rep in reports:
        m, s = rep.mean, rep.sd
        lines.append(
            f"{DISPLAY_NAMES.get(rep.scenario.protocol, rep.scenario.protocol):<12}"
            f"{rep.scenario.label:<18}"
            f"{_pm(m['pdr'], s['pdr'], 100, 1):<22}{_pm(m['etx'], s['etx']):<20}"
            f"{_pm(m['latency_mean_ms'], s['latency_mean_ms'], 0.001):<20}"
            f"{_pm(m['listen_pct'], s['listen_pct']):<20}{_pm(m['tx_pct'], s['tx_pct']):<20}"
            f"{_pm(m['rx_pct'], s['rx_pct']):<20}")
    return "\n".join(lines) + "\n"


# -- analytic latency ------------------------------------------------------------

def single_hop_tx_time(timing: MacTiming, protocol: str) -> int:
    cfg = get_protocol(protocol)
    if cfg.name == "contikimac":
        return timing.contikimac_tx_time
    if cfg.name == "xmac-cp":
        return timing.xmac_cp_tx_time
    raise ValueError(f"analytic latency is defined for contikimac and xmac-cp, not {protocol!r}")


def min_e2e_latency(preset, protocol: str, hops: int) -> int:
    """Average end-to-end latency with phase-lock and no contention, in microseconds.

    Per hop the sender waits half a wake-up interval on average, then needs the
    protocol's shortest successful transmission.
    """
    timing = get_preset(preset) if isinstance(preset, str) else preset
    if hops < 0:
        raise ValueError("hops must be >= 0")
    tx = single_hop_tx_time(timing, protocol)
    return hops * (timing.wake_interval // 2 + tx) if timing.wake_interval % 2 == 0 else \
        math.floor(hops * (timing.wake_interval / 2 + tx))

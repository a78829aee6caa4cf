from dataclasses import replace

import pytest

from rdcsim.engine import SECOND
from rdcsim.harness import (CSV_FIELDS, METRIC_FIELDS, Kind, ScenarioError, aggregate,
                            emit_report, min_e2e_latency, parse_scenario, rows_to_csv,
                            run_experiment, run_once)
from rdcsim.mac import SEC423


def test_star_scenario_defaults():
    s = parse_scenario("kind=star N=14 rate=high protocol=contikimac")
    assert (s.kind, s.n, s.runs, s.interval, s.max_retx) == (Kind.STAR, 14, 25, 5 * SECOND, 5)
    assert s.duration == 240 * SECOND


def test_collect_scenario_defaults():
    s = parse_scenario("kind=collect protocol=xmac-cp")
    assert (s.node_count, s.active, s.runs, s.max_retx) == (49, 10, 50, 4)
    assert s.interval == 15 * SECOND and s.protocol == "xmac-cp"


def test_multiline_with_comments_and_units():
    s = parse_scenario("""
        # a short star
        kind = star
        N = 4          # two pairs
        duration = 1500ms
        rate = low
    """)
    assert s.n == 4 and s.duration == 1500 * 1000 and s.interval == 15 * SECOND


@pytest.mark.parametrize("text", [
    "protocol=zmac",
    "kind=star N=13",
    "kind=ring",
    "colour=blue",
    "N=fourteen",
    "rate=frantic",
    "just words",
    "runs=0",
])
def test_bad_scenarios_rejected(text):
    with pytest.raises(ScenarioError):
        parse_scenario(text)


def test_analytic_latency_examples():
    assert min_e2e_latency("config-sec423", "contikimac", 2) / 1000 == pytest.approx(140.8, abs=0.05)
    assert min_e2e_latency(SEC423, "xmac-cp", 2) / 1000 == pytest.approx(144.4, abs=0.05)
    assert min_e2e_latency(SEC423, "xmac-cp", 0) == 0
    with pytest.raises(ValueError):
        min_e2e_latency(SEC423, "xmac", 2)


SHORT = "kind=star N=4 rate=high duration=30s drain=2s"


@pytest.mark.parametrize("protocol", ["contikimac", "xmac", "xmac-cp"])
def test_same_seed_gives_byte_identical_csv(protocol):
    scn = parse_scenario(f"{SHORT} protocol={protocol} runs=2 seed=11")
    a = rows_to_csv(run_experiment(scn).rows)
    b = rows_to_csv(run_experiment(scn).rows)
    assert a == b
    assert a.splitlines()[0] == ",".join(CSV_FIELDS)
    assert len(a.splitlines()) == 3


def test_different_seed_changes_the_run():
    scn = parse_scenario(f"{SHORT} protocol=xmac runs=1")
    assert rows_to_csv(run_experiment(scn, seed=1).rows) != rows_to_csv(run_experiment(scn, seed=2).rows)


def test_run_i_uses_seed_base_plus_i():
    scn = parse_scenario(f"{SHORT} runs=3 seed=40")
    rep = run_experiment(scn)
    assert [r["seed"] for r in rep.rows] == [40, 41, 42]
    assert rows_to_csv([rep.rows[2]]) == rows_to_csv([run_once(scn, 2).metrics()])


def test_single_pair_low_rate_delivers_everything():
    scn = parse_scenario("kind=star N=2 rate=low protocol=contikimac duration=120s")
    res = run_once(scn)
    assert res.metrics()["pdr"] == 1.0


@pytest.mark.parametrize("text", [f"{SHORT} protocol=xmac-c",
                                  "kind=collect protocol=xmac duration=40s warmup=10s"])
def test_packets_are_conserved(text):
    res = run_once(parse_scenario(text))
    c = res.conservation
    assert c["lost"] == 0
    assert c["originated"] == c["delivered"] + c["dropped"] + c["queued"]


def test_state_time_closes_for_every_node():
    scn = parse_scenario(f"{SHORT} protocol=contikimac")
    res = run_once(scn)
    assert res.ledger.duration == scn.total_time
    for st in res.ledger.state_time.values():
        assert sum(st) == scn.total_time


def _fake_rows(protocol, value):
    row = {k: value for k in METRIC_FIELDS}
    row.update(run=0, seed=1, protocol=protocol, scenario="x")
    return row


def test_aggregate_of_constant_runs_is_the_constant():
    scn = parse_scenario("protocol=xmac")
    rep = aggregate([_fake_rows("xmac", 0.5)] * 4, scn)
    assert all(rep.mean[k] == 0.5 and rep.sd[k] == 0.0 for k in METRIC_FIELDS)


def test_report_has_one_row_per_protocol_and_scenario_point():
    reports = []
    for p in ("contikimac", "xmac", "xmac-c", "xmac-p", "xmac-cp"):
        for n in (2, 4, 6, 8, 10, 12, 14):
            for rate in ("high", "moderate", "low"):
                scn = parse_scenario(f"protocol={p} N={n} rate={rate}")
                reports.append(aggregate([_fake_rows(p, 1.0)], scn))
    files = emit_report(reports, "csv")
    lines = files["aggregate.csv"].splitlines()
    assert len(lines) == 1 + 105
    assert lines[0].startswith("protocol,scenario,runs,pdr_mean,pdr_sd")
    single = emit_report(reports[:1], "csv")["aggregate.csv"].splitlines()
    assert len(single) == 2 and single[0] == lines[0]


def test_table_format_carries_the_summary_columns(tmp_path):
    scn = parse_scenario("protocol=xmac-cp")
    files = emit_report([aggregate([_fake_rows("xmac-cp", 0.9)], scn)], "table", tmp_path)
    head = files["summary.txt"].splitlines()[0]
    for col in ("PDR", "ETX", "Latency", "LISTEN", "TX", "RX"):
        assert col in head
    assert "X-MAC-CP" in files["summary.txt"]
    assert (tmp_path / "summary.txt").read_text() == files["summary.txt"]
    assert (tmp_path / "runs.csv").exists()


def test_emit_report_needs_reports():
    with pytest.raises(ValueError):
        emit_report([], "csv")


def test_workers_do_not_change_results():
    scn = parse_scenario(f"{SHORT} protocol=xmac-p runs=2")
    serial = rows_to_csv(run_experiment(scn).rows)
    parallel = rows_to_csv(run_experiment(replace(scn), workers=2).rows)
    assert serial == parallel

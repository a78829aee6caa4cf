"""Discrete-event simulator for duty-cycled wireless sensor network MAC protocols."""

from .engine import MS, SECOND, RngStreams, Simulator, ms
from .harness import (AggregateReport, Scenario, ScenarioError, min_e2e_latency,
                      parse_scenario, run_experiment, run_once)

__all__ = [
    "MS", "SECOND", "AggregateReport", "RngStreams", "Scenario", "ScenarioError",
    "Simulator", "min_e2e_latency", "ms", "parse_scenario", "run_experiment", "run_once",
]

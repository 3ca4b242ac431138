"""Scenario files, built-in fixtures, the command runner and report writers."""

from holab.scenario.catalog import builtin_names, builtin_scenario
from holab.scenario.report import Check, Report, render_json, render_text, write_report
from holab.scenario.runner import COMMANDS, ScenarioRunner, run_scenario
from holab.scenario.schema import SCENARIO_SCHEMA, Scenario, dump_scenario, load_scenario, loads_scenario

__all__ = [
    "SCENARIO_SCHEMA", "Scenario", "load_scenario", "loads_scenario", "dump_scenario",
    "builtin_names", "builtin_scenario",
    "COMMANDS", "ScenarioRunner", "run_scenario",
    "Check", "Report", "render_json", "render_text", "write_report",
]

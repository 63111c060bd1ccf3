"""External formats: Touchstone files, CSV tables, JSON scenarios."""

from .scenario import Scenario, ScenarioError, dump_scenario, load_scenario
from .tables import dumps_csv, loads_csv
from .touchstone import TouchstoneError, TouchstoneRecord, read_s1p, write_s1p

__all__ = [
    "Scenario", "ScenarioError", "dump_scenario", "load_scenario",
    "dumps_csv", "loads_csv",
    "TouchstoneError", "TouchstoneRecord", "read_s1p", "write_s1p",
]

"""System-level downlink simulation of a multi-cell O-RAN deployment."""

from .config import LOAD_PRESETS_BPS, ScenarioConfig
from .engine import (
    Allocation,
    KpiReport,
    Simulator,
    SlotEvents,
    SlotLog,
    fronthaul_utilization,
    run,
    static_fronthaul_requirement,
    step_slot,
)
from .mcs import MCS_TABLE2, BLER_TARGET, BlerModel, McsEntry, select_mcs, transport_block_size
from .scenario import Scenario, build_scenario, make_scenario, sinr, site_positions, umi_path_loss

__all__ = [
    "Allocation", "BLER_TARGET", "BlerModel", "KpiReport", "LOAD_PRESETS_BPS", "MCS_TABLE2",
    "McsEntry", "Scenario", "ScenarioConfig", "Simulator", "SlotEvents", "SlotLog",
    "build_scenario", "fronthaul_utilization", "make_scenario", "run", "select_mcs", "sinr",
    "site_positions", "static_fronthaul_requirement", "step_slot", "transport_block_size",
    "umi_path_loss",
]

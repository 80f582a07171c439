"""Chained hash table that prices every request by the depth it touches."""
from .accounting import BAD, GOOD, BoundCheck, CostLedger, GoodObjectStats, WalletOracle, bound_report
from .adversary import ActionReport, Adversary, AttackPlan, ScriptError
from .rb import Challenge, LedgerBackend, PowBackend, Solution, make_backend
from .scenarios import RunSummary, Scenario, ScenarioError, builtin, load_scenario, report, run
from .simulation import Simulation
from .table import DepthChargeTable, RequestOutcome, RequestRejected, Status, TableConfig
from .workload import Workload, WorkloadSpec

__version__ = "0.1.0"

__all__ = [
    "BAD", "GOOD", "BoundCheck", "CostLedger", "GoodObjectStats", "WalletOracle", "bound_report",
    "ActionReport", "Adversary", "AttackPlan", "ScriptError",
    "Challenge", "LedgerBackend", "PowBackend", "Solution", "make_backend",
    "RunSummary", "Scenario", "ScenarioError", "builtin", "load_scenario", "report", "run",
    "Simulation", "DepthChargeTable", "RequestOutcome", "RequestRejected", "Status", "TableConfig",
    "Workload", "WorkloadSpec",
]

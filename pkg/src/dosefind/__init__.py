"""Phase I dose-finding designs unified as one posterior-mode decision
engine, with a sequential trial simulator, operating-characteristic
evaluation, decision-table emission, and machine verification of the
design equivalences."""

from .designs import (
    BOIN,
    CCD,
    CRM,
    DESIGNS,
    I3PLUS3,
    INTCRM,
    MTPI,
    MTPI2,
    DesignConfig,
)
from .framework import (
    DEESCALATE,
    ESCALATE,
    STAY,
    DoseState,
    Interval,
    PartitionSpec,
)
from .sim import OperatingCharacteristics, Scenario, evaluate, fixed_scenarios
from .tables import DecisionTable, build_table, emit
from .trial import TrialSpec, TrialState, run_trial, select_mtd

__version__ = "0.1.0"

__all__ = [
    "MTPI",
    "MTPI2",
    "BOIN",
    "CCD",
    "INTCRM",
    "CRM",
    "I3PLUS3",
    "DESIGNS",
    "DesignConfig",
    "DoseState",
    "Interval",
    "PartitionSpec",
    "ESCALATE",
    "STAY",
    "DEESCALATE",
    "Scenario",
    "OperatingCharacteristics",
    "evaluate",
    "fixed_scenarios",
    "DecisionTable",
    "build_table",
    "emit",
    "TrialSpec",
    "TrialState",
    "run_trial",
    "select_mtd",
    "__version__",
]

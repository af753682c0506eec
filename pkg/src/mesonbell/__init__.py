"""Bell-CHSH analysis of entangled neutral-meson pairs."""

from .chsh import (
    ChshSettings,
    KindVerdict,
    MaxResult,
    OptimizerOptions,
    ThresholdResult,
    chsh_value,
    find_threshold,
    maximize_chsh,
    scan_x,
    verdict,
)
from .correlation import (
    CorrelationKind,
    JointOutcomeTable,
    Outcome,
    TimePair,
    corr_from_table,
    corr_nonunitary,
    corr_renormalized,
    corr_unitary,
    joint_table,
)
from .estimators import ChshMaximizer, ThresholdClassifier
from .model import MesonSystem, ReducedSystem, SystemBound, builtin_systems, make_system, reduce
from .montecarlo import EstimatorResult, EventRecord, EventSample, estimate_chsh, estimate_correlation, sample_events

__version__ = "0.1.0"

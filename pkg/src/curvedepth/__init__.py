"""curvedepth: sample depth functions for grid-discretized curves.

Six depth notions (Gaussian-kernel h-depth, random Tukey depth, band and
modified band depth, half-region and modified half-region depth), a
small library of Gaussian-process and atomic curve distributions, and an
audit harness that checks which desirable depth properties each notion
satisfies on simulated data.
"""

from .core import (
    Curve,
    FunctionalSample,
    Grid,
    InputError,
    ParameterError,
    l2_distance,
    lebesgue_fraction,
    sup_distance,
    uniform_grid,
)
from .depths import (
    DEPTH_IDS,
    DEPTH_LABELS,
    DepthParams,
    DepthResult,
    evaluate_depth,
    depth_values,
    upper_bound,
)
from .distributions import (
    AtomicDistribution,
    ContaminationSpec,
    GPSpec,
    Kernel,
    mix,
    sample_gp,
    subseed,
)
from .properties import (
    GOLDEN,
    PROPERTY_IDS,
    AuditConfig,
    AuditReport,
    RiceSpec,
    Verdict,
    rice_expected_upcrossings,
    run_full_audit,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicDistribution",
    "AuditConfig",
    "AuditReport",
    "ContaminationSpec",
    "Curve",
    "DEPTH_IDS",
    "DEPTH_LABELS",
    "DepthParams",
    "DepthResult",
    "FunctionalSample",
    "GOLDEN",
    "GPSpec",
    "Grid",
    "InputError",
    "Kernel",
    "PROPERTY_IDS",
    "ParameterError",
    "RiceSpec",
    "Verdict",
    "depth_values",
    "evaluate_depth",
    "l2_distance",
    "lebesgue_fraction",
    "mix",
    "rice_expected_upcrossings",
    "run_full_audit",
    "sample_gp",
    "subseed",
    "sup_distance",
    "uniform_grid",
    "upper_bound",
    "__version__",
]

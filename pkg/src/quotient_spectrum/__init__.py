"""Pressure, repeller dimension and Birkhoff-quotient spectra of countable-branch Markov maps."""
from .cylinders import (
    BudgetExceeded,
    TruncationSpec,
    birkhoff_sum,
    cylinder_interval,
    cylinder_length,
    enumerate_words,
)
from .flow import (
    FlowPoint,
    SuspensionProblem,
    flow_spectrum,
    flow_spectrum_point,
    flow_stats,
    kac_transform,
)
from .models import (
    FiniteModel,
    GaussModel,
    MarkovSystem,
    ModelError,
    MPInducedModel,
    Potential,
    build_finite,
    build_gauss,
    build_mp_induced,
    load_finite,
    load_model,
    resolve_potential,
    standard_potentials,
)
from .pressure import (
    Combination,
    ConvergenceError,
    EquilibriumStats,
    InconclusiveError,
    PressureValue,
    Tolerances,
    bowen_dimension,
    equilibrium_stats,
    finiteness_test,
    pressure,
    s_infinity,
)
from .spectrum import (
    BoundarySummary,
    OutOfRangeError,
    QuotientProblem,
    SpectrumPoint,
    G1,
    boundary_summary,
    classify_regimes,
    discontinuity_probe,
    spectrum_point,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "TruncationSpec",
    "birkhoff_sum",
    "cylinder_interval",
    "cylinder_length",
    "enumerate_words",
    "FlowPoint",
    "SuspensionProblem",
    "flow_spectrum",
    "flow_spectrum_point",
    "flow_stats",
    "kac_transform",
    "FiniteModel",
    "GaussModel",
    "MarkovSystem",
    "ModelError",
    "MPInducedModel",
    "Potential",
    "build_finite",
    "build_gauss",
    "build_mp_induced",
    "load_finite",
    "load_model",
    "resolve_potential",
    "standard_potentials",
    "Combination",
    "ConvergenceError",
    "EquilibriumStats",
    "InconclusiveError",
    "PressureValue",
    "Tolerances",
    "bowen_dimension",
    "equilibrium_stats",
    "finiteness_test",
    "pressure",
    "s_infinity",
    "BoundarySummary",
    "OutOfRangeError",
    "QuotientProblem",
    "SpectrumPoint",
    "G1",
    "boundary_summary",
    "classify_regimes",
    "discontinuity_probe",
    "spectrum_point",
    "__version__",
]

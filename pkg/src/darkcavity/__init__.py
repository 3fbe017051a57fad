"""Dark states in driven, lossy multi-mode multi-atom cavities: stationary
spectra in the single-excitation limit, closed-form cross-checks, and a
truncated-Fock oracle."""

from .analytic import (
    DarkState,
    ObservabilityReport,
    anti_resonance_width,
    dark_state,
    measured_antiresonance_width,
    milburn_alsing_population,
    milburn_alsing_weak_approx,
    observability_report,
    population_delta_zero,
    population_gamma_zero,
    two_lorentzian_population,
)
from .errors import (
    ConfigError,
    DegenerateSteadyStateError,
    DimensionError,
    NoDarkStateError,
    NumericalError,
    ResourceLimitError,
    ThresholdError,
    ValidationError,
)
from .fockoracle import (
    FockBasis,
    FockStationaryState,
    GroundStateResult,
    build_full_hamiltonian,
    ground_state_population,
    solve_full_stationary,
)
from .model import (
    CollectiveDecomposition,
    SystemParams,
    collective_params,
    decompose,
    make_localized_coupling,
    make_uniform_coupling,
)
from .weaksolver import (
    DensityMatrix,
    Liouvillian,
    StationaryState,
    SweepResult,
    WeakBasis,
    build_hamiltonian,
    build_liouvillian,
    solve_stationary,
    sweep_detuning,
)

__version__ = "0.1.0"

__all__ = [
    "CollectiveDecomposition",
    "ConfigError",
    "DarkState",
    "DegenerateSteadyStateError",
    "DensityMatrix",
    "DimensionError",
    "FockBasis",
    "FockStationaryState",
    "GroundStateResult",
    "Liouvillian",
    "NoDarkStateError",
    "NumericalError",
    "ObservabilityReport",
    "ResourceLimitError",
    "StationaryState",
    "SweepResult",
    "SystemParams",
    "ThresholdError",
    "ValidationError",
    "WeakBasis",
    "anti_resonance_width",
    "build_full_hamiltonian",
    "build_hamiltonian",
    "build_liouvillian",
    "collective_params",
    "dark_state",
    "decompose",
    "ground_state_population",
    "make_localized_coupling",
    "make_uniform_coupling",
    "measured_antiresonance_width",
    "milburn_alsing_population",
    "milburn_alsing_weak_approx",
    "observability_report",
    "population_delta_zero",
    "population_gamma_zero",
    "solve_full_stationary",
    "solve_stationary",
    "sweep_detuning",
    "two_lorentzian_population",
]

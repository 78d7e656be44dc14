"""Renormalization of attractive 1/x^n potentials with a square-well counterterm."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    DEFAULT_TOL,
    BranchInfeasibleError,
    Counterterm,
    DivergenceError,
    DomainError,
    EnergyPoint,
    ExtractionError,
    ObservableInfeasibleError,
    PoleError,
    PotentialSpec,
    PreconditionError,
    ResolutionError,
    SingflowError,
    Tabulated,
    Tolerances,
    Unity,
    ValidityError,
    nu_of,
    reduce_angle,
    to_dimensionless,
    wkb_phase_scale,
)
from .flow import FixedBoundStateCount, FixedBranch, trace_flow, tune_counterterm  # noqa: F401
from .radial import phase_shift, scattering_length_numeric  # noqa: F401
from .zero_energy import (  # noqa: F401
    BoundStateEnergy,
    PhaseAtK,
    ScatteringLength,
    ZeroEnergyPhase,
    phase_from_observable,
)

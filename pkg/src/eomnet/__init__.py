"""Frequency-domain toolkit for linearized electro-optomechanical networks.

Build a :class:`SystemSpec` (or load a preset), then compute scattering
matrices, transmission sweeps, adiabatically reduced models and
nonreciprocity figures of merit.
"""

from ._backend import BACKEND
from .errors import (
    ConfigError,
    ConvergenceError,
    InvalidSpecError,
    RegimeWarning,
    SingularMatrixError,
    TopologyError,
    UnstableSpecError,
)
from .model import (
    PRESETS,
    CoefficientMatrix,
    Coupling,
    Mode,
    ModeKind,
    SystemSpec,
    build_coefficient_matrix,
    is_stable,
    loop_phase,
    normalize_loop_phase,
    preset,
    validate,
    with_loop_phase,
)
from .scattering import (
    ScatteringResult,
    SweepGrid,
    propagate_spectrum,
    scattering_matrix,
    sweep,
    transmission_pair,
)

__version__ = "0.1.0"

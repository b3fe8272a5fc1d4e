"""Single-photon scattering off atom chains coupled to a one-dimensional waveguide.

Four cross-validating engines (exact linear solve, eigenchannel sum,
Fabry-Perot recurrence, transfer matrix) for reflection/transmission
spectra, plus band-structure and ultrahigh-reflection-window analytics.
"""

from .analysis import (
    DissipationRow,
    OptimizationResult,
    WindowReport,
    ZeroCrossing,
    bandwidth_vs_n,
    dissipation_study,
    extract_window,
    find_zeros,
    half_max_width,
    modulation_study,
    optimize_separation,
)
from .classical import (
    MirrorCoefficients,
    compose_two_port,
    matching_matrix,
    propagation_matrix,
    recurrence_reflection,
    recurrence_rt,
    reflectivity_profile,
    single_atom_rt,
    transfer_matrix_rt,
)
from .core import (
    GAMMA0,
    K0,
    LAMBDA0,
    EmitterChain,
    PhaseModel,
    RIGID,
    build_chain,
    build_modulated_chain,
    build_uniform_chain,
    dispersive,
    make_grid,
    spatial_phase,
)
from .eigen import (
    EigenMode,
    EigenmodeSet,
    GapReport,
    bandgap,
    build_heff,
    chain_bandgap,
    chain_eigenmodes,
    dispersion,
    eigenmodes,
    incident_phases,
    reflection_modal,
    reflection_modal_many,
    scatter_modal_many,
)
from .errors import (
    AtomMirrorError,
    BraggDivergenceError,
    ConfigError,
    InvalidParameterError,
    ModalUnavailableError,
    NoWindowError,
    PoleError,
    ResonantDivergenceError,
    SingularMatrixError,
    UnknownFigureError,
)
from .exact import (
    ScatterPoint,
    Spectrum,
    build_m_matrix,
    reflection_exact,
    scatter_point,
    sweep_spectrum,
    transmission_exact,
)

__version__ = "0.1.0"

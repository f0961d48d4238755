"""Reference-frame-independent QKD with qudits: simulation, witness,
tomography and finite-key rates in prime dimension."""

from ._kernels import NUMBA_ENABLED
from .keyrate import (
    ChannelEstimate,
    EpsilonBudget,
    FiniteKeyParams,
    RateResult,
    asymptotic_rate_tomographic,
    conditional_entropy_AE,
    estimate_channel,
    finite_rate_tomographic,
    finite_rate_ur,
    isotropic_asymptotic_rate,
    leak_ec,
    min_HAE_over_ball,
    mu_fluctuation,
    optimize_rate,
    shannon_entropy,
    ur_virtual_distribution,
    zero_rate_qber,
)
from .states import (
    DensityMatrix,
    MeasurementStats,
    apply_misalignment,
    apply_z_tilt,
    bell_basis,
    bell_state,
    bell_vector,
    isotropic_bell_spectrum,
    isotropic_state,
    measure_joint,
    qber,
    sample_stats,
    trace_distance,
    z_commuting_unitary,
    z_phase_unitary,
)
from .tomography import (
    ReconstructionResult,
    SpectrumReport,
    TomographyInput,
    correlators_from_stats,
    expected_settings,
    extract_spectrum,
    reconstruct_state,
    z_error_distribution,
)
from .weyl import (
    OrthonormalBasis,
    eig_hermitian,
    hs_inner,
    is_prime,
    mub_eigenbases,
    weyl_op,
    weyl_x,
    weyl_z,
)
from .witness import (
    CorrelatorTable,
    c_decomposition_check,
    c_parameter,
    correlators_from_state,
    max_c_value,
    separable_bound,
    witness_verdict,
)

__version__ = "0.1.0"

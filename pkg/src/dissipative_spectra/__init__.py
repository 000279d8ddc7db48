"""Spectral analysis of dissipative linear systems ``A(beta) = Omega - i beta B``."""

from .circuit import CircuitSpec, build_phi, canonical_system, closed_form_coefficients, paper_example
from .errors import *  # noqa: F401,F403
from .harmonic import (
    admittance_exact,
    admittance_expansion,
    classify_frequency,
    respond,
    response_limits,
    theorem3_inequality_check,
)
from .high_loss import (
    HighLossMode,
    LowLossMode,
    degeneracy_report,
    dissipation_asymptote,
    eval_eigenvalue_asymptote,
    high_loss_coefficients,
    low_loss_coefficients,
    quality_factor_asymptote,
)
from .linalg import aitken_block_inverse, general_eig, hermitian_eig, positive_sqrt, schur_complement
from .small_beta import (
    SmallBetaMode,
    eval_small_beta_eigenvalue,
    small_beta_coefficients,
    small_beta_quality_asymptote,
)
from .system import (
    BlockDecomposition,
    DissipativeSystem,
    assemble,
    build_system,
    decompose,
    free_evolution_energy_audit,
    mode_metrics,
    orbit_subspace,
)
from .tracker import (
    check_spectral_symmetry,
    classify,
    detect_overdamping,
    locate_critical_point,
    sweep,
)

__version__ = "0.1.0"

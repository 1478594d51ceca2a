"""Wirtinger Flow phase retrieval with closed-form recovery certificates."""

__version__ = "0.1.0"

from .certificates import (
    CertificateReport,
    certificate_chain,
    delta_hat,
    delta_star,
    effective_delta_noisy,
    epsilon_from_delta,
    estimate_delta,
    snr_feasibility,
)
from .lifted_model import (
    SamplingEnsemble,
    adjoint,
    delta_residual,
    forward_intensity,
    generate_gaussian_ensemble,
    lifted_apply_hermitian,
    projective_design,
    spectral_matrix,
    tight_frame_ratio,
)
from .solver import (
    Certified,
    Fixed,
    HeuristicRamp,
    SolveOptions,
    SolveTrace,
    distance,
    fit_rate,
    gradient,
    objective,
    phase_align,
    solve,
    spectral_initialize,
)

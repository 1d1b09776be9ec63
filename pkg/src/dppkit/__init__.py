"""dppkit: exact and near-exact simulation of determinantal point processes.

Continuous DPPs on boxes, balls, and the plane: projection-kernel sequential
sampling with accelerated proposals, Fourier spectral approximations, Ginibre
and Gaussian-kernel models, Bessel-kernel models on the disk, conditional
simulation (Palm measures and region in-painting), and summary statistics.
"""
from .errors import (ConditioningError, DegeneratePointError, DppError,
                     ExistenceError, InfeasibleSpectrumError,
                     InsufficientDataError, InvalidConditioningError,
                     InvalidSpectrumError, NumericalIntegrityError, StallError,
                     TruncationError, UndefinedPcfError)
from .domains import Ball, Box, PointPattern, unit_ball, unit_box
from .kernels import (BesselKernel, ExistenceReport, FourierProjectionKernel,
                      GaussianKernel, GinibreKernel, InhomGaussianKernel,
                      check_existence, eval_kernel, pair_correlation,
                      require_existence)
from .spectral import SpectralBasis, estimate_diag_bound, spectral_trace
from .sampler import (DiagonalStrategy, KernelSamplerState,
                      SpectralSamplerState, UniformStrategy, draw_next_point,
                      eval_pi, run_chain, sample_projection, update_state)
from .fourier import (FourierBasis, PiecewiseProposal,
                      build_piecewise_proposal, fourier_spectral_approx,
                      gaussian_spectral_density, matern_thin,
                      most_repulsive_indices, sample_fourier,
                      smallest_norm_indices)
from .conditional import (InpaintRegion, PalmKernel, RestrictedKernel, inpaint,
                          palm_kernel, select_projection_kernel,
                          simulate_given_subset)
from .ginibre import (GinibreDiscBasis, GinibreModel, beta_max,
                      default_radius, ginibre_spectral_basis,
                      sample_ginibre_eigen, sample_ginibre_spectral,
                      truncation_order)
from .gaussian import (HermiteTensorBasis, InhomGaussianModel,
                       hermite_functions, inhom_gaussian_basis,
                       optimize_sigma0, sample_hom_gaussian_ball,
                       sample_inhom_gaussian, scaled_intensity,
                       thinning_profile)
from .bessel import (BesselDiskBasis, ProlateFunction, ProlateOperator,
                     bessel_spectral_basis, jacobi_p0_table, prolate_functions,
                     prolate_operator, sample_bessel_d2, zernike_eval)
from .stats import (Curve, SummaryReport, estimate_K, estimate_pcf,
                    intensity_map, run_benchmark, sample_binomial,
                    sample_poisson, validate_suite)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

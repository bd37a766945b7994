"""Traffic matrix decomposition into low-rank, sparse and noise parts.

Solves stable principal component pursuit (SPCP) and its frequency-weighted
variant SPCP-FDR with an accelerated proximal gradient method.
"""

__version__ = "0.1.0"

from .dataset import (Decomposition, Diagnostics, MatrixFormatError, NoiseScales,
                      TrafficMatrix, denormalize, estimate_noise_scales,
                      load_decomposition, load_matrix, normalize,
                      save_decomposition, save_matrix)
from .metrics import (Comparison, EvalReport, compare_reports, evaluate,
                      numerical_rank, pearson_abs, spectral_flatness)
from .prox import (ProxContext, noise_prox, noise_prox_dense, noise_prox_fft,
                   soft_threshold, svt)
from .solver import (SolverConfig, default_gamma, default_lambda, gradient_point,
                     k0_bound, momentum_point, solve, spectral_norm)
from .spectral import (SpectralDensity, aggregate_density, dft, idft,
                       position_period_hours, spectral_density)
from .synthgen import SynthSpec, generate
from .weights import WeightSpec, WeightVector, build_weights, uniform_weights

__all__ = [
    "Comparison", "Decomposition", "Diagnostics", "EvalReport",
    "MatrixFormatError", "NoiseScales", "ProxContext", "SolverConfig",
    "SpectralDensity", "SynthSpec", "TrafficMatrix", "WeightSpec",
    "WeightVector", "aggregate_density", "build_weights", "compare_reports",
    "default_gamma", "default_lambda", "denormalize", "dft", "estimate_noise_scales",
    "evaluate", "generate", "gradient_point", "idft", "k0_bound",
    "load_decomposition", "load_matrix", "momentum_point", "noise_prox",
    "noise_prox_dense", "noise_prox_fft", "normalize", "numerical_rank",
    "pearson_abs", "position_period_hours", "save_decomposition", "save_matrix",
    "soft_threshold", "solve", "spectral_density", "spectral_flatness",
    "spectral_norm", "svt", "uniform_weights",
]

"""Wave-equation regularisation processes on flat circles and tori.

``T_eps = m_eps(sqrt(Delta))`` with a time-cut-off wave representation of a
plateau filter; tools to apply it, measure its asymptotics in ``eps`` and
check the properties expected of a regularisation into generalized
functions.
"""
__version__ = "0.1.0"

from .errors import (BandLimitError, ConfigError, DegenerateInputError, DimensionError,
                     InsufficientDataError, ParameterError, ResolutionError, StabilityError,
                     UnknownDistributionError, WaveregError)
from .manifold import (GridFunction, ManifoldModel, SpectralCoefficients, counting_function,
                       eigenvalue, forward_transform, geodesic_distance, inverse_transform,
                       sobolev_norm, weyl_constant)
from .filters import (CutoffSpec, FilterSpec, MultiplierTable, build_filter,
                      effective_multiplier, filter_fourier_transform, moment_check)
from .zoo import ZOO_IDS, TestDistribution, make_distribution, pair, zoo_listing
from .regularizer import (RegularizationProcess, apply_spectral, apply_wave, kernel_section,
                          mollify, regularize, support_radius)
from .asymptotics import (EpsilonScan, SlopeFit, classify, difference_scan, dyadic_grid,
                          fit_slope, geometric_grid, residual_scan, run_scan)
from .microlocal import ConeProbe, WavefrontReport, cone_decay_scan, estimate_wavefront
from .harness import (AxiomReport, CheckResult, FirstOrderOperator, compare_mollifier,
                      flagship_process, heat_process, sharp_process, verify_axioms,
                      verify_cutoff_independence, verify_first_order, verify_isometry,
                      verify_weyl)

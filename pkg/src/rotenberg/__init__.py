"""Exact-in-time simulator and analysis toolkit for the Rotenberg
cell-population semigroup: boundary extensions, transport evolution,
adjoint operator norms, stationary densities and long-time experiments.
"""

from .errors import CoverageError, NumericsError, ValidationError
from .extension import (ExtendedField, build_extension, extension_bound_check,
                        extension_norm_constant, strip_index, weighted_norm)
from .fields import (DensityField, builtin_density, bump_density, l1_distance, l1_norm,
                     linear_x_density, random_box_density, uniform_density,
                     x_profile_density)
from .dual import (DualField, NormCertificate, apply_dual, apply_dual_small, j_index,
                   operator_norm, v_epsilon_diagnostic, x_daughter)
from .model import (BoundaryMeasure, Kernel, KernelValidationReport, Model, ModelParams,
                    VelocitySpace, apply_boundary_measure, builtin_kernel,
                    int_mes_identity, tabulated_kernel, validate_kernel)
from .semigroup import (EvolutionResult, apply, apply_small_t, semigroup_law_check,
                        trajectory, x_mother)
from .stationary import (DecayResult, H4Report, StabilityResult, StationaryReport,
                         VelocityDensity, apply_K, decay_experiment, h4_check,
                         invariance_check, invariant_density, partial_integrality_check,
                         power_iteration, stability_experiment)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

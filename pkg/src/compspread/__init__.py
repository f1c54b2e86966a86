"""Numerical laboratory for time-periodic two-species competition systems
under random (Laplacian) and nonlocal (convolution) dispersal."""

from .coefficients import (CoefficientField, CoefficientSet, EnvelopeTable,
                           HypothesisVerdict, PeriodicScalar, SpatialBump,
                           check_h0, check_h1, check_h2, check_lv_determinacy,
                           compute_envelopes, constant_set)
from .dispersal import (Grid, Kernel, apply_nonlocal, apply_random,
                        apply_tilted_nonlocal, apply_tilted_random,
                        kernel_moment)
from .errors import (CompspreadError, ConfigError, ConvergenceError,
                     NumericalGuardError, PreconditionError)
from .periodic_orbits import (PeriodicOrbit, coexistence_homogeneous,
                              logistic_periodic, nonhomogeneous_periodic)
from .semitrivial import (PeriodicField, compute_semitrivial,
                          destabilizing_bump, linearized_radius)
from .simulator import (Problem, SchemeConfig, SystemState, make_front_data,
                        make_scheme, run_periods, run_transformed, step)
from .spectrum import (LinearProblem, SpectrumResult, evolve_linear,
                       principal_spectrum_point, spectrum_monotonicity_check)
from .spreading import (SpeedEstimate, continuity_sweep, dispersion_speed,
                        empirical_front_speed, speed_interval)
from .verify import (SupersolutionSpec, build_ansatz_pair,
                     build_supersolution, check_ansatz_inequalities,
                     monotone_coexistence, persistence_probe,
                     supersolution_residual)

__version__ = "0.1.0"

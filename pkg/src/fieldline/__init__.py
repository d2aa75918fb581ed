"""Charged-particle motion in shaped planar magnetic fields.

Quadrature and closed-form trajectories in Landau gauges, an independent
Runge-Kutta oracle, and the zero-mode / SWKB analysis of the matching
radial Pauli problem.
"""

from .dynamics import (MotionConstants, ParticleParams, analyze_orbit, closed_form_exponential,
                       closed_form_trajectory, closed_form_uniform, companion_coordinate,
                       derive_constants, params_from_constants, radicand, trajectory_quadrature,
                       turning_points)
from .errors import (ConfigError, DegenerateTurningPointError, DomainError, FieldlineError,
                     ForbiddenStartError, IntegrationFailure, InvariantViolation, MultiWellError,
                     NumericError)
from .fields import (FieldProfile, GaugeAxis, ProfileKind, eval_B, make_builtin,
                     profile_from_field, profile_from_name)
from .kernels import BACKEND
from .oracle import OdeSettings, acceleration, compare, integrate
from .trajectory import Method, Trajectory

__version__ = "0.1.0"

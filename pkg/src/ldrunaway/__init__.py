"""Radial Lorentz-Dirac motion of an electron in a cutoff outward field.

Integrates the worldline, provides an integral-form oracle for the
acceleration, and evaluates the analytic turn-around bounds against runs.
"""

from .bounds import (
    BoundKind,
    BoundQuery,
    BoundReport,
    check_bounds_on_worldline,
    contra_threshold,
    lemma2_coord_bound,
    lemma2_proper_bound,
    lemma3_pointwise_bound,
    theorem1_max_velocity,
    theorem2_min_cutoff,
)
from .errors import DomainError, IntegrationError
from .fields import (
    FieldKind,
    FieldModel,
    field_impulse,
    scalar_field,
    scalar_field_raw,
    validate_theorem1_hypotheses,
)
from .integrator import (
    EventKind,
    Outcome,
    SimConfig,
    SimState,
    Worldline,
    derivative,
    fit_runaway_rate,
    integrate,
    volterra_accel,
)

__version__ = "0.1.0"

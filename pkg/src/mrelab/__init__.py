"""Numerical laboratory for Darcy-regularized magnetic relaxation.

Subpackages:

* :mod:`mrelab.fields`, :mod:`mrelab.elliptic` -- grids, projections, norms,
  the Neumann Poisson solver, and the Leray projection.
* :mod:`mrelab.mre`    -- the nonlinear channel dynamics near a shear and the
  linearized operator with its decay experiments.
* :mod:`mrelab.scalar` -- the degenerate scalar relaxation equation with its
  exact shear solutions.
* :mod:`mrelab.orbits` -- flow maps, periodic orbits, orbit averages, and the
  orbit-based decay bounds.
* :mod:`mrelab.harness` -- scenario files, deterministic runs, CLI.
"""

__version__ = "0.1.0"

from .diag import DiagSeries
from .elliptic import leray, neumann_solve, poincare_constant
from .errors import (BlowupDetected, CflViolation, CompatibilityError,
                     ConfigError, CriticalPoint, DomainViolation, MrelabError,
                     NoReturn, NotEigenfunction, NotSolenoidal, OrderTooHigh,
                     SingularSystemError, StepFailure)
from .fields import (ChannelField, ScalarField, p0, pperp, sobolev_norm,
                     stream_function)
from .grid import ChannelGrid, PolarGrid, TorusGrid
from .mre import (LinOpConfig, MreState, apply_La, linear_pressure, mre_rhs,
                  random_initial_field, run_channel, step, velocity)
from .scalar import (AdvectingField, ScalarState, scalar_rhs,
                     shear_exact_eigen, step_scalar)
from .shear import ShearProfile
from .snapshots import read_snapshot, write_snapshot
from .harness import Scenario, run, sweep, verify

__all__ = [name for name in dir() if not name.startswith("_")]

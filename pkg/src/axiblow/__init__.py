"""Blow-up analysis toolkit for axisymmetric free-surface flows with gravity.

The stream function u(x1, x2) lives on the meridian half-plane x1 >= 0
(x1 = distance to the axis, x2 = height).  The package provides Legendre
special functions, the exact blow-up profiles, weighted half-ball
functionals, a point classifier and the ``axiblow`` command line.
"""

__version__ = "0.1.0"

from .errors import (AxiblowError, BracketError, CaseMismatchError, ConvergenceError, DomainError,
                     GammaPoleError, IntegrandError, ZeroDenominatorError)
from .field import AnalyticField, Field, GridField, read_axifield, sample_field, write_axifield
from .profiles import (BlowupCase, axis_profile, degenerate_limit_field, garabedian_profile,
                       halfplane_profile, stokes_corner)
from .specfun import find_z0, legendre_p, legendre_p_prime

__all__ = [
    "AxiblowError", "BracketError", "CaseMismatchError", "ConvergenceError", "DomainError",
    "GammaPoleError", "IntegrandError", "ZeroDenominatorError",
    "AnalyticField", "Field", "GridField", "read_axifield", "sample_field", "write_axifield",
    "BlowupCase", "axis_profile", "degenerate_limit_field", "garabedian_profile", "halfplane_profile",
    "stokes_corner", "find_z0", "legendre_p", "legendre_p_prime",
]

"""Spontaneous emission and collective decay of emitters next to a plasmonic nanowire.

Layers, bottom up: :mod:`specfun` (cylinder functions), :mod:`cylwave`
(vector wave functions), :mod:`scatter` (surface boundary problem),
:mod:`greentensor` (Green tensor quadrature), :mod:`dispersion` (guided
modes), :mod:`emitters` (decay rates), :mod:`dynamics` (master equations
and the phase gate) and :mod:`cli`.
"""

from .cylwave import CylPoint
from .emitters import Emitter, radial_emitter
from .errors import (
    ConvergenceError,
    DomainError,
    PlasmonWireError,
    PreconditionError,
    RangeError,
    ResolutionError,
    SingularSystemError,
)
from .greentensor import QuadratureSpec
from .scatter import WireSystem

__all__ = [
    "ConvergenceError", "CylPoint", "DomainError", "Emitter", "PlasmonWireError",
    "PreconditionError", "QuadratureSpec", "RangeError", "ResolutionError",
    "SingularSystemError", "WireSystem", "radial_emitter",
]

"""Relaxation of a two-level system in a complex Gaussian-Markovian field.

Three routes to the same relaxation functions: trajectory Monte Carlo
(:mod:`tlsrelax.montecarlo`), radial partial-average PDEs
(:mod:`tlsrelax.pde`) and closed-form asymptotics (:mod:`tlsrelax.theory`).
"""

from .curves import RelaxationCurve
from .field import FieldParams, FieldState
from .tls import DensityVector, PointerBasis

__all__ = ["FieldParams", "FieldState", "DensityVector", "PointerBasis", "RelaxationCurve"]
__version__ = "0.1.0"

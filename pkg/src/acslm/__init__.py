"""Moduli dimensions of asymptotically conical special Lagrangian
submanifolds, computed from link spectra and core topology, together with the
numerical verifications backing the counting formulas."""

__version__ = "0.1.0"

from . import ac_geometry, cone_solver, indicial, link_spectrum, moduli, topology
from .errors import (
    AcslmError,
    InternalConsistencyError,
    NumericError,
    ResourceLimitError,
    ValidationError,
    WeightError,
)

__all__ = [
    "__version__",
    "ac_geometry",
    "cone_solver",
    "indicial",
    "link_spectrum",
    "moduli",
    "topology",
    "AcslmError",
    "InternalConsistencyError",
    "NumericError",
    "ResourceLimitError",
    "ValidationError",
    "WeightError",
]

"""Stabilizer polytope tools: enumeration, facets and magic quantifiers."""
from .pauli import PauliString, PauliVector
from .stabilizers import StabilizerSet, enumerate_stabilizers, stabilizer_set
from .states import parse_state
from .geometry import Hyperplane, bound, facet_through
from .measures import (
    full_report,
    monotone_M_exact,
    monotone_M_search,
    robustness,
    stabilizer_norm,
    witness_W,
    witness_Y,
)

__version__ = "0.1.0"

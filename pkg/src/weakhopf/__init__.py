"""Exact finite-dimensional weak multiplier Hopf algebras: canonical
idempotents, separability data, integrals, and the construction of the
counit and antipode from faithful integrals."""

from .algebra_core import Check, FinAlgebra, Functional, Multiplier, StructureError
from .coproduct import CanonicalIdempotent, Coproduct, canonical_maps, find_canonical_idempotent
from .examples import FiniteGroupoid, function_algebra, groupoid_algebra, random_groupoid, transitive_groupoid
from .exact_linalg import Matrix, Scalar, Subspace
from .integrals import IntegralSpace, solve_left_integrals, solve_right_integrals
from .larson_sweedler import PipelineAbort, WeakHopfResult, full_pipeline
from .separability import SeparabilityStructure, separability_structure

__version__ = "0.1.0"

__all__ = [
    "Check", "FinAlgebra", "Functional", "Multiplier", "StructureError", "CanonicalIdempotent",
    "Coproduct", "canonical_maps", "find_canonical_idempotent", "FiniteGroupoid",
    "function_algebra", "groupoid_algebra", "random_groupoid", "transitive_groupoid", "Matrix",
    "Scalar", "Subspace", "IntegralSpace", "solve_left_integrals", "solve_right_integrals",
    "PipelineAbort", "WeakHopfResult", "full_pipeline", "SeparabilityStructure",
    "separability_structure",
]

"""Exact p-adic and finite-field toolkit for magic contractions and their unitary dilations."""

from .fields import FieldDescriptor, Fp, PrecisionLoss, Qp, Scalar
from .linalg import Matrix, Vector
from .magic import MagicWitness, search_witnesses, verify_magic

__all__ = [
    "FieldDescriptor",
    "Fp",
    "MagicWitness",
    "Matrix",
    "PrecisionLoss",
    "Qp",
    "Scalar",
    "Vector",
    "search_witnesses",
    "verify_magic",
]

__version__ = "0.1.0"

"""Deterministic factorization of rational multivariate polynomials
presented as algebraic circuits, with verifiable certificates."""

from . import errors
from .scalars import NumberField, NumberFieldElement, Scalar, nf_inverse
from .polyring import MultiPoly

__all__ = [
    "errors",
    "MultiPoly",
    "NumberField",
    "NumberFieldElement",
    "Scalar",
    "nf_inverse",
]

__version__ = "0.1.0"

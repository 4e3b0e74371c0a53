"""Reinhardt polygons: construction, classification, census and geometry."""
from .classify import (
    DihedralComposition,
    NotReinhardtError,
    ReinhardtPolynomial,
    antiperiod,
    canonicalize,
    is_reinhardt,
)
from .construct import ChoiceVector, ConstructionSpec, assemble, enumerate_spec
from .cyclo import IntPolynomial, cyclotomic, decompose_two_term, divides_cyclotomic
from .seqcore import EvenComposition, OddComposition, TernarySeq

__version__ = "0.1.0"

__all__ = [
    "ChoiceVector",
    "ConstructionSpec",
    "DihedralComposition",
    "EvenComposition",
    "IntPolynomial",
    "NotReinhardtError",
    "OddComposition",
    "ReinhardtPolynomial",
    "TernarySeq",
    "antiperiod",
    "assemble",
    "canonicalize",
    "cyclotomic",
    "decompose_two_term",
    "divides_cyclotomic",
    "enumerate_spec",
    "is_reinhardt",
]

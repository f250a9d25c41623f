"""Finite structures, Fraisse classes and structural Ramsey computations."""

from .structures import (ORDER, LinearOrder, Signature, Structure, automorphisms, canonical_form, copies,
                         embeddings, expand_with_order, induced_substructure, is_isomorphic, parse_structure,
                         reduct, serialize_structure)
from .classes import ClassSpec, catalog_class, enumerate_members, member, parse_descriptor
from .budget import Budget
from .errors import BudgetExceeded, ClassSpecError, FraisseError, SignatureMismatch, StructureSyntaxError

__version__ = "0.1.0"

__all__ = ["ORDER", "LinearOrder", "Signature", "Structure", "automorphisms", "canonical_form", "copies",
           "embeddings", "expand_with_order", "induced_substructure", "is_isomorphic", "parse_structure",
           "reduct", "serialize_structure", "ClassSpec", "catalog_class", "enumerate_members", "member",
           "parse_descriptor", "Budget", "BudgetExceeded", "ClassSpecError", "FraisseError",
           "SignatureMismatch", "StructureSyntaxError"]

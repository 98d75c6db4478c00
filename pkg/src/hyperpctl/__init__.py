"""Exact model checking of HyperPCTL sentences over discrete-time Markov chains."""

__version__ = "0.1.0"

from .checker import Verdict, check
from .formula import FormulaError, parse_formula, prepare, to_text
from .model import (
    BudgetExceeded, Dtmc, ModelError, ProductChain, load_model, parse_model,
    self_compose, serialize_model, validate,
)

__all__ = [
    "BudgetExceeded", "Dtmc", "FormulaError", "ModelError", "ProductChain", "Verdict",
    "check", "load_model", "parse_formula", "parse_model", "prepare", "self_compose",
    "serialize_model", "to_text", "validate",
]

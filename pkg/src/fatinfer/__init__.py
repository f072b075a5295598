"""Decision and inference engine for System Fat, where instantiation is restricted to type variables."""

from .bullet import analyse_bullet, infer_bullet, infer_poly, lift_to_fat, typable_bullet
from .checker import check_nonredundant, check_typing, synthesize
from .nonredundant import decide_nonredundant
from .simple import Untypable, check_simple, curry_typable, infer_simple
from .syntax import (
    ParseError, Typing, barendregt_check, erase_poly, erase_types, parse_env, parse_term,
    parse_type, print_term, print_type, print_typing,
)

__version__ = "0.1.0"

__all__ = [
    "analyse_bullet", "infer_bullet", "infer_poly", "lift_to_fat", "typable_bullet",
    "check_nonredundant", "check_typing", "synthesize", "decide_nonredundant",
    "Untypable", "check_simple", "curry_typable", "infer_simple", "ParseError", "Typing",
    "barendregt_check", "erase_poly", "erase_types", "parse_env", "parse_term",
    "parse_type", "print_term", "print_type", "print_typing",
]

"""Base-extension (proof-theoretic) semantics for first-order arithmetic.

Atomic rule bases, budgeted derivability with checkable certificates, the
weight-based consistency argument, exact support over toy universes and
bounded support over the arithmetic bases.
"""

from .arith import decide_equation, eval_value, normalize_to_numeral, refute_bot
from .rulebase import Base, Derivation, builtin_base, check_derivation, parse_rules
from .search import Budget, derive
from .syntax import parse_atom, parse_formula, parse_term, render
from .weight import weight

__all__ = [
    "Base", "Budget", "Derivation", "builtin_base", "check_derivation", "decide_equation",
    "derive", "eval_value", "normalize_to_numeral", "parse_atom", "parse_formula",
    "parse_rules", "parse_term", "refute_bot", "render", "weight",
]
__version__ = "0.1.0"

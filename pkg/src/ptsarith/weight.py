"""The weight function on closed terms and its symbolic counterpart.

Closed terms get a natural-number weight by primitive recursion (0 for zero
and for the extra constants, +1 under S, additive over +, multiplicative over
*).  Terms with variables get a polynomial in the variables' weights, which
is what the per-schema audit and the search pruning reason about.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .syntax import Add, Atom, Const, Mul, Succ, Term, Var, Zero, render

Monomial = tuple[tuple[str, int], ...]


def weight(t: Term) -> int:
    if isinstance(t, (Zero, Const)):
        return 0
    if isinstance(t, Succ):
        return weight(t.arg) + 1
    if isinstance(t, Add):
        return weight(t.left) + weight(t.right)
    if isinstance(t, Mul):
        return weight(t.left) * weight(t.right)
    if isinstance(t, Var):
        raise ValueError(f"weight is only defined on closed terms (found variable {t.name})")
    raise TypeError(f"not a term: {t!r}")


def weights(a: Atom) -> tuple[int, int]:
    return weight(a.lhs), weight(a.rhs)


def balanced(a) -> bool:
    if not isinstance(a, Atom):
        return False
    left, right = weights(a)
    return left == right


class Poly(dict):
    """Integer polynomial: ``{monomial: coefficient}``, zero terms dropped."""

    @classmethod
    def const(cls, c: int) -> "Poly":
        return cls({(): c}) if c else cls()

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): 1})

    def __add__(self, other):
        out = Poly(self)
        for m, c in other.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return out

    def __neg__(self):
        return Poly({m: -c for m, c in self.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = Poly()
        for m1, c1 in self.items():
            for m2, c2 in other.items():
                exps = dict(m1)
                for v, e in m2:
                    exps[v] = exps.get(v, 0) + e
                out = out + Poly({tuple(sorted(exps.items())): c1 * c2})
        return out

    @property
    def constant(self) -> int:
        return self.get((), 0)

    def variables(self) -> set[str]:
        return {v for m in self for v, _ in m}

    def substitute(self, name: str, value: "Poly") -> "Poly":
        out = Poly()
        for m, c in self.items():
            term = Poly.const(c)
            for v, e in m:
                factor = value if v == name else Poly.var(v)
                for _ in range(e):
                    term = term * factor
            out = out + term
        return out

    def linear_in(self) -> tuple[str, int, int] | None:
        """If the polynomial is ``a*v + b`` return ``(v, a, b)``."""
        rest = [m for m in self if m != ()]
        if len(rest) != 1:
            return None
        (m,) = rest
        if len(m) != 1 or m[0][1] != 1:
            return None
        return m[0][0], self[m], self.constant

    def __str__(self):
        if not self:
            return "0"
        parts = []
        for m, c in sorted(self.items()):
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def weight_poly(t: Term) -> Poly:
    if isinstance(t, (Zero, Const)):
        return Poly()
    if isinstance(t, Var):
        return Poly.var(t.name)
    if isinstance(t, Succ):
        return weight_poly(t.arg) + Poly.const(1)
    if isinstance(t, Add):
        return weight_poly(t.left) + weight_poly(t.right)
    if isinstance(t, Mul):
        return weight_poly(t.left) * weight_poly(t.right)
    raise TypeError(f"not a term: {t!r}")


def imbalance(a: Atom) -> Poly:
    """``w(lhs) - w(rhs)`` as a polynomial in the variables' weights."""
    return weight_poly(a.lhs) - weight_poly(a.rhs)


def _definitely_nonzero(p: Poly) -> bool:
    # monomials are >= 0 over the naturals
    c = p.constant
    rest = [v for m, v in p.items() if m != ()]
    if c > 0 and all(v >= 0 for v in rest):
        return True
    if c < 0 and all(v <= 0 for v in rest):
        return True
    return not rest and c != 0


def feasible(constraints: Iterable[Poly]) -> bool:
    """Cheap test for a natural-number solution of ``p = 0`` for all p.

    False means provably unsatisfiable.  True only means no contradiction was
    found by sign reasoning and propagation of linear one-variable equations.
    """
    polys = [p for p in constraints if p]
    changed = True
    while changed:
        changed = False
        for p in polys:
            if _definitely_nonzero(p):
                return False
        for i, p in enumerate(polys):
            lin = p.linear_in()
            if lin is None:
                continue
            name, a, b = lin
            value = Fraction(-b, a)
            if value.denominator != 1 or value < 0:
                return False
            val = Poly.const(int(value))
            polys = [q.substitute(name, val) for j, q in enumerate(polys) if j != i]
            polys = [q for q in polys if q]
            changed = True
            break
    return True


def _implied(premises: list[Poly], goal: Poly) -> bool:
    # eliminate a variable with unit coefficient from each premise in turn
    premises = [p for p in premises if p]
    goal = Poly(goal)
    while premises:
        p = premises.pop(0)
        pivot = None
        for m, c in p.items():
            if len(m) == 1 and m[0][1] == 1 and abs(c) == 1:
                name = m[0][0]
                occurs_elsewhere = any(name in {v for v, _ in mm} for mm in p if mm != m)
                if not occurs_elsewhere:
                    pivot = (name, c)
                    break
        if pivot is None:
            continue
        name, c = pivot
        # p = c*name + r  =>  name = -r/c
        r = p - Poly({((name, 1),): c})
        value = -r if c == 1 else r
        goal = goal.substitute(name, value)
        premises = [q.substitute(name, value) for q in premises]
        premises = [q for q in premises if q]
    return not goal


@dataclass(frozen=True)
class SchemaAudit:
    schema: str
    status: str  # "preserves" | "vacuous" | "unproven"
    detail: str

    @property
    def ok(self) -> bool:
        return self.status in ("preserves", "vacuous")


def audit_schema(schema) -> SchemaAudit:
    """Check that balanced premises force a balanced conclusion, symbolically.

    A schema with a premise that can never be balanced (such as ``S(x)=0``)
    is reported as vacuous: it can never fire in a derivation whose premises
    are all balanced.
    """
    from .rulebase import ANY
    prem = [imbalance(p) for p in schema.premises if isinstance(p, Atom)]
    for p, atom in zip(prem, schema.premises):
        if _definitely_nonzero(p):
            return SchemaAudit(schema.name, "vacuous",
                               f"premise {render(atom)} has weight difference {p}, never 0")
    if schema.conclusion is ANY:
        return SchemaAudit(schema.name, "unproven", "ANY conclusion with satisfiable premises")
    if not isinstance(schema.conclusion, Atom):
        return SchemaAudit(schema.name, "unproven", "conclusion is not an equation")
    goal = imbalance(schema.conclusion)
    if _implied(prem, goal):
        return SchemaAudit(schema.name, "preserves",
                           f"conclusion difference {goal} vanishes under the premises")
    return SchemaAudit(schema.name, "unproven", f"could not reduce {goal} to 0")


def audit_base(base) -> list[SchemaAudit]:
    return [audit_schema(s) for s in base.schemas]


_SOUND_CACHE: dict = {}


def weight_sound(base) -> bool:
    """True when every schema of the base passes :func:`audit_schema`."""
    key = (base.name, base.signature, base.schemas)
    if key not in _SOUND_CACHE:
        _SOUND_CACHE[key] = all(a.ok for a in audit_base(base))
    return _SOUND_CACHE[key]

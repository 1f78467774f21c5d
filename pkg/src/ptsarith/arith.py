"""Numeral normalization with certificates, the closed-equation decision
procedure, and the consistency argument for the arithmetic base.

Certificates are built by structural recursion, never by search: every
closed term gets a derivation of ``t = n`` for its numeral ``n`` in
``A_PLUS`` (or ``A_EXT``), and two terms are provably equal exactly when
their weights agree.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rulebase import (
    Base, Derivation, base_kind, builtin_base, rule_node,
)
from .search import Budget, derive
from .syntax import (
    ZERO, Add, Atom, Const, Mul, Succ, Term, Var, Zero, is_closed, numeral,
    render,
)
from .weight import audit_base, weight, weights

__all__ = [
    "weight", "eval_value", "FidelityGapError", "normalize_to_numeral",
    "Proved", "Disproved", "decide_equation", "check_weight_invariant",
    "refute_bot", "congruence_proof", "resolve_variant", "root_step",
    "root_normal_form", "Underivable", "decide_in_verbatim_base",
]


class FidelityGapError(ValueError):
    """Raised when a certificate is requested over the verbatim base A."""


def eval_value(t: Term) -> int:
    """Standard value of a closed term, computed with an explicit stack.

    Extra constants denote zero.
    """
    out: list[int] = []
    todo: list = [t]
    while todo:
        item = todo.pop()
        if item == "S":
            out.append(out.pop() + 1)
        elif isinstance(item, str):
            b, a = out.pop(), out.pop()
            out.append(a + b if item == "+" else a * b)
        elif isinstance(item, (Zero, Const)):
            out.append(0)
        elif isinstance(item, Succ):
            todo.append("S")
            todo.append(item.arg)
        elif isinstance(item, Add):
            todo.extend(("+", item.right, item.left))
        elif isinstance(item, Mul):
            todo.extend(("*", item.right, item.left))
        elif isinstance(item, Var):
            raise ValueError(f"cannot evaluate open term (variable {item.name})")
        else:
            raise TypeError(f"not a term: {item!r}")
    return out[0]


def resolve_variant(variant) -> Base:
    """Accept a Base or a name such as ``"A_PLUS"`` / ``"A_EXT(3)"``."""
    if isinstance(variant, Base):
        return variant
    name = str(variant).upper().replace(" ", "")
    if name.startswith("A_EXT"):
        k = name[len("A_EXT"):].strip("()") or "0"
        return builtin_base("A_EXT", int(k))
    return builtin_base(name)


def _certifying_base(variant) -> Base:
    base = resolve_variant(variant)
    kind = base_kind(base)
    if kind == "A":
        raise FidelityGapError(
            "base A has no congruence rules; normalization certificates need "
            "A_PLUS or A_EXT (see probe-fidelity)")
    if kind not in ("A_PLUS", "A_EXT"):
        raise ValueError(f"normalization is only defined over A_PLUS or A_EXT, not {base.name}")
    return base


# -- proof combinators ---------------------------------------------------------

def _eq(a, b):
    return Atom(a, b)


def _refl(t: Term) -> Derivation:
    return rule_node(_eq(t, t), "eq1", {"x": t})


def _is_refl(d: Derivation) -> bool:
    return d.atom.lhs == d.atom.rhs


def _sym(d: Derivation) -> Derivation:
    if _is_refl(d):
        return d
    a = d.atom
    return rule_node(_eq(a.rhs, a.lhs), "eq2", {"x": a.rhs, "y": a.lhs}, [d])


def _trans(d1: Derivation, d2: Derivation) -> Derivation:
    if _is_refl(d1):
        return d2
    if _is_refl(d2):
        return d1
    x, y, z = d1.atom.lhs, d1.atom.rhs, d2.atom.rhs
    assert d2.atom.lhs == y, "transitivity needs a shared middle term"
    return rule_node(_eq(x, z), "eq3", {"x": x, "y": y, "z": z}, [d1, d2])


def _chain(*ds: Derivation) -> Derivation:
    out = ds[0]
    for d in ds[1:]:
        out = _trans(out, d)
    return out


def _cong_succ(d: Derivation) -> Derivation:
    if _is_refl(d):
        return _refl(Succ(d.atom.lhs))
    x, y = d.atom.lhs, d.atom.rhs
    return rule_node(_eq(Succ(x), Succ(y)), "cg1", {"x": x, "y": y}, [d])


def _cong_left(ctor, d: Derivation, other: Term) -> Derivation:
    # x=y  =>  x (op) z = y (op) z
    x, y = d.atom.lhs, d.atom.rhs
    if _is_refl(d):
        return _refl(ctor(x, other))
    name = "cg2" if ctor is Add else "cg4"
    return rule_node(_eq(ctor(x, other), ctor(y, other)), name, {"x": x, "y": y, "z": other}, [d])


def _cong_right(ctor, other: Term, d: Derivation) -> Derivation:
    # x=y  =>  z (op) x = z (op) y
    x, y = d.atom.lhs, d.atom.rhs
    if _is_refl(d):
        return _refl(ctor(other, x))
    name = "cg3" if ctor is Add else "cg5"
    return rule_node(_eq(ctor(other, x), ctor(other, y)), name, {"x": x, "y": y, "z": other}, [d])


def _add_numerals(m: int, n: int) -> Derivation:
    """m + n = (m+n) for numerals, by recursion on n (pa3, pa4)."""
    mt = numeral(m)
    proof = rule_node(_eq(Add(mt, ZERO), mt), "pa3", {"x": mt})
    for k in range(n):
        # proof: m + k = m+k  ->  m + S(k) = S(m+k) = m+k+1
        kt = numeral(k)
        step = rule_node(_eq(Add(mt, Succ(kt)), Succ(Add(mt, kt))), "pa4", {"x": mt, "y": kt})
        proof = _trans(step, _cong_succ(proof))
    return proof


def _mul_numerals(m: int, n: int) -> Derivation:
    """m * n = (m*n) for numerals, by recursion on n (pa5, pa6)."""
    mt = numeral(m)
    proof = rule_node(_eq(Mul(mt, ZERO), ZERO), "pa5", {"x": mt})
    for k in range(n):
        # m*S(k) = m*k + m = (m*k) + m = m*k+m
        kt = numeral(k)
        step = rule_node(_eq(Mul(mt, Succ(kt)), Add(Mul(mt, kt), mt)), "pa6", {"x": mt, "y": kt})
        proof = _chain(step, _cong_left(Add, proof, mt), _add_numerals(m * k, m))
    return proof


def _normalize(t: Term) -> tuple[int, Derivation]:
    if isinstance(t, Zero):
        return 0, _refl(t)
    if isinstance(t, Const):
        axiom = rule_node(_eq(ZERO, t), f"zc{t.index}")
        return 0, _sym(axiom)
    if isinstance(t, Succ):
        n, d = _normalize(t.arg)
        return n + 1, _cong_succ(d)
    if isinstance(t, (Add, Mul)):
        ctor = type(t)
        m, dl = _normalize(t.left)
        n, dr = _normalize(t.right)
        # a op b = m op b = m op n = value
        first = _cong_left(ctor, dl, t.right)
        second = _cong_right(ctor, numeral(m), dr)
        if ctor is Add:
            return m + n, _chain(first, second, _add_numerals(m, n))
        return m * n, _chain(first, second, _mul_numerals(m, n))
    raise ValueError(f"cannot normalize open term {render(t)}")


def normalize_to_numeral(t: Term, variant="A_PLUS") -> tuple[int, Derivation]:
    """Return ``(n, d)`` where d derives ``t = S^n(0)`` without open premises."""
    base = _certifying_base(variant)
    if not is_closed(t):
        raise ValueError(f"cannot normalize open term {render(t)}")
    bad = [i for i in _consts(t) if not base.signature.has_constant(i)]
    if bad:
        raise ValueError(f"constant c{bad[0]} is not in the signature of {base.name}")
    return _normalize(t)


def _consts(t: Term):
    from .syntax import constants_in
    return sorted(constants_in(t))


# -- deciding closed equations -------------------------------------------------

@dataclass(frozen=True)
class Proved:
    certificate: Derivation
    value: bool = True


@dataclass(frozen=True)
class Disproved:
    weights: tuple[int, int]
    value: bool = False


def decide_equation(t1: Term, t2: Term, variant="A_PLUS"):
    """Decide ``t1 = t2`` for closed terms over A_PLUS / A_EXT.

    Equal weights give a certificate joining both normalizations; unequal
    weights are returned as the refutation witness, which is conclusive
    because every derivable equation is balanced.
    """
    base = _certifying_base(variant)
    w1, w2 = weight(t1), weight(t2)
    if w1 != w2:
        return Disproved((w1, w2))
    _, d1 = normalize_to_numeral(t1, base)
    _, d2 = normalize_to_numeral(t2, base)
    return Proved(_trans(d1, _sym(d2)))


def congruence_proof(pattern: Term, var: str, eq_proof: Derivation) -> Derivation:
    """From a proof of ``s = t`` build one of ``P[s] = P[t]`` for a pattern P."""
    if isinstance(pattern, Var) and pattern.name == var:
        return eq_proof
    if isinstance(pattern, Var):
        raise ValueError(f"pattern has a free variable {pattern.name} besides {var}")
    if isinstance(pattern, (Zero, Const)):
        return _refl(pattern)
    s, t = eq_proof.atom.lhs, eq_proof.atom.rhs
    from .syntax import substitute_term
    if isinstance(pattern, Succ):
        return _cong_succ(congruence_proof(pattern.arg, var, eq_proof))
    ctor = type(pattern)
    left = congruence_proof(pattern.left, var, eq_proof)
    right = congruence_proof(pattern.right, var, eq_proof)
    # L[s] op R[s] = L[t] op R[s] = L[t] op R[t]
    return _trans(_cong_left(ctor, left, substitute_term(pattern.right, var, s)),
                  _cong_right(ctor, substitute_term(pattern.left, var, t), right))


# -- the verbatim base A ----------------------------------------------------------
#
# Without congruence rules, pa3-pa6 can only rewrite a closed term at its root,
# and at most one of them applies to any given term.  Derivable closed
# equations in A are therefore the equivalence closure of a deterministic,
# terminating root-rewriting function: t1 = t2 is derivable iff the root normal
# forms coincide.  pa2 adds nothing because S-terms are root-normal, and pa1
# never fires because S(x) = 0 joins two distinct normal forms.

def root_step(t: Term) -> Derivation | None:
    """The unique pa3-pa6 instance rewriting t at the root, as ``t = t'``."""
    if isinstance(t, Add) and isinstance(t.right, Zero):
        return rule_node(_eq(t, t.left), "pa3", {"x": t.left})
    if isinstance(t, Add) and isinstance(t.right, Succ):
        x, y = t.left, t.right.arg
        return rule_node(_eq(t, Succ(Add(x, y))), "pa4", {"x": x, "y": y})
    if isinstance(t, Mul) and isinstance(t.right, Zero):
        return rule_node(_eq(t, ZERO), "pa5", {"x": t.left})
    if isinstance(t, Mul) and isinstance(t.right, Succ):
        x, y = t.left, t.right.arg
        return rule_node(_eq(t, Add(Mul(x, y), x)), "pa6", {"x": x, "y": y})
    return None


def root_normal_form(t: Term) -> tuple[Term, Derivation]:
    """Iterate root steps; returns the normal form and a proof of ``t = nf``."""
    proof = _refl(t)
    while (step := root_step(t)) is not None:
        proof = _trans(proof, step)
        t = step.atom.rhs
    return t, proof


@dataclass(frozen=True)
class Underivable:
    """Closed equation not derivable in A: the root normal forms differ."""

    normal_forms: tuple[Term, Term]
    value: bool = False


def decide_in_verbatim_base(t1: Term, t2: Term):
    """Exact derivability of a closed equation in A (no congruence rules)."""
    if not (is_closed(t1) and is_closed(t2)):
        raise ValueError("both terms must be closed")
    n1, d1 = root_normal_form(t1)
    n2, d2 = root_normal_form(t2)
    if n1 != n2:
        return Underivable((n1, n2))
    return Proved(_trans(d1, _sym(d2)))


# -- the weight invariant and consistency ---------------------------------------

def check_weight_invariant(d: Derivation) -> bool:
    """True iff every equation in the tree has equal weights on both sides."""
    for node in d.nodes():
        if not isinstance(node.atom, Atom):
            raise ValueError(f"node atom {node.atom!r} is not an equation")
        left, right = weights(node.atom)
        if left != right:
            return False
    return True


WITNESS = Atom(Succ(ZERO), ZERO)


def refute_bot(variant="A_PLUS", budget: Budget | None = None) -> dict:
    """Report why the base does not support bot.

    Support of bot would require every closed atom, in particular ``S(0)=0``,
    to be derivable.  That atom is unbalanced (weights 1 and 0), so the audit
    of the base's schemas rules it out; the bounded search is run as well.
    """
    base = resolve_variant(variant)
    budget = budget or Budget(max_depth=12, max_nodes=200_000)
    audit = audit_base(base)
    verdict = derive(base, [], WITNESS, budget)
    search = {"status": verdict.status, "max_depth": budget.max_depth,
              "max_nodes": budget.max_nodes}
    if verdict.status == "NotDerivable":
        search["evidence"] = dict(verdict.evidence)
    elif verdict.status == "Unknown":
        search["evidence"] = dict(verdict.budget)
    else:
        search["evidence"] = {"certificate_size": verdict.derivation.size()}
    sound = all(a.ok for a in audit)
    if sound and verdict.status != "Derivable":
        status = ("fails: the witness atom is not derivable, so the bot clause "
                  "(every closed atom derivable) is not met")
    else:
        status = "undetermined: the weight audit or the search did not rule the witness out"
    return {
        "base": base.name,
        "witness": render(WITNESS),
        "weights": list(weights(WITNESS)),
        "bot_clause_status": status,
        "bot_refuted": sound and verdict.status != "Derivable",
        "schema_audit": [{"schema": a.schema, "status": a.status} for a in audit],
        "search_verdict": search,
    }

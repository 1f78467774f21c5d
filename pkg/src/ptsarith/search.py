"""Budgeted derivability search in a base.

Ground (toy) bases are decided exactly by forward chaining to a fixed point.
Schematic bases are searched backwards from the goal with unification,
iterative deepening and an ancestor loop check.  When the base passes the
weight audit and every premise is balanced, subgoals (and conjunctions of
subgoals) whose weight constraints are unsatisfiable are pruned: no
derivation can contain them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .rulebase import ANY, Base, Derivation, check_derivation, instantiate_atom
from .syntax import ZERO, Add, Atom, Mul, Prop, Succ, Var, is_closed, render
from .weight import balanced, feasible, imbalance, weight_sound

__all__ = ["Budget", "Derivable", "NotDerivable", "Unknown", "derive", "forward_closure"]


@dataclass(frozen=True)
class Budget:
    max_depth: int = 12
    max_nodes: int = 200_000

    def __post_init__(self):
        if self.max_depth < 1 or self.max_nodes < 1:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class Derivable:
    derivation: Derivation
    nodes: int = 0
    status = "Derivable"


@dataclass(frozen=True)
class NotDerivable:
    evidence: Mapping
    status = "NotDerivable"


@dataclass(frozen=True)
class Unknown:
    budget: Mapping
    status = "Unknown"


# -- forward chaining (ground bases) -------------------------------------------

def forward_closure(base: Base, premises: Iterable = ()) -> dict:
    """Least fixed point of a ground base; maps each derived atom to a proof."""
    proofs: dict = {p: Derivation(p) for p in premises}
    rules = [(s.name, list(s.premises), s.conclusion) for s in base.schemas]
    changed = True
    while changed:
        changed = False
        for name, prem, concl in rules:
            if concl in proofs:
                continue
            if all(p in proofs for p in prem):
                proofs[concl] = Derivation(concl, name, (), tuple(proofs[p] for p in prem))
                changed = True
    return proofs


# -- unification ---------------------------------------------------------------

def _walk(t, s):
    while isinstance(t, Var) and t.name in s:
        t = s[t.name]
    return t


def _resolve(t, s):
    t = _walk(t, s)
    if isinstance(t, Succ):
        return Succ(_resolve(t.arg, s))
    if isinstance(t, Add):
        return Add(_resolve(t.left, s), _resolve(t.right, s))
    if isinstance(t, Mul):
        return Mul(_resolve(t.left, s), _resolve(t.right, s))
    return t


def _resolve_atom(a, s):
    if isinstance(a, Atom):
        return Atom(_resolve(a.lhs, s), _resolve(a.rhs, s))
    return a


def _occurs(name, t, s):
    t = _walk(t, s)
    if isinstance(t, Var):
        return t.name == name
    if isinstance(t, Succ):
        return _occurs(name, t.arg, s)
    if isinstance(t, (Add, Mul)):
        return _occurs(name, t.left, s) or _occurs(name, t.right, s)
    return False


def _unify(a, b, s):
    a, b = _walk(a, s), _walk(b, s)
    if a == b:
        return s
    if isinstance(a, Var):
        if _occurs(a.name, b, s):
            return None
        return {**s, a.name: b}
    if isinstance(b, Var):
        return _unify(b, a, s)
    if type(a) is not type(b):
        return None
    if isinstance(a, Succ):
        return _unify(a.arg, b.arg, s)
    if isinstance(a, (Add, Mul)):
        s = _unify(a.left, b.left, s)
        return None if s is None else _unify(a.right, b.right, s)
    return None


def _unify_atom(a, b, s):
    if isinstance(a, Atom) and isinstance(b, Atom):
        s = _unify(a.lhs, b.lhs, s)
        return None if s is None else _unify(a.rhs, b.rhs, s)
    return s if a == b else None


def _canonical(a) -> tuple:
    """Variant key: variables renamed by order of first occurrence."""
    names: dict[str, int] = {}

    def walk(t):
        if isinstance(t, Var):
            return ("v", names.setdefault(t.name, len(names)))
        if isinstance(t, Succ):
            return ("S", walk(t.arg))
        if isinstance(t, Add):
            return ("+", walk(t.left), walk(t.right))
        if isinstance(t, Mul):
            return ("*", walk(t.left), walk(t.right))
        return t

    if isinstance(a, Atom):
        return (walk(a.lhs), walk(a.rhs))
    return (a,)


def _atom_closed(a) -> bool:
    return isinstance(a, Prop) or is_closed(a)


# -- backward search -----------------------------------------------------------

class _OutOfNodes(Exception):
    pass


@dataclass
class _Proof:
    goal: object
    rule: str | None
    renaming: dict = field(default_factory=dict)
    children: list = field(default_factory=list)


class _Search:
    def __init__(self, base: Base, premises, budget: Budget, prune: bool):
        self.base = base
        self.premises = list(premises)
        self.budget = budget
        self.prune = prune
        # fewer premises first; eq3's free middle term makes it the most expensive
        self.schemas = sorted(base.schemas, key=lambda sc: len(sc.premises))
        self.nodes = 0
        self.cutoff = False
        self.fresh = itertools.count()
        self.memo: dict = {}

    def rename(self, schema):
        renaming = {v: Var(f"_{next(self.fresh)}") for v in schema.metavars}
        prem = [instantiate_atom(p, renaming) for p in schema.premises]
        concl = ANY if schema.conclusion is ANY else instantiate_atom(schema.conclusion, renaming)
        return renaming, prem, concl

    def consistent(self, goals, s) -> bool:
        if not self.prune:
            return True
        cons = [imbalance(_resolve_atom(g, s)) for g in goals if isinstance(g, Atom)]
        return feasible(cons)

    def prove(self, goal, depth, ancestors, s, root=False) -> Iterator:
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise _OutOfNodes
        g = _resolve_atom(goal, s)
        key = _canonical(g)
        if key in ancestors:
            return
        ground = _atom_closed(g)
        if ground and g in self.memo:
            yield s, self.memo[g]
            return
        if not root and not self.consistent([g], s):
            return
        for p in self.premises:
            s2 = _unify_atom(g, p, s)
            if s2 is not None:
                yield s2, _Proof(goal, None)
                if ground:
                    return
        if depth == 0:
            self.cutoff = True
            return
        below = ancestors | {key}
        for schema in self.schemas:
            renaming, prem, concl = self.rename(schema)
            s2 = s if concl is ANY else _unify_atom(g, concl, s)
            if s2 is None:
                continue
            for s3, kids in self.prove_all(prem, depth - 1, below, s2):
                proof = _Proof(goal, schema.name, renaming, kids)
                if ground:
                    self.memo[g] = _freeze(proof, s3)
                yield s3, proof
                if ground:
                    return

    def prove_all(self, goals, depth, ancestors, s) -> Iterator:
        if not goals:
            yield s, []
            return
        if len(goals) > 1 and not self.consistent(goals, s):
            return
        first, rest = goals[0], goals[1:]
        for s2, p in self.prove(first, depth, ancestors, s):
            for s3, ps in self.prove_all(rest, depth, ancestors, s2):
                yield s3, [p] + ps


def _freeze(proof, s) -> "_Proof":
    if isinstance(proof, Derivation):
        return proof
    return _Proof(_resolve_atom(proof.goal, s), proof.rule,
                  {k: _resolve(v, s) for k, v in proof.renaming.items()},
                  [_freeze(c, s) for c in proof.children])


def _ground_term(t):
    if isinstance(t, Var):
        return ZERO
    if isinstance(t, Succ):
        return Succ(_ground_term(t.arg))
    if isinstance(t, Add):
        return Add(_ground_term(t.left), _ground_term(t.right))
    if isinstance(t, Mul):
        return Mul(_ground_term(t.left), _ground_term(t.right))
    return t


def _to_derivation(proof, s) -> Derivation:
    atom = _resolve_atom(proof.goal, s)
    if isinstance(atom, Atom):
        atom = Atom(_ground_term(atom.lhs), _ground_term(atom.rhs))
    if proof.rule is None:
        return Derivation(atom)
    subst = tuple(sorted((k, _ground_term(_resolve(v, s))) for k, v in proof.renaming.items()))
    return Derivation(atom, proof.rule, subst, tuple(_to_derivation(c, s) for c in proof.children))


def derive(base: Base, premises: Iterable, goal, budget: Budget | None = None, *,
           max_depth: int | None = None, max_nodes: int | None = None):
    """Search for a derivation of ``goal`` from ``premises`` in ``base``.

    Returns :class:`Derivable` with a checked certificate, :class:`NotDerivable`
    with the evidence for the negative answer, or :class:`Unknown` once the
    budget is spent without a decision.
    """
    budget = budget or Budget()
    if max_depth is not None or max_nodes is not None:
        budget = Budget(max_depth or budget.max_depth, max_nodes or budget.max_nodes)
    premises = sorted(set(premises), key=render)
    if not _atom_closed(goal):
        raise ValueError("goal must be a closed atom")
    if base.is_ground:
        proofs = forward_closure(base, premises)
        if goal in proofs:
            d = proofs[goal]
            return Derivable(d, len(proofs))
        return NotDerivable({"reason": "fixpoint", "derived": len(proofs)})

    prune = (weight_sound(base) and all(balanced(p) for p in premises))
    search = _Search(base, premises, budget, prune)
    for depth in range(1, budget.max_depth + 1):
        search.cutoff = False
        try:
            for s, proof in search.prove(goal, depth, frozenset(), {}, root=True):
                d = _to_derivation(proof, s)
                if not check_derivation(base, d, premises):
                    raise AssertionError(f"search produced an invalid certificate for {render(goal)}")
                return Derivable(d, search.nodes)
        except _OutOfNodes:
            return Unknown({"max_depth": budget.max_depth, "max_nodes": budget.max_nodes,
                            "depth_reached": depth, "nodes": search.nodes,
                            "reason": "node budget spent"})
        if not search.cutoff:
            break

    refuted = prune and isinstance(goal, Atom) and not balanced(goal)
    evidence = {"depth_reached": depth, "nodes": search.nodes, "weight_pruning": prune,
                "max_depth": budget.max_depth}
    if refuted:
        from .weight import weights
        evidence.update(reason="search exhausted; goal weight-refuted",
                        weights=list(weights(goal)))
        return NotDerivable(evidence)
    evidence["reason"] = ("search space exhausted" if not search.cutoff
                          else "depth bound reached")
    return Unknown(evidence)

"""Classical natural deduction for the {->, forall, bot} fragment.

Proof trees are checked node by node.  Each node names its rule and the
formula it concludes; assumptions carry a label that an ``impl_intro`` or
``raa`` node below may discharge.  The soundness harness replays every checked
corpus proof against the exact toy semantics in every base of small
universes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

import numpy as np

from .syntax import (
    BOT, Bot, Forall, Formula, Impl, Prop, Term, Var, formula_atoms,
    free_vars, parse_formula, parse_term, render, substitute,
)

RULES = ("assume", "impl_intro", "impl_elim", "forall_intro", "forall_elim", "bot_elim", "raa")


class NDError(ValueError):
    def __init__(self, path: tuple, rule: str, reason: str):
        self.path = tuple(path)
        self.rule = rule
        self.reason = reason
        where = "/".join(map(str, self.path)) or "root"
        super().__init__(f"at {where} ({rule}): {reason}")


@dataclass(frozen=True)
class NDProof:
    rule: str
    formula: Formula
    children: tuple["NDProof", ...] = ()
    label: str | None = None
    term: Term | None = None  # witness of forall_elim
    var: str | None = None    # eigenvariable of forall_intro

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()


@dataclass(frozen=True)
class Sequent:
    assumptions: tuple[Formula, ...]
    conclusion: Formula

    def __str__(self):
        left = ", ".join(render(a) for a in self.assumptions)
        return f"{left} |- {render(self.conclusion)}".strip()


def _fv(f) -> frozenset:
    return free_vars(f)


def _open(p: NDProof, path: tuple) -> list[tuple[str, Formula]]:
    """Check p and return its open assumptions as (label, formula) pairs."""
    arity = {"assume": 0, "impl_intro": 1, "impl_elim": 2, "forall_intro": 1,
             "forall_elim": 1, "bot_elim": 1, "raa": 1}
    if p.rule not in arity:
        raise NDError(path, p.rule, "unknown rule")
    if len(p.children) != arity[p.rule]:
        raise NDError(path, p.rule, f"expected {arity[p.rule]} premises, got {len(p.children)}")
    kids = [_open(c, path + (i,)) for i, c in enumerate(p.children)]
    prem = [c.formula for c in p.children]
    f = p.formula

    if p.rule == "assume":
        if not p.label:
            raise NDError(path, p.rule, "assumption needs a label")
        return [(p.label, f)]

    if p.rule == "impl_intro":
        if not isinstance(f, Impl):
            raise NDError(path, p.rule, "conclusion is not an implication")
        if prem[0] != f.cons:
            raise NDError(path, p.rule, "premise is not the consequent")
        return _discharge(kids[0], p.label, f.ante, path, p.rule)

    if p.rule == "raa":
        if prem[0] != BOT:
            raise NDError(path, p.rule, "premise is not bot")
        return _discharge(kids[0], p.label, Impl(f, BOT), path, p.rule)

    if p.rule == "impl_elim":
        major, minor = prem
        if major != Impl(minor, f):
            raise NDError(path, p.rule, "major premise is not minor -> conclusion")
        return kids[0] + kids[1]

    if p.rule == "bot_elim":
        if prem[0] != BOT:
            raise NDError(path, p.rule, "premise is not bot")
        return kids[0]

    if p.rule == "forall_elim":
        if p.term is None:
            raise NDError(path, p.rule, "missing witness term")
        if not isinstance(prem[0], Forall):
            raise NDError(path, p.rule, "premise is not universally quantified")
        try:
            inst = substitute(prem[0].body, prem[0].var, p.term)
        except ValueError as exc:
            raise NDError(path, p.rule, str(exc)) from None
        if inst != f:
            raise NDError(path, p.rule, "conclusion is not the stated instance")
        return kids[0]

    # forall_intro
    if not isinstance(f, Forall):
        raise NDError(path, p.rule, "conclusion is not universally quantified")
    y = p.var or f.var
    try:
        expected = substitute(f.body, f.var, Var(y))
    except ValueError as exc:
        raise NDError(path, p.rule, str(exc)) from None
    if prem[0] != expected:
        raise NDError(path, p.rule, f"premise is not the body at eigenvariable {y}")
    if any(y in _fv(a) for _, a in kids[0]):
        raise NDError(path, p.rule, f"eigenvariable {y} is free in an open assumption")
    if y != f.var and y in _fv(f):
        raise NDError(path, p.rule, f"eigenvariable {y} is free in the conclusion")
    return kids[0]


def _discharge(open_: list, label, formula, path, rule) -> list:
    if not label:
        raise NDError(path, rule, "discharge needs a label")
    out = []
    for lab, a in open_:
        if lab == label:
            if a != formula:
                raise NDError(path, rule, f"label {label} marks {render(a)}, expected {render(formula)}")
        else:
            out.append((lab, a))
    return out


def verify_nd(p: NDProof, s: Sequent) -> None:
    """Raise :class:`NDError` at the first invalid node."""
    opened = _open(p, ())
    if p.formula != s.conclusion:
        raise NDError((), p.rule, f"proof concludes {render(p.formula)}, not {render(s.conclusion)}")
    allowed = set(s.assumptions)
    for label, a in opened:
        if a not in allowed:
            raise NDError((), p.rule, f"open assumption {label}: {render(a)} is not in the sequent")


def check_nd(p: NDProof, s: Sequent) -> bool:
    try:
        verify_nd(p, s)
    except NDError:
        return False
    return True


# -- JSON ------------------------------------------------------------------------

def nd_to_json(p: NDProof) -> dict:
    out = {"rule": p.rule, "formula": render(p.formula),
           "children": [nd_to_json(c) for c in p.children]}
    if p.label is not None:
        out["label"] = p.label
    if p.term is not None:
        out["term"] = render(p.term)
    if p.var is not None:
        out["var"] = p.var
    return out


def nd_from_json(obj: dict) -> NDProof:
    try:
        term = obj.get("term")
        return NDProof(obj["rule"], parse_formula(obj["formula"]),
                       tuple(nd_from_json(c) for c in obj.get("children", [])),
                       obj.get("label"),
                       parse_term(term) if term is not None else None,
                       obj.get("var"))
    except KeyError as exc:
        raise ValueError(f"proof node is missing field {exc}") from None


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    sequent: Sequent
    proof: NDProof

    def to_json(self) -> dict:
        return {"name": self.name,
                "assumptions": [render(a) for a in self.sequent.assumptions],
                "conclusion": render(self.sequent.conclusion),
                "proof": nd_to_json(self.proof)}

    @classmethod
    def from_json(cls, obj: dict) -> "CorpusEntry":
        seq = Sequent(tuple(parse_formula(a) for a in obj.get("assumptions", [])),
                      parse_formula(obj["conclusion"]))
        return cls(obj["name"], seq, nd_from_json(obj["proof"]))


def load_corpus() -> list[CorpusEntry]:
    """The golden corpus shipped in ``ptsarith/corpus``, sorted by file name."""
    root = resources.files("ptsarith") / "corpus"
    entries = []
    for item in sorted(root.iterdir(), key=lambda x: x.name):
        if item.name.endswith(".json"):
            entries.append(CorpusEntry.from_json(json.loads(item.read_text())))
    return entries


# -- soundness harness -----------------------------------------------------------------

def _propositional(f: Formula) -> bool:
    if isinstance(f, (Prop, Bot)):
        return True
    if isinstance(f, Impl):
        return _propositional(f.ante) and _propositional(f.cons)
    return False


@dataclass
class HarnessRow:
    entry: str
    universe: tuple
    status: str  # "verified", "violated", "not applicable", "invalid proof", "arith"
    bases: int = 0
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"entry": self.entry, "universe": list(self.universe), "status": self.status,
                "bases": self.bases, "detail": self.detail}


def soundness_harness(corpus: Iterable[CorpusEntry], universes: Iterable,
                      arith_bounds=None) -> list[HarnessRow]:
    """Check each corpus proof, then its sequent in every base of every universe.

    Propositional entries are evaluated exactly by the toy semantics.  First-order
    entries are checked over A_PLUS with bounded support, tagged ``arith``.
    """
    from .support import Bounds, arith_support
    from .toy import ToyUniverse

    corpus = list(corpus)
    universes = [u if isinstance(u, ToyUniverse) else ToyUniverse(tuple(u)) for u in universes]
    rows = []
    for e in corpus:
        seq = e.sequent
        try:
            verify_nd(e.proof, seq)
        except NDError as exc:
            rows.append(HarnessRow(e.name, (), "invalid proof", detail={"error": str(exc)}))
            continue
        formulas = list(seq.assumptions) + [seq.conclusion]
        if not all(_propositional(f) for f in formulas):
            target = seq.conclusion
            for a in reversed(seq.assumptions):
                target = Impl(a, target)
            bounds = arith_bounds or Bounds(term_size=4, numeral_range=5)
            v = arith_support("A_PLUS", target, bounds)
            status = {"Verified": "arith", "Refuted": "violated"}.get(v.status, "unknown")
            rows.append(HarnessRow(e.name, ("A_PLUS",), status,
                                   detail={"verdict": v.status,
                                           "bound": {"term_size": bounds.term_size,
                                                     "numeral_range": bounds.numeral_range}}))
            continue
        atoms = set().union(*(formula_atoms(f) for f in formulas))
        for u in universes:
            if not atoms <= set(u.atoms):
                rows.append(HarnessRow(e.name, u.atoms, "not applicable"))
                continue
            if seq.assumptions:
                ok = u.entails_table(seq.assumptions, seq.conclusion)
            else:
                ok = u.table(seq.conclusion)
            bad = np.flatnonzero(~ok)
            if bad.size:
                rows.append(HarnessRow(e.name, u.atoms, "violated", u.n_bases,
                                       {"first_base_mask": int(bad[0]), "failures": int(bad.size)}))
            else:
                rows.append(HarnessRow(e.name, u.atoms, "verified", u.n_bases))
    return rows

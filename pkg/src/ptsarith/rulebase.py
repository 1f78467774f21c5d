"""Atomic rule schemas, the built-in arithmetic bases and derivation certificates.

A base is stored as a finite list of schemas; the closed rule instances it
stands for are produced on demand by :func:`instantiate`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .syntax import (
    BASE_SIGNATURE, Add, Atom, Const, Mul, ParseError, Prop, Signature, Succ,
    Term, Var, Zero, constants_in, is_closed, parse_atom, render,
    term_vars,
)

__all__ = [
    "ANY", "RuleSchema", "Base", "Derivation", "DerivationError",
    "builtin_base", "instantiate", "check_derivation", "verify_derivation",
    "parse_rules", "format_rules", "load_rules", "apply_subst",
    "derivation_to_json", "derivation_from_json", "dumps_derivation",
    "loads_derivation", "atom_from_text", "is_equation", "rule_node", "open_leaf",
    "random_forward_derivations", "match_atom", "instantiate_atom", "base_kind",
]


class _AnyAtom:
    """Wildcard conclusion standing for every closed atom."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ANY"

    def __reduce__(self):
        return (_AnyAtom, ())


ANY = _AnyAtom()

AtomLike = Union[Atom, Prop]


def is_equation(a) -> bool:
    return isinstance(a, Atom)


def atom_vars(a) -> frozenset[str]:
    if isinstance(a, Atom):
        return term_vars(a.lhs) | term_vars(a.rhs)
    return frozenset()


def _simultaneous(t: Term, subst: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return subst.get(t.name, t)
    if isinstance(t, Succ):
        return Succ(_simultaneous(t.arg, subst))
    if isinstance(t, Add):
        return Add(_simultaneous(t.left, subst), _simultaneous(t.right, subst))
    if isinstance(t, Mul):
        return Mul(_simultaneous(t.left, subst), _simultaneous(t.right, subst))
    return t


def instantiate_atom(a, subst: Mapping[str, Term]):
    """Instantiate the metavariables of an atom pattern simultaneously."""
    if isinstance(a, Atom):
        return Atom(_simultaneous(a.lhs, subst), _simultaneous(a.rhs, subst))
    return a


apply_subst = instantiate_atom


@dataclass(frozen=True)
class RuleSchema:
    """An atomic inference figure whose terms may contain metavariables."""

    name: str
    premises: tuple = ()
    conclusion: object = ANY
    declared: tuple[str, ...] = ()

    def __post_init__(self):
        if any(p is ANY for p in self.premises):
            raise ValueError(f"{self.name}: ANY is only legal as a conclusion")
        if self.conclusion is not ANY:
            loose = atom_vars(self.conclusion) - self.premise_vars - set(self.declared)
            if loose and self.premises:
                raise ValueError(
                    f"{self.name}: conclusion metavariables {sorted(loose)} "
                    "occur in no premise")

    @property
    def premise_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for p in self.premises:
            out |= atom_vars(p)
        return out

    @property
    def metavars(self) -> tuple[str, ...]:
        names = set(self.premise_vars) | set(self.declared)
        if self.conclusion is not ANY:
            names |= atom_vars(self.conclusion)
        return tuple(sorted(names))

    def __str__(self):
        prem = ", ".join(_pattern_text(p) for p in self.premises)
        concl = "ANY" if self.conclusion is ANY else _pattern_text(self.conclusion)
        return f"{self.name}: {prem + ' ' if prem else ''}|- {concl}"


def _pattern_text(a) -> str:
    text = render(a)
    if isinstance(a, Atom):
        for name in sorted(atom_vars(a), key=len, reverse=True):
            text = re.sub(rf"(?<![A-Za-z0-9_?]){re.escape(name)}(?![A-Za-z0-9_])",
                          "?" + name, text)
    return text


@dataclass(frozen=True)
class Base:
    name: str
    signature: Signature
    schemas: tuple[RuleSchema, ...]

    def __post_init__(self):
        names = [s.name for s in self.schemas]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ValueError(f"duplicate schema names in base {self.name}: {sorted(dupes)}")

    def schema(self, name: str) -> RuleSchema:
        for s in self.schemas:
            if s.name == name:
                return s
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(s.name == name for s in self.schemas)

    @property
    def is_ground(self) -> bool:
        """True when no schema has metavariables (toy bases)."""
        return all(not s.metavars and s.conclusion is not ANY for s in self.schemas)

    def extend(self, schemas: Iterable[RuleSchema], name: str | None = None,
               signature: Signature | None = None) -> "Base":
        return Base(name or self.name, signature or self.signature,
                    self.schemas + tuple(schemas))


# -- built-in bases ----------------------------------------------------------

_x, _y, _z = Var("x"), Var("y"), Var("z")


def _eq(a, b):
    return Atom(a, b)


EQ_SCHEMAS = (
    RuleSchema("eq1", (), _eq(_x, _x)),
    RuleSchema("eq2", (_eq(_y, _x),), _eq(_x, _y)),
    RuleSchema("eq3", (_eq(_x, _y), _eq(_y, _z)), _eq(_x, _z)),
)

PA_SCHEMAS = (
    RuleSchema("pa1", (_eq(Succ(_x), Zero()),), ANY),
    RuleSchema("pa2", (_eq(Succ(_x), Succ(_y)),), _eq(_x, _y)),
    RuleSchema("pa3", (), _eq(Add(_x, Zero()), _x)),
    RuleSchema("pa4", (), _eq(Add(_x, Succ(_y)), Succ(Add(_x, _y)))),
    RuleSchema("pa5", (), _eq(Mul(_x, Zero()), Zero())),
    RuleSchema("pa6", (), _eq(Mul(_x, Succ(_y)), Add(Mul(_x, _y), _x))),
)

CONGRUENCE_SCHEMAS = (
    RuleSchema("cg1", (_eq(_x, _y),), _eq(Succ(_x), Succ(_y))),
    RuleSchema("cg2", (_eq(_x, _y),), _eq(Add(_x, _z), Add(_y, _z)), ("z",)),
    RuleSchema("cg3", (_eq(_x, _y),), _eq(Add(_z, _x), Add(_z, _y)), ("z",)),
    RuleSchema("cg4", (_eq(_x, _y),), _eq(Mul(_x, _z), Mul(_y, _z)), ("z",)),
    RuleSchema("cg5", (_eq(_x, _y),), _eq(Mul(_z, _x), Mul(_z, _y)), ("z",)),
)

BUILTIN_NAMES = ("EQ", "A", "A_PLUS", "A_EXT")


def const_rule(i: int) -> RuleSchema:
    return RuleSchema(f"zc{i}", (), _eq(Zero(), Const(i)))


def builtin_base(which: str, k: int = 0) -> Base:
    """Return one of the built-in bases ``EQ``, ``A``, ``A_PLUS`` or ``A_EXT``.

    ``A`` is the arithmetic base exactly as drawn (pa1-pa6, eq1-eq3).
    ``A_PLUS`` adds the congruence schemas cg1-cg5.  ``A_EXT`` is ``A_PLUS``
    over the signature with constants c1..ck and the axioms ``0=ci`` (named
    ``zc<i>``).
    """
    which = which.upper().replace("-", "_")
    if which == "EQ":
        return Base("EQ", BASE_SIGNATURE, EQ_SCHEMAS)
    if which == "A":
        return Base("A", BASE_SIGNATURE, PA_SCHEMAS + EQ_SCHEMAS)
    if which == "A_PLUS":
        return Base("A_PLUS", BASE_SIGNATURE, PA_SCHEMAS + EQ_SCHEMAS + CONGRUENCE_SCHEMAS)
    if which == "A_EXT":
        if k < 0:
            raise ValueError("A_EXT needs a non-negative number of constants")
        return Base(f"A_EXT({k})", Signature(k),
                    PA_SCHEMAS + EQ_SCHEMAS + CONGRUENCE_SCHEMAS
                    + tuple(const_rule(i) for i in range(1, k + 1)))
    raise ValueError(f"unknown built-in base {which!r}; expected one of {BUILTIN_NAMES}")


def base_kind(base: Base) -> str | None:
    """Name of the built-in family a base belongs to, or None for file bases."""
    if base.name in ("EQ", "A", "A_PLUS"):
        return base.name
    if base.name.startswith("A_EXT("):
        return "A_EXT"
    return None


# -- instances -------------------------------------------------------------

def instantiate(schema: RuleSchema, subst: Mapping[str, Term], conclusion_choice=None):
    """Return the closed instance ``(premises, conclusion)`` of a schema."""
    missing = [v for v in schema.metavars if v not in subst]
    if missing:
        raise ValueError(f"{schema.name}: no binding for metavariable(s) {missing}")
    for v in schema.metavars:
        if not is_closed(subst[v]):
            raise ValueError(f"{schema.name}: binding for {v} is not closed")
    if schema.conclusion is ANY:
        if conclusion_choice is None:
            raise ValueError(f"{schema.name} concludes ANY; a conclusion must be chosen")
        if not _closed_atom(conclusion_choice):
            raise ValueError(f"{schema.name}: chosen conclusion is not a closed atom")
        conclusion = conclusion_choice
    else:
        if conclusion_choice is not None:
            raise ValueError(f"{schema.name} has a fixed conclusion; none may be chosen")
        conclusion = instantiate_atom(schema.conclusion, subst)
    premises = [instantiate_atom(p, subst) for p in schema.premises]
    return premises, conclusion


def _closed_atom(a) -> bool:
    return isinstance(a, Prop) or (isinstance(a, Atom) and is_closed(a))


# -- derivations -----------------------------------------------------------

@dataclass(frozen=True)
class Derivation:
    """A derivation tree.  ``rule`` is None for an open (assumed) leaf."""

    atom: object
    rule: str | None = None
    subst: tuple[tuple[str, Term], ...] = ()
    children: tuple["Derivation", ...] = ()

    @property
    def is_open(self) -> bool:
        return self.rule is None

    @property
    def subst_map(self) -> dict[str, Term]:
        return dict(self.subst)

    def nodes(self):
        stack = [self]
        while stack:
            d = stack.pop()
            yield d
            stack.extend(reversed(d.children))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def rules_used(self) -> set[str]:
        return {d.rule for d in self.nodes() if d.rule is not None}

    def open_leaves(self) -> set:
        return {d.atom for d in self.nodes() if d.is_open}


def rule_node(atom, rule: str, subst: Mapping[str, Term] | None = None,
              children: Iterable[Derivation] = ()) -> Derivation:
    return Derivation(atom, rule, tuple(sorted((subst or {}).items())), tuple(children))


def open_leaf(atom) -> Derivation:
    return Derivation(atom)


class DerivationError(ValueError):
    def __init__(self, path: tuple[int, ...], rule: str | None, reason: str):
        self.path = path
        self.rule = rule
        self.reason = reason
        where = "/".join(map(str, path)) or "root"
        super().__init__(f"node {where} ({rule or 'open leaf'}): {reason}")


def _atom_in_signature(a, sig: Signature) -> bool:
    if isinstance(a, Prop):
        return True
    return all(sig.has_constant(i) for i in constants_in(a.lhs) | constants_in(a.rhs))


def verify_derivation(base: Base, d: Derivation, open_allowed: Iterable = ()) -> None:
    """Raise :class:`DerivationError` at the first faulty node (preorder)."""
    allowed = set(open_allowed)
    stack = [((), d)]
    while stack:
        path, node = stack.pop()
        if not _closed_atom(node.atom):
            raise DerivationError(path, node.rule, f"{node.atom!r} is not a closed atom")
        if not _atom_in_signature(node.atom, base.signature):
            raise DerivationError(path, node.rule, "atom uses a constant outside the signature")
        if node.is_open:
            if node.children:
                raise DerivationError(path, None, "open leaf has children")
            if node.atom not in allowed:
                raise DerivationError(path, None, f"open premise {render(node.atom)} not allowed")
            continue
        if node.rule not in base:
            raise DerivationError(path, node.rule, f"rule not in base {base.name}")
        schema = base.schema(node.rule)
        subst = node.subst_map
        extra = set(subst) - set(schema.metavars)
        if extra:
            raise DerivationError(path, node.rule, f"substitution binds unknown {sorted(extra)}")
        for t in subst.values():
            if not _atom_in_signature(Atom(t, t), base.signature):
                raise DerivationError(path, node.rule, "substitution leaves the signature")
        try:
            premises, conclusion = instantiate(
                schema, subst, node.atom if schema.conclusion is ANY else None)
        except ValueError as exc:
            raise DerivationError(path, node.rule, str(exc)) from None
        if conclusion != node.atom:
            raise DerivationError(path, node.rule,
                                  f"instance concludes {render(conclusion)}, "
                                  f"node says {render(node.atom)}")
        got = [c.atom for c in node.children]
        if got != premises:
            raise DerivationError(path, node.rule,
                                  "children do not match the instance premises "
                                  f"[{', '.join(render(p) for p in premises)}]")
        for i in reversed(range(len(node.children))):
            stack.append((path + (i,), node.children[i]))


def check_derivation(base: Base, d: Derivation, open_allowed: Iterable = ()) -> bool:
    try:
        verify_derivation(base, d, open_allowed)
    except DerivationError:
        return False
    return True


# -- JSON certificates -------------------------------------------------------

def atom_from_text(text: str, sig: Signature = BASE_SIGNATURE):
    a = parse_atom(text, sig)
    return a


def derivation_to_json(d: Derivation) -> dict:
    return {
        "atom": render(d.atom),
        "rule": d.rule,
        "subst": {k: render(v) for k, v in d.subst},
        "children": [derivation_to_json(c) for c in d.children],
    }


def derivation_from_json(obj: Mapping, sig: Signature = BASE_SIGNATURE) -> Derivation:
    from .syntax import parse_term
    try:
        atom = parse_atom(obj["atom"], sig)
        subst = tuple(sorted((k, parse_term(v, sig)) for k, v in obj.get("subst", {}).items()))
        children = tuple(derivation_from_json(c, sig) for c in obj.get("children", []))
        rule = obj.get("rule")
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed derivation JSON: {exc}") from None
    return Derivation(atom, rule, subst, children)


def dumps_derivation(d: Derivation, **kw) -> str:
    return json.dumps(derivation_to_json(d), **kw)


def loads_derivation(text: str, sig: Signature = BASE_SIGNATURE) -> Derivation:
    return derivation_from_json(json.loads(text), sig)


# -- rule files --------------------------------------------------------------

_RULE_LINE = re.compile(r"^\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*:\s*(?P<body>.*)$")


def _split_premises(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_rules(text: str, name: str = "file", signature: Signature | None = None) -> Base:
    """Parse the line-oriented rule format ``name: P1, P2 |- C``.

    Metavariables are written ``?x``; ``ANY`` as a conclusion stands for every
    closed atom.  Blank lines and ``#`` comments are ignored.  Without an
    explicit signature, one is inferred from the constants mentioned.
    """
    entries = []
    max_const = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _RULE_LINE.match(line)
        if not m or "|-" not in m.group("body"):
            raise ParseError(f"line {lineno}: expected 'name: premises |- conclusion'", 0, raw)
        prem_text, concl_text = m.group("body").split("|-", 1)
        entries.append((lineno, m.group("name"), _split_premises(prem_text), concl_text.strip()))
        max_const = max([max_const] + [int(c) for c in re.findall(r"\bc(\d+)\b", line)])
    sig = signature or Signature(max_const)
    schemas = []
    for lineno, rname, prems, concl in entries:
        try:
            premises = tuple(parse_atom(p, sig, metavars=True) for p in prems)
            if concl == "ANY":
                conclusion = ANY
            else:
                conclusion = parse_atom(concl, sig, metavars=True)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}", exc.pos, exc.text) from None
        declared = ()
        if conclusion is not ANY and not premises:
            declared = tuple(sorted(atom_vars(conclusion)))
        elif conclusion is not ANY:
            declared = tuple(sorted(atom_vars(conclusion) - set().union(
                *(atom_vars(p) for p in premises))))
        schemas.append(RuleSchema(rname, premises, conclusion, declared))
    return Base(name, sig, tuple(schemas))


def format_rules(base: Base) -> str:
    return "".join(str(s) + "\n" for s in base.schemas)


def load_rules(path: str, signature: Signature | None = None) -> Base:
    from pathlib import Path
    p = Path(path)
    return parse_rules(p.read_text(), name=p.stem, signature=signature)


# -- random forward derivations ------------------------------------------------

def _match(pattern: Term, t: Term, s: dict) -> dict | None:
    if isinstance(pattern, Var):
        bound = s.get(pattern.name)
        if bound is None:
            return {**s, pattern.name: t}
        return s if bound == t else None
    if type(pattern) is not type(t):
        return None
    if isinstance(pattern, Succ):
        return _match(pattern.arg, t.arg, s)
    if isinstance(pattern, (Add, Mul)):
        s = _match(pattern.left, t.left, s)
        return None if s is None else _match(pattern.right, t.right, s)
    return s if pattern == t else None


def match_atom(pattern, a, s: dict) -> dict | None:
    if isinstance(pattern, Atom) and isinstance(a, Atom):
        s = _match(pattern.lhs, a.lhs, s)
        return None if s is None else _match(pattern.rhs, a.rhs, s)
    return s if pattern == a else None


def random_forward_derivations(base: Base, count: int, steps: int, seed: int = 0,
                               pool_size: int = 4) -> list[Derivation]:
    """Grow ``count`` closed derivations by ``steps`` random rule firings each.

    Every run starts from nothing, so the first firing is always a
    zero-premise rule.  Premises are matched against atoms derived earlier in
    the same run; metavariables left unbound draw from the closed terms of at
    most ``pool_size`` nodes.  The last derivation of each run is returned.
    """
    import random
    from .syntax import closed_terms_upto

    if count < 1 or steps < 1:
        raise ValueError("count and steps must be at least 1")
    rng = random.Random(seed)
    pool = list(closed_terms_upto(base.signature, pool_size))
    axioms = [s for s in base.schemas if not s.premises and s.conclusion is not ANY]
    inferences = [s for s in base.schemas if s.premises]
    if not axioms:
        raise ValueError(f"base {base.name} has no zero-premise rules to start a derivation")
    out = []
    for _ in range(count):
        derived: list[Derivation] = []
        for _step in range(steps):
            d = None
            if derived and inferences and rng.random() < 0.7:
                d = _fire_inference(rng, rng.choice(inferences), derived, pool)
            if d is None:
                schema = rng.choice(axioms)
                subst = {v: rng.choice(pool) for v in schema.metavars}
                _, concl = instantiate(schema, subst)
                d = rule_node(concl, schema.name, subst)
            derived.append(d)
        out.append(derived[-1])
    return out


def _fire_inference(rng, schema: RuleSchema, derived: list[Derivation], pool) -> Derivation | None:
    s: dict = {}
    kids = []
    for prem in schema.premises:
        candidates = [d for d in derived if match_atom(prem, d.atom, s) is not None]
        if not candidates:
            return None
        pick = rng.choice(candidates)
        s = match_atom(prem, pick.atom, s)
        kids.append(pick)
    for v in schema.metavars:
        if v not in s:
            s[v] = rng.choice(pool)
    choice = None
    if schema.conclusion is ANY:
        choice = Atom(rng.choice(pool), rng.choice(pool))
    _, concl = instantiate(schema, s, choice)
    return rule_node(concl, schema.name, s, kids)

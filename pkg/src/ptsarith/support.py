"""The support judgment.

Over toy universes it is decided exactly.  Over the arithmetic bases it is
evaluated to a bound and answers in three values: the universal clause is
checked on the closed terms up to a size bound (plus numerals up to a range),
implications are verified by deriving the consequent with the antecedents as
open premises, and bot is refuted by the weight witness.

Also here: the numerical-definiteness sweep and the executable versions of the
omega-completeness and induction arguments.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .arith import (
    Disproved, Proved, congruence_proof, decide_equation, decide_in_verbatim_base,
    normalize_to_numeral, refute_bot, resolve_variant,
)
from .rulebase import Base, Derivation, base_kind, check_derivation, derivation_to_json
from .search import Budget, derive
from .syntax import (
    ZERO, Add, Atom, Bot, Forall, Formula, Impl, Mul, Prop, Succ, Term, Var,
    closed_terms_upto, free_vars, is_closed, numeral, parse_formula, render,
    substitute,
)
from .toy import ToyFragmentError, ToyUniverse, _down_closure
from .weight import balanced, weight, weight_sound

DEFAULT_TERM_SIZE = 7
DEFAULT_N_MAX = 25


@dataclass(frozen=True)
class Verified:
    evidence: dict = field(default_factory=dict)
    status = "Verified"


@dataclass(frozen=True)
class Refuted:
    counterexample: dict = field(default_factory=dict)
    base: Base | None = None
    status = "Refuted"


@dataclass(frozen=True)
class Unknown:
    budget: dict = field(default_factory=dict)
    status = "Unknown"


def cert_ref(d: Derivation) -> str:
    blob = json.dumps(derivation_to_json(d), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- toy universes -------------------------------------------------------------

def _superset_witness(u: ToyUniverse, bad: np.ndarray, mask: int) -> int | None:
    idx = np.flatnonzero(bad)
    hits = idx[(idx & mask) == mask]
    if hits.size == 0:
        return None
    # prefer the smallest extension
    counts = np.array([bin(int(i)).count("1") for i in hits[:4096]])
    return int(hits[:4096][int(np.argmin(counts))])


def toy_support(u: ToyUniverse, b, f: Formula):
    """Decide support of f in base b exactly (extensions within the universe)."""
    u.check_formula(f)
    mask = u.mask_of(b)
    extensions = 1 << (u.n_rules - bin(mask).count("1"))
    if u.table(f)[mask]:
        return Verified({"extensions_checked": extensions, "universe": list(u.atoms)})
    if isinstance(f, Prop):
        return Refuted({"clause": "At", "extension_mask": mask,
                        "detail": f"{f.name} is not derivable"}, u.base(mask))
    if isinstance(f, Bot):
        missing = sorted(set(u.atoms) - u.closure(mask))
        return Refuted({"clause": "bot", "extension_mask": mask,
                        "detail": f"atom {missing[0]} is not derivable"}, u.base(mask))
    bad = u.table(f.ante) & ~u.table(f.cons)
    m = _superset_witness(u, bad, mask)
    return Refuted({"clause": "->", "extension_mask": m,
                    "detail": f"extension supports {render(f.ante)} but not {render(f.cons)}"},
                   u.base(m))


def toy_entails(u: ToyUniverse, b, delta: Iterable[Formula], f: Formula):
    """Decide ``delta |=_b f`` by quantifying over every extension of b."""
    delta = list(delta)
    if not delta:
        raise ValueError("the premise set must be non-empty")
    for g in delta + [f]:
        u.check_formula(g)
    mask = u.mask_of(b)
    bad = ~u.table(f)
    for g in delta:
        bad = bad & u.table(g)
    m = _superset_witness(u, bad, mask)
    if m is None:
        return Verified({"extensions_checked": 1 << (u.n_rules - bin(mask).count("1")),
                         "universe": list(u.atoms)})
    return Refuted({"clause": "Inf", "extension_mask": m,
                    "detail": f"extension supports every premise but not {render(f)}"},
                   u.base(m))


def recheck_refutation(u: ToyUniverse, b, delta, f: Formula, verdict: Refuted) -> bool:
    """Independently confirm a toy counterexample with the direct evaluator."""
    mask = u.mask_of(b)
    m = verdict.counterexample["extension_mask"]
    if m & mask != mask:
        return False
    if u.n_rules > 12:
        sup = lambda mm, g: bool(u.table(g)[mm])  # noqa: E731
    else:
        sup = u.supports_direct
    clause = verdict.counterexample["clause"]
    if clause in ("At", "bot"):
        return not sup(m, f)
    ante = list(delta) if clause == "Inf" else [f.ante]
    cons = f if clause == "Inf" else f.cons
    return all(sup(m, g) for g in ante) and not sup(m, cons)


def toy_fresh_atom_robustness(u: ToyUniverse, b, f: Formula) -> bool:
    """Does adding one fresh atom to the rule universe leave the verdict alone?"""
    if len(u.all_atoms) > 3:
        raise ValueError("fresh-atom check is limited to universes of at most 3 atoms")
    wide = u.with_fresh_atom()
    if wide.n_rules > 24:
        raise ValueError("universe too large for the fresh-atom check")
    mask = u.mask_of(b)
    return bool(u.table(f)[mask]) == bool(fresh_atom_tables(u, wide, f, [mask])[0])


def fresh_atom_tables(u: ToyUniverse, wide: ToyUniverse, f: Formula, masks) -> np.ndarray:
    """Support of f in ``wide`` at the embeddings of the given masks of u."""
    emb = np.array([wide.embed(u, m) for m in masks], dtype=np.int64)
    if not isinstance(f, Impl):
        return wide.table(f)[emb]
    bad = wide.table(f.ante) & ~wide.table(f.cons)
    # exists an extension in wide: first close over the rules outside u by
    # folding their bits away one at a time, highest first
    inner = [wide._index[r] for r in u.rules]
    kept = sorted(inner)
    outer = sorted(set(range(wide.n_rules)) - set(inner), reverse=True)
    remaining = list(range(wide.n_rules))
    small = bad
    for r in outer:
        j = remaining.index(r)
        small = small.reshape(-1, 2, 1 << j).any(axis=1).reshape(-1)
        remaining.pop(j)
    # ... then over u's own rules, after renumbering them to u's bit order
    pos = {w: k for k, w in enumerate(kept)}
    masks = np.asarray(masks, dtype=np.int64)
    compressed = np.zeros_like(masks)
    for i, w in enumerate(inner):
        compressed |= ((masks >> i) & 1) << pos[w]
    return ~_down_closure(small, len(kept))[compressed]


# -- arithmetic bases ----------------------------------------------------------

@dataclass(frozen=True)
class Bounds:
    term_size: int = DEFAULT_TERM_SIZE
    numeral_range: int = DEFAULT_N_MAX
    budget: Budget = Budget(max_depth=8, max_nodes=20_000)


def _instances(sig, bounds: Bounds) -> list[Term]:
    terms = list(closed_terms_upto(sig, bounds.term_size))
    seen = set(terms)
    for n in range(bounds.numeral_range + 1):
        t = numeral(n)
        if t not in seen:
            terms.append(t)
            seen.add(t)
    return terms


def _curried(f: Formula) -> tuple[list[Formula], Formula]:
    ante = []
    while isinstance(f, Impl):
        ante.append(f.ante)
        f = f.cons
    return ante, f


def equals_for_equals(source: Term, target: Term, eq: Derivation) -> Derivation | None:
    """Prove ``source = target`` where target replaces occurrences of a by b in
    source, given a proof ``eq`` of ``a = b``.  None if target is not of that form.
    """
    from .arith import _cong_left, _cong_right, _cong_succ, _refl, _trans
    a, b = eq.atom.lhs, eq.atom.rhs
    if source == target:
        return _refl(source)
    if source == a and target == b:
        return eq
    if type(source) is not type(target):
        return None
    if isinstance(source, Succ):
        inner = equals_for_equals(source.arg, target.arg, eq)
        return None if inner is None else _cong_succ(inner)
    if isinstance(source, (Add, Mul)):
        left = equals_for_equals(source.left, target.left, eq)
        right = equals_for_equals(source.right, target.right, eq)
        if left is None or right is None:
            return None
        ctor = type(source)
        return _trans(_cong_left(ctor, left, source.right), _cong_right(ctor, target.left, right))
    return None


def _substitution_certificate(premises: list[Atom], goal: Atom) -> Derivation | None:
    from .arith import _sym, _trans
    for eq_atom in premises:
        eq = Derivation(eq_atom)
        for other in premises:
            if other is eq_atom and len(premises) > 1:
                continue
            left = equals_for_equals(other.lhs, goal.lhs, eq)
            right = equals_for_equals(other.rhs, goal.rhs, eq)
            if left is not None and right is not None:
                return _trans(_trans(_sym(left), Derivation(other)), right)
    return None


def _atom_verdict(base: Base, a, bounds: Bounds):
    kind = base_kind(base)
    if kind in ("A_PLUS", "A_EXT"):
        res = decide_equation(a.lhs, a.rhs, base)
        if isinstance(res, Proved):
            return Verified({"certificate": res.certificate,
                             "certificate_ref": cert_ref(res.certificate)})
        return Refuted({"clause": "At", "atom": render(a), "weights": list(res.weights),
                        "detail": "unbalanced equations are not derivable"}, base)
    if kind == "A":
        res = decide_in_verbatim_base(a.lhs, a.rhs)
        if isinstance(res, Proved):
            return Verified({"certificate": res.certificate,
                             "certificate_ref": cert_ref(res.certificate)})
        return Refuted({"clause": "At", "atom": render(a),
                        "root_normal_forms": [render(t) for t in res.normal_forms],
                        "detail": "root normal forms differ, so A cannot derive the atom"}, base)
    v = derive(base, [], a, bounds.budget)
    if v.status == "Derivable":
        return Verified({"certificate": v.derivation, "certificate_ref": cert_ref(v.derivation)})
    if v.status == "NotDerivable":
        return Refuted({"clause": "At", "atom": render(a), **dict(v.evidence)}, base)
    return Unknown({"clause": "At", "atom": render(a), **dict(v.budget)})


def _implication_verdict(base: Base, f: Impl, bounds: Bounds):
    ante, cons = _curried(f)
    atoms = all(isinstance(g, Atom) for g in ante)
    if atoms and isinstance(cons, Atom):
        d = _substitution_certificate(list(ante), cons)
        if d is not None and check_derivation(base, d, ante):
            return Verified({"route": "equals for equals", "certificate": d,
                             "certificate_ref": cert_ref(d)})
    if atoms and isinstance(cons, Bot) and "pa1" in base:
        # one S(x)=0 from the antecedents and pa1 yields every closed atom
        goal = Atom(Succ(ZERO), ZERO)
        v = derive(base, ante, goal, bounds.budget)
        if v.status == "Derivable":
            return Verified({"route": "antecedents derive S(0)=0; pa1 yields every atom",
                             "certificate": v.derivation,
                             "certificate_ref": cert_ref(v.derivation)})
        if weight_sound(base) and all(balanced(g) for g in ante):
            return Refuted({"clause": "->", "extension": "base plus the antecedents as axioms",
                            "detail": "the extension stays weight-balanced, so S(0)=0 "
                                      "remains underivable"}, base)
    if atoms and isinstance(cons, Atom):
        v = derive(base, ante, cons, bounds.budget)
        if v.status == "Derivable":
            return Verified({"route": "derived from the antecedents as open premises",
                             "certificate": v.derivation,
                             "certificate_ref": cert_ref(v.derivation)})
    # monotonicity: a consequent supported by the base is supported by every extension
    cv = _support(base, cons, bounds)
    if cv.status == "Verified":
        return Verified({"route": "consequent supported outright", **cv.evidence})
    if cv.status == "Refuted":
        ants = [_support(base, g, bounds) for g in ante]
        if all(a.status == "Verified" for a in ants):
            return Refuted({"clause": "->", "extension": "the base itself",
                            "detail": f"antecedents hold but {render(cons)} fails",
                            "consequent": cv.counterexample}, base)
    return Unknown({"clause": "->", "detail": "no sufficient condition applied"})


def _support(base: Base, f: Formula, bounds: Bounds):
    if isinstance(f, Atom):
        return _atom_verdict(base, f, bounds)
    if isinstance(f, Bot):
        report = refute_bot(base, bounds.budget)
        if report["bot_refuted"]:
            return Refuted({"clause": "bot", "witness": report["witness"],
                            "weights": report["weights"]}, base)
        return Unknown({"clause": "bot", "search": report["search_verdict"]})
    if isinstance(f, Forall):
        unknown = None
        checked = 0
        for t in _instances(base.signature, bounds):
            v = _support(base, substitute(f.body, f.var, t), bounds)
            checked += 1
            if v.status == "Refuted":
                return Refuted({"clause": "forall", "instance": render(t),
                                "inner": _plain(v.counterexample)}, base)
            if v.status == "Unknown" and unknown is None:
                unknown = (t, v)
        if unknown is not None:
            return Unknown({"clause": "forall", "instance": render(unknown[0]),
                            "inner": _plain(unknown[1].budget)})
        return Verified({"instances": checked, "bound": _bound_json(bounds)})
    if isinstance(f, Impl):
        return _implication_verdict(base, f, bounds)
    if isinstance(f, Prop):
        raise ToyFragmentError("0-ary atoms belong to toy universes, not arithmetic bases")
    raise TypeError(f"not a formula: {f!r}")


def _plain(d: dict) -> dict:
    return {k: v for k, v in d.items() if not isinstance(v, Derivation)}


def _bound_json(bounds: Bounds) -> dict:
    return {"term_size": bounds.term_size, "numeral_range": bounds.numeral_range,
            "max_depth": bounds.budget.max_depth, "max_nodes": bounds.budget.max_nodes}


def arith_support(variant, f: Formula, bounds: Bounds | None = None, **kw):
    """Bounded support of a closed formula in A, A_PLUS or A_EXT(k).

    Verified answers for quantified formulas hold up to the recorded bound.
    """
    bounds = bounds or Bounds(**kw)
    base = resolve_variant(variant)
    if not is_closed(f):
        raise ValueError(f"support needs a closed formula: {render(f)}")
    v = _support(base, f, bounds)
    if v.status == "Verified":
        return Verified({**v.evidence, "bound": _bound_json(bounds), "base": base.name})
    return v


# -- theory presentations --------------------------------------------------------

EQUALITY_AXIOMS = {
    "eq1": "forall x. x=x",
    "eq2": "forall x. forall y. (x=y -> y=x)",
    "eq3": "forall x. forall y. forall z. (x=y -> (y=z -> x=z))",
}

PA_AXIOMS = {
    "PA1": "forall x. ~(S(x)=0)",
    "PA2": "forall x. forall y. (S(x)=S(y) -> x=y)",
    "PA3": "forall x. x+0=x",
    "PA4": "forall x. forall y. x+S(y)=S(x+y)",
    "PA5": "forall x. x*0=0",
    "PA6": "forall x. forall y. x*S(y)=x*y+x",
}


@dataclass(frozen=True)
class TheoryPresentation:
    """A finite list of named closed formulas standing in for a theory."""

    axioms: tuple[tuple[str, Formula], ...]

    def __post_init__(self):
        for name, f in self.axioms:
            if not is_closed(f):
                raise ValueError(f"axiom {name} is not closed")


def _hole(phi: Formula) -> str:
    fv = sorted(free_vars(phi))
    if len(fv) != 1:
        raise ValueError(f"expected exactly one free variable in {render(phi)}, found {fv}")
    return fv[0]


def induction_axiom(phi: Formula) -> Formula:
    """The induction instance for phi, with the conjunction curried."""
    x = _hole(phi)
    step = Forall(x, Impl(phi, substitute(phi, x, Succ(Var(x)))))
    return Impl(substitute(phi, x, ZERO), Impl(step, Forall(x, phi)))


def substitution_axiom(phi: Formula) -> Formula:
    x = _hole(phi)
    a, b = "_a", "_b"
    return Forall(a, Forall(b, Impl(Atom(Var(a), Var(b)),
                                    Impl(substitute(phi, x, Var(a)), substitute(phi, x, Var(b))))))


def pa_presentation(schema_formulas: Iterable[Formula] = ()) -> TheoryPresentation:
    axioms = [(name, parse_formula(text)) for name, text in
              list(EQUALITY_AXIOMS.items()) + list(PA_AXIOMS.items())]
    for i, phi in enumerate(schema_formulas):
        axioms.append((f"eq4[{render(phi)}]", substitution_axiom(phi)))
        axioms.append((f"PA7[{render(phi)}]", induction_axiom(phi)))
    return TheoryPresentation(tuple(axioms))


# -- reports ---------------------------------------------------------------------

@dataclass
class CheckReport:
    """Per-instance outcomes of a sweep, with the certificates they reference."""

    name: str
    base: str
    entries: list = field(default_factory=list)
    certificates: dict = field(default_factory=dict)
    failure: dict | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def add(self, instance: str, verdict: str, cert: Derivation | None, bound, **extra):
        ref = None
        if cert is not None:
            ref = cert_ref(cert)
            self.certificates[ref] = cert
        entry = {"instance": instance, "verdict": verdict, "certificate_ref": ref,
                 "bound": bound, **extra}
        self.entries.append(entry)
        return entry

    def fail(self, **detail):
        if self.failure is None:
            self.failure = detail

    def to_json(self) -> dict:
        return {"check": self.name, "base": self.base, "ok": self.ok,
                "failure": self.failure, "entries": self.entries}


def numerically_definite_upto(variant, term_size: int) -> CheckReport:
    base = resolve_variant(variant)
    report = CheckReport("numerically-definite", base.name)
    for t in closed_terms_upto(base.signature, term_size):
        n, d = normalize_to_numeral(t, base)
        ok = check_derivation(base, d)
        report.add(render(Atom(t, numeral(n))), "Verified" if ok else "Refuted", d,
                   {"term_size": term_size})
        if not ok:
            report.fail(term=render(t), reason="certificate rejected")
    return report


def _decide_instance(base, phi, x, t):
    inst = substitute(phi, x, t)
    return inst, decide_equation(inst.lhs, inst.rhs, base)


def _equals_for_equals_instance(base, phi: Atom, x: str, t: Term, n: int, phi_n_cert):
    """phi[t] from t = n and phi[n]: the substitution step made concrete."""
    from .arith import _sym, _trans
    _, eq = normalize_to_numeral(t, base)  # t = n
    left = congruence_proof(phi.lhs, x, eq)   # l[t] = l[n]
    right = congruence_proof(phi.rhs, x, eq)  # r[t] = r[n]
    return _trans(_trans(left, phi_n_cert), _sym(right))


def _check_closed_terms(report, base, phi, x, term_size, proven: dict):
    for t in closed_terms_upto(base.signature, term_size):
        n = weight(t)
        if n not in proven:
            inst, res = _decide_instance(base, phi, x, numeral(n))
            if isinstance(res, Disproved):
                report.add(render(substitute(phi, x, t)), "Refuted", None,
                           {"term_size": term_size}, weights=list(res.weights))
                report.fail(term=render(t), numeral=n, weights=list(res.weights))
                return
            proven[n] = res.certificate
        d = _equals_for_equals_instance(base, phi, x, t, n, proven[n])
        ok = check_derivation(base, d) and d.atom == substitute(phi, x, t)
        report.add(render(d.atom), "Verified" if ok else "Refuted", d,
                   {"term_size": term_size}, via_numeral=n)
        if not ok:
            report.fail(term=render(t), reason="certificate rejected")
            return


def _parse_hole(phi) -> tuple[Atom, str]:
    if isinstance(phi, str):
        phi = parse_formula(phi)
    if not isinstance(phi, Atom):
        raise ValueError("the checked formula must be an equation with one free variable")
    return phi, _hole(phi)


def omega_check(variant, phi, n_max: int = DEFAULT_N_MAX,
                term_size: int = DEFAULT_TERM_SIZE) -> CheckReport:
    """Check phi[n] for n <= n_max, then phi[t] for every closed t up to a size
    bound by rewriting t to its numeral and substituting equals for equals."""
    base = resolve_variant(variant)
    phi, x = _parse_hole(phi)
    report = CheckReport(f"omega-check {render(phi)}", base.name)
    proven: dict[int, Derivation] = {}
    for n in range(n_max + 1):
        inst, res = _decide_instance(base, phi, x, numeral(n))
        if isinstance(res, Disproved):
            report.add(render(inst), "Refuted", None, {"n_max": n_max}, weights=list(res.weights))
            report.fail(stage="numeral", n=n, weights=list(res.weights))
            return report
        ok = check_derivation(base, res.certificate)
        report.add(render(inst), "Verified" if ok else "Refuted", res.certificate, {"n_max": n_max})
        if not ok:
            report.fail(stage="numeral", n=n, reason="certificate rejected")
            return report
        proven[n] = res.certificate
    _check_closed_terms(report, base, phi, x, term_size, proven)
    return report


def _graft(d: Derivation, leaf, proof: Derivation) -> Derivation:
    if d.is_open and d.atom == leaf:
        return proof
    if not d.children:
        return d
    return Derivation(d.atom, d.rule, d.subst, tuple(_graft(c, leaf, proof) for c in d.children))


def induction_check(variant, phi, n_max: int = DEFAULT_N_MAX,
                    term_size: int = DEFAULT_TERM_SIZE) -> CheckReport:
    """Check phi[0] and each step phi[n] -> phi[S(n)], chain them by modus
    ponens up to n_max, then extend to closed terms via their numerals."""
    base = resolve_variant(variant)
    phi, x = _parse_hole(phi)
    report = CheckReport(f"induction-check {render(phi)}", base.name)
    inst, res = _decide_instance(base, phi, x, ZERO)
    if isinstance(res, Disproved):
        report.add(render(inst), "Refuted", None, {"n_max": n_max}, stage="base",
                   weights=list(res.weights))
        report.fail(stage="base", n=0, weights=list(res.weights))
        return report
    report.add(render(inst), "Verified", res.certificate, {"n_max": n_max}, stage="base")
    chained = {0: res.certificate}
    for n in range(n_max):
        ante = substitute(phi, x, numeral(n))
        cons, res = _decide_instance(base, phi, x, numeral(n + 1))
        step_text = render(Impl(ante, cons))
        if isinstance(res, Disproved):
            report.add(step_text, "Refuted", None, {"n_max": n_max}, stage="step", n=n,
                       weights=list(res.weights))
            report.fail(stage="step", n=n, weights=list(res.weights))
            return report
        # step certificate: phi[S(n)] derivable with phi[n] as an allowed open premise
        step = res.certificate
        if not check_derivation(base, step, [ante]):
            report.fail(stage="step", n=n, reason="certificate rejected")
            return report
        report.add(step_text, "Verified", step, {"n_max": n_max}, stage="step", n=n)
        proof = _graft(step, ante, chained[n])
        ok = check_derivation(base, proof)
        report.add(render(cons), "Verified" if ok else "Refuted", proof, {"n_max": n_max},
                   stage="modus ponens", n=n + 1)
        if not ok:
            report.fail(stage="modus ponens", n=n + 1, reason="certificate rejected")
            return report
        chained[n + 1] = proof
    _check_closed_terms(report, base, phi, x, term_size, chained)
    return report

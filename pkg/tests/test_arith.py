import itertools

import pytest
from hypothesis import given, settings

from ptsarith.arith import (
    WITNESS, Disproved, FidelityGapError, Proved, Underivable, check_weight_invariant,
    congruence_proof, decide_equation, decide_in_verbatim_base, eval_value,
    normalize_to_numeral, refute_bot, resolve_variant, root_normal_form,
)
from ptsarith.rulebase import (
    builtin_base, check_derivation, random_forward_derivations, rule_node,
)
from ptsarith.search import Budget, derive
from ptsarith.syntax import (
    BASE_SIGNATURE, ZERO, Add, Atom, Const, Mul, Signature, Succ, Var,
    closed_terms_upto, numeral, parse_term,
)
from ptsarith.weight import weight

from conftest import closed_terms

A_PLUS = builtin_base("A_PLUS")


def test_eval_value_examples():
    assert eval_value(parse_term("S(0)*S(S(0))")) == 2
    assert eval_value(ZERO) == 0
    assert eval_value(Const(3)) == 0
    with pytest.raises(ValueError):
        eval_value(Var("x"))


def test_eval_value_deep_term_has_no_recursion_limit():
    t = numeral(5000)
    assert eval_value(Add(t, t)) == 10_000


def test_normalize_examples():
    n, d = normalize_to_numeral(ZERO)
    assert n == 0 and d.rule == "eq1"
    n, d = normalize_to_numeral(parse_term("S(0)+S(0)"))
    assert n == 2 and d.atom == Atom(parse_term("S(0)+S(0)"), numeral(2))
    assert check_derivation(A_PLUS, d)
    ext = builtin_base("A_EXT", 3)
    n, d = normalize_to_numeral(parse_term("c2+S(0)", Signature(3)), ext)
    assert n == 1 and "zc2" in d.rules_used() and check_derivation(ext, d)


def test_normalize_rejects_verbatim_base_and_open_terms():
    with pytest.raises(FidelityGapError):
        normalize_to_numeral(ZERO, "A")
    with pytest.raises(ValueError):
        normalize_to_numeral(Var("x"))
    with pytest.raises(ValueError):
        normalize_to_numeral(Const(4), "A_EXT(3)")


def test_every_small_term_normalizes():
    for t in closed_terms_upto(BASE_SIGNATURE, 6):
        n, d = normalize_to_numeral(t)
        assert n == eval_value(t) == weight(t)
        assert d.atom == Atom(t, numeral(n))
        assert check_derivation(A_PLUS, d) and not d.open_leaves()


@settings(max_examples=60, deadline=None)
@given(closed_terms(max_const=3, max_leaves=8))
def test_normalize_random_terms_extended(t):
    ext = builtin_base("A_EXT", 3)
    n, d = normalize_to_numeral(t, ext)
    assert n == eval_value(t)
    assert check_derivation(ext, d)


def test_decide_equation_examples():
    res = decide_equation(parse_term("S(0)+S(S(0))"), parse_term("S(S(S(0)))"))
    assert isinstance(res, Proved) and check_derivation(A_PLUS, res.certificate)
    res = decide_equation(Succ(ZERO), ZERO)
    assert isinstance(res, Disproved) and res.weights == (1, 0)
    ext = builtin_base("A_EXT", 4)
    res = decide_equation(Const(4), ZERO, ext)
    assert res.value and check_derivation(ext, res.certificate)


def test_decide_equation_is_a_congruence():
    terms = list(closed_terms_upto(BASE_SIGNATURE, 4))
    rel = {(a, b): decide_equation(a, b).value for a in terms for b in terms}
    for a, b, c in itertools.product(terms, repeat=3):
        assert rel[a, a]
        assert rel[a, b] == rel[b, a]
        if rel[a, b] and rel[b, c]:
            assert rel[a, c]
    for a, b in itertools.product(terms, repeat=2):
        if rel[a, b]:
            assert decide_equation(Succ(a), Succ(b)).value
            for c in terms[:4]:
                assert decide_equation(Add(a, c), Add(b, c)).value
                assert decide_equation(Mul(c, a), Mul(c, b)).value


def test_congruence_proof_builds_substitution_instances():
    eq = decide_equation(parse_term("S(0)+0"), parse_term("S(0)")).certificate
    pattern = Add(Mul(Var("x"), Succ(Var("x"))), ZERO)
    d = congruence_proof(pattern, "x", eq)
    assert d.atom == Atom(Add(Mul(eq.atom.lhs, Succ(eq.atom.lhs)), ZERO),
                          Add(Mul(eq.atom.rhs, Succ(eq.atom.rhs)), ZERO))
    assert check_derivation(A_PLUS, d)


def test_weight_invariant_on_random_corpus():
    for base in (A_PLUS, builtin_base("A_EXT", 5)):
        for d in random_forward_derivations(base, 300, 8, seed=5):
            assert check_weight_invariant(d)


def test_weight_invariant_detects_bad_tree():
    bad = rule_node(Atom(Succ(ZERO), ZERO), "eq1", {"x": ZERO})
    assert not check_weight_invariant(bad)
    assert check_weight_invariant(rule_node(Atom(Succ(ZERO), Succ(ZERO)), "eq1", {"x": Succ(ZERO)}))


@pytest.mark.parametrize("variant", ["A", "A_PLUS", "A_EXT(9)"])
def test_refute_bot(variant):
    report = refute_bot(variant, Budget(12, 200_000))
    assert report["witness"] == "S(0)=0" and report["weights"] == [1, 0]
    assert report["bot_refuted"]
    assert report["search_verdict"]["status"] == "NotDerivable"
    statuses = {a["schema"]: a["status"] for a in report["schema_audit"]}
    assert statuses["pa1"] == "vacuous"
    assert WITNESS == Atom(Succ(ZERO), ZERO)


def test_resolve_variant():
    assert resolve_variant("A_EXT(3)").signature.n_constants == 3
    assert resolve_variant("a_plus").name == "A_PLUS"


# -- the verbatim base ---------------------------------------------------------

A = builtin_base("A")


def test_root_normal_forms():
    nf, d = root_normal_form(parse_term("S(0)*S(0)"))
    # S(0)*S(0) -> S(0)*0 + S(0) -> S(S(0)*0 + 0)
    assert nf == parse_term("S(S(0)*0+0)")
    assert check_derivation(A, d)


def test_verbatim_base_gap_examples():
    res = decide_in_verbatim_base(parse_term("S(0)*S(0)"), parse_term("S(0)"))
    assert isinstance(res, Underivable)
    res = decide_in_verbatim_base(parse_term("0+0"), ZERO)
    assert isinstance(res, Proved) and check_derivation(A, res.certificate)


def test_verbatim_decision_agrees_with_search():
    # the exact procedure is checked against bounded search on all pairs of small terms
    terms = list(closed_terms_upto(BASE_SIGNATURE, 3))
    for a, b in itertools.product(terms, repeat=2):
        exact = decide_in_verbatim_base(a, b)
        found = derive(A, [], Atom(a, b), Budget(8, 20_000))
        assert (found.status == "Derivable") == exact.value, (a, b)
        if exact.value:
            assert check_derivation(A, exact.certificate)


def test_verbatim_derivable_implies_plus_derivable():
    terms = list(closed_terms_upto(BASE_SIGNATURE, 4))
    for a, b in itertools.product(terms, repeat=2):
        if decide_in_verbatim_base(a, b).value:
            assert decide_equation(a, b).value

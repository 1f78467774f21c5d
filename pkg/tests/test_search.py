import pytest

from ptsarith.rulebase import builtin_base, check_derivation, parse_rules, random_forward_derivations
from ptsarith.search import Budget, derive, forward_closure
from ptsarith.syntax import Prop, parse_atom

A = builtin_base("A")
A_PLUS = builtin_base("A_PLUS")


def at(text):
    return parse_atom(text)


def test_pa3_instance_is_derivable():
    v = derive(A, [], at("0+0=0"))
    assert v.status == "Derivable"
    assert v.derivation.rule == "pa3"


def test_one_plus_one():
    v = derive(A_PLUS, [], at("S(0)+S(0)=S(S(0))"), Budget(8, 50_000))
    assert v.status == "Derivable"
    assert check_derivation(A_PLUS, v.derivation)
    assert {"pa4", "pa3"} <= v.derivation.rules_used()


@pytest.mark.parametrize("name", ["A", "A_PLUS"])
def test_witness_not_derivable(name):
    v = derive(builtin_base(name), [], at("S(0)=0"), Budget(12, 200_000))
    assert v.status == "NotDerivable"
    assert v.evidence["weights"] == [1, 0]


def test_premises_used_and_monotone():
    v = derive(A, [at("0=S(0)")], at("S(0)=0"))
    assert v.status == "Derivable"
    assert check_derivation(A, v.derivation, [at("0=S(0)")])
    # with an unbalanced premise pa1 explodes: anything follows
    v = derive(A, [at("S(0)=0")], at("0=S(S(0))"))
    assert v.status == "Derivable" and "pa1" in v.derivation.rules_used()
    # more premises never hurt
    v2 = derive(A, [at("S(0)=0"), at("0=0")], at("0=S(S(0))"))
    assert v2.status == "Derivable"


def test_unknown_when_budget_is_tiny():
    v = derive(A_PLUS, [], at("S(S(0))*S(S(0))=S(S(S(S(0))))"), Budget(3, 50))
    assert v.status == "Unknown"
    assert v.budget["max_nodes"] == 50


def test_unbalanced_goal_is_never_derivable_without_premises():
    for goal in ["0=S(0)", "S(0)+0=0", "S(0)*S(0)=0"]:
        assert derive(A_PLUS, [], at(goal), Budget(6, 20_000)).status == "NotDerivable"


def test_derivable_implies_certificate_checks():
    goals = ["0*0=0", "0+0=0+0", "S(0+0)=S(0)", "0=0+0", "0*S(0)=0"]
    for g in goals:
        v = derive(A_PLUS, [], at(g), Budget(8, 30_000))
        assert v.status == "Derivable", g
        assert check_derivation(A_PLUS, v.derivation)
        # pa1 is never needed: its premise is unbalanced
        assert "pa1" not in v.derivation.rules_used()


def test_determinism():
    a = derive(A_PLUS, [], at("S(0)+S(0)=S(S(0))"))
    b = derive(A_PLUS, [], at("S(0)+S(0)=S(S(0))"))
    assert a == b


def test_budget_validation():
    with pytest.raises(ValueError):
        Budget(0, 10)
    with pytest.raises(ValueError):
        Budget(5, 0)
    with pytest.raises(ValueError):
        derive(A, [], parse_atom("x=0"))


def test_ground_bases_use_forward_chaining():
    base = parse_rules("r1: |- p\nr2: p |- q\nr3: q, s |- t")
    assert derive(base, [], Prop("q")).status == "Derivable"
    v = derive(base, [], Prop("t"))
    assert v.status == "NotDerivable" and v.evidence["reason"] == "fixpoint"
    assert derive(base, [Prop("s")], Prop("t")).status == "Derivable"
    assert set(forward_closure(base)) == {Prop("p"), Prop("q")}


def test_search_finds_conclusions_of_random_short_derivations():
    for d in random_forward_derivations(A, 20, 2, seed=3):
        v = derive(A, [], d.atom, Budget(6, 20_000))
        assert v.status == "Derivable", d.atom

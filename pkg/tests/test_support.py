import json

import pytest

from ptsarith.rulebase import builtin_base, check_derivation
from ptsarith.search import Budget
from ptsarith.support import (
    Bounds, arith_support, induction_check, induction_axiom,
    numerically_definite_upto, omega_check, pa_presentation, substitution_axiom,
)
from ptsarith.syntax import BASE_SIGNATURE, closed_terms_upto, parse_formula

F = parse_formula
SMALL = Bounds(term_size=3, numeral_range=4, budget=Budget(6, 5_000))


def test_spec_examples():
    v = arith_support("A_PLUS", F("forall x. x+0=x"))
    assert v.status == "Verified"
    assert v.evidence["bound"]["term_size"] == 7
    assert arith_support("A_PLUS", F("bot")).status == "Refuted"
    v = arith_support("A_PLUS", F("forall x. ~(S(x)=0)"), term_size=4, numeral_range=6)
    assert v.status == "Verified"


def test_open_formula_rejected():
    with pytest.raises(ValueError):
        arith_support("A_PLUS", F("x=0"))


def test_atoms_and_implications():
    assert arith_support("A_PLUS", F("S(0)*S(0)=S(0)")).status == "Verified"
    assert arith_support("A_PLUS", F("S(0)=0")).status == "Refuted"
    # false antecedent: the consequent follows from it as an open premise
    assert arith_support("A_PLUS", F("0=S(0) -> S(0)=0")).status == "Verified"
    # true antecedent, false consequent
    assert arith_support("A_PLUS", F("0=0 -> S(0)=0")).status == "Refuted"
    # negation of a true atom, and of a false one
    assert arith_support("A_PLUS", F("~(0=0)")).status == "Refuted"
    assert arith_support("A_PLUS", F("~(S(0)=0)")).status == "Verified"


def test_universal_refutation_names_instance():
    v = arith_support("A_PLUS", F("forall x. x=0"), SMALL)
    assert v.status == "Refuted"
    assert v.counterexample["instance"] == "S(0)"


def test_verbatim_base_atoms_are_exact():
    assert arith_support("A", F("0+0=0")).status == "Verified"
    v = arith_support("A", F("S(0+0)=S(0)"))
    assert v.status == "Refuted"
    assert v.counterexample["root_normal_forms"] == ["S(0+0)", "S(0)"]


def test_pa_axioms_never_refuted():
    phis = [F("x+0=x"), F("0+x=x"), F("x*0=0"), F("S(x)=x+S(0)")]
    for name, axiom in pa_presentation(phis).axioms:
        v = arith_support("A_PLUS", axiom, SMALL)
        assert v.status != "Refuted", name
        assert v.status == "Verified", name


def test_axiom_builders():
    phi = F("x+0=x")
    assert induction_axiom(phi) == F(
        "0+0=0 -> (forall x. (x+0=x -> S(x)+0=S(x))) -> forall x. x+0=x")
    assert substitution_axiom(phi) == F("forall _a. forall _b. (_a=_b -> _a+0=_a -> _b+0=_b)")
    with pytest.raises(ValueError):
        induction_axiom(F("x=y"))


def test_numerical_definiteness():
    r = numerically_definite_upto("A_PLUS", 5)
    assert r.ok
    assert len(r.entries) == sum(1 for _ in closed_terms_upto(BASE_SIGNATURE, 5))
    r = numerically_definite_upto("A_PLUS", 1)
    assert [e["instance"] for e in r.entries] == ["0=0"]
    r = numerically_definite_upto("A_EXT(2)", 3)
    assert r.ok and {"c1=0", "c2=0"} <= {e["instance"] for e in r.entries}


@pytest.mark.parametrize("phi", ["x+0=x", "x*0=0"])
def test_omega_check_passes(phi):
    r = omega_check("A_PLUS", phi, n_max=25, term_size=5)
    assert r.ok
    base = builtin_base("A_PLUS")
    assert all(check_derivation(base, d) for d in r.certificates.values())
    assert all(e["certificate_ref"] in r.certificates for e in r.entries)


def test_omega_check_negative_control():
    r = omega_check("A_PLUS", "x=S(x)")
    assert not r.ok
    assert r.failure == {"stage": "numeral", "n": 0, "weights": [0, 1]}


@pytest.mark.parametrize("phi", ["x+0=x", "0*x=0"])
def test_induction_check_passes(phi):
    r = induction_check("A_PLUS", phi, n_max=10, term_size=5)
    assert r.ok
    base = builtin_base("A_PLUS")
    assert all(check_derivation(base, d) for d in r.certificates.values())
    stages = [e.get("stage") for e in r.entries]
    assert stages.count("step") == 10 and stages.count("modus ponens") == 10


def test_induction_check_negative_control():
    r = induction_check("A_PLUS", "x=0")
    assert r.entries[0]["verdict"] == "Verified"
    assert r.failure == {"stage": "step", "n": 0, "weights": [1, 0]}


def test_report_json_shape():
    r = omega_check("A_PLUS", "x+0=x", n_max=3, term_size=3)
    obj = r.to_json()
    json.dumps(obj)
    for e in obj["entries"]:
        assert {"instance", "verdict", "certificate_ref", "bound"} <= set(e)


def test_check_needs_one_hole():
    with pytest.raises(ValueError):
        omega_check("A_PLUS", "x=y")
    with pytest.raises(ValueError):
        omega_check("A_PLUS", "forall x. x=x")

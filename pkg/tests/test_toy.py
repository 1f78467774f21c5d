import itertools
import random

import pytest

from ptsarith.rulebase import parse_rules
from ptsarith.syntax import BOT, Prop, parse_formula
from ptsarith.support import (
    recheck_refutation, toy_entails, toy_fresh_atom_robustness, toy_support,
)
from ptsarith.toy import (
    ToyFragmentError, ToyUniverse, formulas_upto_depth, implication_depth,
)

p, q = Prop("p"), Prop("q")
F = parse_formula


def base(text):
    return parse_rules(text, "b")


def test_universe_shape(pq):
    assert pq.n_rules == 8 and pq.n_bases == 256
    assert ToyUniverse(("p", "q", "r")).n_rules == 24
    assert len(set(pq.rules)) == 8
    assert pq.rules == ToyUniverse(("p", "q")).rules  # deterministic
    with pytest.raises(ValueError):
        ToyUniverse(("p", "p"))
    with pytest.raises(ValueError):
        ToyUniverse(("a", "b", "c", "d"))


def test_mask_round_trip(pq):
    for m in (0, 1, 37, 255):
        assert pq.mask_of(pq.base(m)) == m
    with pytest.raises(ToyFragmentError):
        pq.mask_of(base("r: p |- s"))


def test_spec_examples(pq):
    assert toy_support(pq, base("r: p |- q"), F("p -> q")).status == "Verified"
    assert toy_support(pq, 0, F("((p -> q) -> p) -> p")).status == "Verified"
    v = toy_support(pq, 0, p)
    assert v.status == "Refuted" and v.counterexample["extension_mask"] == 0
    assert v.base.schemas == ()


def test_entailment_examples(pq):
    assert toy_entails(pq, base("r: p |- q"), [p], q).status == "Verified"
    for m in range(0, 256, 17):
        assert toy_entails(pq, m, [p], p).status == "Verified"
    v = toy_entails(pq, 0, [F("p -> q")], q)
    assert v.status == "Refuted"
    assert recheck_refutation(pq, 0, [F("p -> q")], q, v)
    with pytest.raises(ValueError):
        toy_entails(pq, 0, [], q)


def test_fragment_errors(pq):
    with pytest.raises(ToyFragmentError):
        toy_support(pq, 0, F("0=0"))
    with pytest.raises(ToyFragmentError):
        toy_support(pq, 0, F("forall x. p"))
    with pytest.raises(ToyFragmentError):
        toy_support(pq, 0, Prop("r"))


def test_bot_needs_every_atom(pq):
    assert toy_support(pq, base("a: |- p"), BOT).status == "Refuted"
    assert toy_support(pq, base("a: |- p\nb: p |- q"), BOT).status == "Verified"


def test_tables_agree_with_direct_evaluation(pq):
    rng = random.Random(2)
    forms = formulas_upto_depth(["p", "q"], 2)
    for f in rng.sample(forms, 25):
        table = pq.table(f)
        for m in rng.sample(range(256), 20):
            assert bool(table[m]) == pq.supports_direct(m, f), (f, m)


def test_monotonicity_depth_two(pq):
    for f in formulas_upto_depth(["p", "q"], 2):
        t = pq.table(f)
        for r in range(pq.n_rules):
            view = t.reshape(-1, 2, 1 << r)
            # adding rule r never loses support
            assert not (view[:, 0, :] & ~view[:, 1, :]).any()


def test_inf_reflexivity_and_cut(pq):
    forms = formulas_upto_depth(["p", "q"], 1)
    tables = {f: pq.table(f) for f in forms}
    ent = {}
    for a, b in itertools.product(forms, repeat=2):
        ent[a, b] = pq.entails_table([a], b)
    for a in forms:
        assert ent[a, a].all()
    for a, b, c in itertools.product(forms, repeat=3):
        assert not (ent[a, b] & ent[b, c] & ~ent[a, c]).any()
    assert tables  # keeps the precomputed tables alive across the loop


def test_refutations_recheck(pq):
    rng = random.Random(4)
    forms = formulas_upto_depth(["p", "q"], 2)
    seen = 0
    for f in rng.sample(forms, 40):
        for m in rng.sample(range(256), 6):
            v = toy_support(pq, m, f)
            if v.status == "Refuted":
                seen += 1
                assert recheck_refutation(pq, m, [], f, v)
    assert seen > 20


def test_fresh_atom_examples(pq):
    assert toy_fresh_atom_robustness(pq, base("r: p |- q"), F("p -> q"))
    assert toy_fresh_atom_robustness(pq, 0, BOT)
    assert toy_fresh_atom_robustness(pq, 0, F("((p -> q) -> p) -> p"))


def test_fresh_atom_limit():
    u = ToyUniverse(("p", "q", "r"))
    with pytest.raises(ValueError):
        toy_fresh_atom_robustness(u, 0, Prop("p"))


def test_formula_enumeration():
    assert [len(formulas_upto_depth(["p", "q"], d)) for d in range(3)] == [3, 12, 147]
    assert implication_depth(F("(p -> q) -> p")) == 2

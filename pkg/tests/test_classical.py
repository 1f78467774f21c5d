import random
from dataclasses import replace

import pytest

from ptsarith.classical import (
    CorpusEntry, NDError, NDProof, Sequent, check_nd, load_corpus, nd_from_json,
    nd_to_json, soundness_harness, verify_nd,
)
from ptsarith.syntax import parse_formula, parse_term

F = parse_formula


def assume(f, label):
    return NDProof("assume", F(f), (), label)


def test_identity_proof():
    proof = NDProof("impl_intro", F("p -> p"), (assume("p", "a"),), "a")
    assert check_nd(proof, Sequent((), F("p -> p")))
    # without the discharge the assumption stays open
    assert not check_nd(NDProof("impl_intro", F("p -> p"), (assume("p", "a"),), "b"),
                        Sequent((), F("p -> p")))


def test_corpus_is_valid_and_large_enough():
    corpus = load_corpus()
    assert len(corpus) >= 8
    names = {e.name for e in corpus}
    assert {"peirce", "ex_falso", "modus_ponens", "double_negation"} <= names
    for e in corpus:
        verify_nd(e.proof, e.sequent)


def test_peirce_uses_reductio():
    peirce = next(e for e in load_corpus() if e.name == "peirce")
    assert any(n.rule == "raa" for n in peirce.proof.nodes())


def test_eigenvariable_condition():
    # x=0 |- forall x. x=0 must be rejected: x is free in the open assumption
    bad = NDProof("forall_intro", F("forall x. x=0"), (assume("x=0", "h"),), var="x")
    with pytest.raises(NDError) as info:
        verify_nd(bad, Sequent((F("x=0"),), F("forall x. x=0")))
    assert "eigenvariable" in info.value.reason
    # the eigenvariable may not be free in the conclusion either
    body = NDProof("forall_elim", F("y=y"), (assume("forall x. x=x", "h"),), term=parse_term("y"))
    bad2 = NDProof("forall_intro", F("forall x. y=y"), (body,), var="y")
    assert not check_nd(bad2, Sequent((F("forall x. x=x"),), F("forall x. y=y")))


def test_forall_rules():
    e = next(e for e in load_corpus() if e.name == "forall_swap_instance")
    assert check_nd(e.proof, e.sequent)
    wrong = NDProof("forall_elim", F("0=S(0)"), (assume("forall x. x=x", "h"),), term=parse_term("0"))
    assert not check_nd(wrong, Sequent((F("forall x. x=x"),), F("0=S(0)")))


def test_errors_name_the_path():
    mp = NDProof("impl_elim", F("q"), (assume("p -> q", "h"), assume("r", "a")))
    with pytest.raises(NDError) as info:
        verify_nd(mp, Sequent((F("p -> q"), F("r")), F("q")))
    assert info.value.path == () and info.value.rule == "impl_elim"
    nested = NDProof("impl_intro", F("p -> q"), (mp,), "a")
    with pytest.raises(NDError) as info:
        verify_nd(nested, Sequent((F("p -> q"),), F("p -> q")))
    assert info.value.path == (0,)


def test_unknown_rule_and_arity():
    assert not check_nd(NDProof("magic", F("p")), Sequent((), F("p")))
    assert not check_nd(NDProof("bot_elim", F("p")), Sequent((), F("p")))


def test_json_round_trip():
    for e in load_corpus():
        assert nd_from_json(nd_to_json(e.proof)) == e.proof
        assert CorpusEntry.from_json(e.to_json()) == e


def _corrupt(proof: NDProof, rng: random.Random) -> NDProof:
    nodes = list(_paths(proof))
    path = rng.choice(nodes)
    replacement = rng.choice([F("p"), F("q"), F("r"), F("bot"), F("p -> q"), F("q -> p"),
                              F("(p -> bot) -> bot"), F("0=0"), F("forall x. x=0")])
    return _replace_at(proof, path, replacement)


def _paths(p, prefix=()):
    yield prefix
    for i, c in enumerate(p.children):
        yield from _paths(c, prefix + (i,))


def _replace_at(p, path, formula):
    if not path:
        return replace(p, formula=formula)
    kids = list(p.children)
    kids[path[0]] = _replace_at(kids[path[0]], path[1:], formula)
    return replace(p, children=tuple(kids))


def test_single_node_corruption_is_rejected():
    rng = random.Random(0)
    corpus = load_corpus()
    mutated = 0
    for _ in range(400):
        e = rng.choice(corpus)
        bad = _corrupt(e.proof, rng)
        if bad == e.proof:
            continue
        mutated += 1
        assert not check_nd(bad, e.sequent), e.name
    assert mutated > 300


def test_harness_small_universes():
    rows = soundness_harness(load_corpus(), [("p",), ("p", "q")])
    assert not [r for r in rows if r.status in ("violated", "invalid proof")]
    peirce = [r for r in rows if r.entry == "peirce" and r.universe == ("p", "q")]
    assert peirce[0].status == "verified" and peirce[0].bases == 256
    assert {r.status for r in rows if r.entry.startswith("forall")} == {"arith"}
    assert any(r.status == "not applicable" for r in rows)


def test_harness_flags_unsound_entry():
    # a "proof" of q from p that fails the checker is reported, not evaluated
    bogus = CorpusEntry("bogus", Sequent((F("p"),), F("q")), assume("p", "a"))
    rows = soundness_harness([bogus], [("p", "q")])
    assert rows[0].status == "invalid proof"

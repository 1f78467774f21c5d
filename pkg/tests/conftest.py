import pytest
from hypothesis import strategies as st

from ptsarith.syntax import (
    ZERO, Add, Atom, BOT, Const, Forall, Impl, Mul, Prop, Succ, Var,
)
from ptsarith.toy import ToyUniverse


@pytest.fixture(scope="session")
def pq():
    return ToyUniverse(("p", "q"))


def closed_terms(max_const=0, max_leaves=12):
    leaves = [st.just(ZERO)]
    if max_const:
        leaves.append(st.integers(1, max_const).map(Const))
    return st.recursive(
        st.one_of(*leaves),
        lambda sub: st.one_of(
            sub.map(Succ),
            st.tuples(sub, sub).map(lambda p: Add(*p)),
            st.tuples(sub, sub).map(lambda p: Mul(*p)),
        ),
        max_leaves=max_leaves,
    )


def open_terms(names=("x", "y", "z")):
    leaf = st.one_of(st.just(ZERO), st.sampled_from(names).map(Var))
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            sub.map(Succ),
            st.tuples(sub, sub).map(lambda p: Add(*p)),
            st.tuples(sub, sub).map(lambda p: Mul(*p)),
        ),
        max_leaves=6,
    )


def formulas(names=("x", "y")):
    atoms = st.one_of(
        st.tuples(open_terms(names), open_terms(names)).map(lambda p: Atom(*p)),
        st.sampled_from(["p", "q"]).map(Prop),
        st.just(BOT),
    )
    return st.recursive(
        atoms,
        lambda sub: st.one_of(
            st.tuples(sub, sub).map(lambda p: Impl(*p)),
            st.tuples(st.sampled_from(names), sub).map(lambda p: Forall(*p)),
        ),
        max_leaves=5,
    )


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record a PASS/FAIL line for an acceptance criterion."""
    results = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number: int, ok: bool, detail: str):
        results[number] = (ok, detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

"""Exact support over finite universes of 0-ary atoms.

A toy universe fixes finitely many atoms and the finite set of rules over
them (premise set, conclusion).  A base inside the universe is a bitmask over
that rule list, so the extension quantifier of the implication clause ranges
over the supermasks of a mask.  Support tables for every base at once are
boolean numpy arrays indexed by mask; the implication clause becomes a
down-closure over the subset lattice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from .rulebase import Base, RuleSchema
from .syntax import BASE_SIGNATURE, BOT, Bot, Formula, Impl, Prop, render

MAX_RULES = 24


class ToyFragmentError(ValueError):
    pass


def _down_closure(arr: np.ndarray, n_bits: int) -> np.ndarray:
    """``out[m]`` is True iff ``arr[m']`` for some supermask ``m'`` of m."""
    out = arr.copy()
    for r in range(n_bits):
        view = out.reshape(-1, 2, 1 << r)
        view[:, 0, :] |= view[:, 1, :]
    return out


def _bit_view(arr: np.ndarray, r: int) -> np.ndarray:
    """The entries of ``arr`` whose mask contains rule r."""
    return arr.reshape(-1, 2, 1 << r)[:, 1, :]


@dataclass(eq=False)
class ToyUniverse:
    """Atoms plus every rule ``P |- c`` with P a subset of the atoms.

    ``bot_atoms`` are the atoms the bot clause demands; by default all of
    ``atoms``.  ``extra`` atoms may occur in rules but not in the language of
    the formulas evaluated (used by the fresh-atom robustness check).
    """

    atoms: tuple[str, ...]
    extra: tuple[str, ...] = ()
    _tables: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.atoms = tuple(self.atoms)
        self.extra = tuple(self.extra)
        every = self.atoms + self.extra
        if len(set(every)) != len(every):
            raise ValueError("atom names must be distinct")
        if self.n_rules > MAX_RULES:
            raise ValueError(f"universe has {self.n_rules} rules; at most {MAX_RULES} supported")

    @property
    def all_atoms(self) -> tuple[str, ...]:
        return self.atoms + self.extra

    @cached_property
    def rules(self) -> tuple[tuple[frozenset, str], ...]:
        every = self.all_atoms
        out = []
        for pm in range(1 << len(every)):
            prem = frozenset(a for i, a in enumerate(every) if pm >> i & 1)
            for c in every:
                out.append((prem, c))
        return tuple(out)

    @property
    def n_rules(self) -> int:
        k = len(self.atoms) + len(self.extra)
        return k << k

    @property
    def n_bases(self) -> int:
        return 1 << self.n_rules

    @cached_property
    def _index(self) -> dict:
        return {r: i for i, r in enumerate(self.rules)}

    def with_fresh_atom(self, name: str | None = None) -> "ToyUniverse":
        taken = set(self.all_atoms)
        if name is None:
            name = next(f"f{i}" for i in itertools.count() if f"f{i}" not in taken)
        return ToyUniverse(self.atoms, self.extra + (name,))

    # -- bases -----------------------------------------------------------------

    def rule_schema(self, i: int) -> RuleSchema:
        prem, concl = self.rules[i]
        premises = tuple(Prop(a) for a in self.all_atoms if a in prem)
        return RuleSchema(f"r{i}", premises, Prop(concl))

    def base(self, mask: int) -> Base:
        schemas = tuple(self.rule_schema(i) for i in range(self.n_rules) if mask >> i & 1)
        return Base(f"toy{mask}", BASE_SIGNATURE, schemas)

    def mask_of(self, base: Base | Iterable[RuleSchema] | int) -> int:
        if isinstance(base, (int, np.integer)):
            if not 0 <= base < self.n_bases:
                raise ValueError("mask outside the rule universe")
            return int(base)
        schemas = base.schemas if isinstance(base, Base) else base
        mask = 0
        for s in schemas:
            if not isinstance(s.conclusion, Prop) or not all(isinstance(p, Prop) for p in s.premises):
                raise ToyFragmentError(f"rule {s.name} is not a rule over 0-ary atoms")
            key = (frozenset(p.name for p in s.premises), s.conclusion.name)
            if key not in self._index:
                raise ToyFragmentError(f"rule {s} is outside the rule universe")
            mask |= 1 << self._index[key]
        return mask

    def embed(self, other: "ToyUniverse", mask: int) -> int:
        """Map a mask of a smaller universe to the same rules in this one."""
        out = 0
        for i in range(other.n_rules):
            if mask >> i & 1:
                out |= 1 << self._index[other.rules[i]]
        return out

    # -- tables ------------------------------------------------------------------

    def _derived(self) -> dict[str, np.ndarray]:
        if "_derived" in self._tables:
            return self._tables["_derived"]
        n = self.n_bases
        derived = {a: np.zeros(n, dtype=bool) for a in self.all_atoms}
        changed = True
        while changed:
            changed = False
            for r, (prem, concl) in enumerate(self.rules):
                target = _bit_view(derived[concl], r)
                if prem:
                    ok = np.ones(target.shape, dtype=bool)
                    for p in prem:
                        ok &= _bit_view(derived[p], r)
                    new = ok & ~target
                else:
                    new = ~target
                if new.any():
                    target |= new
                    changed = True
        self._tables["_derived"] = derived
        return derived

    def check_formula(self, f: Formula) -> None:
        if isinstance(f, Prop):
            if f.name not in self.atoms:
                raise ToyFragmentError(f"atom {f.name} is not in the universe {self.atoms}")
        elif isinstance(f, Impl):
            self.check_formula(f.ante)
            self.check_formula(f.cons)
        elif not isinstance(f, Bot):
            raise ToyFragmentError(f"{render(f)} is outside the toy fragment (atoms, ->, bot)")

    def table(self, f: Formula) -> np.ndarray:
        """Boolean array: entry m says whether base m supports f."""
        key = ("f", f)
        hit = self._tables.get(key)
        if hit is not None:
            return hit
        if isinstance(f, Prop):
            self.check_formula(f)
            out = self._derived()[f.name]
        elif isinstance(f, Bot):
            derived = self._derived()
            out = np.ones(self.n_bases, dtype=bool)
            for a in self.atoms:
                out = out & derived[a]
        elif isinstance(f, Impl):
            out = self.entails_table([f.ante], f.cons)
        else:
            raise ToyFragmentError(f"{render(f)} is outside the toy fragment (atoms, ->, bot)")
        if len(self._tables) > self._cache_limit():
            self.clear_cache(keep_derived=True)
        self._tables[key] = out
        return out

    def entails_table(self, delta: Iterable[Formula], f: Formula) -> np.ndarray:
        delta = list(delta)
        if not delta:
            raise ValueError("the premise set must be non-empty")
        bad = ~self.table(f)
        for g in delta:
            bad = bad & self.table(g)
        return ~_down_closure(bad, self.n_rules)

    def _cache_limit(self) -> int:
        # keep memory bounded for the 2^24-base universes
        return 4096 if self.n_rules <= 12 else 24

    def clear_cache(self, keep_derived: bool = True) -> None:
        derived = self._tables.get("_derived")
        self._tables.clear()
        if keep_derived and derived is not None:
            self._tables["_derived"] = derived

    # -- direct evaluation (oracle) -------------------------------------------

    def closure(self, mask: int) -> set[str]:
        """Atoms derivable in base ``mask`` by naive forward chaining."""
        rules = [self.rules[i] for i in range(self.n_rules) if mask >> i & 1]
        known: set[str] = set()
        changed = True
        while changed:
            changed = False
            for prem, concl in rules:
                if concl not in known and prem <= known:
                    known.add(concl)
                    changed = True
        return known

    def supermasks(self, mask: int):
        free = [i for i in range(self.n_rules) if not mask >> i & 1]
        for bits in range(1 << len(free)):
            m = mask
            for j, i in enumerate(free):
                if bits >> j & 1:
                    m |= 1 << i
            yield m

    def supports_direct(self, mask: int, f: Formula) -> bool:
        """Clause-by-clause evaluation with explicit extension enumeration."""
        if isinstance(f, Prop):
            return f.name in self.closure(mask)
        if isinstance(f, Bot):
            return set(self.atoms) <= self.closure(mask)
        if isinstance(f, Impl):
            return self.entails_direct(mask, [f.ante], f.cons)
        raise ToyFragmentError(f"{render(f)} is outside the toy fragment")

    def entails_direct(self, mask: int, delta, f: Formula) -> bool:
        for m in self.supermasks(mask):
            if all(self.supports_direct(m, g) for g in delta) and not self.supports_direct(m, f):
                return False
        return True


def implication_depth(f: Formula) -> int:
    if isinstance(f, Impl):
        return 1 + max(implication_depth(f.ante), implication_depth(f.cons))
    return 0


def formulas_upto_depth(atoms: Iterable[str], depth: int) -> list[Formula]:
    """All formulas over the atoms, bot and -> with implication depth <= depth."""
    level = [Prop(a) for a in atoms] + [BOT]
    for _ in range(depth):
        level = [Prop(a) for a in atoms] + [BOT] + [Impl(a, b) for a in level for b in level]
    return level

"""Seeded generators for the property tests and the acceptance run: small
random minimal DFAs and random closed formulas with modular predicates."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .automata import Dfa, minimize
from .errors import GuardExceeded
from .logic import (And, Eq, Exists, Forall, Formula, Length, Letter, LetterAt, LetterMax,
                    LetterMin, Lt, Max, Min, Mod, Not, Or, TRUE, FALSE)
from .semigroup import SyntacticPresentation, syntactic_morphism

LETTERS = ("a", "b")


@dataclass(frozen=True, eq=False)
class Sample:
    dfa: Dfa
    monoid: SyntacticPresentation


def random_dfa(rng: random.Random, max_states: int = 6, max_letters: int = 2) -> Dfa:
    n = rng.randint(1, max_states)
    alphabet = LETTERS[:rng.randint(1, max_letters)]
    rows = tuple(tuple(rng.randrange(n) for _ in alphabet) for _ in range(n))
    finals = frozenset(q for q in range(n) if rng.random() < 0.5)
    return minimize(Dfa(alphabet, rows, 0, finals))


def language_corpus(count: int, seed: int = 0, max_states: int = 6, max_letters: int = 2,
                    max_monoid: int = 64) -> list[Sample]:
    """``count`` pairwise distinct minimal DFAs whose syntactic monoid has at
    most ``max_monoid`` elements. Deterministic in ``seed``."""
    rng = random.Random(seed)
    seen: set[Dfa] = set()
    out: list[Sample] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 1000 * count:
            raise RuntimeError("corpus generator cannot find enough distinct languages")
        d = random_dfa(rng, max_states, max_letters)
        if d in seen:
            continue
        seen.add(d)
        try:
            m = syntactic_morphism(d, max_elements=max_monoid)
        except GuardExceeded:
            continue
        out.append(Sample(d, m))
    return out


class _FormulaGen:
    def __init__(self, rng: random.Random, alphabet: tuple[str, ...], d: int, rank: int):
        self.rng, self.alphabet, self.d, self.rank = rng, alphabet, d, rank

    def modulus(self) -> int:
        # occasionally a divisor, so lcm lifting is exercised
        return 1 if self.rng.random() < 0.15 else self.d

    def atom(self, bound: tuple[str, ...]) -> Formula:
        r, A = self.rng, self.alphabet
        choices = ["const", "lmin", "lmax", "len"]
        if bound:
            choices += ["letter"] * 3 + ["at", "min", "max", "lt", "eq", "mod", "mod"]
        kind = r.choice(choices)
        x = r.choice(bound) if bound else None
        if kind == "const":
            return r.choice([TRUE, FALSE])
        if kind == "lmin":
            return LetterMin(r.choice(A), r.randrange(3))
        if kind == "lmax":
            return LetterMax(r.choice(A), r.randrange(3))
        if kind == "len":
            m = self.modulus()
            return Length(r.randrange(m), m)
        if kind == "letter":
            return Letter(r.choice(A), x)
        if kind == "at":
            return LetterAt(r.choice(A), x, r.choice([-1, 1, 2]))
        if kind == "min":
            return Min(x)
        if kind == "max":
            return Max(x)
        if kind in ("lt", "eq"):
            y = r.choice(bound)
            return Lt(x, y) if kind == "lt" else Eq(x, y)
        m = self.modulus()
        return Mod(r.randrange(m), m, x)

    def formula(self, depth: int, bound: tuple[str, ...], size: int) -> Formula:
        r = self.rng
        if size <= 1 or r.random() < 0.25:
            return self.atom(bound)
        options = ["not", "and", "or"]
        if depth < self.rank:
            options += ["exists", "forall"] * 2
        kind = r.choice(options)
        if kind == "not":
            return Not(self.formula(depth, bound, size - 1))
        if kind in ("and", "or"):
            k = r.randint(2, 3)
            parts = tuple(self.formula(depth, bound, size // k) for _ in range(k))
            return And(parts) if kind == "and" else Or(parts)
        var = "xy"[depth]
        body = self.formula(depth + 1, bound + (var,) if var not in bound else bound, size - 1)
        return Exists(var, body) if kind == "exists" else Forall(var, body)


def random_formula(rng: random.Random, alphabet: tuple[str, ...] = LETTERS, d: int = 2,
                   rank: int = 2, size: int = 10) -> Formula:
    """A closed formula over variables x, y with quantifier rank at most
    ``rank``; modular predicates use modulus ``d`` or 1."""
    return _FormulaGen(rng, alphabet, d, rank).formula(0, (), size)


def formula_corpus(count: int, seed: int = 0) -> list[tuple[Formula, tuple[str, ...], int]]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        alphabet = LETTERS[:rng.randint(1, 2)]
        d = rng.randint(1, 3)
        out.append((random_formula(rng, alphabet, d, rank=2, size=rng.randint(4, 14)), alphabet, d))
    return out

"""Finite monoids given by multiplication tables.

A :class:`SyntacticPresentation` carries one table for the whole monoid;
semigroup-level questions take an optional ``within`` subset of element
indices (for instance :attr:`SyntacticPresentation.semigroup_part`, the image
of non-empty words).
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .automata import Dfa, format_word, minimize
from .errors import AlgebraError, GuardExceeded, ParseError

DEFAULT_MAX_MONOID = 5000
DEFAULT_MAX_ASSIGNMENTS = 10**7

Subset = frozenset


# ---------------------------------------------------------------------------
# Presentations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SyntacticPresentation:
    """Multiplication table plus the data of a morphism from words.

    ``mult[x, y]`` is the product ``x·y``. ``element_words[x]`` is the
    shortlex-least word mapped to ``x`` (``None`` for elements with no
    generator word). ``origin`` maps elements back to a parent presentation
    when this one was obtained by :meth:`restrict`.
    """

    mult: np.ndarray
    identity: int | None = None
    letter_image: Mapping[str, int] = field(default_factory=dict)
    accepting: frozenset[int] = frozenset()
    element_words: tuple[tuple[str, ...] | None, ...] = ()
    origin: tuple[int, ...] | None = None

    def __post_init__(self):
        n = self.mult.shape[0]
        if self.mult.shape != (n, n):
            raise ValueError("multiplication table must be square")
        if not self.element_words:
            object.__setattr__(self, "element_words", (None,) * n)
        self.mult.setflags(write=False)

    @property
    def element_count(self) -> int:
        return self.mult.shape[0]

    @cached_property
    def elements(self) -> frozenset[int]:
        return frozenset(range(self.element_count))

    @cached_property
    def table(self) -> list[list[int]]:
        return self.mult.tolist()

    def mul(self, *xs: int) -> int:
        t = self.table
        acc = xs[0]
        for x in xs[1:]:
            acc = t[acc][x]
        return acc

    def image(self, word: Iterable[str]) -> int:
        """η(word); requires an identity for the empty word."""
        acc = self.identity
        for a in word:
            x = self.letter_image[a]
            acc = x if acc is None else self.table[acc][x]
        if acc is None:
            raise AlgebraError("the empty word has no image in a semigroup without identity")
        return acc

    @cached_property
    def semigroup_part(self) -> frozenset[int]:
        """Closure of the letter images: η(A^+)."""
        return closure(self, self.letter_image.values())

    @cached_property
    def omega_table(self) -> np.ndarray:
        out = np.array([_omega(self.table, x) for x in range(self.element_count)], dtype=np.int64)
        out.setflags(write=False)
        return out

    def describe(self, x: int) -> str:
        word = self.element_words[x]
        if word is None:
            return f"#{x}"
        return format_word(word) or "1"

    def is_associative(self) -> bool:
        return _assoc_exhaustive(self.mult)

    def restrict(self, subset: Iterable[int], identity: int | None = None) -> "SyntacticPresentation":
        """Sub-presentation on a multiplicatively closed ``subset``."""
        keep = sorted(set(subset))
        check_closed(self, keep)
        pos = {x: i for i, x in enumerate(keep)}
        sub = self.mult[np.ix_(keep, keep)]
        relabel = np.vectorize(pos.__getitem__, otypes=[np.int64])
        mult = relabel(sub) if sub.size else sub.astype(np.int64)
        root = self.origin
        return SyntacticPresentation(
            mult=mult,
            identity=pos[identity] if identity is not None else None,
            letter_image={},
            accepting=frozenset(pos[x] for x in keep if x in self.accepting),
            element_words=tuple(self.element_words[x] for x in keep),
            origin=tuple(root[x] for x in keep) if root else tuple(keep),
        )


def _assoc_exhaustive(m: np.ndarray) -> bool:
    # (xy)z == x(yz) for all x, y, z
    left = m[m, :]                 # left[x, y, z] = m[m[x, y], z]
    right = m[:, m]                # right[x, y, z] = m[x, m[y, z]]
    return bool(np.array_equal(left, right))


def from_table(table: Sequence[Sequence[int]], identity: int | None = None,
               accepting: Iterable[int] = ()) -> SyntacticPresentation:
    """Presentation of an abstract finite semigroup (no letters)."""
    mult = np.asarray(table, dtype=np.int64)
    p = SyntacticPresentation(mult=mult, identity=identity, accepting=frozenset(accepting))
    if identity is not None:
        n = p.element_count
        if not (np.array_equal(mult[identity], np.arange(n)) and np.array_equal(mult[:, identity], np.arange(n))):
            raise AlgebraError(f"element {identity} is not a two-sided identity")
    return p


def closure(s: SyntacticPresentation, generators: Iterable[int]) -> frozenset[int]:
    gens = sorted(set(generators))
    t = s.table
    seen = set(gens)
    queue = deque(gens)
    while queue:
        x = queue.popleft()
        for g in gens:
            y = t[x][g]
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return frozenset(seen)


def check_closed(s: SyntacticPresentation, subset: Iterable[int]) -> None:
    subset = np.fromiter(subset, dtype=np.int64)
    block = s.mult[np.ix_(subset, subset)]
    outside = ~np.isin(block, subset)
    if outside.any():
        i, j = np.argwhere(outside)[0]
        x, y = int(subset[i]), int(subset[j])
        raise AlgebraError(f"subset is not closed: {x}·{y} = {int(block[i, j])}")


def product_set(s: SyntacticPresentation, xs: Iterable[int], ys: Iterable[int]) -> frozenset[int]:
    t = s.table
    ys = list(ys)
    return frozenset(t[x][y] for x in xs for y in ys)


# ---------------------------------------------------------------------------
# Syntactic monoid
# ---------------------------------------------------------------------------

def transition_monoid(dfa: Dfa, max_elements: int = DEFAULT_MAX_MONOID) -> SyntacticPresentation:
    """Transition monoid of ``dfa`` as given (no minimisation).

    Elements are discovered breadth-first from the identity, letters in
    alphabet order, so element ``x`` is first reached by its shortlex-least
    word and element 0 is the identity (the image of ε).
    """
    n = dfa.state_count
    letters = dfa.alphabet
    gens = [tuple(dfa.transitions[q][a] for q in range(n)) for a in range(len(letters))]
    ident = tuple(range(n))
    index = {ident: 0}
    maps = [ident]
    words: list[tuple[str, ...]] = [()]
    parent: list[tuple[int, int]] = [(0, 0)]
    right: list[list[int]] = []
    i = 0
    while i < len(maps):
        f = maps[i]
        row = []
        for a, g in enumerate(gens):
            h = tuple(g[f[q]] for q in range(n))
            if h not in index:
                if len(maps) >= max_elements:
                    raise GuardExceeded("syntactic monoid", len(maps) + 1, max_elements, "--max-monoid")
                index[h] = len(maps)
                maps.append(h)
                words.append(words[i] + (letters[a],))
                parent.append((i, a))
            row.append(index[h])
        right.append(row)
        i += 1

    # x·(y a) = (x·y)·a, filled along the BFS tree
    size = len(maps)
    cayley = np.asarray(right, dtype=np.int64)
    mult = np.empty((size, size), dtype=np.int64)
    mult[:, 0] = np.arange(size)
    for y in range(1, size):
        p, a = parent[y]
        mult[:, y] = cayley[mult[:, p], a]

    accepting = frozenset(x for x, f in enumerate(maps) if f[dfa.initial] in dfa.finals)
    return SyntacticPresentation(
        mult=mult,
        identity=0,
        letter_image={a: cayley[0, i].item() for i, a in enumerate(letters)},
        accepting=accepting,
        element_words=tuple(words),
    )


def syntactic_morphism(lang: Dfa, max_elements: int = DEFAULT_MAX_MONOID) -> SyntacticPresentation:
    """Syntactic monoid of L: the transition monoid of its minimal DFA."""
    return transition_monoid(minimize(lang), max_elements)


# ---------------------------------------------------------------------------
# Idempotents and friends
# ---------------------------------------------------------------------------

def _omega(t: list[list[int]], x: int) -> int:
    p = x
    for _ in range(len(t)):
        if t[p][p] == p:
            return p
        p = t[p][x]
    raise AlgebraError("no idempotent power found; table is not associative")


def omega_power(s: SyntacticPresentation, x: int) -> int:
    return int(s.omega_table[x])


def _scope(s: SyntacticPresentation, within: Iterable[int] | None) -> list[int]:
    return sorted(s.elements if within is None else set(within))


def idempotents(s: SyntacticPresentation, within: Iterable[int] | None = None) -> frozenset[int]:
    t = s.table
    return frozenset(e for e in _scope(s, within) if t[e][e] == e)


def local_monoid(s: SyntacticPresentation, e: int, within: Iterable[int] | None = None) -> frozenset[int]:
    """e·X·e."""
    t = s.table
    if t[e][e] != e:
        raise AlgebraError(f"element {s.describe(e)} is not idempotent")
    return frozenset(t[t[e][x]][e] for x in _scope(s, within))


def idempotents_ideal(s: SyntacticPresentation, within: Iterable[int] | None = None) -> frozenset[int]:
    """X·E(X)·X with X ranging over ``within`` plus an implicit identity."""
    scope = _scope(s, within)
    check_closed(s, scope)
    t = s.table
    es = idempotents(s, scope)
    left = {t[x][e] for x in scope for e in es} | set(es)
    return frozenset(t[y][x] for y in left for x in scope) | left


def idempotents_category(s: SyntacticPresentation, within: Iterable[int] | None = None):
    from .category import idempotents_category as build
    return build(s, within)


# ---------------------------------------------------------------------------
# ω-terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Prod:
    factors: tuple

    def __str__(self):
        return " ".join(f"({f})" if isinstance(f, Prod) else str(f) for f in self.factors)


@dataclass(frozen=True)
class Omega:
    base: object

    def __str__(self):
        inner = str(self.base)
        return f"({inner})^w" if isinstance(self.base, Prod) else f"{inner}^w"


OmegaTerm = Var | Prod | Omega


def term_variables(term) -> list[str]:
    """Variables in order of first occurrence."""
    out: list[str] = []

    def walk(t):
        if isinstance(t, Var):
            if t.name not in out:
                out.append(t.name)
        elif isinstance(t, Prod):
            for f in t.factors:
                walk(f)
        else:
            walk(t.base)

    walk(term)
    return out


_TOKEN = re.compile(r"\s*(?:(\^\s*w\b)|(\^\s*\d+)|(\()|(\))|([A-Za-z_][A-Za-z0-9_']*))")


def parse_term(text: str, multi_letter: bool = False):
    """Parse ``y (x y)^w`` style terms.

    With ``multi_letter`` false, a run like ``xy`` is read as two variables;
    otherwise names are whitespace-separated identifiers (edge names such as
    ``m1``). ``^N`` is shorthand for N-fold repetition.
    """
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected {text[pos:].strip()[:1]!r} in term {text!r}", pos)
        if m.group(1):
            tokens.append(("omega", "w", m.start(1)))
        elif m.group(2):
            tokens.append(("pow", m.group(2).lstrip("^ \t"), m.start(2)))
        elif m.group(3):
            tokens.append(("(", "(", m.start(3)))
        elif m.group(4):
            tokens.append((")", ")", m.start(4)))
        else:
            name = m.group(5)
            if multi_letter:
                tokens.append(("var", name, m.start(5)))
            else:
                for k, c in enumerate(name):
                    if not c.isalpha():
                        raise ParseError(f"variables are single letters, got {name!r}", m.start(5) + k)
                    tokens.append(("var", c, m.start(5) + k))
        pos = m.end()

    i = 0

    def product():
        nonlocal i
        factors = []
        while i < len(tokens) and tokens[i][0] in ("var", "("):
            kind, val, p = tokens[i]
            i += 1
            if kind == "var":
                f = Var(val)
            else:
                f = product()
                if i >= len(tokens) or tokens[i][0] != ")":
                    raise ParseError("missing ')'", p)
                i += 1
            while i < len(tokens) and tokens[i][0] in ("omega", "pow"):
                kind, val, _ = tokens[i]
                i += 1
                if kind == "omega":
                    f = Omega(f)
                else:
                    k = int(val)
                    if k < 1:
                        raise ParseError("exponent must be positive", tokens[i - 1][2])
                    f = Prod((f,) * k) if k > 1 else f
            factors.append(f)
        if not factors:
            p = tokens[i][2] if i < len(tokens) else len(text)
            raise ParseError(f"empty term in {text!r}", p)
        return factors[0] if len(factors) == 1 else Prod(tuple(factors))

    term = product()
    if i != len(tokens):
        raise ParseError(f"unexpected {tokens[i][1]!r}", tokens[i][2])
    return term


@dataclass(frozen=True)
class IdentitySet:
    name: str
    equations: tuple[tuple[object, object], ...]

    @property
    def variables(self) -> list[str]:
        out: list[str] = []
        for lhs, rhs in self.equations:
            for v in term_variables(lhs) + term_variables(rhs):
                if v not in out:
                    out.append(v)
        return out

    def render(self) -> list[str]:
        return [f"{lhs} = {rhs}" for lhs, rhs in self.equations]


def parse_equation(line: str, multi_letter: bool = False) -> tuple[object, object]:
    lhs, sep, rhs = line.partition("=")
    if not sep or "=" in rhs:
        raise ParseError(f"equation needs exactly one '=': {line!r}")
    return parse_term(lhs, multi_letter), parse_term(rhs, multi_letter)


def parse_identity_file(text: str, name: str = "custom") -> IdentitySet:
    eqs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            eqs.append(parse_equation(line))
        except ParseError as e:
            raise ParseError(str(e), e.position, lineno) from None
    if not eqs:
        raise ParseError("identity file contains no equation")
    return IdentitySet(name, tuple(eqs))


def _ids(name: str, *lines: str) -> IdentitySet:
    return IdentitySet(name, tuple(parse_equation(line) for line in lines))


BUILTIN_IDENTITIES: dict[str, IdentitySet] = {
    "A": _ids("A", "x^w = x^w x"),
    "ACom": _ids("ACom", "x^w = x^w x", "x y = y x"),
    "Com": _ids("Com", "x y = y x"),
    "DA": _ids("DA", "(x y)^w = (x y)^w x (x y)^w"),
    "J1": _ids("J1", "x x = x", "x y = y x"),
    "J": _ids("J", "y (x y)^w = (x y)^w", "(x y)^w = (x y)^w x"),
    "FO[+1]": _ids("FO[+1]", "x^w u y^w v x^w w y^w = x^w w y^w v x^w u y^w"),
}


def identities_union(name: str, *sets: IdentitySet) -> IdentitySet:
    return IdentitySet(name, tuple(eq for ids in sets for eq in ids.equations))


def identity_set(name: str) -> IdentitySet:
    try:
        return BUILTIN_IDENTITIES[name]
    except KeyError:
        raise KeyError(f"unknown identity set {name!r}; known: {', '.join(BUILTIN_IDENTITIES)}") from None


def evaluate_term(term, assignment: Mapping[str, int], mul, omega) -> int:
    """Evaluate with caller-supplied product and ω operations (scalar or numpy)."""
    if isinstance(term, Var):
        return assignment[term.name]
    if isinstance(term, Omega):
        return omega(evaluate_term(term.base, assignment, mul, omega))
    acc = None
    for f in term.factors:
        v = evaluate_term(f, assignment, mul, omega)
        acc = v if acc is None else mul(acc, v)
    return acc


@dataclass(frozen=True)
class IdentityVerdict:
    holds: bool
    equation: tuple[object, object] | None = None
    assignment: dict[str, int] | None = None
    lhs: int | None = None
    rhs: int | None = None

    def __bool__(self):
        return self.holds


def first_failure(values: Sequence[Sequence[int]], evaluate) -> tuple[tuple[int, ...], int, int] | None:
    """Scan the product of ``values`` in lexicographic order, vectorised in
    chunks; ``evaluate(columns)`` returns (lhs, rhs) arrays. Returns the
    least failing tuple with its two sides."""
    if any(len(v) == 0 for v in values):
        return None
    arrays = [np.asarray(v, dtype=np.int64) for v in values]
    k = len(arrays)
    if k == 0:
        lhs, rhs = evaluate([])
        lhs, rhs = np.asarray(lhs).ravel(), np.asarray(rhs).ravel()
        return ((), int(lhs[0]), int(rhs[0])) if lhs[0] != rhs[0] else None
    sizes = [len(a) for a in arrays]
    # split on a prefix of variables so each chunk stays near 2^20 tuples
    split = 0
    tail = int(np.prod(sizes, dtype=np.int64))
    while split < k and tail > (1 << 20):
        tail //= sizes[split]
        split += 1
    grids = np.meshgrid(*arrays[split:], indexing="ij") if split < k else []
    tail_cols = [g.ravel() for g in grids]
    width = tail_cols[0].size if tail_cols else 1
    for prefix in itertools.product(*arrays[:split]):
        cols = [np.full(width, p, dtype=np.int64) for p in prefix] + tail_cols
        lhs, rhs = evaluate(cols)
        lhs = np.broadcast_to(lhs, (width,))
        rhs = np.broadcast_to(rhs, (width,))
        bad = np.flatnonzero(lhs != rhs)
        if bad.size:
            j = int(bad[0])
            return tuple(int(c[j]) for c in cols), int(lhs[j]), int(rhs[j])
    return None


def _omega_only(term) -> tuple[set[str], set[str]]:
    """(variables seen directly under ω, variables seen elsewhere)."""
    if isinstance(term, Var):
        return set(), {term.name}
    if isinstance(term, Omega):
        if isinstance(term.base, Var):
            return {term.base.name}, set()
        return _omega_only(term.base)
    under, bare = set(), set()
    for f in term.factors:
        u, b = _omega_only(f)
        under |= u
        bare |= b
    return under, bare


def check_identity(s: SyntacticPresentation, ids: IdentitySet, within: Iterable[int] | None = None,
                   max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> IdentityVerdict:
    """Exhaustive check of every equation over assignments into ``within``.

    Assignments are enumerated lexicographically (variables in sorted order,
    elements ascending); the first failing equation's least failing
    assignment is returned as the witness.

    A variable that only occurs as ``x^w`` is first scanned over the
    ω-images of the scope, which decides the equation; the full scan runs
    only to locate the canonical witness once a failure is known.
    """
    scope = _scope(s, within)
    mult, omega = s.mult, s.omega_table
    mul = lambda a, b: mult[a, b]
    om = lambda a: omega[a]
    idem_scope = sorted({int(omega[x]) for x in scope})
    for lhs_t, rhs_t in ids.equations:
        names = sorted(set(term_variables(lhs_t)) | set(term_variables(rhs_t)))
        under_l, bare_l = _omega_only(lhs_t)
        under_r, bare_r = _omega_only(rhs_t)
        reducible = (under_l | under_r) - (bare_l | bare_r)
        ranges = [idem_scope if v in reducible else scope for v in names]
        total = 1
        for r in ranges:
            total *= len(r)
        if total > max_assignments:
            raise GuardExceeded(f"identity check over {len(names)} variables", total,
                                max_assignments, "--max-assignments")

        def evaluate(cols, names=names, lhs_t=lhs_t, rhs_t=rhs_t):
            env = dict(zip(names, cols))
            return evaluate_term(lhs_t, env, mul, om), evaluate_term(rhs_t, env, mul, om)

        hit = first_failure(ranges, evaluate)
        if hit is None:
            continue
        if reducible:
            # a failing tuple exists, so the full scan stops no later than it
            hit = first_failure([scope] * len(names), evaluate)
        values, lv, rv = hit
        return IdentityVerdict(False, (lhs_t, rhs_t), dict(zip(names, values)), lv, rv)
    return IdentityVerdict(True)


# ---------------------------------------------------------------------------
# Division (test oracle)
# ---------------------------------------------------------------------------

def _subsemigroups(t: SyntacticPresentation, min_size: int) -> Iterable[list[int]]:
    n = t.element_count
    seen: set[frozenset[int]] = set()
    for r in range(1, n + 1):
        for gens in itertools.combinations(range(n), r):
            sub = closure(t, gens)
            if len(sub) >= min_size and sub not in seen:
                seen.add(sub)
                yield sorted(sub)


def _onto_morphism_exists(s: SyntacticPresentation, t: SyntacticPresentation, dom: list[int]) -> bool:
    st, tt = s.table, t.table
    n_s = s.element_count
    assign: dict[int, int] = {}

    def consistent(x: int) -> bool:
        fx = assign[x]
        for y, fy in assign.items():
            xy, yx = tt[x][y], tt[y][x]
            if xy in assign and assign[xy] != st[fx][fy]:
                return False
            if yx in assign and assign[yx] != st[fy][fx]:
                return False
        return True

    def search(i: int) -> bool:
        if i == len(dom):
            return len(set(assign.values())) == n_s
        missing = n_s - len(set(assign.values()))
        if missing > len(dom) - i:
            return False
        x = dom[i]
        for v in range(n_s):
            assign[x] = v
            if consistent(x) and search(i + 1):
                return True
            del assign[x]
        return False

    return search(0)


def divides_bruteforce(s: SyntacticPresentation, t: SyntacticPresentation, cap: int = 8) -> bool:
    """Is ``s`` a quotient of a subsemigroup of ``t``? Exhaustive search."""
    if t.element_count > cap:
        raise GuardExceeded("division search", t.element_count, cap)
    if s.element_count > t.element_count:
        return False
    return any(_onto_morphism_exists(s, t, dom) for dom in _subsemigroups(t, s.element_count))

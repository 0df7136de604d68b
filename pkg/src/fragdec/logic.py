"""First-order formulas on words with order, descriptive local predicates
and modular predicates; a brute-force model checker; alternation counting;
and the rewrites between modular predicates and residue-labelled letters.

Positions are 0-based. On the empty word ∃ is false, ∀ is true, and a
descriptive predicate pointing outside the word is false.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

from .automata import enriched_symbol, is_enriched, parse_symbol, words_upto
from .errors import AlphabetError, FragdecError, ParseError


class FreeVariableError(FragdecError):
    pass


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Letter:
    letter: str
    var: str


@dataclass(frozen=True)
class LetterAt:
    """a(x + k)."""
    letter: str
    var: str
    offset: int


@dataclass(frozen=True)
class LetterMin:
    """a(min + k)."""
    letter: str
    offset: int


@dataclass(frozen=True)
class LetterMax:
    """a(max - k)."""
    letter: str
    offset: int


@dataclass(frozen=True)
class Min:
    var: str


@dataclass(frozen=True)
class Max:
    var: str


@dataclass(frozen=True)
class Lt:
    left: str
    right: str


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Mod:
    """MOD_i^d(x)."""
    residue: int
    modulus: int
    var: str

    def __post_init__(self):
        _check_residue(self.residue, self.modulus)


@dataclass(frozen=True)
class Length:
    """D_i^d: the word length is i mod d."""
    residue: int
    modulus: int

    def __post_init__(self):
        _check_residue(self.residue, self.modulus)


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = (Const | Letter | LetterAt | LetterMin | LetterMax | Min | Max | Lt | Eq
           | Mod | Length | Not | And | Or | Exists | Forall)

TRUE, FALSE = Const(True), Const(False)
ATOMS = (Const, Letter, LetterAt, LetterMin, LetterMax, Min, Max, Lt, Eq, Mod, Length)
LETTER_ATOMS = (Letter, LetterAt, LetterMin, LetterMax)


def _check_residue(i: int, d: int) -> None:
    if d < 1 or not 0 <= i < d:
        raise ValueError(f"need 0 <= {i} < {d}")


def conj(*parts: Formula) -> Formula:
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def disj(*parts: Formula) -> Formula:
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, (Exists, Forall)):
        return (f.body,)
    return ()


def rebuild(f: Formula, kids: Sequence[Formula]) -> Formula:
    if isinstance(f, Not):
        return Not(kids[0])
    if isinstance(f, And):
        return And(tuple(kids))
    if isinstance(f, Or):
        return Or(tuple(kids))
    if isinstance(f, Exists):
        return Exists(f.var, kids[0])
    if isinstance(f, Forall):
        return Forall(f.var, kids[0])
    return f


def map_atoms(f: Formula, fn) -> Formula:
    if isinstance(f, ATOMS):
        return fn(f)
    return rebuild(f, [map_atoms(k, fn) for k in children(f)])


def atoms(f: Formula) -> Iterable[Formula]:
    if isinstance(f, ATOMS):
        yield f
    for k in children(f):
        yield from atoms(k)


def free_variables(f: Formula) -> set[str]:
    if isinstance(f, (Exists, Forall)):
        return free_variables(f.body) - {f.var}
    if isinstance(f, (Letter, LetterAt, Min, Max, Mod)):
        return {f.var}
    if isinstance(f, (Lt, Eq)):
        return {f.left, f.right}
    out: set[str] = set()
    for k in children(f):
        out |= free_variables(k)
    return out


def variable_names(f: Formula) -> set[str]:
    out = set()
    for a in atoms(f):
        out |= free_variables(a)

    def walk(g):
        if isinstance(g, (Exists, Forall)):
            out.add(g.var)
        for k in children(g):
            walk(k)

    walk(f)
    return out


def moduli(f: Formula) -> set[int]:
    return {a.modulus for a in atoms(f) if isinstance(a, (Mod, Length))}


def letters_used(f: Formula) -> set[str]:
    return {a.letter for a in atoms(f) if isinstance(a, LETTER_ATOMS)}


# ---------------------------------------------------------------------------
# Semantics
# ---------------------------------------------------------------------------

def _holds(f: Formula, w: Sequence[str], env: dict[str, int]) -> bool:
    n = len(w)
    match f:
        case Const(value):
            return value
        case Letter(a, x):
            return w[_pos(env, x)] == a
        case LetterAt(a, x, k):
            p = _pos(env, x) + k
            return 0 <= p < n and w[p] == a
        case LetterMin(a, k):
            return 0 <= k < n and w[k] == a
        case LetterMax(a, k):
            p = n - 1 - k
            return 0 <= p < n and w[p] == a
        case Min(x):
            return _pos(env, x) == 0
        case Max(x):
            return _pos(env, x) == n - 1
        case Lt(x, y):
            return _pos(env, x) < _pos(env, y)
        case Eq(x, y):
            return _pos(env, x) == _pos(env, y)
        case Mod(i, d, x):
            return _pos(env, x) % d == i
        case Length(i, d):
            return n % d == i
        case Not(body):
            return not _holds(body, w, env)
        case And(parts):
            return all(_holds(p, w, env) for p in parts)
        case Or(parts):
            return any(_holds(p, w, env) for p in parts)
        case Exists(x, body):
            saved = env.get(x)
            try:
                for p in range(n):
                    env[x] = p
                    if _holds(body, w, env):
                        return True
                return False
            finally:
                _restore(env, x, saved)
        case Forall(x, body):
            saved = env.get(x)
            try:
                for p in range(n):
                    env[x] = p
                    if not _holds(body, w, env):
                        return False
                return True
            finally:
                _restore(env, x, saved)
    raise TypeError(f"not a formula: {f!r}")


def _pos(env: dict[str, int], x: str) -> int:
    try:
        return env[x]
    except KeyError:
        raise FreeVariableError(f"free variable {x!r}") from None


def _restore(env: dict[str, int], x: str, saved: int | None) -> None:
    if saved is None:
        env.pop(x, None)
    else:
        env[x] = saved


def evaluate(f: Formula, w: Sequence[str]) -> bool:
    return _holds(f, w, {})


def language_upto(f: Formula, alphabet: Sequence[str], n: int) -> set[tuple[str, ...]]:
    return {w for w in words_upto(alphabet, n) if evaluate(f, w)}


# ---------------------------------------------------------------------------
# Alternation
# ---------------------------------------------------------------------------

def _levels(f: Formula, positive: bool) -> tuple[int, int]:
    """(least k with f in Σ_k, least k with f in Π_k), negation pushed in
    by tracking polarity."""
    if isinstance(f, ATOMS):
        return 0, 0
    if isinstance(f, Not):
        return _levels(f.body, not positive)
    if isinstance(f, (And, Or)):
        sub = [_levels(p, positive) for p in f.parts]
        return max(s for s, _ in sub), max(p for _, p in sub)
    sig, pi = _levels(f.body, positive)
    existential = isinstance(f, Exists) == positive
    if existential:
        s = min(max(1, sig), pi + 1)
        return s, s + 1
    p = min(max(1, pi), sig + 1)
    return p + 1, p


def _branch_blocks(f: Formula, positive: bool, last: str | None) -> int:
    if isinstance(f, ATOMS):
        return 0
    if isinstance(f, Not):
        return _branch_blocks(f.body, not positive, last)
    if isinstance(f, (And, Or)):
        return max(_branch_blocks(p, positive, last) for p in f.parts)
    kind = "E" if isinstance(f, Exists) == positive else "A"
    return (kind != last) + _branch_blocks(f.body, positive, kind)


def alternation_depth(f: Formula, two_variable: bool = False) -> int:
    """Quantifier blocks of a best prenex form, or with ``two_variable`` the
    largest number of blocks along a root-to-leaf branch of the
    negation-normal parse tree."""
    if two_variable:
        names = variable_names(f)
        if len(names) > 2:
            raise ValueError(f"two-variable counting refuses formulas over {sorted(names)}")
        return _branch_blocks(f, True, None)
    return min(_levels(f, True))


def quantifier_skeleton(f: Formula):
    """Nested quantifier/connective structure with leaves erased."""
    if isinstance(f, ATOMS):
        return "leaf"
    if isinstance(f, (Exists, Forall)):
        return (type(f).__name__, f.var, quantifier_skeleton(f.body))
    if isinstance(f, Not):
        return ("Not", quantifier_skeleton(f.body))
    return (type(f).__name__, tuple(quantifier_skeleton(p) for p in f.parts))


def quantifier_tree(f: Formula):
    """Only the quantifiers, nested as they occur."""
    if isinstance(f, (Exists, Forall)):
        return ((type(f).__name__, f.var, quantifier_tree(f.body)),)
    out = ()
    for k in children(f):
        out += quantifier_tree(k)
    return out


# ---------------------------------------------------------------------------
# Modular rewrites
# ---------------------------------------------------------------------------

def lift_moduli(f: Formula, d: int | None = None) -> Formula:
    """Rewrite every MOD/D predicate to modulus ``d`` (default: the lcm of
    those occurring); each old modulus must divide ``d``."""
    ms = moduli(f)
    if d is None:
        d = reduce(math.lcm, ms, 1)
    for m in ms:
        if d % m:
            raise ValueError(f"modulus {m} does not divide {d}")

    def lift(a):
        if isinstance(a, Mod) and a.modulus != d:
            return disj(*[Mod(j, d, a.var) for j in range(a.residue, d, a.modulus)])
        if isinstance(a, Length) and a.modulus != d:
            return disj(*[Length(j, d) for j in range(a.residue, d, a.modulus)])
        return a

    return map_atoms(f, lift)


def decompose_D(f: Formula, d: int) -> list[Formula]:
    """ψ_i: D_i^d replaced by true and every other D_j^d by false."""
    bad = {a.modulus for a in atoms(f) if isinstance(a, Length) and a.modulus != d}
    if bad:
        raise ValueError(f"length predicates with moduli {sorted(bad)} differ from {d}; lift_moduli first")
    return [map_atoms(f, lambda a, i=i: Const(a.residue == i) if isinstance(a, Length) else a)
            for i in range(d)]


def _letter_set(f: Formula) -> tuple[tuple, frozenset[str]] | None:
    """If f is a letter atom or a disjunction of letter atoms sharing a
    position term, return (position key, letters)."""
    def key(a):
        if isinstance(a, Letter):
            return ("at", a.var, 0)
        if isinstance(a, LetterAt):
            return ("at", a.var, a.offset) if a.offset else ("at", a.var, 0)
        if isinstance(a, LetterMin):
            return ("min", a.offset)
        if isinstance(a, LetterMax):
            return ("max", a.offset)
        return None

    parts = f.parts if isinstance(f, Or) else (f,)
    keys = {key(p) for p in parts}
    if len(keys) != 1 or None in keys:
        return None
    return keys.pop(), frozenset(p.letter for p in parts)


def _letter_atom(key: tuple, letter: str) -> Formula:
    if key[0] == "at":
        return Letter(letter, key[1]) if key[2] == 0 else LetterAt(letter, key[1], key[2])
    if key[0] == "min":
        return LetterMin(letter, key[1])
    return LetterMax(letter, key[1])


def merge_letter_conjunctions(f: Formula, order: Sequence[str]) -> Formula:
    """Inside each conjunction, intersect letter sets read at the same
    position (one position carries exactly one letter); an empty
    intersection becomes false. Quantifiers are untouched."""
    kids = [merge_letter_conjunctions(k, order) for k in children(f)]
    f = rebuild(f, kids)
    if not isinstance(f, And):
        return f
    groups: dict[tuple, frozenset[str]] = {}
    slots: list[object] = []
    for p in f.parts:
        ls = _letter_set(p)
        if ls is None:
            slots.append(p)
            continue
        k, letters = ls
        if k in groups:
            groups[k] &= letters
        else:
            groups[k] = letters
            slots.append(k)
    out = []
    for s in slots:
        if isinstance(s, tuple) and s in groups:
            letters = [a for a in order if a in groups[s]]
            out.append(disj(*[_letter_atom(s, a) for a in letters]) if letters else FALSE)
        else:
            out.append(s)
    return conj(*out)


def mod_to_letters(f: Formula, d: int, alphabet: Sequence[str], simplify: bool = True) -> Formula:
    """Move MOD^d information into residue-labelled letters ``a@i``.

    a(x) becomes the disjunction of (a, i)(x) over residues i, and
    MOD_i^d(x) the disjunction of (a, i)(x) over letters a.
    """
    for a in atoms(f):
        if isinstance(a, Length):
            raise ValueError("length predicate present; apply decompose_D first")
        if isinstance(a, Mod) and a.modulus != d:
            raise ValueError(f"modulus {a.modulus} differs from {d}")

    def rewrite(a):
        if isinstance(a, Mod):
            return disj(*[Letter(enriched_symbol(b, a.residue), a.var) for b in alphabet])
        if isinstance(a, LETTER_ATOMS):
            if is_enriched(a.letter):
                raise AlphabetError(f"letter {a.letter!r} is already enriched")
            return disj(*[_relabel(a, enriched_symbol(a.letter, i)) for i in range(d)])
        return a

    out = map_atoms(f, rewrite)
    if simplify:
        out = merge_letter_conjunctions(out, [enriched_symbol(b, i) for b in alphabet for i in range(d)])
    return out


def _relabel(a, letter: str):
    if isinstance(a, Letter):
        return Letter(letter, a.var)
    if isinstance(a, LetterAt):
        return LetterAt(letter, a.var, a.offset)
    if isinstance(a, LetterMin):
        return LetterMin(letter, a.offset)
    return LetterMax(letter, a.offset)


def letters_to_mod(f: Formula, d: int | None = None) -> Formula:
    """(a, i)(x) becomes a(x) ∧ MOD_i^d(x); positional variants shift the
    residue by the offset (a(max - k) uses a length predicate)."""
    found = {parse_symbol(a.letter)[1] for a in atoms(f) if isinstance(a, LETTER_ATOMS)}
    if d is None:
        raise ValueError("the modulus of the enriched alphabet is required")
    if any(r >= d for r in found):
        raise ValueError(f"residue out of range for modulus {d}")

    def rewrite(a):
        if not isinstance(a, LETTER_ATOMS):
            return a
        letter, i = parse_symbol(a.letter)
        if isinstance(a, Letter):
            return conj(Letter(letter, a.var), Mod(i, d, a.var))
        if isinstance(a, LetterAt):
            return conj(LetterAt(letter, a.var, a.offset), Mod((i - a.offset) % d, d, a.var))
        if isinstance(a, LetterMin):
            return conj(LetterMin(letter, a.offset), Const(a.offset % d == i))
        return conj(LetterMax(letter, a.offset), Length((i + 1 + a.offset) % d, d))

    return map_atoms(f, rewrite)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_SEXP = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _read_sexp(text: str):
    stack: list[list] = [[]]
    pos = 0
    while True:
        m = _SEXP.match(text, pos)
        if not m or m.end() == pos:
            break
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", m.start(2))
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append((m.group(3), m.start(3)))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError("unexpected trailing text", pos)
    if len(stack) != 1:
        raise ParseError("missing ')'", len(text))
    if len(stack[0]) != 1:
        raise ParseError("expected exactly one formula")
    return stack[0][0]


def _int(tok) -> int:
    text, pos = tok
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"expected an integer, got {text!r}", pos) from None


def _build(node) -> Formula:
    if isinstance(node, tuple):
        text, pos = node
        if text == "true":
            return TRUE
        if text == "false":
            return FALSE
        raise ParseError(f"unexpected atom {text!r}", pos)
    if not node or not isinstance(node[0], tuple):
        raise ParseError("expected an operator")
    op, pos = node[0]
    args = node[1:]

    def names(k):
        if len(args) != k or not all(isinstance(a, tuple) for a in args):
            raise ParseError(f"{op} takes {k} plain arguments", pos)
        return [a[0] for a in args]

    if op in ("not",):
        if len(args) != 1:
            raise ParseError("not takes one argument", pos)
        return Not(_build(args[0]))
    if op in ("and", "or"):
        if not args:
            raise ParseError(f"{op} needs arguments", pos)
        parts = tuple(_build(a) for a in args)
        return And(parts) if op == "and" else Or(parts)
    if op in ("exists", "forall"):
        if len(args) != 2 or not isinstance(args[0], tuple):
            raise ParseError(f"{op} takes a variable and a body", pos)
        body = _build(args[1])
        return Exists(args[0][0], body) if op == "exists" else Forall(args[0][0], body)
    if op == "letter":
        a, x = names(2)
        return Letter(a, x)
    if op == "letter-at":
        a, x, k = names(3)
        return LetterAt(a, x, _int((k, pos)))
    if op == "letter-min":
        a, k = names(2)
        return LetterMin(a, _int((k, pos)))
    if op == "letter-max":
        a, k = names(2)
        return LetterMax(a, _int((k, pos)))
    if op in ("min", "max"):
        (x,) = names(1)
        return Min(x) if op == "min" else Max(x)
    if op in ("lt", "eq"):
        x, y = names(2)
        return Lt(x, y) if op == "lt" else Eq(x, y)
    try:
        if op == "mod":
            i, d, x = names(3)
            return Mod(_int((i, pos)), _int((d, pos)), x)
        if op == "D":
            i, d = names(2)
            return Length(_int((i, pos)), _int((d, pos)))
    except ValueError as e:
        raise ParseError(str(e), pos) from None
    raise ParseError(f"unknown operator {op!r}", pos)


def parse_formula(text: str) -> Formula:
    return _build(_read_sexp(text))


def format_formula(f: Formula) -> str:
    match f:
        case Const(value):
            return "true" if value else "false"
        case Letter(a, x):
            return f"(letter {a} {x})"
        case LetterAt(a, x, k):
            return f"(letter-at {a} {x} {k:+d})"
        case LetterMin(a, k):
            return f"(letter-min {a} {k})"
        case LetterMax(a, k):
            return f"(letter-max {a} {k})"
        case Min(x):
            return f"(min {x})"
        case Max(x):
            return f"(max {x})"
        case Lt(x, y):
            return f"(lt {x} {y})"
        case Eq(x, y):
            return f"(eq {x} {y})"
        case Mod(i, d, x):
            return f"(mod {i} {d} {x})"
        case Length(i, d):
            return f"(D {i} {d})"
        case Not(body):
            return f"(not {format_formula(body)})"
        case And(parts):
            return "(and " + " ".join(map(format_formula, parts)) + ")"
        case Or(parts):
            return "(or " + " ".join(map(format_formula, parts)) + ")"
        case Exists(x, body):
            return f"(exists {x} {format_formula(body)})"
        case Forall(x, body):
            return f"(forall {x} {format_formula(body)})"
    raise TypeError(f"not a formula: {f!r}")

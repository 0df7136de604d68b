"""Complete DFAs, regex/DFA-file loading, boolean operations and the
enriched-alphabet constructions (residue-labelled letters ``a@i``).

Every construction returns a minimal DFA with states numbered breadth-first
from the initial state (letters explored in alphabet order), so two DFAs over
the same alphabet recognise the same language iff they compare equal.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import AlphabetError, ParseError

Word = Sequence[str]

RESERVED = set("|*+().@ \t\r\n")


# ---------------------------------------------------------------------------
# Symbols and words
# ---------------------------------------------------------------------------

def enriched_symbol(letter: str, residue: int) -> str:
    return f"{letter}@{residue}"


def parse_symbol(symbol: str) -> tuple[str, int]:
    """Split ``a@i`` into ``("a", i)``."""
    letter, sep, residue = symbol.rpartition("@")
    if not sep or not letter or not residue.isdigit():
        raise AlphabetError(f"{symbol!r} is not an enriched letter")
    return letter, int(residue)


def is_enriched(symbol: str) -> bool:
    return re.fullmatch(r".+@\d+", symbol) is not None


def enriched_alphabet(alphabet: Sequence[str], d: int) -> tuple[str, ...]:
    """A x Z_d, letter-major."""
    if d < 1:
        raise ValueError("modulus must be positive")
    return tuple(enriched_symbol(a, r) for a in alphabet for r in range(d))


def check_alphabet(letters: Iterable[str]) -> tuple[str, ...]:
    letters = tuple(letters)
    if not letters:
        raise AlphabetError("alphabet must be non-empty")
    if len(set(letters)) != len(letters):
        raise AlphabetError(f"duplicate letters in alphabet {letters}")
    return letters


def split_word(text: str, alphabet: Sequence[str]) -> list[str]:
    """Read a word: characters for plain alphabets, whitespace-separated
    tokens when any symbol is longer than one character."""
    if all(len(a) == 1 for a in alphabet):
        return [c for c in text if not c.isspace()]
    return text.split()


def format_word(word: Word) -> str:
    if all(len(a) == 1 for a in word):
        return "".join(word)
    return " ".join(word)


def words_upto(alphabet: Sequence[str], n: int) -> Iterator[tuple[str, ...]]:
    """All words of length <= n in shortlex order."""
    for length in range(n + 1):
        yield from itertools.product(alphabet, repeat=length)


@dataclass(frozen=True)
class EnrichedWord:
    """A word over A x Z_d, kept as (letter, residue) pairs."""

    pairs: tuple[tuple[str, int], ...]
    modulus: int

    def __post_init__(self):
        for _, r in self.pairs:
            if not 0 <= r < self.modulus:
                raise ValueError(f"residue {r} out of range for modulus {self.modulus}")

    def __len__(self) -> int:
        return len(self.pairs)

    def symbols(self) -> tuple[str, ...]:
        return tuple(enriched_symbol(a, r) for a, r in self.pairs)

    def underlying(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.pairs)

    def is_wellformed(self) -> bool:
        return all(r == j % self.modulus for j, (_, r) in enumerate(self.pairs))

    def __str__(self) -> str:
        return "".join(f"({a},{r})" for a, r in self.pairs) or "ε"


def encode_alpha(u: Word, i: int, d: int) -> EnrichedWord:
    """Label position j of ``u`` with residue ``i + j mod d``."""
    if not 0 <= i < d:
        raise ValueError(f"residue {i} out of range for modulus {d}")
    return EnrichedWord(tuple((a, (i + j) % d) for j, a in enumerate(u)), d)


# ---------------------------------------------------------------------------
# DFA
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dfa:
    alphabet: tuple[str, ...]
    transitions: tuple[tuple[int, ...], ...]
    initial: int
    finals: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        check_alphabet(self.alphabet)
        n = len(self.transitions)
        if n == 0:
            raise ValueError("a DFA needs at least one state")
        if not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        for q in self.finals:
            if not 0 <= q < n:
                raise ValueError(f"final state {q} out of range")
        for row in self.transitions:
            if len(row) != len(self.alphabet):
                raise ValueError("transition table is not total")
            for t in row:
                if not 0 <= t < n:
                    raise ValueError(f"transition target {t} out of range")

    @property
    def state_count(self) -> int:
        return len(self.transitions)

    @property
    def accepts_empty(self) -> bool:
        return self.initial in self.finals

    @cached_property
    def letter_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.alphabet)}

    @cached_property
    def is_enriched(self) -> bool:
        return all(is_enriched(a) for a in self.alphabet)

    def step(self, state: int, letter: str) -> int:
        try:
            return self.transitions[state][self.letter_index[letter]]
        except KeyError:
            raise AlphabetError(f"letter {letter!r} not in alphabet {self.alphabet}") from None

    def run(self, word: Word, start: int | None = None) -> int:
        q = self.initial if start is None else start
        for a in word:
            q = self.step(q, a)
        return q

    def accepts(self, word: Word) -> bool:
        return self.run(word) in self.finals

    def to_text(self) -> str:
        lines = [
            "alphabet: " + " ".join(self.alphabet),
            f"states: {self.state_count}",
            f"initial: {self.initial}",
            "finals: " + " ".join(str(q) for q in sorted(self.finals)),
        ]
        for q, row in enumerate(self.transitions):
            for a, t in zip(self.alphabet, row):
                lines.append(f"trans: {q} {a} {t}")
        return "\n".join(lines) + "\n"


def minimize(d: Dfa) -> Dfa:
    """Moore partition refinement, then breadth-first renumbering of the
    reachable quotient."""
    n, k = d.state_count, len(d.alphabet)
    block = [1 if q in d.finals else 0 for q in range(n)]
    count = len(set(block))
    while True:
        signatures: dict[tuple, int] = {}
        new_block = []
        for q in range(n):
            sig = (block[q],) + tuple(block[t] for t in d.transitions[q])
            new_block.append(signatures.setdefault(sig, len(signatures)))
        block = new_block
        if len(signatures) == count:
            break
        count = len(signatures)

    representative: dict[int, int] = {}
    for q in range(n):
        representative.setdefault(block[q], q)

    order = {block[d.initial]: 0}
    queue = deque([block[d.initial]])
    rows: list[tuple[int, ...]] = []
    finals = set()
    while queue:
        b = queue.popleft()
        q = representative[b]
        if q in d.finals:
            finals.add(order[b])
        row = []
        for a in range(k):
            tb = block[d.transitions[q][a]]
            if tb not in order:
                order[tb] = len(order)
                queue.append(tb)
            row.append(order[tb])
        rows.append(tuple(row))
    return Dfa(d.alphabet, tuple(rows), 0, frozenset(finals))


def from_edges(alphabet: Sequence[str], state_count: int, initial: int,
               finals: Iterable[int], edges: Iterable[tuple[int, str, int]]) -> Dfa:
    """Build a complete minimal DFA from a partial edge list; missing edges
    go to an added sink."""
    alphabet = check_alphabet(alphabet)
    index = {a: i for i, a in enumerate(alphabet)}
    sink = state_count
    table = [[sink] * len(alphabet) for _ in range(state_count + 1)]
    for s, a, t in edges:
        if a not in index:
            raise AlphabetError(f"unknown letter {a!r}")
        if not (0 <= s < state_count and 0 <= t < state_count):
            raise ValueError(f"edge {s} {a} {t} uses a state out of range")
        table[s][index[a]] = t
    return minimize(Dfa(alphabet, tuple(map(tuple, table)), initial, frozenset(finals)))


def _determinize(alphabet: tuple[str, ...], start: frozenset[int],
                 moves: dict[tuple[int, str], set[int]], finals: set[int],
                 eps: dict[int, set[int]] | None = None) -> Dfa:
    eps = eps or {}

    def closure(states: Iterable[int]) -> frozenset[int]:
        seen = set(states)
        stack = list(seen)
        while stack:
            q = stack.pop()
            for t in eps.get(q, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    first = closure(start)
    index = {first: 0}
    rows: list[list[int]] = []
    queue = deque([first])
    accepting = set()
    while queue:
        cur = queue.popleft()
        if cur & finals:
            accepting.add(index[cur])
        row = []
        for a in alphabet:
            nxt = closure(t for q in cur for t in moves.get((q, a), ()))
            if nxt not in index:
                index[nxt] = len(index)
                queue.append(nxt)
            row.append(index[nxt])
        rows.append(row)
    return minimize(Dfa(alphabet, tuple(map(tuple, rows)), 0, frozenset(accepting)))


# ---------------------------------------------------------------------------
# Regex parsing (Thompson construction)
# ---------------------------------------------------------------------------

class _Nfa:
    def __init__(self):
        self.count = 0
        self.moves: dict[tuple[int, str], set[int]] = {}
        self.eps: dict[int, set[int]] = {}

    def new(self) -> int:
        self.count += 1
        return self.count - 1

    def edge(self, s: int, a: str | None, t: int):
        if a is None:
            self.eps.setdefault(s, set()).add(t)
        else:
            self.moves.setdefault((s, a), set()).add(t)


class _RegexParser:
    def __init__(self, text: str, alphabet: tuple[str, ...]):
        self.text = text
        self.pos = 0
        self.alphabet = alphabet
        self.nfa = _Nfa()

    def peek(self) -> str | None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else None

    def parse(self) -> tuple[int, int]:
        frag = self.alternation()
        if self.peek() is not None:
            raise ParseError(f"unexpected {self.text[self.pos]!r}", self.pos)
        return frag

    def alternation(self) -> tuple[int, int]:
        branches = [self.concatenation()]
        while self.peek() == "|":
            self.pos += 1
            branches.append(self.concatenation())
        if len(branches) == 1:
            return branches[0]
        s, t = self.nfa.new(), self.nfa.new()
        for bs, bt in branches:
            self.nfa.edge(s, None, bs)
            self.nfa.edge(bt, None, t)
        return s, t

    def concatenation(self) -> tuple[int, int]:
        s = t = self.nfa.new()
        while self.peek() not in (None, "|", ")"):
            fs, ft = self.repetition()
            self.nfa.edge(t, None, fs)
            t = ft
        return s, t

    def repetition(self) -> tuple[int, int]:
        s, t = self.atom()
        while self.peek() in ("*", "+"):
            op = self.text[self.pos]
            self.pos += 1
            ns, nt = self.nfa.new(), self.nfa.new()
            self.nfa.edge(ns, None, s)
            self.nfa.edge(t, None, nt)
            self.nfa.edge(t, None, s)
            if op == "*":
                self.nfa.edge(ns, None, nt)
            s, t = ns, nt
        return s, t

    def atom(self) -> tuple[int, int]:
        c = self.peek()
        start = self.pos
        if c == "(":
            self.pos += 1
            frag = self.alternation()
            if self.peek() != ")":
                raise ParseError("missing ')'", self.pos)
            self.pos += 1
            return frag
        if c in ("*", "+", "@"):
            raise ParseError(f"unexpected {c!r}", start)
        self.pos += 1
        s, t = self.nfa.new(), self.nfa.new()
        if c == ".":
            for a in self.alphabet:
                self.nfa.edge(s, a, t)
        else:
            if c not in self.alphabet:
                raise ParseError(f"unknown letter {c!r}", start)
            self.nfa.edge(s, c, t)
        return s, t


def parse_regex(text: str, alphabet: Sequence[str] | None = None) -> Dfa:
    """Compile a regex; the alphabet defaults to the sorted letters used."""
    if alphabet is None:
        letters = sorted({c for c in text if c not in RESERVED})
        if not letters:
            raise ParseError("cannot infer an alphabet from a regex without letters; pass one")
        alphabet = letters
    alphabet = check_alphabet(alphabet)
    for a in alphabet:
        if len(a) != 1 or a in RESERVED:
            raise AlphabetError(f"regex letters must be single non-reserved characters, got {a!r}")
    p = _RegexParser(text, alphabet)
    s, t = p.parse()
    return _determinize(alphabet, frozenset([s]), p.nfa.moves, {t}, p.nfa.eps)


def parse_dfa_text(text: str) -> Dfa:
    """Read the line-based DFA format (``alphabet:``, ``states:``,
    ``initial:``, ``finals:``, ``trans: s letter t``)."""
    alphabet = None
    states = initial = None
    finals: list[int] = []
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(f"expected 'key: value', got {line!r}", line=lineno)
        key, values = key.strip(), rest.split()
        try:
            if key == "alphabet":
                alphabet = values
            elif key == "states":
                (states,) = map(int, values)
            elif key == "initial":
                (initial,) = map(int, values)
            elif key == "finals":
                finals = [int(v) for v in values]
            elif key == "trans":
                s, a, t = values
                edges.append((int(s), a, int(t)))
            else:
                raise ParseError(f"unknown key {key!r}", line=lineno)
        except ValueError:
            raise ParseError(f"malformed {key!r} line", line=lineno) from None
    if alphabet is None or states is None or initial is None:
        raise ParseError("DFA file needs alphabet, states and initial lines")
    return from_edges(alphabet, states, initial, finals, edges)


def parse_language(text: str, alphabet: Sequence[str] | None = None) -> Dfa:
    """Regex or DFA description, whichever the text looks like."""
    if re.search(r"^\s*alphabet\s*:", text, re.MULTILINE):
        return parse_dfa_text(text)
    return parse_regex(text.strip(), alphabet)


# ---------------------------------------------------------------------------
# Boolean operations
# ---------------------------------------------------------------------------

def universal(alphabet: Sequence[str]) -> Dfa:
    alphabet = check_alphabet(alphabet)
    return Dfa(alphabet, ((0,) * len(alphabet),), 0, frozenset([0]))


def empty_language(alphabet: Sequence[str]) -> Dfa:
    alphabet = check_alphabet(alphabet)
    return Dfa(alphabet, ((0,) * len(alphabet),), 0, frozenset())


def nonempty_words(alphabet: Sequence[str]) -> Dfa:
    """A^+."""
    alphabet = check_alphabet(alphabet)
    k = len(alphabet)
    return Dfa(alphabet, ((1,) * k, (1,) * k), 0, frozenset([1]))


def complement(d: Dfa) -> Dfa:
    return minimize(Dfa(d.alphabet, d.transitions, d.initial,
                        frozenset(range(d.state_count)) - d.finals))


_OPS = {
    "union": lambda x, y: x or y,
    "intersection": lambda x, y: x and y,
    "difference": lambda x, y: x and not y,
}


def combine(op: str, lhs: Dfa, rhs: Dfa | None = None) -> Dfa:
    if op == "complement":
        if rhs is not None:
            raise ValueError("complement takes one operand")
        return complement(lhs)
    if op not in _OPS:
        raise ValueError(f"unknown operation {op!r}")
    if rhs is None:
        raise ValueError(f"{op} needs two operands")
    if lhs.alphabet != rhs.alphabet:
        raise AlphabetError(f"alphabet mismatch: {lhs.alphabet} vs {rhs.alphabet}")
    keep = _OPS[op]
    k = len(lhs.alphabet)
    index = {(lhs.initial, rhs.initial): 0}
    pairs = [(lhs.initial, rhs.initial)]
    rows = []
    finals = set()
    i = 0
    while i < len(pairs):
        p, q = pairs[i]
        if keep(p in lhs.finals, q in rhs.finals):
            finals.add(i)
        row = []
        for a in range(k):
            nxt = (lhs.transitions[p][a], rhs.transitions[q][a])
            if nxt not in index:
                index[nxt] = len(pairs)
                pairs.append(nxt)
            row.append(index[nxt])
        rows.append(tuple(row))
        i += 1
    return minimize(Dfa(lhs.alphabet, tuple(rows), 0, frozenset(finals)))


def is_empty(d: Dfa) -> bool:
    return not minimize(d).finals


def equivalent(a: Dfa, b: Dfa) -> bool:
    return a.alphabet == b.alphabet and minimize(a) == minimize(b)


def from_words(alphabet: Sequence[str], words: Iterable[Word]) -> Dfa:
    """Minimal DFA of a finite language (trie plus sink)."""
    alphabet = check_alphabet(alphabet)
    index = {a: i for i, a in enumerate(alphabet)}
    rows: list[list[int]] = [[-1] * len(alphabet)]
    finals = set()
    for w in words:
        q = 0
        for a in w:
            if a not in index:
                raise AlphabetError(f"unknown letter {a!r}")
            nxt = rows[q][index[a]]
            if nxt < 0:
                nxt = len(rows)
                rows[q][index[a]] = nxt
                rows.append([-1] * len(alphabet))
            q = nxt
        finals.add(q)
    sink = len(rows)
    table = tuple(tuple(t if t >= 0 else sink for t in row) for row in rows)
    table += ((sink,) * len(alphabet),)
    return minimize(Dfa(alphabet, table, 0, frozenset(finals)))


# ---------------------------------------------------------------------------
# Enriched alphabets
# ---------------------------------------------------------------------------

def wellformed_recognizer(alphabet: Sequence[str], d: int, kind: str = "K",
                          i: int | None = None, j: int | None = None) -> Dfa:
    """DFA over A x Z_d for ``kind``:

    * ``"K"``: well-formed words (position p labelled p mod d), ε included;
    * ``"F"``: well-formed factors (labels increase by one mod d from any start), ε included;
    * ``"A"``: non-empty well-formed factors whose first label is ``i`` and last is ``j``.
    """
    alphabet = check_alphabet(alphabet)
    if d < 1:
        raise ValueError("modulus must be positive")
    letters = enriched_alphabet(alphabet, d)
    residues = [r for _ in alphabet for r in range(d)]

    # states 0..d-1: "next label must be r"; d: sink; d+1: fresh start (F, A)
    sink, fresh = d, d + 1
    rows = []
    for r in range(d):
        rows.append(tuple((r + 1) % d if x == r else sink for x in residues))
    rows.append((sink,) * len(letters))

    if kind == "K":
        finals = frozenset(range(d))
        return minimize(Dfa(letters, tuple(rows), 0, finals))
    if kind == "F":
        rows.append(tuple((x + 1) % d for x in residues))
        return minimize(Dfa(letters, tuple(rows), fresh, frozenset(range(d)) | {fresh}))
    if kind == "A":
        if i is None or j is None or not (0 <= i < d and 0 <= j < d):
            raise ValueError(f"A_d(i, j) needs 0 <= i, j < {d}, got {i}, {j}")
        rows.append(tuple((x + 1) % d if x == i else sink for x in residues))
        return minimize(Dfa(letters, tuple(rows), fresh, frozenset([(j + 1) % d])))
    raise ValueError(f"unknown kind {kind!r}; expected 'K', 'F' or 'A'")


def enrich(lang: Dfa, d: int) -> Dfa:
    """L_d: well-formed words whose underlying word lies in L."""
    if d < 1:
        raise ValueError("modulus must be positive")
    letters = enriched_alphabet(lang.alphabet, d)
    n, k = lang.state_count, len(lang.alphabet)
    sink = n * d

    def code(q: int, r: int) -> int:
        return q * d + r

    rows = []
    for q in range(n):
        for r in range(d):
            row = []
            for a in range(k):
                for x in range(d):
                    if x == r:
                        row.append(code(lang.transitions[q][a], (r + 1) % d))
                    else:
                        row.append(sink)
            rows.append(tuple(row))
    rows.append((sink,) * len(letters))
    finals = frozenset(code(q, r) for q in lang.finals for r in range(d))
    return minimize(Dfa(letters, tuple(rows), code(lang.initial, 0), finals))


def project_letters(d: Dfa) -> Dfa:
    """Image under (a, i) -> a; subset construction on the relabelled automaton."""
    pairs = [parse_symbol(a) for a in d.alphabet]
    underlying: list[str] = []
    for a, _ in pairs:
        if a not in underlying:
            underlying.append(a)
    moves: dict[tuple[int, str], set[int]] = {}
    for q in range(d.state_count):
        for (a, _), t in zip(pairs, d.transitions[q]):
            moves.setdefault((q, a), set()).add(t)
    return _determinize(tuple(underlying), frozenset([d.initial]), moves, set(d.finals))

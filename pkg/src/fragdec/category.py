"""Finite categories whose arrows are triples (src, value, dst).

Composition of consecutive arrows multiplies their values, either in a
parent :class:`SyntacticPresentation` (derived and idempotents' categories)
or in an explicit value table (synthetic categories used in tests).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlgebraError, GuardExceeded, ParseError
from .semigroup import (
    DEFAULT_MAX_ASSIGNMENTS,
    Omega,
    Prod,
    SyntacticPresentation,
    Var,
    check_closed,
    evaluate_term,
    first_failure,
    idempotents,
    parse_term,
    term_variables,
)
from .stability import length_residue_images

Arrow = tuple[int, int, int]


@dataclass(frozen=True, eq=False)
class FiniteCategory:
    object_count: int
    hom: Mapping[tuple[int, int], frozenset[int]]
    identity_at: tuple[int, ...]
    parent: SyntacticPresentation | None = None
    values: np.ndarray | None = None
    object_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.parent is None) == (self.values is None):
            raise ValueError("give exactly one of parent presentation or value table")
        if not self.object_labels:
            object.__setattr__(self, "object_labels", tuple(str(x) for x in range(self.object_count)))
        full = {(x, y): frozenset(self.hom.get((x, y), ()))
                for x in range(self.object_count) for y in range(self.object_count)}
        object.__setattr__(self, "hom", full)
        for x in range(self.object_count):
            if self.identity_at[x] not in self.hom[x, x]:
                raise AlgebraError(f"identity of object {x} is not a loop at {x}")

    @cached_property
    def table(self) -> np.ndarray:
        return self.parent.mult if self.parent is not None else self.values

    @cached_property
    def omega_table(self) -> np.ndarray:
        if self.parent is not None:
            return self.parent.omega_table
        t = self.values.tolist()
        out = []
        for v in range(len(t)):
            p = v
            for _ in range(len(t)):
                if t[p][p] == p:
                    break
                p = t[p][v]
            out.append(p)
        return np.asarray(out, dtype=np.int64)

    def compose(self, v: int, w: int) -> int:
        return int(self.table[v, w])

    def arrows(self) -> list[Arrow]:
        return [(x, v, y) for (x, y), vs in sorted(self.hom.items()) for v in sorted(vs)]

    def describe(self, v: int) -> str:
        return self.parent.describe(v) if self.parent is not None else f"#{v}"

    def check(self) -> None:
        """Closure of composition, neutral identities and associativity on
        consecutive triples."""
        n = self.object_count
        for x, y, z in itertools.product(range(n), repeat=3):
            for v in self.hom[x, y]:
                for w in self.hom[y, z]:
                    if self.compose(v, w) not in self.hom[x, z]:
                        raise AlgebraError(f"composite of {v}:{x}->{y} and {w}:{y}->{z} is not an arrow")
        for x, y in itertools.product(range(n), repeat=2):
            for v in self.hom[x, y]:
                if self.compose(self.identity_at[x], v) != v or self.compose(v, self.identity_at[y]) != v:
                    raise AlgebraError(f"identities are not neutral on arrow {v}:{x}->{y}")
        for x, y, z, t in itertools.product(range(n), repeat=4):
            for u in self.hom[x, y]:
                for v in self.hom[y, z]:
                    for w in self.hom[z, t]:
                        if self.compose(self.compose(u, v), w) != self.compose(u, self.compose(v, w)):
                            raise AlgebraError("composition is not associative")


def synthetic_category(object_count: int, hom: Mapping[tuple[int, int], Iterable[int]],
                       table: Sequence[Sequence[int]], identity_at: Sequence[int]) -> FiniteCategory:
    """Category with an explicit composition table; self-checked on construction."""
    c = FiniteCategory(object_count, {k: frozenset(v) for k, v in hom.items()}, tuple(identity_at),
                       values=np.asarray(table, dtype=np.int64))
    c.check()
    return c


def one_object(m: SyntacticPresentation, within: Iterable[int] | None = None) -> FiniteCategory:
    """A monoid as a one-object category."""
    if m.identity is None:
        raise AlgebraError("a one-object category needs a monoid")
    arrows = m.elements if within is None else frozenset(within)
    return FiniteCategory(1, {(0, 0): frozenset(arrows)}, (m.identity,), parent=m)


def derived_category(m: SyntacticPresentation, d: int) -> FiniteCategory:
    """C_d: objects Z_d, hom(i, j) = R_{(j - i) mod d}."""
    residues = length_residue_images(m, d)
    hom = {(i, j): residues[(j - i) % d] for i in range(d) for j in range(d)}
    return FiniteCategory(d, hom, (m.identity,) * d, parent=m)


def idempotents_category(s: SyntacticPresentation, within: Iterable[int] | None = None) -> FiniteCategory:
    """S_E: objects are idempotents, hom(e, f) = e·S·f."""
    scope = sorted(s.elements if within is None else set(within))
    check_closed(s, scope)
    objs = sorted(idempotents(s, scope))
    mult = s.mult
    left = [np.unique(mult[e, scope]) for e in objs]  # e·S
    hom = {(i, j): frozenset(np.unique(mult[left[i], f]).tolist())
           for i in range(len(objs)) for j, f in enumerate(objs)}
    return FiniteCategory(len(objs), hom, tuple(objs), parent=s,
                          object_labels=tuple(s.describe(e) for e in objs))


def local_monoid_at(c: FiniteCategory, x: int) -> SyntacticPresentation:
    """hom(x, x) with inherited composition; ``origin`` holds the arrow values."""
    if not 0 <= x < c.object_count:
        raise ValueError(f"object {x} out of range")
    if c.parent is not None:
        return c.parent.restrict(c.hom[x, x], c.identity_at[x])
    from .semigroup import from_table
    return from_table(c.values.tolist()).restrict(c.hom[x, x], c.identity_at[x])


def consolidate(c: FiniteCategory) -> SyntacticPresentation:
    """Arrows plus an absorbing 0 (the last element); non-consecutive products are 0."""
    from .semigroup import from_table
    arrows = c.arrows()
    zero = len(arrows)
    index = {a: i for i, a in enumerate(arrows)}
    table = [[zero] * (zero + 1) for _ in range(zero + 1)]
    for (x, v, y), i in index.items():
        for (y2, w, z), j in index.items():
            if y == y2:
                table[i][j] = index[(x, c.compose(v, w), z)]
    return from_table(table)


# ---------------------------------------------------------------------------
# Path equations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphSpec:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("vertex names must be unique")
        names = [e[0] for e in self.edges]
        if len(set(names)) != len(names):
            raise ValueError("edge names must be unique")
        for name, src, dst in self.edges:
            if src not in self.vertices or dst not in self.vertices:
                raise ValueError(f"edge {name} uses an unknown vertex")

    @cached_property
    def edge_ends(self) -> dict[str, tuple[str, str]]:
        return {name: (src, dst) for name, src, dst in self.edges}


def path_ends(graph: GraphSpec, term) -> tuple[str, str]:
    """(src, dst) of a path term; raises on non-consecutive products or
    ω applied to a non-loop."""
    if isinstance(term, Var):
        if term.name not in graph.edge_ends:
            raise ParseError(f"unknown edge {term.name!r}")
        return graph.edge_ends[term.name]
    if isinstance(term, Omega):
        src, dst = path_ends(graph, term.base)
        if src != dst:
            raise ParseError(f"ω applied to a path from {src} to {dst}, which is not a loop")
        return src, dst
    ends = [path_ends(graph, f) for f in term.factors]
    for (_, b), (c, _) in zip(ends, ends[1:]):
        if b != c:
            raise ParseError(f"non-consecutive product in {term}")
    return ends[0][0], ends[-1][1]


@dataclass(frozen=True)
class PathEquation:
    graph: GraphSpec
    lhs: object
    rhs: object

    def __post_init__(self):
        if path_ends(self.graph, self.lhs) != path_ends(self.graph, self.rhs):
            raise ParseError(f"sides of {self} are not coterminal")

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


def knast_equation() -> PathEquation:
    """(m1 m2)^w (m3 m4)^w = (m1 m2)^w m1 m4 (m3 m4)^w on two vertices."""
    graph = GraphSpec(("p", "q"), (("m1", "p", "q"), ("m2", "q", "p"),
                                   ("m3", "p", "q"), ("m4", "q", "p")))
    return PathEquation(graph,
                        parse_term("(m1 m2)^w (m3 m4)^w", multi_letter=True),
                        parse_term("(m1 m2)^w m1 m4 (m3 m4)^w", multi_letter=True))


def parse_path_equations(text: str) -> list[PathEquation]:
    vertices: list[str] = []
    edges: list[tuple[str, str, str]] = []
    sides: list[tuple[str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError(f"expected 'key: value', got {line!r}", line=lineno)
        if key == "vertices":
            vertices.extend(rest.split())
        elif key == "edge":
            parts = rest.split()
            if len(parts) != 3:
                raise ParseError("edge lines read 'edge: name src dst'", line=lineno)
            edges.append(tuple(parts))
        elif key == "equation":
            sides.append((rest, lineno))
        else:
            raise ParseError(f"unknown key {key!r}", line=lineno)
    if not sides:
        raise ParseError("no equation lines")
    try:
        graph = GraphSpec(tuple(vertices), tuple(edges))
    except ValueError as e:
        raise ParseError(str(e)) from None
    out = []
    for rest, lineno in sides:
        lhs, sep, rhs = rest.partition("=")
        if not sep or "=" in rhs:
            raise ParseError("equation needs exactly one '='", line=lineno)
        try:
            out.append(PathEquation(graph, parse_term(lhs, True), parse_term(rhs, True)))
        except ParseError as e:
            raise ParseError(str(e), e.position, lineno) from None
    return out


@dataclass(frozen=True)
class PathVerdict:
    holds: bool
    equation: PathEquation | None = None
    objects: dict[str, int] | None = None
    edges: dict[str, int] | None = None
    lhs: int | None = None
    rhs: int | None = None
    evaluated: int = 0

    def __bool__(self):
        return self.holds


def evaluate_morphism(c: FiniteCategory, eq: PathEquation, edges: Mapping[str, int]) -> tuple[int, int]:
    """Values of both sides under an edge assignment (arrow values)."""
    table, omega = c.table, c.omega_table
    mul = lambda a, b: table[a, b]
    om = lambda a: omega[a]
    return (int(evaluate_term(eq.lhs, edges, mul, om)), int(evaluate_term(eq.rhs, edges, mul, om)))


def check_path_equation(c: FiniteCategory, eq: PathEquation,
                        max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> PathVerdict:
    """Enumerate graph morphisms into ``c``: vertices over objects ascending,
    then edges in declaration order over arrow values ascending.

    Object assignments that give every edge the same candidate set evaluate
    identically, so each distinct tuple of hom-sets is checked once; the
    guard counts the edge assignments actually evaluated.
    """
    graph = eq.graph
    used = set(term_variables(eq.lhs)) | set(term_variables(eq.rhs))
    edges = [e for e in graph.edges if e[0] in used]
    names = [e[0] for e in edges]
    vpos = {v: i for i, v in enumerate(graph.vertices)}
    table, omega = c.table, c.omega_table
    mul = lambda a, b: table[a, b]
    om = lambda a: omega[a]

    def evaluate(cols):
        env = dict(zip(names, cols))
        return evaluate_term(eq.lhs, env, mul, om), evaluate_term(eq.rhs, env, mul, om)

    memo: dict[tuple[frozenset[int], ...], tuple | None] = {}
    evaluated = 0
    for objs in itertools.product(range(c.object_count), repeat=len(graph.vertices)):
        key = tuple(c.hom[objs[vpos[src]], objs[vpos[dst]]] for _, src, dst in edges)
        if key not in memo:
            size = 1
            for h in key:
                size *= len(h)
            evaluated += size
            if evaluated > max_assignments:
                raise GuardExceeded("path-equation morphism enumeration", evaluated,
                                    max_assignments, "--max-assignments")
            memo[key] = first_failure([sorted(h) for h in key], evaluate)
        hit = memo[key]
        if hit is not None:
            values, lv, rv = hit
            return PathVerdict(False, eq, {v: objs[i] for i, v in enumerate(graph.vertices)},
                               dict(zip(names, values)), lv, rv, evaluated)
    return PathVerdict(True, evaluated=evaluated)


# ---------------------------------------------------------------------------
# Division of categories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivisionWitness:
    object_map: tuple[int, ...]
    arrow_map: Mapping[Arrow, frozenset[Arrow]] = field(default_factory=dict)


def division_check(w: DivisionWitness, c: FiniteCategory, d: FiniteCategory) -> bool:
    """Product containment, non-emptiness, identity containment and
    disjoint images of distinct coterminal arrows."""
    if len(w.object_map) != c.object_count:
        return False
    if any(not 0 <= y < d.object_count for y in w.object_map):
        return False
    arrows = c.arrows()
    tau = {}
    for x, v, y in arrows:
        img = w.arrow_map.get((x, v, y), frozenset())
        if not img:
            return False
        tx, ty = w.object_map[x], w.object_map[y]
        for (a, u, b) in img:
            if (a, b) != (tx, ty) or u not in d.hom[a, b]:
                return False
        tau[x, v, y] = frozenset(u for _, u, _ in img)

    for x in range(c.object_count):
        if d.identity_at[w.object_map[x]] not in tau[x, c.identity_at[x], x]:
            return False

    n = c.object_count
    for x, y, z in itertools.product(range(n), repeat=3):
        for v in c.hom[x, y]:
            left = tau[x, v, y]
            for u in c.hom[y, z]:
                target = tau[x, c.compose(v, u), z]
                right = tau[y, u, z]
                for a in left:
                    for b in right:
                        if d.compose(a, b) not in target:
                            return False

    for (x, y), vs in c.hom.items():
        images = [tau[x, v, y] for v in sorted(vs)]
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                if images[i] & images[j]:
                    return False
    return True


def identity_division(c: FiniteCategory) -> DivisionWitness:
    return DivisionWitness(tuple(range(c.object_count)),
                           {a: frozenset([a]) for a in c.arrows()})


def prop15_division(m: SyntacticPresentation, d: int, d2: int) -> DivisionWitness:
    """C_{d2} -> C_d for d | d2: objects reduce mod d, arrows keep their value."""
    if d < 1 or d2 % d:
        raise ValueError(f"{d} does not divide {d2}")
    big = derived_category(m, d2)
    return DivisionWitness(
        tuple(x % d for x in range(d2)),
        {(x, v, y): frozenset([(x % d, v, y % d)]) for x, v, y in big.arrows()},
    )

"""Fragment registry, decision routes and evidence reports.

Verdicts concern L ∩ A^+; whether ε ∈ L is reported separately. Every
``not_definable`` verdict carries a witness written with generator words, so
it can be replayed against a freshly built presentation (:func:`replay_witness`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from .automata import Dfa, combine, enrich, format_word, minimize, nonempty_words, split_word
from .category import (FiniteCategory, PathEquation, check_path_equation, derived_category,
                       evaluate_morphism, idempotents_category, knast_equation,
                       parse_path_equations)
from .errors import FragdecError, GuardExceeded
from .semigroup import (BUILTIN_IDENTITIES, DEFAULT_MAX_ASSIGNMENTS, DEFAULT_MAX_MONOID,
                        IdentitySet, SyntacticPresentation, check_identity, evaluate_term,
                        identities_union, idempotents, local_monoid, omega_power,
                        parse_equation, syntactic_morphism)
from .stability import StabilityRecord, stability_index

SCHEMA_VERSION = 1

DEFINABLE = "definable"
NOT_DEFINABLE = "not_definable"
REDUCED = "reduced_instance_emitted"
ANALYSIS = "analysis"
VERDICTS = (DEFINABLE, NOT_DEFINABLE, REDUCED, ANALYSIS)

STABLE_MONOID = "stable_monoid"
LOCAL_OF_STABLE = "local_of_stable_semigroup"
DERIVED = "derived_category"
REDUCTION = "reduction"


class MissingEquations(FragdecError):
    """A pluggable fragment was asked for without an equation file."""


@dataclass(frozen=True)
class FragmentEntry:
    name: str
    route: str
    identity: str | None = None
    path_equations: str | None = None  # "knast", "external" or None
    delay_multiplier: int = 1
    note: str = ""


_FIXED = {
    "FO[<,MOD]": FragmentEntry("FO[<,MOD]", STABLE_MONOID, identity="A"),
    "FO[Reg]": FragmentEntry("FO[Reg]", STABLE_MONOID, identity="A"),
    "FO2[<,MOD]": FragmentEntry("FO2[<,MOD]", STABLE_MONOID, identity="DA"),
    "FO2[Reg]": FragmentEntry("FO2[Reg]", LOCAL_OF_STABLE, identity="DA"),
    "FO1[MOD]": FragmentEntry("FO1[MOD]", STABLE_MONOID, identity="J1",
                              note="letter predicates only, read as the J1 route"),
    "BS1[<,MOD]": FragmentEntry("BS1[<,MOD]", DERIVED, path_equations="knast", delay_multiplier=2),
    "BS1[Reg]": FragmentEntry("BS1[Reg]", REDUCTION, path_equations="knast"),
    "FO[+1,MOD]": FragmentEntry("FO[+1,MOD]", REDUCTION, identity="FO[+1]+A"),
    "FO[=,MOD]": FragmentEntry("FO[=,MOD]", DERIVED, path_equations="external", delay_multiplier=2),
}
_INDEXED = ("FO2_k[<,MOD]", "FO2_k[Reg]", "BS_k[Reg]")
FRAGMENT_NAMES = tuple(_FIXED) + _INDEXED


def fragment_entry(name: str, k: int | None = None) -> FragmentEntry:
    """Resolve a CLI fragment name; indexed names need ``k``."""
    if name in _FIXED:
        return _FIXED[name]
    if name not in _INDEXED:
        raise FragdecError(f"unknown fragment {name!r}; known: {', '.join(FRAGMENT_NAMES)}")
    if k is None or k < 1:
        raise FragdecError(f"fragment {name} needs --k N with N >= 1")
    label = name.replace("_k", f"_{k}")
    if name == "FO2_k[<,MOD]":
        # level 1 of the two-variable hierarchy is J, whose global is given by Knast
        eqs = "knast" if k == 1 else "external"
        return FragmentEntry(label, DERIVED, path_equations=eqs, delay_multiplier=2 * k)
    return FragmentEntry(label, REDUCTION, path_equations="knast" if k == 1 else "external")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class EvidenceReport:
    verdict: str
    fragment: str | None
    stability_index: int
    modulus: int | None
    sizes: dict[str, int]
    epsilon_in_language: bool
    witness: dict[str, Any] | None = None
    route: str | None = None
    details: dict[str, Any] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == NOT_DEFINABLE and self.witness is None:
            raise ValueError("a not_definable report must carry a witness")

    def to_dict(self) -> dict[str, Any]:
        out = {
            "schema_version": self.schema_version,
            "verdict": self.verdict,
            "fragment": self.fragment,
            "route": self.route,
            "stability_index": self.stability_index,
            "modulus": self.modulus,
            "sizes": dict(self.sizes),
            "epsilon_in_language": self.epsilon_in_language,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.details:
            out["details"] = self.details
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvidenceReport":
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version {version!r}")
        return cls(verdict=data["verdict"], fragment=data.get("fragment"),
                   stability_index=data["stability_index"], modulus=data.get("modulus"),
                   sizes=dict(data["sizes"]), epsilon_in_language=data["epsilon_in_language"],
                   witness=data.get("witness"), route=data.get("route"),
                   details=dict(data.get("details", {})), schema_version=version)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, ensure_ascii=False)

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        if self.fragment:
            lines.append(f"fragment: {self.fragment}")
        if self.route:
            lines.append(f"route: {self.route}")
        lines.append(f"stability index: {self.stability_index}")
        if self.modulus is not None:
            lines.append(f"modulus: {self.modulus}")
        lines.append("sizes: " + ", ".join(f"{k}={v}" for k, v in self.sizes.items()))
        lines.append(f"empty word in language: {'yes' if self.epsilon_in_language else 'no'}")
        if self.witness:
            lines.append("witness:")
            lines.extend("  " + line for line in _witness_lines(self.witness))
        for key, value in self.details.items():
            if key == "reduced_dfa":
                lines.append("reduced instance (DFA):")
                lines.extend("  " + line for line in value.splitlines())
            elif isinstance(value, dict):
                lines.append(f"{key}: " + ", ".join(f"{k}={_show(v)}" for k, v in value.items()))
            else:
                lines.append(f"{key}: {_show(value)}")
        return "\n".join(lines)


def _show(v) -> str:
    if v is None:
        return "skipped"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def _word(w: str) -> str:
    return w if w else "1"


def _witness_lines(w: dict[str, Any]) -> list[str]:
    lines = [f"equation: {w['equation']}"]
    if "idempotent" in w:
        lines.append(f"local monoid at e = {_word(w['idempotent'])}")
    if "objects" in w:
        lines.append("objects: " + ", ".join(f"{v}={o}" for v, o in w["objects"].items()))
    lines.append("assignment: " + ", ".join(f"{v}={_word(x)}" for v, x in w["assignment"].items()))
    lines.append(f"lhs = {_word(w['lhs'])}, rhs = {_word(w['rhs'])}")
    return lines


# ---------------------------------------------------------------------------
# Shared steps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Setup:
    dfa: Dfa
    positive: Dfa
    monoid: SyntacticPresentation
    record: StabilityRecord


def _setup(lang: Dfa, max_monoid: int) -> _Setup:
    lang = minimize(lang)
    positive = combine("intersection", lang, nonempty_words(lang.alphabet))
    m = syntactic_morphism(positive, max_elements=max_monoid)
    return _Setup(lang, positive, m, stability_index(m))


def _sizes(st: _Setup, **extra: int) -> dict[str, int]:
    m, r = st.monoid, st.record
    out = {"syntactic_monoid": m.element_count, "stable_semigroup": len(r.stable_semigroup),
           "stable_monoid": len(r.stable_monoid)}
    out.update(extra)
    return out


def _elem(m: SyntacticPresentation, x: int) -> str:
    word = m.element_words[x]
    return format_word(word) if word is not None else ""


def _identity_witness(m: SyntacticPresentation, verdict, presentation: dict, **extra) -> dict:
    lhs, rhs = verdict.equation
    w = {"kind": "identity", "presentation": presentation, "equation": f"{lhs} = {rhs}",
         "assignment": {v: _elem(m, x) for v, x in verdict.assignment.items()},
         "lhs": _elem(m, verdict.lhs), "rhs": _elem(m, verdict.rhs)}
    w.update(extra)
    return w


def _path_witness(m: SyntacticPresentation, verdict, presentation: dict) -> dict:
    eq: PathEquation = verdict.equation
    lines = [f"vertices: {' '.join(eq.graph.vertices)}"]
    lines += [f"edge: {name} {src} {dst}" for name, src, dst in eq.graph.edges]
    lines.append(f"equation: {eq}")
    return {"kind": "path-equation", "presentation": presentation, "equation": str(eq),
            "graph": "\n".join(lines), "objects": dict(verdict.objects),
            "assignment": {e: _elem(m, x) for e, x in verdict.edges.items()},
            "lhs": _elem(m, verdict.lhs), "rhs": _elem(m, verdict.rhs)}


def resolve_identities(name: str) -> IdentitySet:
    if name == "FO[+1]+A":
        return identities_union("FO[+1]+A", BUILTIN_IDENTITIES["FO[+1]"], BUILTIN_IDENTITIES["A"])
    return BUILTIN_IDENTITIES[name]


# ---------------------------------------------------------------------------
# Routes
# ---------------------------------------------------------------------------

def analyze(lang: Dfa, max_monoid: int = DEFAULT_MAX_MONOID,
            max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> EvidenceReport:
    """Summary of the syntactic algebra of L itself (not L ∩ A^+)."""
    lang = minimize(lang)
    m = syntactic_morphism(lang, max_elements=max_monoid)
    r = stability_index(m)
    satisfied: dict[str, dict[str, bool | None]] = {"syntactic_monoid": {}, "stable_monoid": {}}
    for name, ids in BUILTIN_IDENTITIES.items():
        for key, scope in (("syntactic_monoid", None), ("stable_monoid", r.stable_monoid)):
            try:
                satisfied[key][name] = check_identity(m, ids, scope, max_assignments).holds
            except GuardExceeded:
                satisfied[key][name] = None
    sizes = {"syntactic_monoid": m.element_count, "syntactic_semigroup": len(m.semigroup_part),
             "stable_semigroup": len(r.stable_semigroup), "stable_monoid": len(r.stable_monoid),
             "idempotents": len(idempotents(m)), "minimal_dfa_states": lang.state_count}
    details = {"syntactic_monoid_satisfies": satisfied["syntactic_monoid"],
               "stable_monoid_satisfies": satisfied["stable_monoid"],
               "stable_monoid_elements": sorted(_word(_elem(m, x)) for x in r.stable_monoid)}
    return EvidenceReport(ANALYSIS, None, r.s, None, sizes, lang.accepts_empty, route=None,
                          details=details)


def decide_stable_monoid_in(lang: Dfa, ids: IdentitySet, fragment: str | None = None,
                            max_monoid: int = DEFAULT_MAX_MONOID,
                            max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> EvidenceReport:
    st = _setup(lang, max_monoid)
    m, r = st.monoid, st.record
    v = check_identity(m, ids, r.stable_monoid, max_assignments)
    witness = None if v else _identity_witness(m, v, {"language": "L+", "scope": "stable_monoid"})
    return EvidenceReport(DEFINABLE if v else NOT_DEFINABLE, fragment or ids.name, r.s, r.s,
                          _sizes(st), st.dfa.accepts_empty, witness, STABLE_MONOID,
                          {"identities": ids.name})


def decide_local_of_stable_semigroup_in(lang: Dfa, ids: IdentitySet, fragment: str | None = None,
                                        max_monoid: int = DEFAULT_MAX_MONOID,
                                        max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> EvidenceReport:
    st = _setup(lang, max_monoid)
    m, r = st.monoid, st.record
    idems = sorted(idempotents(m, r.stable_semigroup))
    witness = None
    for e in idems:
        v = check_identity(m, ids, local_monoid(m, e, r.stable_semigroup), max_assignments)
        if not v:
            witness = _identity_witness(m, v, {"language": "L+", "scope": "local_monoid"},
                                        idempotent=_elem(m, e))
            break
    return EvidenceReport(NOT_DEFINABLE if witness else DEFINABLE, fragment or ids.name, r.s, r.s,
                          _sizes(st, stable_idempotents=len(idems)), st.dfa.accepts_empty,
                          witness, LOCAL_OF_STABLE, {"identities": ids.name})


def decide_via_derived_category(lang: Dfa, equations: Sequence[PathEquation], k: int,
                                fragment: str | None = None,
                                max_monoid: int = DEFAULT_MAX_MONOID,
                                max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> EvidenceReport:
    """Check every path equation on C_{k·s}."""
    if not equations:
        raise MissingEquations("the derived-category route needs at least one path equation")
    st = _setup(lang, max_monoid)
    m, r = st.monoid, st.record
    d = k * r.s
    c = derived_category(m, d)
    witness = None
    for eq in equations:
        v = check_path_equation(c, eq, max_assignments)
        if not v:
            witness = _path_witness(m, v, {"language": "L+", "category": "derived", "modulus": d})
            break
    return EvidenceReport(NOT_DEFINABLE if witness else DEFINABLE, fragment, r.s, d,
                          _sizes(st, category_objects=d), st.dfa.accepts_empty, witness, DERIVED,
                          {"delay_multiplier": k, "equations": len(equations)})


def reduced_language(lang: Dfa, modulus: int | None = None,
                     max_monoid: int = DEFAULT_MAX_MONOID) -> tuple[Dfa, int]:
    """(L ∩ A^+)_d with d the stability index unless given."""
    st = _setup(lang, max_monoid)
    d = modulus or st.record.s
    return enrich(st.positive, d), st.record.s


def decide_via_reduction(lang: Dfa, entry: FragmentEntry,
                         equations: Sequence[PathEquation] | None = None,
                         max_monoid: int = DEFAULT_MAX_MONOID,
                         max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> EvidenceReport:
    """Work on L_s over the enriched alphabet: an identity on its syntactic
    semigroup, path equations on its idempotents' category, or (with no
    equations available) emit L_s for an external procedure."""
    st = _setup(lang, max_monoid)
    s = st.record.s
    reduced = enrich(st.positive, s)
    sizes = _sizes(st, reduced_alphabet=len(reduced.alphabet), reduced_dfa_states=reduced.state_count)
    base = dict(fragment=entry.name, stability_index=s, modulus=s,
                epsilon_in_language=st.dfa.accepts_empty, route=REDUCTION)

    if entry.path_equations == "knast":
        equations = [knast_equation()]
    if entry.identity is None and not equations:
        return EvidenceReport(REDUCED, sizes=sizes, details={"reduced_dfa": reduced.to_text()}, **base)

    t = syntactic_morphism(reduced, max_elements=max_monoid)
    part = t.semigroup_part
    sizes["reduced_semigroup"] = len(part)
    witness = None
    if entry.identity is not None:
        ids = resolve_identities(entry.identity)
        v = check_identity(t, ids, part, max_assignments)
        if not v:
            witness = _identity_witness(t, v, {"language": "L_s", "scope": "semigroup"})
        details = {"identities": ids.name}
    else:
        c = idempotents_category(t, part)
        sizes["idempotents_category_objects"] = c.object_count
        for eq in equations:
            v = check_path_equation(c, eq, max_assignments)
            if not v:
                witness = _path_witness(t, v, {"language": "L_s", "category": "idempotents"})
                witness["objects"] = {p: c.object_labels[o] for p, o in v.objects.items()}
                break
        details = {"equations": len(equations)}
    return EvidenceReport(NOT_DEFINABLE if witness else DEFINABLE, sizes=sizes, witness=witness,
                          details=details, **base)


def decide(lang: Dfa, fragment: str, k: int | None = None,
           equations: Sequence[PathEquation] | None = None,
           max_monoid: int = DEFAULT_MAX_MONOID,
           max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> EvidenceReport:
    entry = fragment_entry(fragment, k)
    caps = dict(max_monoid=max_monoid, max_assignments=max_assignments)
    if entry.route == STABLE_MONOID:
        return decide_stable_monoid_in(lang, BUILTIN_IDENTITIES[entry.identity], entry.name, **caps)
    if entry.route == LOCAL_OF_STABLE:
        return decide_local_of_stable_semigroup_in(lang, BUILTIN_IDENTITIES[entry.identity],
                                                   entry.name, **caps)
    if entry.route == DERIVED:
        if entry.path_equations == "knast":
            equations = [knast_equation()]
        elif not equations:
            raise MissingEquations(f"{entry.name} needs an equation file (--equations FILE)")
        return decide_via_derived_category(lang, equations, entry.delay_multiplier, entry.name, **caps)
    return decide_via_reduction(lang, entry, equations, **caps)


# ---------------------------------------------------------------------------
# Witness replay
# ---------------------------------------------------------------------------

def replay_witness(report: EvidenceReport, lang: Dfa,
                   max_monoid: int = DEFAULT_MAX_MONOID) -> bool:
    """Rebuild the presentation named in the witness, map its generator
    words back to elements, check membership in the stated scope and
    re-evaluate the equation. True iff both sides differ again."""
    w = report.witness
    if w is None:
        raise ValueError("report has no witness")
    pres = w["presentation"]
    st = _setup(lang, max_monoid)
    if pres["language"] == "L+":
        m = st.monoid
    else:
        m = syntactic_morphism(enrich(st.positive, report.modulus), max_elements=max_monoid)
    alphabet = tuple(m.letter_image)
    elem = lambda text: m.image(split_word(text, alphabet))
    values = {v: elem(x) for v, x in w["assignment"].items()}
    mul = lambda a, b: m.table[a][b]
    om = lambda a: omega_power(m, a)

    if w["kind"] == "identity":
        scope = {"stable_monoid": st.record.stable_monoid,
                 "semigroup": m.semigroup_part}.get(pres["scope"])
        if pres["scope"] == "local_monoid":
            e = elem(w["idempotent"])
            scope = local_monoid(m, e, st.record.stable_semigroup)
        if not set(values.values()) <= set(scope):
            return False
        lhs_t, rhs_t = parse_equation(w["equation"])
        return evaluate_term(lhs_t, values, mul, om) != evaluate_term(rhs_t, values, mul, om)

    (eq,) = parse_path_equations(w["graph"])
    if pres["category"] == "derived":
        c: FiniteCategory = derived_category(m, pres["modulus"])
        objects = {v: int(o) for v, o in w["objects"].items()}
    else:
        c = idempotents_category(m, m.semigroup_part)
        label = {lab: i for i, lab in enumerate(c.object_labels)}
        objects = {v: label[o] for v, o in w["objects"].items()}
    for name, src, dst in eq.graph.edges:
        if name in values and values[name] not in c.hom[objects[src], objects[dst]]:
            return False
    lhs, rhs = evaluate_morphism(c, eq, values)
    return lhs != rhs


"""Acceptance criteria 1-12.

Run with pytest (the pass/fail lines appear in the terminal summary) or as
a script: ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from fragdec.automata import combine, nonempty_words, parse_regex, words_upto  # noqa: E402
from fragdec.category import (check_path_equation, derived_category, division_check,  # noqa: E402
                              knast_equation, local_monoid_at, prop15_division)
from fragdec.corpus import formula_corpus, language_corpus  # noqa: E402
from fragdec.decide import (DEFINABLE, NOT_DEFINABLE, decide, decide_stable_monoid_in,  # noqa: E402
                            decide_via_derived_category, replay_witness)
from fragdec.logic import evaluate  # noqa: E402
from fragdec.semigroup import (check_identity, idempotents_ideal, identity_set,  # noqa: E402
                               product_set, syntactic_morphism)
from fragdec.stability import stability_index  # noqa: E402

from oracles import images_by_length, union_decomposition  # noqa: E402

EXAMPLE = "(aa)*ab(bb)*"
EVEN_AS = "(b*ab*a)*b*"
CORPUS_SEED = 2026


def criterion_1(corpus):
    m = syntactic_morphism(parse_regex(EXAMPLE))
    s = stability_index(m).s
    return s == 4, f"stability index of {EXAMPLE} = {s} (expected 4)", 1.0


def criterion_2(corpus):
    m = syntactic_morphism(parse_regex(EXAMPLE))
    holds = check_identity(m, identity_set("J"), stability_index(m).stable_monoid).holds
    return holds, f"stable monoid of {EXAMPLE} in J: {holds}", 1.0


def criterion_3(corpus):
    lang = parse_regex(EXAMPLE)
    m = syntactic_morphism(lang)
    direct = check_path_equation(derived_category(m, 4), knast_equation())
    report = decide_via_derived_category(lang, [knast_equation()], 2, "BS1[<,MOD]")
    w = report.witness or {}
    lhs, rhs = m.image(w.get("lhs", "")), m.image(w.get("rhs", ""))
    # empty context separates the two sides: one is in L, the other is not
    separated = lhs != rhs and ((lhs in m.accepting) != (rhs in m.accepting))
    ok = (not direct.holds and report.verdict == NOT_DEFINABLE and separated
          and (w.get("lhs"), w.get("rhs")) == ("aabb", "ab") and replay_witness(report, lang))
    detail = (f"C_4 Knast holds={direct.holds}; C_{report.modulus} verdict={report.verdict}, "
              f"witness {w.get('lhs')} != {w.get('rhs')}, separated by empty context: {separated}")
    return ok, detail, 5.0


def criterion_4(corpus):
    cases = [("(..)*a.*", DEFINABLE), (EVEN_AS, NOT_DEFINABLE), ("(a|b)*", DEFINABLE)]
    parts, ok = [], True
    for pattern, expected in cases:
        start = time.perf_counter()
        got = decide(parse_regex(pattern, "ab"), "FO[<,MOD]").verdict
        elapsed = time.perf_counter() - start
        ok &= got == expected and elapsed < 1.0
        parts.append(f"{pattern} -> {got} ({elapsed:.2f} s)")
    return ok, "; ".join(parts), 3.0


def criterion_5(corpus):
    formulas = formula_corpus(200, seed=CORPUS_SEED)
    mismatches = checked = 0
    for f, alphabet, d in formulas:
        dfa = union_decomposition(f, alphabet, d, 8)
        for w in words_upto(alphabet, 8):
            checked += 1
            mismatches += dfa.accepts(w) != evaluate(f, w)
    return mismatches == 0, f"{len(formulas)} formulas, {checked} word checks, {mismatches} mismatches", 120.0


def criterion_6(corpus):
    mismatches = pairs = 0
    for sample in corpus:
        m = sample.monoid
        for d in range(1, 7):
            bound = 4 * d * m.element_count
            layers = images_by_length(sample.dfa, m, bound)
            expected = frozenset().union(*layers[::d])
            c = derived_category(m, d)
            pairs += 1
            mismatches += any(c.hom[i, i] != expected for i in range(d))
    return mismatches == 0, f"{len(corpus)} DFAs x d=1..6 ({pairs} categories), {mismatches} mismatches", None


def criterion_7(corpus):
    rng = random.Random(CORPUS_SEED)
    divisor_pairs = [(d, d2) for d2 in range(1, 9) for d in range(1, d2 + 1) if d2 % d == 0]
    failures = 0
    trials = 300
    for _ in range(trials):
        sample = rng.choice(corpus)
        d, d2 = rng.choice(divisor_pairs)
        m = sample.monoid
        w = prop15_division(m, d, d2)
        failures += not division_check(w, derived_category(m, d2), derived_category(m, d))
    return failures == 0, f"{trials} random (L, d, d') triples with d | d' <= 8, {failures} failures", None


def criterion_8(corpus):
    failures = 0
    for sample in corpus:
        m = sample.monoid
        r = stability_index(m)
        layers = images_by_length(sample.dfa, m, 2 * r.s)
        t_s = r.stable_semigroup
        ok = product_set(m, t_s, t_s) == t_s
        ok &= layers[r.s] == t_s == layers[2 * r.s]
        ok &= all(layers[k] != layers[2 * k] for k in range(1, r.s))
        ok &= r.stable_monoid == t_s | {m.identity}
        failures += not ok
    return failures == 0, f"{len(corpus)} languages, {failures} failures", None


def criterion_9(corpus):
    m = syntactic_morphism(parse_regex("ab"))
    ideal = idempotents_ideal(m, m.semigroup_part)
    zero = m.image("aa")
    return ideal == {zero}, f"I_E of the syntactic semigroup of {{ab}} = {sorted(m.describe(x) for x in ideal)}", None


def criterion_10(corpus):
    ids = identity_set("FO[+1]")
    mismatches = 0
    for sample in corpus:
        m = sample.monoid
        s = m.semigroup_part
        whole = check_identity(m, ids, s, max_assignments=10**9).holds
        ideal = check_identity(m, ids, idempotents_ideal(m, s), max_assignments=10**9).holds
        mismatches += whole != ideal
    return mismatches == 0, f"{len(corpus)} languages, {mismatches} mismatches", None


def criterion_11(corpus):
    mismatches = 0
    for sample in corpus:
        positive = combine("intersection", sample.dfa, nonempty_words(sample.dfa.alphabet))
        m = syntactic_morphism(positive)
        c = derived_category(m, stability_index(m).s)
        local_monoids = [local_monoid_at(c, x) for x in range(c.object_count)]
        for name in ("A", "DA", "J1"):
            ids = identity_set(name)
            stable = decide_stable_monoid_in(sample.dfa, ids).verdict == DEFINABLE
            mismatches += stable != all(check_identity(lm, ids).holds for lm in local_monoids)
    return mismatches == 0, f"{len(corpus)} languages x (A, DA, J1), {mismatches} mismatches", None


def criterion_12(corpus):
    knast = [knast_equation()]
    mismatches = 0
    for sample in corpus:
        verdicts = {decide_via_derived_category(sample.dfa, knast, k).verdict for k in (2, 4, 6)}
        mismatches += len(verdicts) != 1
    return mismatches == 0, f"{len(corpus)} languages, C_2s/C_4s/C_6s, {mismatches} mismatches", 600.0


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


def run_criterion(n: int, corpus) -> tuple[bool, str]:
    start = time.perf_counter()
    ok, detail, limit = CRITERIA[n - 1](corpus)
    elapsed = time.perf_counter() - start
    if limit is not None:
        ok = ok and elapsed < limit
        timing = f"{elapsed:.2f} s, limit {limit:g} s"
    else:
        timing = f"{elapsed:.2f} s"
    return ok, f"[{'PASS' if ok else 'FAIL'}] {n:>2}: {detail} ({timing})"


def acceptance_corpus():
    return language_corpus(120, seed=CORPUS_SEED, max_monoid=32)


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n, corpus):
    from conftest import ACCEPTANCE_LINES

    ok, line = run_criterion(n, corpus)
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def main() -> int:
    corpus = acceptance_corpus()
    failed = 0
    for n in range(1, len(CRITERIA) + 1):
        ok, line = run_criterion(n, corpus)
        print(line, flush=True)
        failed += not ok
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

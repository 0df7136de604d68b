import json

import pytest

from fragdec.automata import parse_regex
from fragdec.category import derived_category, knast_equation, local_monoid_at, parse_path_equations
from fragdec.decide import (DEFINABLE, NOT_DEFINABLE, REDUCED, EvidenceReport, MissingEquations,
                            analyze, decide, decide_local_of_stable_semigroup_in,
                            decide_stable_monoid_in, decide_via_derived_category, fragment_entry,
                            reduced_language, replay_witness)
from fragdec.errors import FragdecError, GuardExceeded
from fragdec.semigroup import check_identity, identity_set, syntactic_morphism
from fragdec.stability import stability_index

EXAMPLE = "(aa)*ab(bb)*"
EVEN_AS = "(b*ab*a)*b*"


def lang(pattern, alphabet="ab"):
    return parse_regex(pattern, alphabet)


def verdict(pattern, fragment, **kw):
    return decide(lang(pattern), fragment, **kw).verdict


class TestRegistry:
    def test_names(self):
        assert fragment_entry("FO[<,MOD]").identity == "A"
        assert fragment_entry("FO2[Reg]").route == "local_of_stable_semigroup"
        assert fragment_entry("BS1[<,MOD]").delay_multiplier == 2
        assert fragment_entry("FO2_k[<,MOD]", 3).delay_multiplier == 6
        assert fragment_entry("BS_k[Reg]", 1).path_equations == "knast"

    def test_errors(self):
        with pytest.raises(FragdecError):
            fragment_entry("FO[nope]")
        with pytest.raises(FragdecError):
            fragment_entry("BS_k[Reg]")


class TestAnalyze:
    def test_example(self):
        r = analyze(lang(EXAMPLE))
        assert r.stability_index == 4
        assert r.details["stable_monoid_satisfies"]["J"] is True
        assert r.details["syntactic_monoid_satisfies"]["J"] is False

    def test_universal(self):
        r = analyze(lang("(a|b)*"))
        assert r.stability_index == 1
        assert r.sizes["syntactic_monoid"] == r.sizes["stable_monoid"] == 1
        assert r.epsilon_in_language

    def test_even_as(self):
        r = analyze(lang(EVEN_AS))
        assert r.sizes["syntactic_monoid"] == 2 == r.sizes["stable_monoid"]
        assert r.details["syntactic_monoid_satisfies"]["A"] is False


class TestLocalRoutes:
    def test_fo_mod_triple(self):
        assert verdict("(..)*a.*", "FO[<,MOD]") == DEFINABLE
        assert verdict(EVEN_AS, "FO[<,MOD]") == NOT_DEFINABLE
        assert verdict("(a|b)*", "FO[<,MOD]") == DEFINABLE

    def test_group_witness(self):
        r = decide(lang(EVEN_AS), "FO[<,MOD]")
        assert r.witness["assignment"] == {"x": "a"}
        assert r.witness["lhs"] != r.witness["rhs"]
        assert r.modulus == r.stability_index

    def test_fo2(self):
        for fragment in ("FO2[<,MOD]", "FO2[Reg]"):
            assert verdict(".*a.*b.*a.*", fragment) == DEFINABLE
            assert verdict("(a|b)*", fragment) == DEFINABLE
            assert verdict(EVEN_AS, fragment) == NOT_DEFINABLE

    def test_local_witness_names_idempotent(self):
        r = decide(lang(EVEN_AS), "FO2[Reg]")
        assert r.witness["presentation"]["scope"] == "local_monoid"
        assert "idempotent" in r.witness

    def test_fo1(self):
        assert verdict(".*a.*", "FO1[MOD]") == DEFINABLE
        assert verdict("a.*", "FO1[MOD]") == NOT_DEFINABLE

    def test_direct_calls(self):
        ids = identity_set("A")
        assert decide_stable_monoid_in(lang("(..)*a.*"), ids).verdict == DEFINABLE
        assert decide_local_of_stable_semigroup_in(lang(EVEN_AS), ids).verdict == NOT_DEFINABLE


class TestDerivedRoute:
    def test_example_not_definable(self):
        r = decide(lang(EXAMPLE), "BS1[<,MOD]")
        assert r.verdict == NOT_DEFINABLE
        assert (r.stability_index, r.modulus) == (4, 8)
        assert (r.witness["lhs"], r.witness["rhs"]) == ("aabb", "ab")
        assert r.witness["assignment"] == {"m1": "a", "m2": "a", "m3": "b", "m4": "b"}

    def test_trivial(self):
        assert verdict("(a|b)*", "BS1[<,MOD]") == DEFINABLE

    def test_piecewise_testable(self):
        assert verdict(".*a.*", "BS1[<,MOD]") == DEFINABLE
        assert verdict(".*a.*b.*", "BS1[<,MOD]") == DEFINABLE

    def test_prefix_language(self):
        # aA* has a left-zero syntactic monoid, so it is not piecewise testable
        assert not check_identity(syntactic_morphism(lang("a.*")), identity_set("J"))
        assert verdict("a.*", "BS1[<,MOD]") == NOT_DEFINABLE

    def test_missing_equations(self):
        with pytest.raises(MissingEquations):
            decide(lang("a.*"), "FO[=,MOD]")
        with pytest.raises(MissingEquations):
            decide(lang("a.*"), "FO2_k[<,MOD]", k=2)
        with pytest.raises(MissingEquations):
            decide_via_derived_category(lang("a.*"), [], 2)

    def test_external_equations(self):
        text = "vertices: p\nedge: x p p\nedge: y p p\nequation: x y = y x\n"
        eqs = parse_path_equations(text)
        assert decide(lang(".*a.*"), "FO[=,MOD]", equations=eqs).verdict == DEFINABLE
        assert decide(lang(".*ab"), "FO[=,MOD]", equations=eqs).verdict == NOT_DEFINABLE

    def test_guard(self):
        with pytest.raises(GuardExceeded):
            decide(lang(EXAMPLE), "BS1[<,MOD]", max_assignments=20)
        with pytest.raises(GuardExceeded):
            decide(lang(EXAMPLE), "BS1[<,MOD]", max_monoid=5)


class TestReduction:
    def test_fo_plus_one(self):
        assert verdict("aa.*", "FO[+1,MOD]") == DEFINABLE
        assert verdict("(ab)*", "FO[+1,MOD]") == DEFINABLE
        assert verdict(EVEN_AS, "FO[+1,MOD]") == NOT_DEFINABLE

    def test_length_counting(self):
        assert verdict("(aa)*", "FO[+1,MOD]") == DEFINABLE
        assert verdict("((a|b)(a|b))*", "FO[+1,MOD]") == DEFINABLE

    def test_bs1_reg(self):
        for pattern in (EXAMPLE, "a.*", ".*ab.*", "(a|b)*"):
            assert verdict(pattern, "BS1[Reg]") == DEFINABLE

    def test_reduced_instance(self):
        r = decide(lang(EXAMPLE), "BS_k[Reg]", k=2)
        assert r.verdict == REDUCED
        reduced, s = reduced_language(lang(EXAMPLE))
        assert s == 4
        assert r.details["reduced_dfa"] == reduced.to_text()
        assert verdict("(a|b)*", "FO2_k[Reg]", k=3) == REDUCED

    def test_k1_uses_knast(self):
        assert decide(lang(EXAMPLE), "BS_k[Reg]", k=1).verdict == DEFINABLE
        assert decide(lang(EXAMPLE), "FO2_k[<,MOD]", k=1).verdict == NOT_DEFINABLE

    def test_reduced_alphabet(self):
        reduced, _ = reduced_language(lang(".*a.*"), modulus=3)
        assert len(reduced.alphabet) == 6


class TestWitnessReplay:
    CASES = [(EXAMPLE, "BS1[<,MOD]", {}), (EVEN_AS, "FO[<,MOD]", {}), (EVEN_AS, "FO2[Reg]", {}),
             (EVEN_AS, "FO[+1,MOD]", {}), ("a.*", "BS1[<,MOD]", {}), ("a.*", "FO1[MOD]", {})]

    @pytest.mark.parametrize("pattern,fragment,kw", CASES)
    def test_replays(self, pattern, fragment, kw):
        r = decide(lang(pattern), fragment, **kw)
        assert r.verdict == NOT_DEFINABLE
        assert replay_witness(r, lang(pattern))

    def test_tampered_witness_is_rejected(self):
        r = decide(lang(EXAMPLE), "BS1[<,MOD]")
        bad = EvidenceReport.from_dict(r.to_dict())
        bad.witness["assignment"]["m4"] = "a"
        assert not replay_witness(bad, lang(EXAMPLE))

    def test_corpus(self, corpus):
        for sample in corpus[:60]:
            for fragment in ("FO[<,MOD]", "FO2[Reg]", "BS1[<,MOD]", "BS1[Reg]", "FO[+1,MOD]"):
                try:
                    r = decide(sample.dfa, fragment)
                except GuardExceeded:
                    continue
                if r.verdict == NOT_DEFINABLE:
                    assert r.witness is not None
                    assert replay_witness(r, sample.dfa)

    def test_no_witness(self):
        with pytest.raises(ValueError):
            replay_witness(decide(lang("(a|b)*"), "FO[<,MOD]"), lang("(a|b)*"))


class TestCorpusProperties:
    def test_route_agreement(self, corpus):
        for sample in corpus:
            m = syntactic_morphism(sample.dfa)
            r = stability_index(m)
            c = derived_category(m, r.s)
            locals_ = [local_monoid_at(c, x) for x in range(r.s)]
            for name in ("A", "DA", "J1"):
                ids = identity_set(name)
                stable = check_identity(m, ids, r.stable_monoid).holds
                assert stable == all(check_identity(lm, ids).holds for lm in locals_)

    def test_monotone_signatures(self, corpus):
        for sample in corpus:
            if verdict_of(sample, "FO2[<,MOD]") == DEFINABLE:
                assert verdict_of(sample, "FO2[Reg]") == DEFINABLE
            if verdict_of(sample, "BS1[<,MOD]") == DEFINABLE:
                assert verdict_of(sample, "BS1[Reg]") == DEFINABLE

    def test_fo_mod_contains_fo2(self, corpus):
        for sample in corpus:
            if verdict_of(sample, "FO2[<,MOD]") == DEFINABLE:
                assert verdict_of(sample, "FO[<,MOD]") == DEFINABLE

    def test_delay_stability(self, corpus):
        knast = [knast_equation()]
        for sample in corpus[:50]:
            vs = {decide_via_derived_category(sample.dfa, knast, k).verdict for k in (2, 4, 6)}
            assert len(vs) == 1


def verdict_of(sample, fragment):
    return decide(sample.dfa, fragment).verdict


class TestReport:
    def test_json_round_trip(self):
        for pattern, fragment in ((EXAMPLE, "BS1[<,MOD]"), ("a.*", "FO[<,MOD]"), (EXAMPLE, "BS_k[Reg]")):
            r = decide(lang(pattern), fragment, k=2 if "_k" in fragment else None)
            text = r.to_json()
            again = EvidenceReport.from_dict(json.loads(text))
            assert again.to_json() == text
            assert again == r

    def test_schema_version_checked(self):
        data = decide(lang("a"), "FO[<,MOD]").to_dict()
        data["schema_version"] = 99
        with pytest.raises(ValueError):
            EvidenceReport.from_dict(data)

    def test_text_mentions_verdict(self):
        r = decide(lang(EXAMPLE), "BS1[<,MOD]")
        text = r.to_text()
        assert "not_definable" in text and "aabb" in text

    def test_epsilon_flag(self):
        assert decide(lang("(aa)*", "a"), "FO[<,MOD]").epsilon_in_language
        assert not decide(lang("a+", "a"), "FO[<,MOD]").epsilon_in_language

    def test_verdict_requires_witness(self):
        with pytest.raises(ValueError):
            EvidenceReport(NOT_DEFINABLE, "FO[<,MOD]", 1, 1, {}, False, None, "stable_monoid")

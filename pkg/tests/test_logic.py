import random

import pytest
from hypothesis import given, settings, strategies as st

from fragdec.automata import parse_regex, words_upto
from fragdec.corpus import formula_corpus, random_formula
from fragdec.errors import AlphabetError, ParseError
from fragdec.logic import (FALSE, TRUE, And, Const, Exists, FreeVariableError, Length, Letter, Mod,
                           Or, alternation_depth, decompose_D, evaluate, format_formula,
                           language_upto, letters_to_mod, lift_moduli, mod_to_letters,
                           parse_formula, quantifier_tree)

from oracles import union_decomposition

PREFIX_AA = parse_formula("(and (letter-min a 0) (letter-min a 1))")
EVEN_POSITION_A = parse_formula("(exists x (and (letter a x) (mod 0 2 x)))")
SCATTERED_ABA = parse_formula("(exists x (and (letter a x) (exists y (and (lt x y) (letter b y)"
                     " (exists x (and (lt y x) (letter a x)))))))")
DEPTH2 = parse_formula("(exists x (exists y (and (letter a x) (letter a y) (lt x y)"
                       " (forall z (or (not (and (lt x z) (lt z y))) (letter c z))))))")


def agree(f, g, alphabet, n=8):
    return all(evaluate(f, w) == evaluate(g, w) for w in words_upto(alphabet, n))


class TestEvaluate:
    def test_example_prefix(self):
        assert evaluate(PREFIX_AA, "aab") and not evaluate(PREFIX_AA, "ab")

    def test_example_modular(self):
        assert not evaluate(EVEN_POSITION_A, "ba") and evaluate(EVEN_POSITION_A, "ab")

    def test_empty_word_conventions(self):
        assert evaluate(TRUE, "")
        assert not evaluate(parse_formula("(exists x (letter a x))"), "")
        assert evaluate(parse_formula("(forall x (letter a x))"), "")
        assert evaluate(parse_formula("(D 0 3)"), "")
        assert not evaluate(parse_formula("(letter-min a 0)"), "")

    def test_out_of_range_positions(self):
        assert not evaluate(parse_formula("(exists x (letter-at a x +1))"), "a")
        assert evaluate(parse_formula("(exists x (letter-at a x -1))"), "ab")
        assert evaluate(parse_formula("(letter-max b 0)"), "ab")
        assert not evaluate(parse_formula("(letter-max a 2)"), "ab")

    def test_example_two_variable_formula(self):
        dfa = parse_regex("(a|b)*a(a|b)*b(a|b)*a(a|b)*")
        assert all(evaluate(SCATTERED_ABA, w) == dfa.accepts(w) for w in words_upto("ab", 7))

    def test_depth_two_example_language(self):
        dfa = parse_regex("(a|b|c)*ac*a(a|b|c)*")
        assert all(evaluate(DEPTH2, w) == dfa.accepts(w) for w in words_upto("abc", 5))

    def test_free_variable(self):
        with pytest.raises(FreeVariableError):
            evaluate(parse_formula("(letter a x)"), "a")


class TestLanguageUpto:
    def test_false(self):
        assert language_upto(FALSE, "ab", 4) == set()

    def test_length_predicate(self):
        assert language_upto(parse_formula("(D 0 2)"), "a", 3) == {(), ("a", "a")}

    def test_example_modular_language(self):
        dfa = parse_regex("(..)*a.*", "ab")
        words = list(words_upto("ab", 3))
        assert len(words) == 15
        assert language_upto(EVEN_POSITION_A, "ab", 3) == {w for w in words if dfa.accepts(w)}

    def test_monotone(self):
        rng = random.Random(2)
        for _ in range(20):
            f = random_formula(rng, ("a", "b"), 2)
            assert language_upto(f, "ab", 4) <= language_upto(f, "ab", 5)


class TestAlternation:
    def test_examples(self):
        assert alternation_depth(DEPTH2) == 2
        assert alternation_depth(parse_formula("(and (letter-min a 0) (D 1 2))")) == 0
        assert alternation_depth(SCATTERED_ABA, two_variable=True) == 1
        assert alternation_depth(SCATTERED_ABA) == 1

    def test_negation_flips(self):
        f = parse_formula("(not (exists x (forall y (lt x y))))")
        assert alternation_depth(f) == 2
        assert alternation_depth(parse_formula("(not (exists x (min x)))")) == 1

    def test_mixed_blocks_need_two(self):
        f = parse_formula("(and (exists x (letter a x)) (forall y (letter b y)))")
        assert alternation_depth(f) == 2

    def test_branch_counting(self):
        f = parse_formula("(exists x (or (forall y (lt x y)) (letter a x)))")
        assert alternation_depth(f, two_variable=True) == 2
        g = parse_formula("(exists x (and (letter a x) (exists y (and (lt x y) (not (exists x (lt y x)))))))")
        assert alternation_depth(g, two_variable=True) == 2

    def test_two_variable_refuses_three(self):
        with pytest.raises(ValueError):
            alternation_depth(DEPTH2, two_variable=True)


class TestDecompose:
    def test_forced(self):
        assert decompose_D(parse_formula("(D 1 2)"), 2) == [FALSE, TRUE]

    def test_without_length_predicates(self):
        assert decompose_D(EVEN_POSITION_A, 3) == [EVEN_POSITION_A] * 3

    def test_no_simplification(self):
        f = parse_formula("(or (and (D 0 2) (exists x (letter a x))) (D 1 2))")
        psi0, psi1 = decompose_D(f, 2)
        assert format_formula(psi0) == "(or (and true (exists x (letter a x))) false)"
        assert format_formula(psi1) == "(or (and false (exists x (letter a x))) true)"

    def test_mixed_moduli(self):
        f = parse_formula("(and (D 1 2) (D 0 3))")
        with pytest.raises(ValueError):
            decompose_D(f, 2)
        lifted = lift_moduli(f)
        assert agree(f, lifted, "a", 12)
        parts = decompose_D(lifted, 6)
        assert [p == FALSE or agree(p, FALSE, "a", 6) for p in parts] == [True, True, True, False, True, True]

    def test_lift_rejects_non_divisor(self):
        with pytest.raises(ValueError):
            lift_moduli(parse_formula("(D 1 2)"), 3)

    def test_length_cases_semantics(self):
        for f, alphabet, d in formula_corpus(60, seed=41):
            f = lift_moduli(f, d)
            parts = decompose_D(f, d)
            for w in words_upto(alphabet, 6):
                assert evaluate(f, w) == evaluate(parts[len(w) % d], w)


class TestSubstitutions:
    def test_modular_letter(self):
        assert format_formula(mod_to_letters(EVEN_POSITION_A, 2, "ab")) == "(exists x (letter a@0 x))"

    def test_plain_letter(self):
        f = mod_to_letters(parse_formula("(exists x (letter a x))"), 2, "ab")
        assert format_formula(f) == "(exists x (or (letter a@0 x) (letter a@1 x)))"

    def test_true(self):
        assert mod_to_letters(TRUE, 3, "ab") == TRUE
        assert letters_to_mod(TRUE, 3) == TRUE

    def test_back(self):
        f = letters_to_mod(parse_formula("(exists x (letter a@1 x))"), 2)
        assert format_formula(f) == "(exists x (and (letter a x) (mod 1 2 x)))"

    def test_errors(self):
        with pytest.raises(ValueError):
            mod_to_letters(parse_formula("(D 0 2)"), 2, "ab")
        with pytest.raises(ValueError):
            mod_to_letters(parse_formula("(exists x (mod 0 3 x))"), 2, "ab")
        with pytest.raises(AlphabetError):
            letters_to_mod(parse_formula("(exists x (letter a x))"), 2)
        with pytest.raises(AlphabetError):
            mod_to_letters(parse_formula("(exists x (letter a@0 x))"), 2, "ab")

    def test_round_trip_and_skeleton(self):
        for f, alphabet, d in formula_corpus(80, seed=7):
            f = lift_moduli(f, d)
            for psi in decompose_D(f, d):
                there = mod_to_letters(psi, d, alphabet)
                back = letters_to_mod(there, d)
                assert agree(back, psi, alphabet, 6)
                assert quantifier_tree(there) == quantifier_tree(psi) == quantifier_tree(back)

    def test_positional_letters_round_trip(self):
        f = parse_formula("(and (letter-min a 1) (letter-max b 0) (exists x (letter-at a x +2)))")
        for d in (1, 2, 3):
            assert agree(letters_to_mod(mod_to_letters(f, d, "ab"), d), f, "ab", 7)

    def test_union_decomposition_small(self):
        for f, alphabet, d in formula_corpus(25, seed=99):
            dfa = union_decomposition(f, alphabet, d, 6)
            for w in words_upto(alphabet, 6):
                assert dfa.accepts(w) == evaluate(f, w)


class TestText:
    @given(st.integers(0, 10**6))
    @settings(max_examples=60, deadline=None)
    def test_round_trip(self, seed):
        f = random_formula(random.Random(seed), ("a", "b"), 3)
        assert parse_formula(format_formula(f)) == f

    @pytest.mark.parametrize("text", ["(and", "(foo x)", "(mod 2 2 x)", "(letter a)", "(exists (x) true)",
                                      "true false", ")", "(letter-at a x q)"])
    def test_errors(self, text):
        with pytest.raises(ParseError):
            parse_formula(text)

    def test_constants_and_nodes(self):
        assert parse_formula("(eq x y)") == parse_formula("(eq x y)")
        f = parse_formula("(or (mod 0 2 x) (letter a x))")
        assert isinstance(f, Or) and isinstance(f.parts[0], Mod)
        assert Const(True) == TRUE
        assert isinstance(parse_formula("(and (D 0 1))"), And)
        assert parse_formula("(exists x (letter a x))") == Exists("x", Letter("a", "x"))
        with pytest.raises(ValueError):
            Length(2, 2)

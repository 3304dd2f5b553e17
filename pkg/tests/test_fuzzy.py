import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from refaudit.fuzzy import (
    MatchCandidate,
    best_match,
    levenshtein_distance,
    normalize_title,
    similarity_ratio,
    title_similarity,
)

from ._oracles import recursive_levenshtein

short_strings = st.text(alphabet="abc", max_size=8)


class TestLevenshtein:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ("kitten", "sitting", 3),
            ("abc", "abc", 0),
            ("", "abcd", 4),
            ("abcd", "", 4),
            ("flaw", "lawn", 2),
            ("a", "b", 1),
        ],
    )
    def test_known_distances(self, a, b, expected):
        assert levenshtein_distance(a, b) == expected

    @given(short_strings, short_strings)
    def test_agrees_with_recursive_oracle(self, a, b):
        assert levenshtein_distance(a, b) == recursive_levenshtein(a, b)

    @given(short_strings, short_strings)
    def test_symmetry(self, a, b):
        assert levenshtein_distance(a, b) == levenshtein_distance(b, a)

    @given(short_strings)
    def test_identity(self, a):
        assert levenshtein_distance(a, a) == 0

    @given(short_strings, short_strings, short_strings)
    def test_triangle_inequality(self, a, b, c):
        assert levenshtein_distance(a, c) <= (
            levenshtein_distance(a, b) + levenshtein_distance(b, c)
        )

    def test_exhaustive_up_to_length_3(self):
        # Full agreement with the oracle on a small universe; the length-5
        # sweep lives in the acceptance suite.
        universe = [
            "".join(p)
            for n in range(4)
            for p in itertools.product("abc", repeat=n)
        ]
        for a in universe:
            for b in universe:
                assert levenshtein_distance(a, b) == recursive_levenshtein(a, b)


class TestSimilarityRatio:
    def test_single_substitution_of_three(self):
        assert similarity_ratio("abc", "abd") == pytest.approx(66.67, abs=0.01)

    @given(st.text(min_size=1, max_size=20))
    def test_identical_strings_score_100(self, s):
        assert similarity_ratio(s, s) == 100.0

    def test_total_mismatch_scores_zero(self):
        assert similarity_ratio("a", "b") == 0.0

    def test_both_empty_is_an_error(self):
        with pytest.raises(ValueError):
            similarity_ratio("", "")

    def test_one_empty(self):
        assert similarity_ratio("", "abcd") == 0.0

    @given(short_strings, short_strings)
    def test_symmetric(self, a, b):
        if a or b:
            assert similarity_ratio(a, b) == similarity_ratio(b, a)

    @given(short_strings, short_strings)
    def test_bounded(self, a, b):
        if a or b:
            assert 0.0 <= similarity_ratio(a, b) <= 100.0


class TestNormalizeTitle:
    def test_strips_case_space_and_terminal_period(self):
        assert normalize_title("  Attention Is All You Need. ") == "attention is all you need"

    def test_empty(self):
        assert normalize_title("") == ""

    def test_collapses_whitespace(self):
        assert normalize_title("A   B") == "a b"

    def test_strips_surrounding_quotes(self):
        assert normalize_title('"A Survey of Things"') == "a survey of things"

    def test_folds_accents(self):
        assert normalize_title("Protégé résumé") == "protege resume"

    def test_internal_punctuation_kept(self):
        assert normalize_title("Graphs: Theory and Practice") == "graphs: theory and practice"


class TestBestMatch:
    def test_exact_title_wins(self):
        candidates = [
            MatchCandidate(source="crossref", candidate_title="Attention Is All You Need"),
            MatchCandidate(
                source="semantic-scholar", candidate_title="Attention is all you needed"
            ),
        ]
        winner, score = best_match("attention is all you need", candidates)
        assert winner.candidate_title == "Attention Is All You Need"
        assert score == 100.0

    def test_empty_candidates(self):
        assert best_match("anything", []) is None

    def test_tie_breaks_by_source_priority(self):
        candidates = [
            MatchCandidate(source="crossref", candidate_title="Same Title Here Now"),
            MatchCandidate(source="semantic-scholar", candidate_title="Same Title Here Now"),
        ]
        winner, _ = best_match("same title here now", candidates)
        assert winner.source == "semantic-scholar"

    @given(st.permutations(list(range(4))))
    def test_permutation_invariant(self, order):
        base = [
            MatchCandidate(source="crossref", candidate_title="alpha beta gamma"),
            MatchCandidate(source="semantic-scholar", candidate_title="alpha beta gamme"),
            MatchCandidate(source="crossref", candidate_title="totally unrelated words"),
            MatchCandidate(source="semantic-scholar", candidate_title="alpha beta"),
        ]
        shuffled = [base[i] for i in order]
        winner, score = best_match("alpha beta gamma", shuffled)
        assert (winner.source, winner.candidate_title, score) == (
            "crossref",
            "alpha beta gamma",
            100.0,
        )

    def test_unprioritized_source_ranks_after_known_ones(self):
        candidates = [
            MatchCandidate(source="other-index", candidate_title="Same Title Here Now"),
            MatchCandidate(source="crossref", candidate_title="Same Title Here Now"),
        ]
        winner, _ = best_match("same title here now", candidates)
        assert winner.source == "crossref"


class TestTitleSimilarity:
    def test_normalizes_both_sides(self):
        assert title_similarity("  Attention Is All You Need. ", "attention is all you need") == 100.0

    def test_double_empty_scores_zero(self):
        assert title_similarity('"..."', "...") == 0.0

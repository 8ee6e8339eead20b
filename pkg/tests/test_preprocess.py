"""Sentence splitting, token normalization and SEP-sequence assembly."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tuplecover.corpus import TestCase
from tuplecover.errors import PreprocessingError
from tuplecover.preprocess import (
    SEP,
    assemble_sequence,
    normalize_tokens,
    split_sentences,
    tokenize_text,
)


class TestSplitSentences:
    def test_two_terminated_clauses(self):
        assert split_sentences("Test A. Test B.") == ["Test A.", "Test B."]

    def test_no_terminator_is_one_sentence(self):
        assert split_sentences("Test the browser") == ["Test the browser"]

    def test_semicolon_boundary(self):
        assert split_sentences("a; b") == ["a;", "b"]

    def test_question_and_exclamation(self):
        assert split_sentences("Works? Yes! Done.") == ["Works?", "Yes!", "Done."]

    def test_terminator_without_whitespace_does_not_split(self):
        assert split_sentences("runs in 3.5 seconds") == ["runs in 3.5 seconds"]

    def test_whitespace_only_warns_and_returns_empty(self):
        with pytest.warns(UserWarning, match="whitespace-only"):
            assert split_sentences("   \t ") == []


class TestNormalizeTokens:
    def test_strips_punctuation_and_lowercases(self):
        assert normalize_tokens("Browse the Visit History!") == ["browse", "the", "visit", "history"]

    def test_hyphenated_tool_name_survives(self):
        assert normalize_tokens("mesa-util tool") == ["mesa-util", "tool"]

    def test_casefold_and_whitespace_collapse(self):
        assert normalize_tokens("3D  graphics") == ["3d", "graphics"]

    def test_punctuation_splits_tokens(self):
        assert normalize_tokens("save/load a.b") == ["save", "load", "a", "b"]

    def test_dangling_hyphens_dropped(self):
        assert normalize_tokens("-pre mid- a-b-c") == ["pre", "mid", "a-b-c"]

    @given(st.text(max_size=80))
    def test_idempotent(self, text):
        once = normalize_tokens(text)
        assert normalize_tokens(" ".join(once)) == once


class TestAssembleSequence:
    def test_sep_sequence_length(self):
        case = TestCase(id="t", project="p", summary="one two three. four five.")
        tok = assemble_sequence(case)
        assert len(tok.sep_sequence) == 6  # 3 + SEP + 2
        assert tok.sep_sequence[3] == SEP

    def test_single_sentence_has_no_sep(self):
        tok = tokenize_text("just one sentence here")
        assert SEP not in tok.sep_sequence
        assert tok.sentences == (("just", "one", "sentence", "here"),)

    def test_sep_count_matches_sentence_count(self):
        tok = tokenize_text("a b. c d. e f.")
        assert tok.sep_sequence.count(SEP) == len(tok.sentences) - 1

    def test_degenerate_summary_raises(self):
        case = TestCase(id="t", project="p", summary="!!!")
        with pytest.raises(PreprocessingError, match="zero tokens"):
            assemble_sequence(case)

    def test_empty_sentences_dropped(self):
        tok = tokenize_text("alpha beta. ???. gamma.")
        assert tok.sentences == (("alpha", "beta"), ("gamma",))

    @given(st.lists(st.sampled_from(["alpha", "beta", "gamma", "delta"]), min_size=1, max_size=6))
    def test_no_token_contains_whitespace(self, words):
        tok = tokenize_text(" ".join(words) + ". " + " ".join(words))
        assert all(" " not in t for t in tok.sep_sequence)

"""Word vectors, phrase embeddings, SIF fitting and cosine similarity."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tuplecover.embeddings import (
    EmbeddingStore,
    SifContext,
    _oov_vector,
    cosine,
    embed_phrase_average,
    embed_phrase_sif,
    fit_sif,
    load_word_vectors,
    save_word_vectors,
    train_embeddings,
)
from tuplecover.errors import EmbeddingError, ParseError, SimilarityError, TrainingError


class TestLoadWordVectors:
    def test_header_and_two_lines(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("2 3\nalpha 1.0 2.0 3.0\nbeta 0.5 0.5 0.5\n", encoding="utf-8")
        store = load_word_vectors(path)
        assert store.dim == 3
        assert len(store.vectors) == 2
        assert np.allclose(store.vectors["alpha"], [1.0, 2.0, 3.0])

    def test_short_line_reports_line_number(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("2 3\nalpha 1.0 2.0 3.0\nbeta 0.5 0.5\n", encoding="utf-8")
        with pytest.raises(ParseError, match="3"):
            load_word_vectors(path)

    def test_duplicate_word_last_wins_with_warning(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("2 2\nalpha 1.0 1.0\nalpha 2.0 2.0\n", encoding="utf-8")
        with pytest.warns(UserWarning, match="duplicate"):
            store = load_word_vectors(path)
        assert np.allclose(store.vectors["alpha"], [2.0, 2.0])

    def test_save_load_round_trip(self, trained_store, tmp_path):
        path = tmp_path / "vec.txt"
        save_word_vectors(trained_store, path)
        reloaded = load_word_vectors(path)
        assert reloaded.dim == trained_store.dim
        assert set(reloaded.vectors) == set(trained_store.vectors)
        for word, vec in trained_store.vectors.items():
            assert np.array_equal(reloaded.vectors[word], vec)


class TestTrainEmbeddings:
    def test_deterministic(self):
        sentences = [["alpha", "beta", "gamma"], ["beta", "delta", "alpha"]] * 4
        a = train_embeddings(sentences, dim=8, window=2, epochs=2, seed=3)
        b = train_embeddings(sentences, dim=8, window=2, epochs=2, seed=3)
        assert set(a.vectors) == set(b.vectors)
        for word in a.vectors:
            assert np.array_equal(a.vectors[word], b.vectors[word])

    def test_exclusive_cooccurrence_beats_mean_pairwise_cosine(self):
        # 'left'/'right' only ever co-occur with each other; filler words mix freely.
        rng_sentences = [
            ["left", "right"],
            ["right", "left"],
        ] * 20 + [
            ["red", "blue", "green"],
            ["green", "yellow", "red"],
            ["blue", "yellow", "green"],
            ["yellow", "red", "blue"],
        ] * 10
        store = train_embeddings(rng_sentences, dim=16, window=2, epochs=30, seed=2)
        words = sorted(store.vectors)
        sims = [
            cosine(store.vectors[a], store.vectors[b])
            for a, b in itertools.combinations(words, 2)
        ]
        mean_sim = sum(sims) / len(sims)
        assert cosine(store.vectors["left"], store.vectors["right"]) > mean_sim

    def test_every_corpus_word_has_vector_and_frequency(self):
        sentences = [["alpha", "beta"], ["gamma", "alpha"]]
        store = train_embeddings(sentences, dim=4, window=1, epochs=1, seed=0)
        assert set(store.vectors) == {"alpha", "beta", "gamma"}
        assert store.frequencies["alpha"] == 2
        assert store.total_count == 4

    def test_tiny_vocabulary_rejected(self):
        with pytest.raises(TrainingError, match="vocabulary"):
            train_embeddings([["alpha", "alpha"]], dim=4)

    def test_oov_lookup_falls_back_to_hash_rule(self, trained_store):
        assert "zzz-unknown" not in trained_store
        vec = trained_store.vector("zzz-unknown")
        assert np.allclose(np.linalg.norm(vec), 1.0)
        assert np.array_equal(vec, _oov_vector("zzz-unknown", trained_store.dim))


class TestPhraseAverage:
    def test_single_word_is_identity(self, trained_store):
        word = sorted(trained_store.vectors)[0]
        assert np.array_equal(
            embed_phrase_average([word], trained_store), trained_store.vectors[word]
        )

    def test_repeated_word_equals_single(self, trained_store):
        word = sorted(trained_store.vectors)[0]
        assert np.allclose(
            embed_phrase_average([word, word], trained_store),
            embed_phrase_average([word], trained_store),
        )

    def test_two_word_mean_componentwise(self, trained_store):
        expected = (trained_store.vector("visit") + trained_store.vector("history")) / 2.0
        assert np.allclose(embed_phrase_average(["visit", "history"], trained_store), expected)

    def test_empty_phrase_rejected(self, trained_store):
        with pytest.raises(SimilarityError):
            embed_phrase_average([], trained_store)


@pytest.fixture(scope="module")
def sif_inputs(trained_store):
    phrases = [
        ("visit", "history"),
        ("resource", "directory"),
        ("taskbar", "window"),
        ("calendar", "function"),
        ("mesa-util", "tool"),
        ("unixbench", "tool"),
        ("preset", "applications"),
    ]
    ctx = fit_sif(phrases, trained_store, a=1e-3)
    return phrases, ctx


class TestSif:
    def test_residuals_orthogonal_to_component(self, trained_store, sif_inputs):
        phrases, ctx = sif_inputs
        assert ctx.principal_component is not None
        for phrase in phrases:
            vec = embed_phrase_sif(phrase, trained_store, ctx)
            assert abs(np.dot(vec, ctx.principal_component)) < 1e-6 * max(np.linalg.norm(vec), 1.0)

    def test_component_matches_power_iteration_oracle(self, trained_store, sif_inputs):
        phrases, ctx = sif_inputs
        rows = np.stack(
            [
                np.mean(
                    [
                        trained_store.vector(t) * (1e-3 / (1e-3 + trained_store.probability(t)))
                        for t in phrase
                    ],
                    axis=0,
                )
                for phrase in sorted(set(phrases))
            ]
        )
        m = rows.T @ rows
        v = np.ones(m.shape[0]) / np.sqrt(m.shape[0])
        for _ in range(2000):
            v = m @ v
            v /= np.linalg.norm(v)
        assert min(
            np.linalg.norm(ctx.principal_component - v),
            np.linalg.norm(ctx.principal_component + v),
        ) < 1e-5

    def test_rare_word_weighs_more_than_frequent(self, trained_store):
        frequent = max(trained_store.frequencies, key=lambda w: trained_store.frequencies[w])
        rare = min(trained_store.frequencies, key=lambda w: trained_store.frequencies[w])
        a = 1e-3
        weight = lambda w: a / (a + trained_store.probability(w))  # noqa: E731
        assert weight(rare) > weight(frequent)

    def test_all_identical_phrases_fall_back(self, trained_store):
        with pytest.warns(UserWarning, match="identical"):
            ctx = fit_sif([("visit", "history"), ("visit", "history"), ("visit", "history")],
                          trained_store)
        assert ctx.principal_component is None

    def test_fewer_than_two_phrases_rejected(self, trained_store):
        with pytest.raises(EmbeddingError, match=">= 2"):
            fit_sif([("visit", "history")], trained_store)

    def test_unfitted_frequencies_rejected(self):
        store = EmbeddingStore(dim=4, vectors={})
        with pytest.raises(EmbeddingError, match="frequencies"):
            fit_sif([("a",), ("b",)], store)

    def test_non_positive_smoothing_rejected(self):
        with pytest.raises(EmbeddingError, match="positive"):
            SifContext(a=0.0, principal_component=None)


class TestCosine:
    def test_self_similarity_is_one(self):
        v = np.array([0.3, -1.2, 0.5])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_negation_is_minus_one(self):
        v = np.array([0.3, -1.2, 0.5])
        assert cosine(v, -v) == pytest.approx(-1.0)

    def test_orthogonal_is_zero(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0)

    def test_zero_vector_rejected(self):
        with pytest.raises(SimilarityError, match="zero"):
            cosine(np.zeros(3), np.array([1.0, 0.0, 0.0]))

    def test_length_mismatch_rejected(self):
        with pytest.raises(SimilarityError, match="mismatch"):
            cosine(np.ones(3), np.ones(4))

    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=8))
    def test_symmetry(self, values):
        u = np.array(values)
        v = np.array(values[::-1]) + 1.0
        if np.linalg.norm(u) < 1e-9 or np.linalg.norm(v) < 1e-9:
            return
        assert cosine(u, v) == cosine(v, u)

    @given(
        st.lists(st.floats(-10, 10), min_size=3, max_size=6),
        st.floats(min_value=1e-4, max_value=1e4),
    )
    def test_scale_invariance(self, values, alpha):
        u = np.array(values)
        v = np.arange(1.0, len(values) + 1.0)
        if np.linalg.norm(u) < 1e-6:
            return
        assert abs(cosine(alpha * u, v) - cosine(u, v)) < 1e-12

"""Slot strategies, tuple equivalence, covering rule and detection."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from tuplecover.compare import (
    ComparisonConfig,
    IndicativeLexicon,
    build_comparison_config,
    compare_behavior,
    compare_nounphrase,
    compare_prerequisite,
    covers,
    detect_redundancy,
    load_skipped,
    load_verdicts,
    render_report,
    tuple_equivalent,
    verdict_from_record,
    write_skipped,
    write_verdicts,
)
from tuplecover.corpus import Corpus, TestCase
from tuplecover.embeddings import EmbeddingStore, cosine, fit_sif
from tuplecover.errors import ConfigError, CoverageUndefinedError
from tuplecover.extraction import gold_extractions
from tuplecover.synth import SynthSpec, generate_synthetic_corpus
from tuplecover.tuples import TestTuple, dissect_all


@pytest.fixture(scope="module")
def noisy_store():
    """Word vectors sharing a common bias direction, like real embeddings.

    Every vector is `0.5*c + e_word` with distinct unit directions e_word, so
    plain averages of different phrases look alike while the content
    difference survives underneath; 'application' and 'tool' are frequent
    generic modifiers that the SIF weighting must suppress.
    """
    words = ["browser", "application", "calendar", "mesa-util", "unixbench", "tool", "file", "manager"]
    dim = len(words) + 1
    common = np.eye(dim)[0]
    vectors = {w: 0.5 * common + np.eye(dim)[i + 1] for i, w in enumerate(words)}
    freqs = {
        "browser": 2, "application": 60, "calendar": 2, "mesa-util": 1,
        "unixbench": 1, "tool": 40, "file": 2, "manager": 2,
    }
    return EmbeddingStore(dim=dim, vectors=vectors, frequencies=freqs, total_count=sum(freqs.values()))


@pytest.fixture(scope="module")
def noisy_config(noisy_store):
    phrases = [
        ("browser", "application"),
        ("browser",),
        ("calendar", "application"),
        ("mesa-util", "tool"),
        ("unixbench", "tool"),
        ("file", "manager"),
    ]
    return ComparisonConfig(sif=fit_sif(phrases, noisy_store))


class TestStrategy1:
    def test_identical_phrases_score_one(self, trained_store):
        config = ComparisonConfig()
        equivalent, score = compare_behavior(["browse"], ["browse"], trained_store, config)
        assert equivalent and score == pytest.approx(1.0)

    def test_different_verbs_below_threshold(self, trained_store):
        config = ComparisonConfig()
        equivalent, score = compare_behavior(
            ["browse", "browse"], ["switch"], trained_store, config
        )
        assert not equivalent
        assert score < 0.95

    def test_strict_inequality_at_threshold_one(self, trained_store):
        config = ComparisonConfig(threshold=1.0)
        equivalent, _ = compare_behavior(["browse"], ["switch"], trained_store, config)
        assert not equivalent

    def test_score_exactly_at_threshold_is_not_equivalent(self):
        store = EmbeddingStore(
            dim=2,
            vectors={"a": np.array([1.0, 0.0]), "b": np.array([1.0, 1.0]) / np.sqrt(2)},
        )
        score = cosine(store.vector("a"), store.vector("b"))
        config = ComparisonConfig(threshold=score)
        equivalent, got = compare_behavior(["a"], ["b"], store, config)
        assert got == score
        assert not equivalent


class TestStrategy2:
    def test_generic_modifier_denoised(self, noisy_store, noisy_config):
        """SIF makes 'browser application' match 'browser'; plain averaging does not."""
        pair = (("browser", "application"), ("browser",))
        plain_equivalent, plain_score = compare_behavior(*pair, noisy_store, noisy_config)
        sif_equivalent, sif_score = compare_nounphrase(*pair, noisy_store, noisy_config)
        assert not plain_equivalent and plain_score < 0.95
        assert sif_equivalent and sif_score > 0.95

    def test_identical_phrases_equivalent_regardless_of_sif(self, noisy_store, noisy_config):
        equivalent, score = compare_nounphrase(
            ("file", "manager"), ("file", "manager"), noisy_store, noisy_config
        )
        assert equivalent and score == pytest.approx(1.0)

    def test_discriminating_tool_names_stay_apart(self, noisy_store, noisy_config):
        equivalent, score = compare_nounphrase(
            ("mesa-util", "tool"), ("unixbench", "tool"), noisy_store, noisy_config
        )
        assert not equivalent
        assert score < 0.95

    def test_degenerate_sif_falls_back_to_plain(self, noisy_store):
        from tuplecover.embeddings import SifContext

        config = ComparisonConfig(sif=SifContext(a=1e-3, principal_component=None))
        with pytest.warns(UserWarning, match="degenerate"):
            equivalent, _ = compare_nounphrase(("browser",), ("browser",), noisy_store, config)
        assert equivalent


class TestStrategy3:
    def test_temporal_mismatch(self, hash_store):
        config = ComparisonConfig()
        equivalent, score = compare_prerequisite(
            ("before", "the", "system", "installation"),
            ("after", "the", "system", "installation"),
            hash_store,
            config,
        )
        assert not equivalent and score == 0.0

    def test_logic_mismatch(self, hash_store):
        config = ComparisonConfig()
        equivalent, score = compare_prerequisite(
            ("no", "preset", "applications", "are", "installed"),
            ("preset", "applications", "are", "installed"),
            hash_store,
            config,
        )
        assert not equivalent and score == 0.0

    def test_identical_prerequisites(self, hash_store):
        config = ComparisonConfig()
        equivalent, score = compare_prerequisite(
            ("when", "drawing", "3d", "graphics"),
            ("when", "drawing", "3d", "graphics"),
            hash_store,
            config,
        )
        assert equivalent and score == pytest.approx(1.0)

    def test_multiset_not_set_comparison(self, hash_store):
        config = ComparisonConfig()
        equivalent, _ = compare_prerequisite(
            ("not", "ready", "not", "armed"), ("not", "ready", "armed"), hash_store, config
        )
        assert not equivalent


class TestLexicon:
    def test_defaults_disjoint_and_nonempty(self):
        lex = IndicativeLexicon()
        assert lex.logic_words and lex.temporal_words
        assert not lex.logic_words & lex.temporal_words

    def test_overlapping_lists_rejected(self):
        with pytest.raises(ConfigError, match="overlap"):
            IndicativeLexicon(logic_words=frozenset({"no", "when"}),
                              temporal_words=frozenset({"when"}))

    def test_extraction_preserves_order(self):
        lex = IndicativeLexicon()
        assert lex.extract(("after", "x", "no", "y", "before")) == ("after", "no", "before")


class TestTupleEquivalent:
    def test_identical_tuples_no_reasons(self, hash_store):
        config = ComparisonConfig()
        t = TestTuple(component=("visit", "history"), behavior=("browse",))
        equivalent, reasons = tuple_equivalent(t, t, hash_store, config)
        assert equivalent and reasons == []

    def test_single_differing_slot_named(self, hash_store):
        config = ComparisonConfig()
        t_a = TestTuple(component=("visit", "history"), behavior=("browse",), manner=("mouse",))
        t_b = TestTuple(component=("visit", "history"), behavior=("browse",), manner=("keyboard",))
        equivalent, reasons = tuple_equivalent(t_a, t_b, hash_store, config)
        assert not equivalent
        assert [r.slot for r in reasons] == ["manner"]

    def test_null_vs_value_is_mismatch(self, hash_store):
        config = ComparisonConfig()
        t_a = TestTuple(component=("visit", "history"))
        t_b = TestTuple(component=("visit", "history"), manner=("mouse",))
        equivalent, reasons = tuple_equivalent(t_a, t_b, hash_store, config)
        assert not equivalent
        assert reasons[0].slot == "manner"
        assert reasons[0].value_a is None and reasons[0].value_b == "mouse"
        assert reasons[0].note == "null-mismatch"

    def test_unembeddable_slot_recorded(self):
        store = EmbeddingStore(dim=2, vectors={"zero": np.zeros(2), "one": np.array([1.0, 0.0])})
        config = ComparisonConfig()
        t_a = TestTuple(component=("one",), behavior=("zero",))
        t_b = TestTuple(component=("one",), behavior=("one",))
        equivalent, reasons = tuple_equivalent(t_a, t_b, store, config)
        assert not equivalent
        assert reasons[0].note == "unembeddable"

    def test_excluded_slot_always_matches(self, hash_store):
        config = ComparisonConfig(exclude_slots=frozenset({"manner"}))
        t_a = TestTuple(component=("visit", "history"), manner=("mouse",))
        t_b = TestTuple(component=("visit", "history"), manner=("keyboard",))
        equivalent, _ = tuple_equivalent(t_a, t_b, hash_store, config)
        assert equivalent


def _naive_covers(tuples_a, tuples_b, store, config):
    """Independent oracle: direct forall/exists over tuple_equivalent."""
    return all(
        any(tuple_equivalent(ta, tb, store, config)[0] for ta in tuples_a) for tb in tuples_b
    )


class TestCovers:
    def test_reflexive(self, hash_store):
        config = ComparisonConfig()
        tuples = [
            TestTuple(component=("visit", "history"), behavior=("browse",)),
            TestTuple(component=("taskbar", "window")),
        ]
        assert covers(tuples, tuples, hash_store, config)

    def test_superset_covers_subset(self, hash_store):
        config = ComparisonConfig()
        t1 = TestTuple(component=("visit", "history"), behavior=("browse",))
        t2 = TestTuple(component=("taskbar", "window"))
        assert covers([t1, t2], [t1], hash_store, config)
        assert not covers([t1], [t1, t2], hash_store, config)

    def test_empty_side_is_undefined(self, hash_store):
        config = ComparisonConfig()
        t = [TestTuple(component=("visit", "history"))]
        with pytest.raises(CoverageUndefinedError):
            covers([], t, hash_store, config)
        with pytest.raises(CoverageUndefinedError):
            covers(t, [], hash_store, config)

    def test_matches_naive_oracle_on_random_tuple_sets(self, hash_store):
        import random

        config = ComparisonConfig()
        rng = random.Random(5)
        components = [("visit", "history"), ("taskbar", "window"), ("hard", "disk")]
        behaviors = [None, ("browse",), ("switch",)]
        manners = [None, ("mouse",), ("keyboard",)]

        def random_tuples():
            return [
                TestTuple(
                    component=rng.choice(components),
                    behavior=rng.choice(behaviors),
                    manner=rng.choice(manners),
                )
                for _ in range(rng.randint(1, 6))
            ]

        for _ in range(40):
            a, b = random_tuples(), random_tuples()
            assert covers(a, b, hash_store, config) == _naive_covers(a, b, hash_store, config)


@pytest.fixture(scope="module")
def synth20():
    generated = generate_synthetic_corpus(3, SynthSpec(size=20))
    extractions = gold_extractions(generated.corpus, generated.annotations)
    sentences = [s for ext in extractions.values() for s in ext.sentences]
    store = EmbeddingStore(dim=32, vectors={}).with_frequencies(sentences)
    tuples_by_id, _ = dissect_all(extractions)
    config = build_comparison_config(tuples_by_id, store)
    return generated, extractions, store, config


class TestDetectRedundancy:
    def test_matches_brute_force_oracle(self, synth20):
        generated, extractions, store, config = synth20
        result = detect_redundancy(generated.corpus, extractions, store, config)

        tuples_by_id, flagged = dissect_all(extractions)
        by_project: dict[str, list[str]] = {}
        for case in generated.corpus:
            if case.id not in flagged:
                by_project.setdefault(case.project, []).append(case.id)
        expected = {}
        for ids in by_project.values():
            for id_a, id_b in itertools.combinations(sorted(ids), 2):
                a_cov = _naive_covers(tuples_by_id[id_a], tuples_by_id[id_b], store, config)
                b_cov = _naive_covers(tuples_by_id[id_b], tuples_by_id[id_a], store, config)
                expected[(id_a, id_b)] = (
                    a_cov,
                    b_cov,
                    a_cov and b_cov and len(tuples_by_id[id_a]) == len(tuples_by_id[id_b]),
                )

        got = {(v.id_a, v.id_b): (v.a_covers_b, v.b_covers_a, v.totally_equivalent)
               for v in result.verdicts}
        assert got == expected

    def test_duplicated_case_is_totally_equivalent(self, synth20):
        generated, extractions, store, config = synth20
        original = generated.corpus.cases[0]
        clone = TestCase(id="TCDUP", project=original.project, summary=original.summary)
        corpus = Corpus.from_cases(list(generated.corpus) + [clone])
        cloned_ext = gold_extractions(
            corpus, {**generated.annotations, "TCDUP": generated.annotations[original.id]}
        )
        result = detect_redundancy(corpus, cloned_ext, store, config)
        verdict = next(
            v for v in result.verdicts if {v.id_a, v.id_b} == {original.id, "TCDUP"}
        )
        assert verdict.totally_equivalent and verdict.redundant and verdict.direction == "mutual"

    def test_self_coverage_for_all_cases(self, synth20):
        generated, extractions, store, config = synth20
        tuples_by_id, _ = dissect_all(extractions)
        for tuples in tuples_by_id.values():
            assert covers(tuples, tuples, store, config)

    def test_threshold_monotonicity(self, synth20):
        generated, extractions, store, config = synth20
        previous: set = set()
        for threshold in (0.99, 0.95, 0.9, 0.85, 0.8):
            cfg = ComparisonConfig(
                threshold=threshold, lexicon=config.lexicon, sif=config.sif
            )
            result = detect_redundancy(generated.corpus, extractions, store, cfg)
            current = result.redundant_pairs()
            assert previous <= current
            previous = current

    def test_ablation_monotonicity(self, synth20):
        generated, extractions, store, config = synth20
        full = detect_redundancy(generated.corpus, extractions, store, config).redundant_pairs()
        for slot in ("component", "behavior", "prerequisite", "manner", "constraint"):
            ablated = detect_redundancy(
                generated.corpus, extractions, store, config.dropping(slot)
            ).redundant_pairs()
            assert full <= ablated

    def test_reasons_completeness(self, synth20):
        generated, extractions, store, config = synth20
        tuples_by_id, _ = dissect_all(extractions)
        result = detect_redundancy(generated.corpus, extractions, store, config)
        for verdict in result.verdicts:
            if not verdict.redundant and len(tuples_by_id[verdict.id_a]) == len(
                tuples_by_id[verdict.id_b]
            ):
                assert verdict.reasons

    def test_global_scope_pairs_across_projects(self, synth20):
        generated, extractions, store, config = synth20
        per_project = detect_redundancy(generated.corpus, extractions, store, config)
        global_scope = detect_redundancy(
            generated.corpus, extractions, store, config, scope="global"
        )
        assert len(global_scope.verdicts) >= len(per_project.verdicts)
        projects = {c.id: c.project for c in generated.corpus}
        assert any(
            projects[v.id_a] != projects[v.id_b] for v in global_scope.verdicts
        )

    def test_unknown_scope_rejected(self, synth20):
        generated, extractions, store, config = synth20
        with pytest.raises(ConfigError, match="scope"):
            detect_redundancy(generated.corpus, extractions, store, config, scope="everything")

    def test_verdict_file_round_trip(self, synth20, tmp_path):
        generated, extractions, store, config = synth20
        result = detect_redundancy(generated.corpus, extractions, store, config)
        path = tmp_path / "verdicts.jsonl"
        write_verdicts(result, path)
        records = load_verdicts(path)
        rebuilt = [verdict_from_record(r) for r in records]
        assert [v.as_record() for v in rebuilt] == [v.as_record() for v in result.verdicts]

        skipped_path = tmp_path / "skipped.json"
        write_skipped(result.skipped, skipped_path)
        assert load_skipped(skipped_path) == result.skipped

    def test_report_names_mismatched_slots(self, synth20):
        generated, extractions, store, config = synth20
        result = detect_redundancy(generated.corpus, extractions, store, config)
        report = render_report(result)
        assert "Redundancy detection report" in report
        assert "REDUNDANT" in report
        non_redundant = [v for v in result.verdicts if v.reasons]
        assert non_redundant
        sample = non_redundant[0].reasons[0].mismatches[0]
        assert sample.slot in report

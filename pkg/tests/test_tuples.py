"""Dissection of extractions into atomic test tuples."""

from __future__ import annotations

import pytest

from tuplecover.corpus import EntityAnnotation, RelationAnnotation
from tuplecover.extraction import Extraction, gold_extractions
from tuplecover.tuples import SLOT_NAMES, TestTuple, dissect, dissect_all


def _ext(sentences, entities, relations, case_id="t"):
    return Extraction(
        case_id=case_id,
        sentences=tuple(tuple(s) for s in sentences),
        entities=tuple(entities),
        relations=tuple(relations),
        provenance="gold",
    )


@pytest.fixture
def case_346():
    """Two components with their own behaviors; the second also has a manner."""
    sentences = [
        ["browse", "the", "contents", "of", "each", "resource", "directory"],
        ["switch", "the", "visit", "history", "using", "the", "mouse"],
    ]
    entities = [
        EntityAnnotation(0, 0, 0, "Behavior"),
        EntityAnnotation(0, 2, 6, "Component"),
        EntityAnnotation(1, 0, 0, "Behavior"),
        EntityAnnotation(1, 2, 3, "Component"),
        EntityAnnotation(1, 6, 6, "Manner"),
    ]
    relations = [
        RelationAnnotation(head=0, component=1, category="Act"),
        RelationAnnotation(head=2, component=3, category="Act"),
        RelationAnnotation(head=4, component=3, category="Use"),
    ]
    return _ext(sentences, entities, relations, case_id="TC346")


@pytest.fixture
def case_525():
    sentences = [["browse", "the", "visit", "history", "using", "the", "mouse"]]
    entities = [
        EntityAnnotation(0, 0, 0, "Behavior"),
        EntityAnnotation(0, 2, 3, "Component"),
        EntityAnnotation(0, 6, 6, "Manner"),
    ]
    relations = [
        RelationAnnotation(head=0, component=1, category="Act"),
        RelationAnnotation(head=2, component=1, category="Use"),
    ]
    return _ext(sentences, entities, relations, case_id="TC525")


class TestDissectWorkedExamples:
    def test_two_component_case_yields_two_tuples(self, case_346):
        tuples = dissect(case_346)
        assert tuples == [
            TestTuple(
                component=("contents", "of", "each", "resource", "directory"),
                behavior=("browse",),
                prerequisite=None,
                manner=None,
                constraint=None,
            ),
            TestTuple(
                component=("visit", "history"),
                behavior=("switch",),
                prerequisite=None,
                manner=("mouse",),
                constraint=None,
            ),
        ]

    def test_single_component_case(self, case_525):
        assert dissect(case_525) == [
            TestTuple(
                component=("visit", "history"),
                behavior=("browse",),
                prerequisite=None,
                manner=("mouse",),
                constraint=None,
            )
        ]


class TestDissectRules:
    def test_component_without_relations_is_all_null(self):
        ext = _ext(
            [["the", "taskbar", "window"]],
            [EntityAnnotation(0, 1, 2, "Component")],
            [],
        )
        assert dissect(ext) == [TestTuple(component=("taskbar", "window"))]

    def test_two_behaviors_expand_to_two_tuples(self):
        ext = _ext(
            [["browse", "and", "switch", "the", "visit", "history", "using", "the", "mouse"]],
            [
                EntityAnnotation(0, 0, 0, "Behavior"),
                EntityAnnotation(0, 2, 2, "Behavior"),
                EntityAnnotation(0, 4, 5, "Component"),
                EntityAnnotation(0, 8, 8, "Manner"),
            ],
            [
                RelationAnnotation(head=0, component=2, category="Act"),
                RelationAnnotation(head=1, component=2, category="Act"),
                RelationAnnotation(head=3, component=2, category="Use"),
            ],
        )
        tuples = dissect(ext)
        assert len(tuples) == 2
        assert {t.behavior for t in tuples} == {("browse",), ("switch",)}
        assert all(t.component == ("visit", "history") and t.manner == ("mouse",) for t in tuples)

    def test_duplicate_slot_keeps_most_probable_and_warns(self):
        ext = _ext(
            [["switch", "the", "visit", "history", "using", "mouse", "or", "keyboard"]],
            [
                EntityAnnotation(0, 2, 3, "Component"),
                EntityAnnotation(0, 5, 5, "Manner"),
                EntityAnnotation(0, 7, 7, "Manner"),
            ],
            [
                RelationAnnotation(head=1, component=0, category="Use", probability=0.4),
                RelationAnnotation(head=2, component=0, category="Use", probability=0.9),
            ],
        )
        with pytest.warns(UserWarning, match="manner"):
            tuples = dissect(ext)
        assert tuples[0].manner == ("keyboard",)

    def test_duplicate_slot_without_probabilities_keeps_first(self):
        ext = _ext(
            [["switch", "the", "visit", "history", "using", "mouse", "or", "keyboard"]],
            [
                EntityAnnotation(0, 2, 3, "Component"),
                EntityAnnotation(0, 5, 5, "Manner"),
                EntityAnnotation(0, 7, 7, "Manner"),
            ],
            [
                RelationAnnotation(head=1, component=0, category="Use"),
                RelationAnnotation(head=2, component=0, category="Use"),
            ],
        )
        with pytest.warns(UserWarning):
            tuples = dissect(ext)
        assert tuples[0].manner == ("mouse",)

    def test_no_component_yields_empty_list_and_flag(self):
        ext = _ext([["browse", "quickly"]], [EntityAnnotation(0, 0, 0, "Behavior")], [])
        assert dissect(ext) == []
        tuples_by_id, flagged = dissect_all({"t": ext})
        assert flagged == ["t"]
        assert tuples_by_id == {}

    def test_tuple_count_lower_bound(self, generated40):
        extractions = gold_extractions(generated40.corpus, generated40.annotations)
        for case_id, ext in extractions.items():
            tuples = dissect(ext)
            n_components = sum(1 for e in ext.entities if e.category == "Component")
            assert len(tuples) >= n_components >= 1

    def test_slot_values_appear_verbatim_as_entities(self, generated40):
        extractions = gold_extractions(generated40.corpus, generated40.annotations)
        category_of = {
            "component": "Component",
            "behavior": "Behavior",
            "prerequisite": "Prerequisite",
            "manner": "Manner",
            "constraint": "Constraint",
        }
        for ext in extractions.values():
            entity_phrases = {
                (ext.entity_tokens(i), e.category) for i, e in enumerate(ext.entities)
            }
            for t in dissect(ext):
                for name in SLOT_NAMES:
                    value = t.slot(name)
                    if value is not None:
                        assert (value, category_of[name]) in entity_phrases

    def test_dissect_is_pure(self, case_346):
        assert dissect(case_346) == dissect(case_346)

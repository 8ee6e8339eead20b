"""Dissect an extraction into atomic test tuples keyed by Component.

Each Component entity anchors one tuple group; a Component with k >= 1
associated Behaviors expands into k tuples (one per Behavior) that share the
Component's Prerequisite/Manner/Constraint, and a Component with none yields a
single tuple with a NULL behavior slot.  Dissection is a pure function of the
extraction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .extraction import Extraction

SLOT_NAMES = ("component", "behavior", "prerequisite", "manner", "constraint")

_SLOT_OF_RELATION = {"Act": "behavior", "Require": "prerequisite", "Use": "manner", "Satisfy": "constraint"}

Phrase = tuple[str, ...]


@dataclass(frozen=True)
class TestTuple:
    """Atomic 5-slot test record; absent slots are None (rendered as NULL)."""

    __test__ = False  # domain object, not a pytest class

    component: Phrase
    behavior: Phrase | None = None
    prerequisite: Phrase | None = None
    manner: Phrase | None = None
    constraint: Phrase | None = None

    def slot(self, name: str) -> Phrase | None:
        return getattr(self, name)

    def as_record(self) -> dict[str, str | None]:
        return {
            name: (" ".join(value) if value is not None else None)
            for name in SLOT_NAMES
            for value in [self.slot(name)]
        }

    def render(self) -> str:
        return "<" + ", ".join(
            (" ".join(v) if (v := self.slot(name)) is not None else "NULL") for name in SLOT_NAMES
        ) + ">"


def dissect(extraction: Extraction) -> list[TestTuple]:
    """Build the test tuples of one extraction.

    An extraction without any Component entity yields an empty list; the
    caller flags such cases and excludes them from coverage.  When several
    relations fill the same non-Behavior slot of one Component, the relation
    with the highest classifier probability wins (first listed for
    gold/imported extractions, whose relations carry no probabilities).
    """
    by_component: dict[int, dict[str, list]] = {
        i: {"behavior": [], "prerequisite": [], "manner": [], "constraint": []}
        for i, ent in enumerate(extraction.entities)
        if ent.category == "Component"
    }
    for rel in extraction.relations:
        slot = _SLOT_OF_RELATION[rel.category]
        by_component[rel.component][slot].append(rel)

    tuples: list[TestTuple] = []
    for comp_index in sorted(by_component):
        slots = by_component[comp_index]
        component = extraction.entity_tokens(comp_index)

        fixed: dict[str, Phrase | None] = {}
        for name in ("prerequisite", "manner", "constraint"):
            rels = slots[name]
            if not rels:
                fixed[name] = None
                continue
            if len(rels) > 1:
                best = max(rels, key=lambda r: (r.probability if r.probability is not None else 0.0))
                warnings.warn(
                    f"{extraction.case_id}: {len(rels)} {name} relations on one Component; "
                    "keeping the most probable",
                    stacklevel=2,
                )
            else:
                best = rels[0]
            fixed[name] = extraction.entity_tokens(best.head)

        behaviors = slots["behavior"]
        if behaviors:
            for rel in behaviors:
                tuples.append(
                    TestTuple(
                        component=component,
                        behavior=extraction.entity_tokens(rel.head),
                        **fixed,
                    )
                )
        else:
            tuples.append(TestTuple(component=component, behavior=None, **fixed))
    return tuples


def dissect_all(extractions) -> tuple[dict[str, list[TestTuple]], list[str]]:
    """Dissect every extraction; returns (tuples by id, flagged tuple-less ids)."""
    tuples_by_id: dict[str, list[TestTuple]] = {}
    flagged: list[str] = []
    for case_id in sorted(extractions):
        tuples = dissect(extractions[case_id])
        if tuples:
            tuples_by_id[case_id] = tuples
        else:
            flagged.append(case_id)
    return tuples_by_id, flagged

"""Downstream uses of the extracted entities beyond redundancy detection:
dependence detection, prerequisite-based execution grouping, and description
completeness checking.

The dependence rule is a heuristic (a Component of one case matching a Manner
of another), not a validated method; its output is labeled accordingly in the
CLI reports.
"""

from __future__ import annotations

from typing import Mapping

from .compare import ComparisonConfig, compare_nounphrase, compare_prerequisite
from .corpus import ENTITY_CATEGORIES
from .embeddings import EmbeddingStore
from .errors import SimilarityError
from .extraction import Extraction


def _entity_phrases(extraction: Extraction, category: str) -> list[tuple[str, ...]]:
    return [
        extraction.entity_tokens(i)
        for i, ent in enumerate(extraction.entities)
        if ent.category == category
    ]


def detect_dependence(
    extraction_a: Extraction,
    extraction_b: Extraction,
    store: EmbeddingStore,
    config: ComparisonConfig,
) -> bool:
    """Heuristic: B depends on A when some Component of A matches a Manner of B.

    Directional; matching uses the noun-phrase strategy.
    """
    components = _entity_phrases(extraction_a, "Component")
    manners = _entity_phrases(extraction_b, "Manner")
    for comp in components:
        for manner in manners:
            try:
                equivalent, _ = compare_nounphrase(comp, manner, store, config)
            except SimilarityError:
                continue
            if equivalent:
                return True
    return False


def group_by_prerequisite(
    extractions: Mapping[str, Extraction],
    store: EmbeddingStore,
    config: ComparisonConfig,
) -> list[list[str]]:
    """Partition case ids into groups sharing an equivalent Prerequisite.

    Groups are connected components under pairwise prerequisite equivalence
    (the similarity itself is not transitive; taking components keeps the
    result a partition).  Cases without Prerequisite entities form singletons.
    """
    ids = sorted(extractions)
    prereqs = {cid: _entity_phrases(extractions[cid], "Prerequisite") for cid in ids}

    parent = {cid: cid for cid in ids}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: str, y: str) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for i, id_a in enumerate(ids):
        if not prereqs[id_a]:
            continue
        for id_b in ids[i + 1 :]:
            if not prereqs[id_b]:
                continue
            linked = False
            for pa in prereqs[id_a]:
                for pb in prereqs[id_b]:
                    try:
                        equivalent, _ = compare_prerequisite(pa, pb, store, config)
                    except SimilarityError:
                        continue
                    if equivalent:
                        linked = True
                        break
                if linked:
                    break
            if linked:
                union(id_a, id_b)

    groups: dict[str, list[str]] = {}
    for cid in ids:
        groups.setdefault(find(cid), []).append(cid)
    return [sorted(members) for _, members in sorted(groups.items())]


def completeness_check(extraction: Extraction) -> list[str]:
    """Entity categories with no extracted span, in canonical category order."""
    present = {ent.category for ent in extraction.entities}
    return [c for c in ENTITY_CATEGORIES if c not in present]

"""Whole-text similarity baseline for contrast experiments.

The baseline embeds each summary as the plain average of its word vectors and
flags a pair as redundant when the cosine strictly exceeds the threshold; it
sees no entities, so a pair differing only in one discriminating slot looks
almost identical to it.  Verdicts are symmetric (both directions set).
"""

from __future__ import annotations

import itertools
import warnings

import numpy as np

from .compare import DetectionResult, RedundancyVerdict
from .corpus import Corpus
from .embeddings import EmbeddingStore, cosine, embed_phrase_average
from .errors import ConfigError
from .preprocess import assemble_sequence

_ZERO_NORM = 1e-12


def wholetext_detect(
    corpus: Corpus,
    store: EmbeddingStore,
    threshold: float = 0.95,
    scope: str = "per_project",
) -> DetectionResult:
    """Flag pairs whose whole-summary average embeddings exceed ``threshold``.

    Cases whose summary embeds to a zero vector are skipped with a warning.
    Verdict order matches the tuple detector: lexicographic by (id_a, id_b).
    """
    if scope not in ("per_project", "global"):
        raise ConfigError(f"unknown pairing scope {scope!r}")

    vectors: dict[str, np.ndarray] = {}
    skipped: list[str] = []
    for case in corpus:
        vec = embed_phrase_average(assemble_sequence(case).tokens, store)
        if float(np.linalg.norm(vec)) < _ZERO_NORM:
            warnings.warn(f"{case.id}: summary embeds to a zero vector; skipped", stacklevel=2)
            skipped.append(case.id)
        else:
            vectors[case.id] = vec

    if scope == "per_project":
        groups: dict[str, list[str]] = {}
        for case in corpus:
            if case.id in vectors:
                groups.setdefault(case.project, []).append(case.id)
        buckets = [sorted(ids) for _, ids in sorted(groups.items())]
    else:
        buckets = [sorted(vectors)]

    pairs: set[tuple[str, str]] = set()
    for ids in buckets:
        pairs.update(itertools.combinations(ids, 2))

    verdicts = []
    for id_a, id_b in sorted(pairs):
        redundant = cosine(vectors[id_a], vectors[id_b]) > threshold
        verdicts.append(
            RedundancyVerdict(
                id_a=id_a,
                id_b=id_b,
                a_covers_b=redundant,
                b_covers_a=redundant,
                totally_equivalent=False,
                reasons=(),
            )
        )
    return DetectionResult(verdicts=tuple(verdicts), skipped=tuple(skipped))

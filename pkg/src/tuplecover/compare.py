"""Semantic equivalence of tuple slots, tuples and whole test cases.

Three slot strategies, matched to how each entity category is phrased:

* behaviors (verbs): cosine over plain word-vector averages;
* components, manners and constraints (noun phrases): cosine over SIF
  embeddings, which down-weights frequent generic modifiers and removes the
  shared principal component;
* prerequisites (adverbial clauses): the multisets of indicative words (logic
  and temporal lexicons) must match exactly, otherwise the slots differ no
  matter how close the embeddings are; on a match, plain average cosine.

A slot pair is equivalent only when its score strictly exceeds the threshold.
Case-level redundancy follows the covering rule: case B is redundant w.r.t.
case A when every tuple of B has an equivalent tuple in A; mutual coverage
with equal tuple counts makes the pair totally equivalent.  Verdicts carry
per-slot mismatch reasons for every uncovered tuple.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus
from .embeddings import (
    EmbeddingStore,
    SifContext,
    cosine,
    embed_phrase_average,
    embed_phrase_sif,
    fit_sif,
)
from .errors import ConfigError, CoverageUndefinedError, SimilarityError
from .extraction import Extraction
from .tuples import SLOT_NAMES, Phrase, TestTuple, dissect_all

DEFAULT_LOGIC_WORDS = frozenset({"no", "not", "without", "non", "cannot", "unable", "disabled"})
DEFAULT_TEMPORAL_WORDS = frozenset({"before", "after", "when", "while", "during", "until"})

DEFAULT_THRESHOLD = 0.95

#: Strategy per tuple slot: 1 = average+cosine, 2 = SIF+cosine, 3 = indicative+average.
SLOT_STRATEGY = {
    "component": 2,
    "behavior": 1,
    "prerequisite": 3,
    "manner": 2,
    "constraint": 2,
}


@dataclass(frozen=True)
class IndicativeLexicon:
    """Closed word lists whose mismatch alone separates two prerequisites."""

    logic_words: frozenset[str] = DEFAULT_LOGIC_WORDS
    temporal_words: frozenset[str] = DEFAULT_TEMPORAL_WORDS

    def __post_init__(self) -> None:
        if not self.logic_words or not self.temporal_words:
            raise ConfigError("indicative lexicons must be non-empty")
        overlap = self.logic_words & self.temporal_words
        if overlap:
            raise ConfigError(f"logic and temporal lexicons overlap: {sorted(overlap)}")

    @property
    def all_words(self) -> frozenset[str]:
        return self.logic_words | self.temporal_words

    def extract(self, tokens: Sequence[str]) -> tuple[str, ...]:
        """Indicative words of a phrase, in order of appearance."""
        return tuple(t for t in tokens if t in self.all_words)


def load_lexicon(path: str | Path) -> IndicativeLexicon:
    """Read a lexicon config file: JSON with ``logic_words`` and ``temporal_words`` arrays."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return IndicativeLexicon(
        logic_words=frozenset(payload["logic_words"]),
        temporal_words=frozenset(payload["temporal_words"]),
    )


@dataclass(frozen=True)
class ComparisonConfig:
    """Threshold, lexicon and fitted SIF context used by all comparisons.

    ``exclude_slots`` supports ablation: excluded slots always count as
    matching.
    """

    threshold: float = DEFAULT_THRESHOLD
    lexicon: IndicativeLexicon = field(default_factory=IndicativeLexicon)
    sif: SifContext | None = None
    exclude_slots: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in (0, 1], got {self.threshold}")
        unknown = self.exclude_slots - set(SLOT_NAMES)
        if unknown:
            raise ConfigError(f"unknown slot names in exclude_slots: {sorted(unknown)}")

    def dropping(self, slot: str) -> "ComparisonConfig":
        return ComparisonConfig(
            threshold=self.threshold,
            lexicon=self.lexicon,
            sif=self.sif,
            exclude_slots=self.exclude_slots | {slot.lower()},
        )


def collect_slot_phrases(tuples_by_id: Mapping[str, Sequence[TestTuple]]) -> list[Phrase]:
    """All noun-phrase slot values (component/manner/constraint) across a corpus."""
    phrases: list[Phrase] = []
    for case_id in sorted(tuples_by_id):
        for t in tuples_by_id[case_id]:
            for name in ("component", "manner", "constraint"):
                value = t.slot(name)
                if value is not None:
                    phrases.append(value)
    return phrases


def build_comparison_config(
    tuples_by_id: Mapping[str, Sequence[TestTuple]],
    store: EmbeddingStore,
    threshold: float = DEFAULT_THRESHOLD,
    lexicon: IndicativeLexicon | None = None,
    sif_a: float = 1e-3,
    exclude_slots: Iterable[str] = (),
) -> ComparisonConfig:
    """Fit the SIF context over the corpus's noun-phrase slots and bundle the config."""
    phrases = collect_slot_phrases(tuples_by_id)
    distinct = {tuple(p) for p in phrases}
    if len(distinct) >= 2:
        sif = fit_sif(phrases, store, a=sif_a)
    else:
        warnings.warn(
            "fewer than two distinct noun-phrase slots; SIF disabled for this corpus",
            stacklevel=2,
        )
        sif = SifContext(a=sif_a, principal_component=None)
    return ComparisonConfig(
        threshold=threshold,
        lexicon=lexicon or IndicativeLexicon(),
        sif=sif,
        exclude_slots=frozenset(s.lower() for s in exclude_slots),
    )


def compare_behavior(
    tokens_a: Sequence[str], tokens_b: Sequence[str], store: EmbeddingStore, config: ComparisonConfig
) -> tuple[bool, float]:
    """Strategy 1: cosine over plain word-vector averages, strict threshold."""
    score = cosine(embed_phrase_average(tokens_a, store), embed_phrase_average(tokens_b, store))
    return score > config.threshold, score


def compare_nounphrase(
    tokens_a: Sequence[str], tokens_b: Sequence[str], store: EmbeddingStore, config: ComparisonConfig
) -> tuple[bool, float]:
    """Strategy 2: cosine over SIF embeddings; degenerate SIF falls back to Strategy 1."""
    if config.sif is None or config.sif.principal_component is None:
        warnings.warn("SIF context degenerate; falling back to plain averaging", stacklevel=2)
        return compare_behavior(tokens_a, tokens_b, store, config)
    score = cosine(
        embed_phrase_sif(tokens_a, store, config.sif),
        embed_phrase_sif(tokens_b, store, config.sif),
    )
    return score > config.threshold, score


def compare_prerequisite(
    tokens_a: Sequence[str], tokens_b: Sequence[str], store: EmbeddingStore, config: ComparisonConfig
) -> tuple[bool, float]:
    """Strategy 3: indicative-word multisets must match, then Strategy 1 decides."""
    hits_a = config.lexicon.extract(tokens_a)
    hits_b = config.lexicon.extract(tokens_b)
    if sorted(hits_a) != sorted(hits_b):
        return False, 0.0
    return compare_behavior(tokens_a, tokens_b, store, config)


_STRATEGY_FN = {1: compare_behavior, 2: compare_nounphrase, 3: compare_prerequisite}


@dataclass(frozen=True)
class SlotMismatch:
    """One failing slot of a tuple comparison; similarity is None when undefined."""

    slot: str
    value_a: str | None
    value_b: str | None
    similarity: float | None
    note: str

    def as_record(self) -> dict:
        return {
            "slot": self.slot,
            "value_a": self.value_a,
            "value_b": self.value_b,
            "similarity": self.similarity,
            "note": self.note,
        }


class _SlotComparer:
    """Memoizing wrapper so repeated slot pairs are scored once per detection run."""

    def __init__(self, store: EmbeddingStore, config: ComparisonConfig):
        self.store = store
        self.config = config
        self._cache: dict[tuple[str, Phrase, Phrase], tuple[bool, float | None, str]] = {}

    def compare(self, slot: str, a: Phrase | None, b: Phrase | None) -> tuple[bool, float | None, str]:
        """(equivalent, score, note) for one slot pair, honoring NULL and exclusions."""
        if slot in self.config.exclude_slots:
            return True, None, "excluded"
        if a is None and b is None:
            return True, None, "both-null"
        if a is None or b is None:
            return False, None, "null-mismatch"
        key = (slot, a, b) if a <= b else (slot, b, a)
        cached = self._cache.get(key)
        if cached is None:
            try:
                equivalent, score = _STRATEGY_FN[SLOT_STRATEGY[slot]](a, b, self.store, self.config)
                note = "match" if equivalent else "below-threshold"
                if SLOT_STRATEGY[slot] == 3 and not equivalent and score == 0.0:
                    note = "indicative-words"
                cached = (equivalent, score, note)
            except SimilarityError:
                cached = (False, None, "unembeddable")
            self._cache[key] = cached
        return cached

    def tuple_equivalent(self, t_a: TestTuple, t_b: TestTuple) -> tuple[bool, list[SlotMismatch]]:
        mismatches: list[SlotMismatch] = []
        for name in SLOT_NAMES:
            a, b = t_a.slot(name), t_b.slot(name)
            equivalent, score, note = self.compare(name, a, b)
            if not equivalent:
                mismatches.append(
                    SlotMismatch(
                        slot=name,
                        value_a=" ".join(a) if a is not None else None,
                        value_b=" ".join(b) if b is not None else None,
                        similarity=score,
                        note=note,
                    )
                )
        return not mismatches, mismatches


def tuple_equivalent(
    t_a: TestTuple, t_b: TestTuple, store: EmbeddingStore, config: ComparisonConfig
) -> tuple[bool, list[SlotMismatch]]:
    """Slot-by-slot tuple comparison; NULL matches only NULL.

    Returns (equivalent, mismatches); every failing slot appears once in the
    mismatch list with its score.
    """
    return _SlotComparer(store, config).tuple_equivalent(t_a, t_b)


def covers(
    tuples_a: Sequence[TestTuple],
    tuples_b: Sequence[TestTuple],
    store: EmbeddingStore,
    config: ComparisonConfig,
) -> bool:
    """True iff every tuple of ``tuples_b`` has an equivalent tuple in ``tuples_a``."""
    if not tuples_a or not tuples_b:
        raise CoverageUndefinedError("coverage undefined for a case without tuples")
    comparer = _SlotComparer(store, config)
    return all(
        any(comparer.tuple_equivalent(ta, tb)[0] for ta in tuples_a) for tb in tuples_b
    )


@dataclass(frozen=True)
class UncoveredTuple:
    """Why one tuple stayed uncovered: mismatches against its closest counterpart."""

    direction: str  # 'a_covers_b' or 'b_covers_a': the coverage check that failed
    tuple_index: int
    tuple_repr: str
    mismatches: tuple[SlotMismatch, ...]

    def as_record(self) -> dict:
        return {
            "direction": self.direction,
            "tuple_index": self.tuple_index,
            "tuple": self.tuple_repr,
            "mismatches": [m.as_record() for m in self.mismatches],
        }


@dataclass(frozen=True)
class RedundancyVerdict:
    """Directed redundancy judgment for one unordered pair."""

    id_a: str
    id_b: str
    a_covers_b: bool
    b_covers_a: bool
    totally_equivalent: bool
    reasons: tuple[UncoveredTuple, ...]

    @property
    def redundant(self) -> bool:
        return self.a_covers_b or self.b_covers_a

    @property
    def direction(self) -> str:
        if self.a_covers_b and self.b_covers_a:
            return "mutual"
        if self.a_covers_b:
            return "a_covers_b"
        if self.b_covers_a:
            return "b_covers_a"
        return "none"

    def as_record(self) -> dict:
        return {
            "id_a": self.id_a,
            "id_b": self.id_b,
            "redundant": self.redundant,
            "direction": self.direction,
            "totally_equivalent": self.totally_equivalent,
            "reasons": [r.as_record() for r in self.reasons],
        }


@dataclass(frozen=True)
class DetectionResult:
    verdicts: tuple[RedundancyVerdict, ...]
    skipped: tuple[str, ...]  # tuple-less case ids excluded from pairing

    def redundant_pairs(self) -> set[tuple[str, str]]:
        return {(v.id_a, v.id_b) for v in self.verdicts if v.redundant}


def _coverage_with_reasons(
    direction: str,
    covering: Sequence[TestTuple],
    covered: Sequence[TestTuple],
    comparer: _SlotComparer,
) -> tuple[bool, list[UncoveredTuple]]:
    reasons: list[UncoveredTuple] = []
    for index, tb in enumerate(covered):
        best: list[SlotMismatch] | None = None
        for ta in covering:
            equivalent, mismatches = comparer.tuple_equivalent(ta, tb)
            if equivalent:
                best = None
                break
            if best is None or len(mismatches) < len(best):
                best = mismatches
        if best is not None:
            reasons.append(
                UncoveredTuple(
                    direction=direction,
                    tuple_index=index,
                    tuple_repr=covered[index].render(),
                    mismatches=tuple(best),
                )
            )
    return not reasons, reasons


def detect_redundancy(
    corpus: Corpus,
    extractions: Mapping[str, Extraction],
    store: EmbeddingStore,
    config: ComparisonConfig,
    scope: str = "per_project",
) -> DetectionResult:
    """Judge every unordered in-scope pair under the tuple covering rule.

    ``scope`` is ``per_project`` (pairs within one project) or ``global``.
    Cases whose extraction yields no tuples are skipped and reported.  Verdict
    order is deterministic: lexicographic by (id_a, id_b).
    """
    if scope not in ("per_project", "global"):
        raise ConfigError(f"unknown pairing scope {scope!r}")
    tuples_by_id, flagged = dissect_all(extractions)
    comparer = _SlotComparer(store, config)

    if scope == "per_project":
        groups: dict[str, list[str]] = {}
        for case in corpus:
            if case.id in tuples_by_id:
                groups.setdefault(case.project, []).append(case.id)
        buckets = [sorted(ids) for _, ids in sorted(groups.items())]
    else:
        buckets = [sorted(cid for cid in tuples_by_id)]

    pairs: set[tuple[str, str]] = set()
    for ids in buckets:
        pairs.update(itertools.combinations(ids, 2))

    verdicts: list[RedundancyVerdict] = []
    for id_a, id_b in sorted(pairs):
        tuples_a, tuples_b = tuples_by_id[id_a], tuples_by_id[id_b]
        a_covers_b, reasons_ab = _coverage_with_reasons("a_covers_b", tuples_a, tuples_b, comparer)
        b_covers_a, reasons_ba = _coverage_with_reasons("b_covers_a", tuples_b, tuples_a, comparer)
        verdicts.append(
            RedundancyVerdict(
                id_a=id_a,
                id_b=id_b,
                a_covers_b=a_covers_b,
                b_covers_a=b_covers_a,
                totally_equivalent=a_covers_b and b_covers_a and len(tuples_a) == len(tuples_b),
                reasons=tuple(reasons_ab + reasons_ba),
            )
        )
    return DetectionResult(verdicts=tuple(verdicts), skipped=tuple(flagged))


def write_verdicts(result: DetectionResult, path: str | Path) -> None:
    """Write verdicts as line-delimited JSON records."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for verdict in result.verdicts:
            fh.write(json.dumps(verdict.as_record(), ensure_ascii=False) + "\n")


def load_verdicts(path: str | Path) -> list[dict]:
    """Read back a verdict file as plain records (evaluation input)."""
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def verdict_from_record(record: Mapping) -> RedundancyVerdict:
    """Rebuild a verdict (including reasons) from one verdict-file record."""
    direction = record["direction"]
    reasons = tuple(
        UncoveredTuple(
            direction=r["direction"],
            tuple_index=int(r["tuple_index"]),
            tuple_repr=r["tuple"],
            mismatches=tuple(
                SlotMismatch(
                    slot=m["slot"],
                    value_a=m["value_a"],
                    value_b=m["value_b"],
                    similarity=m["similarity"],
                    note=m["note"],
                )
                for m in r["mismatches"]
            ),
        )
        for r in record.get("reasons", [])
    )
    return RedundancyVerdict(
        id_a=record["id_a"],
        id_b=record["id_b"],
        a_covers_b=direction in ("a_covers_b", "mutual"),
        b_covers_a=direction in ("b_covers_a", "mutual"),
        totally_equivalent=bool(record["totally_equivalent"]),
        reasons=reasons,
    )


def write_skipped(skipped: Sequence[str], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps({"skipped": sorted(skipped)}, indent=2) + "\n", encoding="utf-8"
    )


def load_skipped(path: str | Path) -> tuple[str, ...]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return tuple(payload.get("skipped", []))


def render_report(result: DetectionResult) -> str:
    """Human-readable detection report with per-pair reason tables."""
    lines: list[str] = []
    redundant = [v for v in result.verdicts if v.redundant]
    lines.append("Redundancy detection report")
    lines.append(
        f"pairs={len(result.verdicts)} redundant={len(redundant)} skipped_cases={len(result.skipped)}"
    )
    lines.append("")
    for verdict in result.verdicts:
        status = "REDUNDANT" if verdict.redundant else "non-redundant"
        extra = " (totally equivalent)" if verdict.totally_equivalent else ""
        lines.append(f"{verdict.id_a} vs {verdict.id_b}: {status} [{verdict.direction}]{extra}")
        for reason in verdict.reasons:
            lines.append(f"  uncovered under {reason.direction}: {reason.tuple_repr}")
            for m in reason.mismatches:
                score = f"{m.similarity:.4f}" if m.similarity is not None else "n/a"
                lines.append(
                    f"    {m.slot}: {m.value_a or 'NULL'} vs {m.value_b or 'NULL'} "
                    f"(score={score}, {m.note})"
                )
        lines.append("")
    if result.skipped:
        lines.append("Skipped (no tuples): " + ", ".join(result.skipped))
        lines.append("")
    return "\n".join(lines)

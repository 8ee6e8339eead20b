"""Corpora of natural-language test cases, gold annotations and pair labels.

File formats (all UTF-8):

* corpus: one JSON object per line with keys ``id``, ``project``, ``summary``
* annotations: a single JSON object mapping case id to ``{"entities": [...],
  "relations": [...]}``; entities carry ``sentence_index``/``token_start``/
  ``token_end``/``category``, relations carry ``head``/``component``/``category``
* labels: one JSON object per line with keys ``id_a``, ``id_b``, ``redundant``,
  ``direction``

Corpora are immutable after load and safe for concurrent reads.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import CorpusValidationError, ParseError
from .preprocess import TokenizedCase, assemble_sequence

ENTITY_CATEGORIES = ("Component", "Behavior", "Prerequisite", "Manner", "Constraint")
RELATION_CATEGORIES = ("Act", "Require", "Use", "Satisfy")

#: Relation category implied by the non-Component entity's category.
COMPATIBLE_RELATION = {
    "Behavior": "Act",
    "Prerequisite": "Require",
    "Manner": "Use",
    "Constraint": "Satisfy",
}

MAX_SPAN_LEN = 10

DIRECTIONS = ("a_covers_b", "b_covers_a", "mutual", "none")


@dataclass(frozen=True)
class TestCase:
    """One natural-language test case; only the summary text is modeled."""

    __test__ = False  # domain object, not a pytest class

    id: str
    project: str
    summary: str

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusValidationError("test case id must be non-empty")
        if not self.summary:
            raise CorpusValidationError(f"test case {self.id!r} has an empty summary")


@dataclass(frozen=True)
class EntityAnnotation:
    """A labeled token span: [token_start, token_end] inclusive within one sentence."""

    sentence_index: int
    token_start: int
    token_end: int
    category: str
    probability: float | None = None

    def __post_init__(self) -> None:
        if self.category not in ENTITY_CATEGORIES:
            raise CorpusValidationError(f"unknown entity category {self.category!r}")
        if self.sentence_index < 0 or self.token_start < 0:
            raise CorpusValidationError("entity indices must be non-negative")
        if self.token_start > self.token_end:
            raise CorpusValidationError(
                f"entity span start {self.token_start} exceeds end {self.token_end}"
            )
        if self.length > MAX_SPAN_LEN:
            raise CorpusValidationError(
                f"entity span of {self.length} tokens exceeds the {MAX_SPAN_LEN}-token limit"
            )

    @property
    def length(self) -> int:
        return self.token_end - self.token_start + 1

    @property
    def span(self) -> tuple[int, int, int]:
        return (self.sentence_index, self.token_start, self.token_end)


@dataclass(frozen=True)
class RelationAnnotation:
    """A typed link from a non-Component entity to a Component entity.

    ``head`` and ``component`` index the owning case's entity list; category
    compatibility with the head entity (Act<->Behavior etc.) is checked at the
    corpus level where both endpoints are visible.
    """

    head: int
    component: int
    category: str
    probability: float | None = None

    def __post_init__(self) -> None:
        if self.category not in RELATION_CATEGORIES:
            raise CorpusValidationError(f"unknown relation category {self.category!r}")
        if self.head < 0 or self.component < 0:
            raise CorpusValidationError("relation entity indices must be non-negative")


@dataclass(frozen=True)
class RedundancyLabel:
    """Ground-truth redundancy judgment for a pair of test cases."""

    id_a: str
    id_b: str
    redundant: bool
    direction: str

    def __post_init__(self) -> None:
        if self.id_a == self.id_b:
            raise CorpusValidationError(f"label pairs a case with itself: {self.id_a!r}")
        if self.direction not in DIRECTIONS:
            raise CorpusValidationError(f"unknown direction {self.direction!r}")
        if (self.direction == "none") == self.redundant:
            raise CorpusValidationError(
                f"label ({self.id_a}, {self.id_b}): direction {self.direction!r} "
                f"inconsistent with redundant={self.redundant}"
            )


@dataclass(frozen=True)
class CaseAnnotations:
    """Gold entities and relations for one test case."""

    entities: tuple[EntityAnnotation, ...]
    relations: tuple[RelationAnnotation, ...]


@dataclass(frozen=True)
class Corpus:
    """An ordered, id-unique collection of test cases."""

    cases: tuple[TestCase, ...]
    _index: Mapping[str, TestCase] = field(repr=False, default_factory=dict)

    @classmethod
    def from_cases(cls, cases: Iterable[TestCase]) -> "Corpus":
        cases = tuple(cases)
        index: dict[str, TestCase] = {}
        for case in cases:
            if case.id in index:
                raise CorpusValidationError(f"duplicate test case id {case.id!r}")
            index[case.id] = case
        return cls(cases=cases, _index=index)

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)

    def __contains__(self, case_id: str) -> bool:
        return case_id in self._index

    def get(self, case_id: str) -> TestCase:
        try:
            return self._index[case_id]
        except KeyError:
            raise CorpusValidationError(f"unknown test case id {case_id!r}") from None

    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.cases)

    def projects(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for case in self.cases:
            seen.setdefault(case.project, None)
        return tuple(seen)

    def subset(self, ids: Iterable[str]) -> "Corpus":
        wanted = set(ids)
        return Corpus.from_cases(c for c in self.cases if c.id in wanted)

    def tokenized(self) -> dict[str, TokenizedCase]:
        return {c.id: assemble_sequence(c) for c in self.cases}


def load_corpus(path: str | Path) -> Corpus:
    """Load a line-delimited corpus file; duplicate ids are rejected."""
    path = Path(path)
    cases: list[TestCase] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed record: {exc.msg}", path=str(path), line=lineno) from None
            if not isinstance(record, dict) or not {"id", "project", "summary"} <= record.keys():
                raise ParseError(
                    "record must be an object with id, project and summary",
                    path=str(path),
                    line=lineno,
                )
            case = TestCase(
                id=str(record["id"]), project=str(record["project"]), summary=str(record["summary"])
            )
            if case.id in seen:
                raise CorpusValidationError(f"duplicate test case id {case.id!r} at line {lineno}")
            seen.add(case.id)
            cases.append(case)
    if not cases:
        warnings.warn(f"corpus file {path} contains no records", stacklevel=2)
    return Corpus.from_cases(cases)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in the line-delimited format read by :func:`load_corpus`."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for case in corpus:
            fh.write(
                json.dumps(
                    {"id": case.id, "project": case.project, "summary": case.summary},
                    ensure_ascii=False,
                )
                + "\n"
            )


def validate_annotations(
    case: TestCase,
    entities: Sequence[EntityAnnotation],
    relations: Sequence[RelationAnnotation],
    tokenized: TokenizedCase | None = None,
) -> CaseAnnotations:
    """Check spans against the case's tokenization and relations against the mask."""
    tok = tokenized if tokenized is not None else assemble_sequence(case)
    for ent in entities:
        if ent.sentence_index >= len(tok.sentences):
            raise CorpusValidationError(
                f"{case.id}: entity sentence index {ent.sentence_index} out of bounds "
                f"({len(tok.sentences)} sentences)"
            )
        n = len(tok.sentences[ent.sentence_index])
        if ent.token_end >= n:
            raise CorpusValidationError(
                f"{case.id}: entity span [{ent.token_start}, {ent.token_end}] out of bounds "
                f"for sentence of {n} tokens"
            )
    for rel in relations:
        if rel.head >= len(entities) or rel.component >= len(entities):
            raise CorpusValidationError(
                f"{case.id}: relation references entity index out of range"
            )
        head = entities[rel.head]
        comp = entities[rel.component]
        if comp.category != "Component":
            raise CorpusValidationError(
                f"{case.id}: relation target must be a Component, got {comp.category}"
            )
        if head.category == "Component":
            raise CorpusValidationError(
                f"{case.id}: relation head must not be a Component"
            )
        expected = COMPATIBLE_RELATION[head.category]
        if rel.category != expected:
            raise CorpusValidationError(
                f"{case.id}: {rel.category} relation incompatible with {head.category} head "
                f"(expected {expected})"
            )
    return CaseAnnotations(entities=tuple(entities), relations=tuple(relations))


def _entity_from_json(record: Mapping, *, where: str) -> EntityAnnotation:
    try:
        return EntityAnnotation(
            sentence_index=int(record["sentence_index"]),
            token_start=int(record["token_start"]),
            token_end=int(record["token_end"]),
            category=str(record["category"]),
        )
    except KeyError as exc:
        raise ParseError(f"entity record missing key {exc}", path=where) from None


def _relation_from_json(record: Mapping, *, where: str) -> RelationAnnotation:
    try:
        prob = record.get("probability")
        return RelationAnnotation(
            head=int(record["head"]),
            component=int(record["component"]),
            category=str(record["category"]),
            probability=float(prob) if prob is not None else None,
        )
    except KeyError as exc:
        raise ParseError(f"relation record missing key {exc}", path=where) from None


def load_annotations(path: str | Path, corpus: Corpus) -> dict[str, CaseAnnotations]:
    """Load gold annotations and validate every span and relation against ``corpus``."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed annotation file: {exc.msg}", path=str(path), line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ParseError("annotation file must map case ids to annotation objects", path=str(path))

    annotations: dict[str, CaseAnnotations] = {}
    for case_id, payload in raw.items():
        case = corpus.get(case_id)
        entities = [_entity_from_json(e, where=str(path)) for e in payload.get("entities", [])]
        relations = [_relation_from_json(r, where=str(path)) for r in payload.get("relations", [])]
        annotations[case_id] = validate_annotations(case, entities, relations)
    return annotations


def write_annotations(annotations: Mapping[str, CaseAnnotations], path: str | Path) -> None:
    """Write annotations in the format read by :func:`load_annotations`."""
    payload: dict[str, dict] = {}
    for case_id in annotations:
        ann = annotations[case_id]
        payload[case_id] = {
            "entities": [
                {
                    "sentence_index": e.sentence_index,
                    "token_start": e.token_start,
                    "token_end": e.token_end,
                    "category": e.category,
                }
                for e in ann.entities
            ],
            "relations": [
                {
                    "head": r.head,
                    "component": r.component,
                    "category": r.category,
                    **({"probability": r.probability} if r.probability is not None else {}),
                }
                for r in ann.relations
            ],
        }
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_labels(path: str | Path, corpus: Corpus | None = None) -> list[RedundancyLabel]:
    """Load pair-level redundancy labels; ids are checked when a corpus is given."""
    path = Path(path)
    labels: list[RedundancyLabel] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed label: {exc.msg}", path=str(path), line=lineno) from None
            label = RedundancyLabel(
                id_a=str(record["id_a"]),
                id_b=str(record["id_b"]),
                redundant=bool(record["redundant"]),
                direction=str(record["direction"]),
            )
            if corpus is not None:
                corpus.get(label.id_a)
                corpus.get(label.id_b)
            labels.append(label)
    return labels


def write_labels(labels: Iterable[RedundancyLabel], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for label in labels:
            fh.write(
                json.dumps(
                    {
                        "id_a": label.id_a,
                        "id_b": label.id_b,
                        "redundant": label.redundant,
                        "direction": label.direction,
                    }
                )
                + "\n"
            )

"""Deterministic synthetic corpus generator with free gold annotations.

Cases are rendered from slot-filling templates over five phrase lexicons (one
per entity category), so every generated case carries exact gold entities,
relations and tuple signatures.  Redundant pairs are built by tuple-preserving
paraphrase (synonym substitution inside a lexicon group, plus filler
variation); non-redundant near-pairs copy a case and swap exactly one slot to
a phrase from a different group.  Pair labels are computed by brute-force
group-level tuple covering over all within-project pairs, so coincidental
redundancy between independently sampled cases is labeled correctly too.

Lexicon groups use disjoint vocabulary across categories, and phrases from
different groups of one category share at most incidental words; this keeps
discriminating slots well below any reasonable similarity threshold, which the
detection experiments rely on.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import (
    CaseAnnotations,
    Corpus,
    EntityAnnotation,
    RedundancyLabel,
    RelationAnnotation,
    TestCase,
    validate_annotations,
)
from .errors import ConfigError

SLOT_KINDS = ("component", "behavior", "prerequisite", "manner", "constraint")

_CATEGORY_OF_SLOT = {
    "component": "Component",
    "behavior": "Behavior",
    "prerequisite": "Prerequisite",
    "manner": "Manner",
    "constraint": "Constraint",
}
_RELATION_OF_SLOT = {
    "behavior": "Act",
    "prerequisite": "Require",
    "manner": "Use",
    "constraint": "Satisfy",
}

#: Synonym groups per category; phrases inside a group are interchangeable.
LEXICON: dict[str, tuple[tuple[tuple[str, ...], ...], ...]] = {
    "component": (
        (("visit", "history"),),
        (("resource", "directory"), ("resource", "folder")),
        (("taskbar", "window"),),
        (("calendar", "function"), ("calendar", "feature")),
        (("preset", "applications"),),
        (("gear", "rotation", "processing"),),
        (("audio", "driver"), ("sound", "driver")),
        (("network", "adapter"),),
        (("login", "screen"), ("signin", "screen")),
        (("file", "manager"),),
        (("print", "queue"),),
        (("search", "bar"),),
        (("cpu", "utilization"),),
        (("hard", "disk"),),
    ),
    "behavior": (
        (("browse",),),
        (("switch",),),
        (("display",), ("render",)),
        (("install",), ("deploy",)),
        (("partition",),),
        (("configure",),),
        (("refresh",), ("reload",)),
        (("validate",),),
        (("export",),),
        (("resize",),),
    ),
    "prerequisite": (
        (("when", "drawing", "3d", "graphics"),),
        (("after", "the", "system", "installation"), ("after", "the", "os", "installation")),
        (("before", "the", "system", "installation"), ("before", "the", "os", "installation")),
        (("when", "no", "antivirus", "is", "running"),),
        (("while", "the", "battery", "is", "charging"),),
        (("during", "the", "nightly", "backup"),),
        (("until", "the", "cache", "expires"),),
        (("when", "the", "vpn", "is", "connected"), ("when", "the", "vpn", "is", "enabled")),
    ),
    "manner": (
        (("mouse",),),
        (("keyboard",),),
        (("touchpad",),),
        (("command", "line"), ("terminal",)),
        (("mesa-util", "tool"),),
        (("unixbench", "tool"),),
        (("remote", "control"),),
        (("voice", "assistant"),),
    ),
    "constraint": (
        (("within", "five", "seconds"),),
        (("without", "data", "loss"),),
        (("including", "ftp", "support"),),
        (("above", "ninety", "percent"),),
        (("in", "dark", "mode"),),
        (("under", "heavy", "load"),),
        (("with", "alerts", "muted"),),
        (("per", "user", "profile"),),
    ),
}


@dataclass(frozen=True)
class _Slot:
    clause: int
    kind: str


@dataclass(frozen=True)
class _Alt:
    options: tuple[str, str]


_Item = str | _Slot | _Alt
_Template = tuple[tuple[_Item, ...], ...]  # sentences of items

DEFAULT_TEMPLATES: tuple[_Template, ...] = (
    (
        (_Alt(("test", "verify")), "that", "users", "can", _Slot(0, "behavior"), "the", _Slot(0, "component")),
    ),
    (
        (_Alt(("test", "check")), "that", "users", "can", _Slot(0, "behavior"), "the", _Slot(0, "component"),
         _Alt(("using", "via")), "the", _Slot(0, "manner")),
    ),
    (
        (_Slot(0, "prerequisite"), _Alt(("test", "verify")), "that", "users", "can",
         _Slot(0, "behavior"), "the", _Slot(0, "component")),
    ),
    (
        (_Alt(("verify", "check")), "that", "users", _Slot(0, "behavior"), "the", _Slot(0, "component"),
         "ensuring", _Slot(0, "constraint")),
    ),
    (
        (_Slot(0, "prerequisite"), "users", _Alt(("should", "must")), _Slot(0, "behavior"), "the",
         _Slot(0, "component"), "using", "the", _Slot(0, "manner")),
    ),
    (
        (_Alt(("test", "check")), "that", "users", _Slot(0, "behavior"), "the", _Slot(0, "component"),
         "via", "the", _Slot(0, "manner"), "ensuring", _Slot(0, "constraint")),
    ),
    (
        ("coverage", _Alt(("review", "report")), "of", "the", _Slot(0, "component")),
    ),
    (
        (_Alt(("test", "verify")), "that", "users", "can", _Slot(0, "behavior"), "the", _Slot(0, "component")),
        ("then", _Slot(1, "behavior"), "the", _Slot(1, "component"), "using", "the", _Slot(1, "manner")),
    ),
)

#: Group-level tuple: (component, behavior, prerequisite, manner, constraint)
#: group indices with None for absent slots.
TupleSignature = tuple[int | None, int | None, int | None, int | None, int | None]


@dataclass(frozen=True)
class SynthSpec:
    """Size and composition of a generated corpus.

    ``redundancy_rate`` and ``near_rate`` are the approximate fractions of
    cases that are redundant/near-pair derivatives of a base case;
    ``paraphrase_rate`` is the per-slot probability that a redundant
    derivative substitutes a synonym instead of keeping the phrase verbatim.
    """

    size: int
    redundancy_rate: float = 0.3
    paraphrase_rate: float = 0.5
    near_rate: float = 0.2
    n_projects: int = 4
    templates: tuple[_Template, ...] = DEFAULT_TEMPLATES

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ConfigError(f"corpus size must be >= 1, got {self.size}")
        for name in ("redundancy_rate", "paraphrase_rate", "near_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {rate}")
        if self.n_projects < 1:
            raise ConfigError(f"n_projects must be >= 1, got {self.n_projects}")
        if not self.templates:
            raise ConfigError("generator needs at least one template")


@dataclass(frozen=True)
class PairProvenance:
    """How a derived case relates to its base."""

    base_id: str
    derived_id: str
    kind: str  # 'redundant' | 'near'
    paraphrased: bool = False
    differing_slot: str | None = None


@dataclass(frozen=True)
class GeneratedCorpus:
    corpus: Corpus
    annotations: dict[str, CaseAnnotations]
    labels: tuple[RedundancyLabel, ...]
    redundant_pairs: tuple[PairProvenance, ...]
    near_pairs: tuple[PairProvenance, ...]
    tuple_groups: dict[str, tuple[TupleSignature, ...]]


@dataclass
class _Blueprint:
    template_idx: int
    variant: int
    slots: dict[tuple[int, str], tuple[int, int]] = field(default_factory=dict)
    project: str = ""

    def copy(self) -> "_Blueprint":
        return _Blueprint(
            template_idx=self.template_idx,
            variant=self.variant,
            slots=dict(self.slots),
            project=self.project,
        )


def _template_slots(template: _Template) -> list[_Slot]:
    return [item for sent in template for item in sent if isinstance(item, _Slot)]


def _render(blueprint: _Blueprint, case_id: str, templates: Sequence[_Template]):
    template = templates[blueprint.template_idx]
    sentences: list[list[str]] = []
    entities: list[EntityAnnotation] = []
    entity_index: dict[tuple[int, str], int] = {}
    for sent_idx, items in enumerate(template):
        tokens: list[str] = []
        for item in items:
            if isinstance(item, str):
                tokens.append(item)
            elif isinstance(item, _Alt):
                tokens.append(item.options[blueprint.variant])
            else:
                group_idx, phrase_idx = blueprint.slots[(item.clause, item.kind)]
                phrase = LEXICON[item.kind][group_idx][phrase_idx]
                start = len(tokens)
                tokens.extend(phrase)
                entity_index[(item.clause, item.kind)] = len(entities)
                entities.append(
                    EntityAnnotation(
                        sentence_index=sent_idx,
                        token_start=start,
                        token_end=start + len(phrase) - 1,
                        category=_CATEGORY_OF_SLOT[item.kind],
                    )
                )
        sentences.append(tokens)

    relations: list[RelationAnnotation] = []
    clauses = sorted({clause for clause, _ in entity_index})
    signatures: list[TupleSignature] = []
    for clause in clauses:
        comp = entity_index[(clause, "component")]
        sig: list[int | None] = []
        for kind in SLOT_KINDS:
            key = (clause, kind)
            sig.append(blueprint.slots[key][0] if key in blueprint.slots else None)
            if kind != "component" and key in entity_index:
                relations.append(
                    RelationAnnotation(
                        head=entity_index[key],
                        component=comp,
                        category=_RELATION_OF_SLOT[kind],
                    )
                )
        signatures.append(tuple(sig))  # type: ignore[arg-type]

    summary_parts = []
    for tokens in sentences:
        text = " ".join(tokens) + "."
        summary_parts.append(text[0].upper() + text[1:])
    case = TestCase(id=case_id, project=blueprint.project, summary=" ".join(summary_parts))
    annotations = validate_annotations(case, entities, relations)
    return case, annotations, tuple(signatures)


def _signature_covers(
    sigs_a: Sequence[TupleSignature], sigs_b: Sequence[TupleSignature]
) -> bool:
    return all(any(tb == ta for ta in sigs_a) for tb in sigs_b)


def generate_synthetic_corpus(seed: int, spec: SynthSpec) -> GeneratedCorpus:
    """Generate an annotated corpus plus exhaustive within-project pair labels.

    Pure function of ``(seed, spec)``: two calls with the same arguments
    produce identical corpora, annotations and labels.
    """
    rng = random.Random(seed)
    templates = spec.templates

    n_red = int(round(spec.size * spec.redundancy_rate / 2.0))
    n_near = int(round(spec.size * spec.near_rate / 2.0))
    n_base = spec.size - n_red - n_near
    if n_base < 1:
        raise ConfigError(
            "redundancy_rate and near_rate leave no room for base cases "
            f"(size={spec.size}, derived={n_red + n_near})"
        )

    bases: list[_Blueprint] = []
    for i in range(n_base):
        template_idx = rng.randrange(len(templates))
        blueprint = _Blueprint(
            template_idx=template_idx,
            variant=rng.randrange(2),
            project=f"P{(i % spec.n_projects) + 1:02d}",
        )
        for slot in _template_slots(templates[template_idx]):
            groups = LEXICON[slot.kind]
            group_idx = rng.randrange(len(groups))
            phrase_idx = rng.randrange(len(groups[group_idx]))
            blueprint.slots[(slot.clause, slot.kind)] = (group_idx, phrase_idx)
        bases.append(blueprint)

    blueprints: list[_Blueprint] = list(bases)
    provenance: list[PairProvenance] = []

    for j in range(n_red):
        base_pos = j % n_base
        derived = bases[base_pos].copy()
        paraphrased = False
        for key, (group_idx, phrase_idx) in list(derived.slots.items()):
            group = LEXICON[key[1]][group_idx]
            if len(group) > 1 and rng.random() < spec.paraphrase_rate:
                choices = [p for p in range(len(group)) if p != phrase_idx]
                derived.slots[key] = (group_idx, rng.choice(choices))
                paraphrased = True
        if rng.random() < 0.5:
            derived.variant = 1 - derived.variant
        blueprints.append(derived)
        provenance.append(
            PairProvenance(
                base_id=_case_id(base_pos),
                derived_id=_case_id(len(blueprints) - 1),
                kind="redundant",
                paraphrased=paraphrased,
            )
        )

    slot_cycle = itertools.cycle(SLOT_KINDS)
    for j in range(n_near):
        target = next(slot_cycle)
        base_pos = None
        for offset in range(n_base):
            pos = (j * 7 + offset) % n_base
            if any(kind == target for _, kind in bases[pos].slots):
                base_pos = pos
                break
        if base_pos is None:
            target = "component"
            base_pos = (j * 7) % n_base
        derived = bases[base_pos].copy()
        candidates = sorted(key for key in derived.slots if key[1] == target)
        key = candidates[rng.randrange(len(candidates))]
        group_idx, phrase_idx = derived.slots[key]
        groups = LEXICON[target]
        other_groups = [g for g in range(len(groups)) if g != group_idx]
        new_group = other_groups[rng.randrange(len(other_groups))]
        derived.slots[key] = (new_group, min(phrase_idx, len(groups[new_group]) - 1))
        blueprints.append(derived)
        provenance.append(
            PairProvenance(
                base_id=_case_id(base_pos),
                derived_id=_case_id(len(blueprints) - 1),
                kind="near",
                differing_slot=target,
            )
        )

    cases: list[TestCase] = []
    annotations: dict[str, CaseAnnotations] = {}
    tuple_groups: dict[str, tuple[TupleSignature, ...]] = {}
    for pos, blueprint in enumerate(blueprints):
        case, ann, sigs = _render(blueprint, _case_id(pos), templates)
        cases.append(case)
        annotations[case.id] = ann
        tuple_groups[case.id] = sigs
    corpus = Corpus.from_cases(cases)

    labels: list[RedundancyLabel] = []
    by_project: dict[str, list[str]] = {}
    for case in cases:
        by_project.setdefault(case.project, []).append(case.id)
    for project in sorted(by_project):
        ids = sorted(by_project[project])
        for id_a, id_b in itertools.combinations(ids, 2):
            a_covers = _signature_covers(tuple_groups[id_a], tuple_groups[id_b])
            b_covers = _signature_covers(tuple_groups[id_b], tuple_groups[id_a])
            if a_covers and b_covers:
                direction = "mutual"
            elif a_covers:
                direction = "a_covers_b"
            elif b_covers:
                direction = "b_covers_a"
            else:
                direction = "none"
            labels.append(
                RedundancyLabel(
                    id_a=id_a,
                    id_b=id_b,
                    redundant=a_covers or b_covers,
                    direction=direction,
                )
            )

    return GeneratedCorpus(
        corpus=corpus,
        annotations=annotations,
        labels=tuple(labels),
        redundant_pairs=tuple(p for p in provenance if p.kind == "redundant"),
        near_pairs=tuple(p for p in provenance if p.kind == "near"),
        tuple_groups=tuple_groups,
    )


def _case_id(position: int) -> str:
    return f"TC{position:04d}"

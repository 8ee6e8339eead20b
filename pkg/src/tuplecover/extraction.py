"""Context-aware joint extraction of test-oriented entities and relations.

The model keeps the layered shape of a span-based joint extractor but sits on
static word vectors: candidate spans are max-pooled, concatenated with a
global-context vector (the whole-case mean) and scored by a softmax entity
head; relation candidates pair a non-Component entity with a Component entity
and are scored from the two span vectors plus two local context windows (the
tokens before the textually-first entity and the tokens between the two).
Both heads are plain softmax classifiers trained jointly by full-batch
gradient descent on cross-entropy, which keeps training deterministic and the
gradients easy to verify against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import (
    COMPATIBLE_RELATION,
    CaseAnnotations,
    Corpus,
    EntityAnnotation,
    RelationAnnotation,
    load_annotations,
)
from .embeddings import EmbeddingStore, embed_phrase_average
from .errors import ModelError, TrainingError
from .preprocess import TokenizedCase, assemble_sequence

ENTITY_CLASSES = ("Component", "Behavior", "Prerequisite", "Manner", "Constraint", "Non")
RELATION_CLASSES = ("Act", "Require", "Use", "Satisfy", "Non")

_ENTITY_INDEX = {c: i for i, c in enumerate(ENTITY_CLASSES)}
_RELATION_INDEX = {c: i for i, c in enumerate(RELATION_CLASSES)}

DEFAULT_MAX_SPAN_LEN = 10


@dataclass(frozen=True)
class CandidateSpan:
    """A candidate entity: one consecutive chunk inside a single sentence."""

    sentence_index: int
    token_start: int
    token_end: int  # inclusive
    pooled_vector: np.ndarray

    @property
    def length(self) -> int:
        return self.token_end - self.token_start + 1

    @property
    def span(self) -> tuple[int, int, int]:
        return (self.sentence_index, self.token_start, self.token_end)


@dataclass(frozen=True)
class TrainingParams:
    learning_rate: float = 10.0
    epochs: int = 3000
    negative_ratio: float = 3.0
    seed: int = 7


@dataclass(frozen=True)
class ExtractionModel:
    """Weights of both classifier heads plus the context-window settings."""

    dim: int
    entity_weights: np.ndarray  # (6, 2*dim)
    entity_bias: np.ndarray  # (6,)
    relation_weights: np.ndarray  # (5, 4*dim)
    relation_bias: np.ndarray  # (5,)
    c0_window: int = 5
    c1_cap: int = 20
    hyperparams: TrainingParams = field(default_factory=TrainingParams)

    @classmethod
    def zeros(cls, dim: int, c0_window: int = 5, c1_cap: int = 20,
              hyperparams: TrainingParams | None = None) -> "ExtractionModel":
        return cls(
            dim=dim,
            entity_weights=np.zeros((len(ENTITY_CLASSES), 2 * dim)),
            entity_bias=np.zeros(len(ENTITY_CLASSES)),
            relation_weights=np.zeros((len(RELATION_CLASSES), 4 * dim)),
            relation_bias=np.zeros(len(RELATION_CLASSES)),
            c0_window=c0_window,
            c1_cap=c1_cap,
            hyperparams=hyperparams or TrainingParams(),
        )


@dataclass(frozen=True)
class Extraction:
    """Entities and relations for one case, with the tokenization they index into."""

    case_id: str
    sentences: tuple[tuple[str, ...], ...]
    entities: tuple[EntityAnnotation, ...]
    relations: tuple[RelationAnnotation, ...]
    provenance: str  # 'model' | 'imported' | 'gold'

    def entity_tokens(self, index: int) -> tuple[str, ...]:
        ent = self.entities[index]
        sent = self.sentences[ent.sentence_index]
        return tuple(sent[ent.token_start : ent.token_end + 1])


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _span_index_triples(tokenized: TokenizedCase, max_len: int) -> list[tuple[int, int, int]]:
    triples = []
    for s, sent in enumerate(tokenized.sentences):
        n = len(sent)
        for length in range(1, min(max_len, n) + 1):
            for start in range(n - length + 1):
                triples.append((s, start, start + length - 1))
    return triples


def _pool_span(tokenized: TokenizedCase, store: EmbeddingStore,
               span: tuple[int, int, int]) -> np.ndarray:
    s, start, end = span
    vecs = [store.vector(t) for t in tokenized.sentences[s][start : end + 1]]
    return np.max(vecs, axis=0)


def _boundary_negatives(
    tokenized: TokenizedCase,
    gold_spans: Mapping[tuple[int, int, int], str],
    max_span_len: int,
) -> list[tuple[int, int, int]]:
    """Sub-spans and one-token extensions of gold spans that are not gold themselves."""
    variants: set[tuple[int, int, int]] = set()
    for s, start, end in gold_spans:
        n = len(tokenized.sentences[s])
        for sub_start in range(start, end + 1):
            for sub_end in range(sub_start, end + 1):
                variants.add((s, sub_start, sub_end))
        if start > 0:
            variants.add((s, start - 1, end))
        if end + 1 < n:
            variants.add((s, start, end + 1))
    return sorted(
        v for v in variants
        if v not in gold_spans and (v[2] - v[1] + 1) <= max_span_len
    )


def enumerate_spans(
    tokenized: TokenizedCase, store: EmbeddingStore, max_len: int = DEFAULT_MAX_SPAN_LEN
) -> list[CandidateSpan]:
    """All consecutive chunks of up to ``max_len`` tokens, max-pooled.

    Spans never cross a sentence boundary, so the SEP marker can never fall
    inside a candidate.
    """
    return [
        CandidateSpan(s, start, end, _pool_span(tokenized, store, (s, start, end)))
        for s, start, end in _span_index_triples(tokenized, max_len)
    ]


def global_context(tokenized: TokenizedCase, store: EmbeddingStore) -> np.ndarray:
    """Whole-case context vector: uniform mean over all tokens, SEP excluded."""
    return embed_phrase_average(tokenized.tokens, store)


def classify_entity(
    span: CandidateSpan, global_vector: np.ndarray, model: ExtractionModel
) -> np.ndarray:
    """Probability distribution over the six entity classes for one span."""
    features = np.concatenate([span.pooled_vector, global_vector])
    if features.shape[0] != 2 * model.dim:
        raise ModelError(
            f"entity feature length {features.shape[0]} does not match model dim {model.dim}"
        )
    return softmax(model.entity_weights @ features + model.entity_bias)


def _flat_offsets(tokenized: TokenizedCase) -> list[int]:
    offsets = [0]
    for sent in tokenized.sentences:
        offsets.append(offsets[-1] + len(sent))
    return offsets


def _window_vector(tokens: Sequence[str], store: EmbeddingStore, dim: int) -> np.ndarray:
    if not tokens:
        return np.zeros(dim)
    return embed_phrase_average(tokens, store)


def relation_features(
    entity_i: EntityAnnotation,
    entity_j: EntityAnnotation,
    tokenized: TokenizedCase,
    store: EmbeddingStore,
    c0_window: int,
    c1_cap: int,
) -> np.ndarray:
    """Feature vector [V(C0); V(E_i); V(C1); V(E_j)] for a relation candidate.

    Windows are laid out by textual order: C0 is up to ``c0_window`` tokens
    before the textually-first entity, C1 the tokens strictly between the two
    entities (first ``c1_cap``).  Tokens after the later entity are excluded.
    The feature order is fixed by role: E_i is the non-Component entity, E_j
    the Component, regardless of which comes first in the text.
    """
    flat = list(tokenized.tokens)
    offsets = _flat_offsets(tokenized)

    def flat_range(ent: EntityAnnotation) -> tuple[int, int]:
        base = offsets[ent.sentence_index]
        return (base + ent.token_start, base + ent.token_end)

    ri, rj = flat_range(entity_i), flat_range(entity_j)
    first, second = (ri, rj) if ri[0] <= rj[0] else (rj, ri)
    c0 = flat[max(0, first[0] - c0_window) : first[0]]
    c1 = flat[first[1] + 1 : second[0]][:c1_cap]

    def span_tokens(ent: EntityAnnotation) -> Sequence[str]:
        return tokenized.sentences[ent.sentence_index][ent.token_start : ent.token_end + 1]

    dim = store.dim
    return np.concatenate(
        [
            _window_vector(c0, store, dim),
            embed_phrase_average(span_tokens(entity_i), store),
            _window_vector(c1, store, dim),
            embed_phrase_average(span_tokens(entity_j), store),
        ]
    )


def _mask_for(head_category: str) -> np.ndarray:
    mask = np.zeros(len(RELATION_CLASSES))
    mask[_RELATION_INDEX[COMPATIBLE_RELATION[head_category]]] = 1.0
    mask[_RELATION_INDEX["Non"]] = 1.0
    return mask


def classify_relation(
    entity_i: EntityAnnotation,
    entity_j: EntityAnnotation,
    tokenized: TokenizedCase,
    model: ExtractionModel,
    store: EmbeddingStore,
) -> np.ndarray:
    """Masked probability distribution over the five relation classes.

    ``entity_i`` must be the non-Component entity and ``entity_j`` the
    Component; categories incompatible with the head's entity category get
    probability zero and the rest is renormalized.
    """
    if entity_j.category != "Component" or entity_i.category == "Component":
        raise ModelError(
            "relation candidates pair exactly one non-Component entity with one Component "
            f"(got {entity_i.category}, {entity_j.category})"
        )
    if store.dim != model.dim:
        raise ModelError(f"store dim {store.dim} does not match model dim {model.dim}")
    features = relation_features(
        entity_i, entity_j, tokenized, store, model.c0_window, model.c1_cap
    )
    probs = softmax(model.relation_weights @ features + model.relation_bias)
    masked = probs * _mask_for(entity_i.category)
    return masked / masked.sum()


def head_loss_and_grad(
    weights: np.ndarray, bias: np.ndarray, features: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy of ``softmax(features @ weights.T + bias)`` and its gradients.

    ``labels`` holds class indices.  Shared by both heads; this is the exact
    function the finite-difference gradient check exercises.
    """
    n = features.shape[0]
    probs = softmax(features @ weights.T + bias)
    loss = float(-np.mean(np.log(probs[np.arange(n), labels] + 1e-300)))
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    grad_w = delta.T @ features / n
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


@dataclass(frozen=True)
class EpochLoss:
    epoch: int
    entity_loss: float
    relation_loss: float

    @property
    def total(self) -> float:
        return self.entity_loss + self.relation_loss


def _build_training_sets(
    corpus: Corpus,
    annotations: Mapping[str, CaseAnnotations],
    store: EmbeddingStore,
    params: TrainingParams,
    c0_window: int,
    c1_cap: int,
    max_span_len: int,
):
    rng = np.random.default_rng(params.seed)
    ent_rows: list[np.ndarray] = []
    ent_labels: list[int] = []
    rel_rows: list[np.ndarray] = []
    rel_labels: list[int] = []

    for case in corpus:
        ann = annotations.get(case.id)
        if ann is None:
            continue
        tokenized = assemble_sequence(case)
        g = global_context(tokenized, store)

        gold_spans = {e.span: e.category for e in ann.entities}
        for span, category in sorted(gold_spans.items()):
            pooled = _pool_span(tokenized, store, span)
            ent_rows.append(np.concatenate([pooled, g]))
            ent_labels.append(_ENTITY_INDEX[category])
        # Boundary variants of gold spans are always negatives: they teach the
        # head that fragments and overextensions of an entity are Non, which
        # exact-match scoring depends on.
        hard = _boundary_negatives(tokenized, gold_spans, max_span_len)
        for span in hard:
            pooled = _pool_span(tokenized, store, span)
            ent_rows.append(np.concatenate([pooled, g]))
            ent_labels.append(_ENTITY_INDEX["Non"])
        excluded = set(gold_spans) | set(hard)
        negatives = [t for t in _span_index_triples(tokenized, max_span_len) if t not in excluded]
        n_neg = min(len(negatives), int(round(params.negative_ratio * max(1, len(gold_spans)))))
        if n_neg:
            for k in rng.choice(len(negatives), size=n_neg, replace=False):
                pooled = _pool_span(tokenized, store, negatives[int(k)])
                ent_rows.append(np.concatenate([pooled, g]))
                ent_labels.append(_ENTITY_INDEX["Non"])

        gold_pairs = {(r.head, r.component): r.category for r in ann.relations}
        candidates = [
            (i, j)
            for i, ei in enumerate(ann.entities)
            if ei.category != "Component"
            for j, ej in enumerate(ann.entities)
            if ej.category == "Component"
        ]
        for (i, j), category in sorted(gold_pairs.items()):
            rel_rows.append(
                relation_features(ann.entities[i], ann.entities[j], tokenized, store, c0_window, c1_cap)
            )
            rel_labels.append(_RELATION_INDEX[category])
        neg_pairs = [p for p in candidates if p not in gold_pairs]
        n_neg = min(len(neg_pairs), int(round(params.negative_ratio * max(1, len(gold_pairs)))))
        if n_neg:
            for k in rng.choice(len(neg_pairs), size=n_neg, replace=False):
                i, j = neg_pairs[int(k)]
                rel_rows.append(
                    relation_features(ann.entities[i], ann.entities[j], tokenized, store, c0_window, c1_cap)
                )
                rel_labels.append(_RELATION_INDEX["Non"])

    return (
        np.array(ent_rows),
        np.array(ent_labels, dtype=np.intp),
        np.array(rel_rows),
        np.array(rel_labels, dtype=np.intp),
    )


def train_joint(
    corpus: Corpus,
    annotations: Mapping[str, CaseAnnotations],
    store: EmbeddingStore,
    params: TrainingParams = TrainingParams(),
    c0_window: int = 5,
    c1_cap: int = 20,
    max_span_len: int = DEFAULT_MAX_SPAN_LEN,
) -> tuple[ExtractionModel, list[EpochLoss]]:
    """Train both heads jointly by full-batch gradient descent.

    Gold spans/pairs are positives; sampled non-gold spans and compatible
    non-gold pairs are ``Non`` negatives at ``params.negative_ratio``.
    Deterministic for a fixed seed.  Returns the model and the per-epoch loss
    trace (losses evaluated before each update).
    """
    if len(corpus) == 0:
        raise TrainingError("cannot train on an empty corpus")
    x_ent, y_ent, x_rel, y_rel = _build_training_sets(
        corpus, annotations, store, params, c0_window, c1_cap, max_span_len
    )
    if x_ent.size == 0:
        raise TrainingError("no annotated entities to train on")
    if x_rel.size == 0:
        raise TrainingError("no annotated relations to train on")

    w_ent = np.zeros((len(ENTITY_CLASSES), 2 * store.dim))
    b_ent = np.zeros(len(ENTITY_CLASSES))
    w_rel = np.zeros((len(RELATION_CLASSES), 4 * store.dim))
    b_rel = np.zeros(len(RELATION_CLASSES))

    trace: list[EpochLoss] = []
    lr = params.learning_rate
    for epoch in range(params.epochs):
        ent_loss, gw_e, gb_e = head_loss_and_grad(w_ent, b_ent, x_ent, y_ent)
        rel_loss, gw_r, gb_r = head_loss_and_grad(w_rel, b_rel, x_rel, y_rel)
        trace.append(EpochLoss(epoch=epoch, entity_loss=ent_loss, relation_loss=rel_loss))
        w_ent -= lr * gw_e
        b_ent -= lr * gb_e
        w_rel -= lr * gw_r
        b_rel -= lr * gb_r

    model = ExtractionModel(
        dim=store.dim,
        entity_weights=w_ent,
        entity_bias=b_ent,
        relation_weights=w_rel,
        relation_bias=b_rel,
        c0_window=c0_window,
        c1_cap=c1_cap,
        hyperparams=params,
    )
    return model, trace


def _resolve_overlaps(
    accepted: list[tuple[CandidateSpan, str, float]]
) -> list[tuple[CandidateSpan, str, float]]:
    """Keep the best span among overlapping ones: highest probability, then longer."""
    ordered = sorted(
        accepted,
        key=lambda item: (-item[2], -item[0].length, item[0].sentence_index, item[0].token_start),
    )
    kept: list[tuple[CandidateSpan, str, float]] = []
    for span, category, prob in ordered:
        clashes = any(
            k.sentence_index == span.sentence_index
            and k.token_start <= span.token_end
            and span.token_start <= k.token_end
            for k, _, _ in kept
        )
        if not clashes:
            kept.append((span, category, prob))
    return kept


def extract(
    case, model: ExtractionModel, store: EmbeddingStore,
    max_span_len: int = DEFAULT_MAX_SPAN_LEN,
) -> Extraction:
    """Run the full pipeline on one test case: spans -> entities -> relations."""
    if store.dim != model.dim:
        raise ModelError(f"store dim {store.dim} does not match model dim {model.dim}")
    tokenized = assemble_sequence(case)
    g = global_context(tokenized, store)

    spans = enumerate_spans(tokenized, store, max_span_len)
    accepted: list[tuple[CandidateSpan, str, float]] = []
    if spans:
        features = np.stack([np.concatenate([s.pooled_vector, g]) for s in spans])
        probs = softmax(features @ model.entity_weights.T + model.entity_bias)
        winners = np.argmax(probs, axis=1)
        for span, winner, row in zip(spans, winners, probs):
            category = ENTITY_CLASSES[int(winner)]
            if category != "Non":
                accepted.append((span, category, float(row[winner])))

    entities: list[EntityAnnotation] = []
    for span, category, prob in sorted(
        _resolve_overlaps(accepted), key=lambda item: item[0].span
    ):
        entities.append(
            EntityAnnotation(
                sentence_index=span.sentence_index,
                token_start=span.token_start,
                token_end=span.token_end,
                category=category,
                probability=prob,
            )
        )

    relations: list[RelationAnnotation] = []
    for i, ei in enumerate(entities):
        if ei.category == "Component":
            continue
        for j, ej in enumerate(entities):
            if ej.category != "Component":
                continue
            probs = classify_relation(ei, ej, tokenized, model, store)
            winner = int(np.argmax(probs))
            category = RELATION_CLASSES[winner]
            if category != "Non":
                relations.append(
                    RelationAnnotation(
                        head=i, component=j, category=category, probability=float(probs[winner])
                    )
                )

    return Extraction(
        case_id=case.id,
        sentences=tokenized.sentences,
        entities=tuple(entities),
        relations=tuple(relations),
        provenance="model",
    )


def gold_extractions(
    corpus: Corpus, annotations: Mapping[str, CaseAnnotations]
) -> dict[str, Extraction]:
    """Wrap gold annotations as extractions (provenance ``gold``)."""
    out: dict[str, Extraction] = {}
    for case in corpus:
        ann = annotations.get(case.id)
        if ann is None:
            continue
        tokenized = assemble_sequence(case)
        out[case.id] = Extraction(
            case_id=case.id,
            sentences=tokenized.sentences,
            entities=ann.entities,
            relations=ann.relations,
            provenance="gold",
        )
    return out


def import_extractions(path: str | Path, corpus: Corpus) -> dict[str, Extraction]:
    """Load externally produced extractions; same validation as gold annotations."""
    annotations = load_annotations(path, corpus)
    imported = gold_extractions(corpus, annotations)
    return {
        case_id: Extraction(
            case_id=ext.case_id,
            sentences=ext.sentences,
            entities=ext.entities,
            relations=ext.relations,
            provenance="imported",
        )
        for case_id, ext in imported.items()
    }


def write_extractions(
    extractions: Mapping[str, Extraction],
    path: str | Path,
    tuples_by_id: Mapping[str, Sequence] | None = None,
) -> None:
    """Write extractions in the annotation format, optionally with a tuples array."""
    payload: dict[str, dict] = {}
    for case_id in sorted(extractions):
        ext = extractions[case_id]
        record: dict = {
            "entities": [
                {
                    "sentence_index": e.sentence_index,
                    "token_start": e.token_start,
                    "token_end": e.token_end,
                    "category": e.category,
                    **({"probability": e.probability} if e.probability is not None else {}),
                }
                for e in ext.entities
            ],
            "relations": [
                {
                    "head": r.head,
                    "component": r.component,
                    "category": r.category,
                    **({"probability": r.probability} if r.probability is not None else {}),
                }
                for r in ext.relations
            ],
            "provenance": ext.provenance,
        }
        if tuples_by_id is not None and case_id in tuples_by_id:
            record["tuples"] = [t.as_record() for t in tuples_by_id[case_id]]
        payload[case_id] = record
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def save_model(model: ExtractionModel, path: str | Path) -> None:
    """Persist the model as a flat JSON record (weights row-major)."""
    payload = {
        "dim": model.dim,
        "c0_window": model.c0_window,
        "c1_cap": model.c1_cap,
        "entity_weights": model.entity_weights.tolist(),
        "entity_bias": model.entity_bias.tolist(),
        "relation_weights": model.relation_weights.tolist(),
        "relation_bias": model.relation_bias.tolist(),
        "hyperparams": {
            "learning_rate": model.hyperparams.learning_rate,
            "epochs": model.hyperparams.epochs,
            "negative_ratio": model.hyperparams.negative_ratio,
            "seed": model.hyperparams.seed,
        },
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> ExtractionModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        params = TrainingParams(**payload["hyperparams"])
        model = ExtractionModel(
            dim=int(payload["dim"]),
            entity_weights=np.array(payload["entity_weights"], dtype=np.float64),
            entity_bias=np.array(payload["entity_bias"], dtype=np.float64),
            relation_weights=np.array(payload["relation_weights"], dtype=np.float64),
            relation_bias=np.array(payload["relation_bias"], dtype=np.float64),
            c0_window=int(payload["c0_window"]),
            c1_cap=int(payload["c1_cap"]),
            hyperparams=params,
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ModelError(f"malformed model file {path}: {exc}") from None
    expected = (len(ENTITY_CLASSES), 2 * model.dim)
    if model.entity_weights.shape != expected:
        raise ModelError(
            f"entity head shape {model.entity_weights.shape} does not match dim {model.dim}"
        )
    if model.relation_weights.shape != (len(RELATION_CLASSES), 4 * model.dim):
        raise ModelError(
            f"relation head shape {model.relation_weights.shape} does not match dim {model.dim}"
        )
    return model

"""Scoring and statistics: extraction metrics, detection metrics, splits,
ablation and the classical tests (Pearson r, Cohen's kappa, Mann-Whitney U).

Extraction scoring uses exact span+category matching, the stricter of the
plausible rules.  An undefined precision (no predictions) or recall (empty
gold) is reported as absent rather than zero so averages are not silently
inflated.  The statistics are implemented from their definitional formulas;
only the Student-t tail needed for the Pearson p-value is delegated to scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import stdtr
from scipy.stats import rankdata

from .compare import ComparisonConfig, RedundancyVerdict, detect_redundancy
from .corpus import Corpus, RedundancyLabel
from .embeddings import EmbeddingStore
from .errors import ConfigError, EvaluationError, StatisticsError
from .extraction import Extraction

ENTITY_CATEGORIES = ("Component", "Behavior", "Prerequisite", "Manner", "Constraint")
RELATION_CATEGORIES = ("Act", "Require", "Use", "Satisfy")


@dataclass(frozen=True)
class MetricReport:
    """Precision/recall/F1/accuracy plus the counts they derive from.

    ``tn`` (and hence accuracy) only applies to pair-level detection; span
    extraction has no true negatives and reports both as absent.
    """

    tp: int
    fp: int
    fn: int
    tn: int | None = None

    @property
    def precision(self) -> float | None:
        total = self.tp + self.fp
        return self.tp / total if total else None

    @property
    def recall(self) -> float | None:
        total = self.tp + self.fn
        return self.tp / total if total else None

    @property
    def f1(self) -> float | None:
        p, r = self.precision, self.recall
        if p is None or r is None:
            return None
        return 2 * p * r / (p + r) if (p + r) else 0.0

    @property
    def accuracy(self) -> float | None:
        if self.tn is None:
            return None
        total = self.tp + self.fp + self.fn + self.tn
        return (self.tp + self.tn) / total if total else None

    def as_record(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class ExtractionScore:
    """Per-category and micro-averaged reports for entities and relations."""

    entity: dict[str, MetricReport]
    entity_micro: MetricReport
    relation: dict[str, MetricReport]
    relation_micro: MetricReport


def _entity_keys(ext: Extraction) -> set[tuple]:
    return {(e.span, e.category) for e in ext.entities}


def _relation_keys(ext: Extraction) -> set[tuple]:
    return {
        (ext.entities[r.head].span, ext.entities[r.component].span, r.category)
        for r in ext.relations
    }


def extraction_metrics(
    predicted: Mapping[str, Extraction], gold: Mapping[str, Extraction]
) -> ExtractionScore:
    """Exact span+category matching over a common corpus."""
    if set(predicted) != set(gold):
        missing = sorted(set(gold) ^ set(predicted))
        raise EvaluationError(f"predicted and gold cover different cases: {missing[:5]}")

    def score(keys_fn, categories, category_of):
        counts = {c: [0, 0, 0] for c in categories}  # tp, fp, fn
        for case_id in gold:
            pred_keys = keys_fn(predicted[case_id])
            gold_keys = keys_fn(gold[case_id])
            for key in pred_keys & gold_keys:
                counts[category_of(key)][0] += 1
            for key in pred_keys - gold_keys:
                counts[category_of(key)][1] += 1
            for key in gold_keys - pred_keys:
                counts[category_of(key)][2] += 1
        reports = {c: MetricReport(tp=v[0], fp=v[1], fn=v[2]) for c, v in counts.items()}
        micro = MetricReport(
            tp=sum(v[0] for v in counts.values()),
            fp=sum(v[1] for v in counts.values()),
            fn=sum(v[2] for v in counts.values()),
        )
        return reports, micro

    entity, entity_micro = score(_entity_keys, ENTITY_CATEGORIES, lambda k: k[1])
    relation, relation_micro = score(_relation_keys, RELATION_CATEGORIES, lambda k: k[2])
    return ExtractionScore(
        entity=entity, entity_micro=entity_micro, relation=relation, relation_micro=relation_micro
    )


_FLIP = {"a_covers_b": "b_covers_a", "b_covers_a": "a_covers_b", "mutual": "mutual", "none": "none"}


def _direction_set(direction: str) -> frozenset[str]:
    if direction == "mutual":
        return frozenset({"a_covers_b", "b_covers_a"})
    if direction == "none":
        return frozenset()
    return frozenset({direction})


def _verdict_record(v: RedundancyVerdict | Mapping) -> dict:
    if isinstance(v, RedundancyVerdict):
        return {
            "id_a": v.id_a,
            "id_b": v.id_b,
            "redundant": v.redundant,
            "direction": v.direction,
            "totally_equivalent": v.totally_equivalent,
        }
    return dict(v)


def detection_metrics(
    verdicts: Iterable[RedundancyVerdict | Mapping],
    labels: Sequence[RedundancyLabel],
    skipped: Iterable[str] = (),
) -> MetricReport:
    """Pair-level metrics on the redundant class.

    A redundant prediction on a redundant pair counts as correct when the
    predicted and labeled directions are compatible; a totally-equivalent
    prediction is lenient (either direction counts).  A direction conflict
    counts as both a false positive and a false negative.  Labeled pairs
    touching a skipped case are excluded; any other labeled pair without a
    verdict is an error.
    """
    by_pair: dict[frozenset[str], dict] = {}
    for v in verdicts:
        record = _verdict_record(v)
        by_pair[frozenset((record["id_a"], record["id_b"]))] = record
    skipped_set = set(skipped)

    missing = []
    tp = fp = fn = tn = 0
    for label in labels:
        if label.id_a in skipped_set or label.id_b in skipped_set:
            continue
        record = by_pair.get(frozenset((label.id_a, label.id_b)))
        if record is None:
            missing.append((label.id_a, label.id_b))
            continue
        direction = record["direction"]
        if record["id_a"] != label.id_a:
            direction = _FLIP[direction]
        if record["redundant"] and label.redundant:
            compatible = bool(_direction_set(direction) & _direction_set(label.direction))
            if compatible or record.get("totally_equivalent", False):
                tp += 1
            else:
                fp += 1
                fn += 1
        elif record["redundant"]:
            fp += 1
        elif label.redundant:
            fn += 1
        else:
            tn += 1
    if missing:
        raise EvaluationError(f"labeled pairs without a verdict: {missing[:5]}")
    return MetricReport(tp=tp, fp=fp, fn=fn, tn=tn)


def split_train_test(
    corpus: Corpus, ratio: float = 0.8, seed: int = 0, repeats: int = 5
) -> list[tuple[Corpus, Corpus]]:
    """Deterministic repeated random splits into disjoint, exhaustive partitions."""
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must be in (0, 1), got {ratio}")
    if len(corpus) < 5:
        raise ConfigError(f"corpus of {len(corpus)} cases is too small to split")
    ids = corpus.ids()
    n_train = min(max(int(round(ratio * len(ids))), 1), len(ids) - 1)
    splits = []
    for repeat in range(repeats):
        rng = np.random.default_rng([seed, repeat])
        perm = rng.permutation(len(ids))
        train_ids = {ids[i] for i in perm[:n_train]}
        splits.append((corpus.subset(train_ids), corpus.subset(set(ids) - train_ids)))
    return splits


@dataclass(frozen=True)
class AblationResult:
    """Detection metrics with one slot category excluded, next to the full run."""

    dropped: str
    report: MetricReport
    full_report: MetricReport
    redundant_pairs: frozenset[tuple[str, str]]
    full_redundant_pairs: frozenset[tuple[str, str]]

    def delta(self, metric: str) -> float | None:
        ablated = getattr(self.report, metric)
        full = getattr(self.full_report, metric)
        if ablated is None or full is None:
            return None
        return ablated - full


def ablate(
    corpus: Corpus,
    extractions: Mapping[str, Extraction],
    drop: str,
    store: EmbeddingStore,
    config: ComparisonConfig,
    labels: Sequence[RedundancyLabel],
    scope: str = "per_project",
) -> AblationResult:
    """Re-run detection with one slot excluded from tuple comparison."""
    slot = drop.lower()
    full = detect_redundancy(corpus, extractions, store, config, scope=scope)
    ablated = detect_redundancy(corpus, extractions, store, config.dropping(slot), scope=scope)
    return AblationResult(
        dropped=slot,
        report=detection_metrics(ablated.verdicts, labels, ablated.skipped),
        full_report=detection_metrics(full.verdicts, labels, full.skipped),
        redundant_pairs=frozenset(ablated.redundant_pairs()),
        full_redundant_pairs=frozenset(full.redundant_pairs()),
    )


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Pearson correlation coefficient with a two-sided t-distribution p-value."""
    if len(x) != len(y):
        raise StatisticsError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 3:
        raise StatisticsError(f"pearson needs at least 3 observations, got {n}")
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0 or vy == 0.0:
        raise StatisticsError("pearson undefined for a zero-variance sample")
    r = float(np.clip(np.dot(dx, dy) / math.sqrt(vx * vy), -1.0, 1.0))
    df = n - 2
    denom = 1.0 - r * r
    if denom <= 0.0:
        return r, 0.0
    t = r * math.sqrt(df / denom)
    p = 2.0 * (1.0 - float(stdtr(df, abs(t))))
    return r, min(max(p, 0.0), 1.0)


def cohen_kappa(a: Sequence[bool], b: Sequence[bool]) -> float:
    """Cohen's kappa for two boolean raters: (p_o - p_e) / (1 - p_e)."""
    if len(a) != len(b):
        raise StatisticsError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise StatisticsError("kappa needs at least one observation")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if bool(x) == bool(y)) / n
    pa = sum(map(bool, a)) / n
    pb = sum(map(bool, b)) / n
    p_e = pa * pb + (1 - pa) * (1 - pb)
    if p_e == 1.0:
        return 1.0  # both raters constant and identical, perfect agreement
    return (p_o - p_e) / (1.0 - p_e)


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Mann-Whitney U of the first sample, two-sided normal-approximation p.

    Ranks are midranks (tie-corrected variance, continuity correction); the
    identity U_a + U_b = |a|*|b| holds exactly.
    """
    if not len(a) or not len(b):
        raise StatisticsError("mann-whitney needs two non-empty samples")
    na, nb = len(a), len(b)
    combined = np.concatenate([np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)])
    ranks = rankdata(combined)
    u = float(ranks[:na].sum() - na * (na + 1) / 2.0)

    n = na + nb
    _, tie_counts = np.unique(combined, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts))
    if n > 1:
        var = na * nb / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    else:
        var = 0.0
    if var <= 0.0:
        return u, 1.0
    mu = na * nb / 2.0
    diff = u - mu
    if diff > 0:
        diff -= 0.5
    elif diff < 0:
        diff += 0.5
    z = diff / math.sqrt(var)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return u, min(p, 1.0)

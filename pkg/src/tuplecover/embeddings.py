"""Static word vectors, phrase vectors (averaging and SIF) and cosine similarity.

The store is the numeric substrate for both the extraction model and the
tuple comparison strategies.  Vectors come either from a word2vec text file
or from the in-repo skip-gram trainer; words missing from the store fall back
to a deterministic hash-seeded unit vector, so identical unknown words always
compare equal while distinct ones are almost surely dissimilar.
"""

from __future__ import annotations

import hashlib
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmbeddingError, ParseError, SimilarityError, TrainingError

_ZERO_NORM = 1e-12


def _oov_vector(word: str, dim: int) -> np.ndarray:
    """Deterministic pseudo-random unit vector for an out-of-vocabulary word."""
    digest = hashlib.sha256(word.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "little")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable word -> vector table plus corpus word frequencies.

    ``frequencies`` stay all-zero until fitted from a corpus (see
    :meth:`with_frequencies`); SIF weighting requires fitted frequencies.
    Safe for concurrent reads.
    """

    dim: int
    vectors: Mapping[str, np.ndarray]
    frequencies: Mapping[str, int] = field(default_factory=dict)
    total_count: int = 0

    def vector(self, word: str) -> np.ndarray:
        """Vector for ``word``, falling back to the deterministic OOV rule."""
        known = self.vectors.get(word)
        if known is not None:
            return known
        return _oov_vector(word, self.dim)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def probability(self, word: str) -> float:
        """Unigram probability of ``word`` under the fitted frequencies."""
        if self.total_count == 0:
            return 0.0
        return self.frequencies.get(word, 0) / self.total_count

    def with_frequencies(self, sentences: Iterable[Sequence[str]]) -> "EmbeddingStore":
        """Return a copy of the store with frequencies counted from ``sentences``."""
        counts: Counter[str] = Counter()
        for sent in sentences:
            counts.update(sent)
        return EmbeddingStore(
            dim=self.dim,
            vectors=self.vectors,
            frequencies=dict(counts),
            total_count=sum(counts.values()),
        )


def load_word_vectors(path: str | Path) -> EmbeddingStore:
    """Load a word2vec text-format file: header ``V D`` then ``word v1 .. vD`` lines.

    A duplicate word keeps its last occurrence (with a warning); any line whose
    value count disagrees with the header dimension is a parse error.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty vector file", path=str(path), line=1)
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError(f"malformed header {lines[0]!r}", path=str(path), line=1)
    try:
        declared, dim = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(f"malformed header {lines[0]!r}", path=str(path), line=1) from None
    if dim < 1:
        raise ParseError(f"non-positive dimension {dim}", path=str(path), line=1)

    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != dim + 1:
            raise ParseError(
                f"expected {dim} values for {parts[0] if parts else '?'!r}, got {len(parts) - 1}",
                path=str(path),
                line=lineno,
            )
        word = parts[0]
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError:
            raise ParseError(f"non-numeric value for {word!r}", path=str(path), line=lineno) from None
        if word in vectors:
            warnings.warn(f"duplicate vector for {word!r}; keeping the last occurrence", stacklevel=2)
        vectors[word] = vec
    if len(vectors) != declared:
        warnings.warn(
            f"vector file header declares {declared} words but {len(vectors)} were read",
            stacklevel=2,
        )
    return EmbeddingStore(dim=dim, vectors=vectors)


def save_word_vectors(store: EmbeddingStore, path: str | Path) -> None:
    """Write the store in word2vec text format (words in sorted order)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{len(store.vectors)} {store.dim}\n")
        for word in sorted(store.vectors):
            values = " ".join(repr(float(x)) for x in store.vectors[word])
            fh.write(f"{word} {values}\n")


def train_embeddings(
    sentences: Sequence[Sequence[str]],
    dim: int = 32,
    window: int = 3,
    epochs: int = 5,
    seed: int = 0,
    negative: int = 5,
    learning_rate: float = 0.025,
    min_learning_rate: float = 1e-4,
) -> EmbeddingStore:
    """Train skip-gram word vectors with negative sampling.

    Deterministic for a fixed ``(sentences, dim, window, epochs, seed)``;
    every corpus word receives a vector and the store's frequencies are
    fitted from the corpus.  Negative samples follow the standard
    unigram^0.75 noise distribution and the learning rate decays linearly.
    """
    if dim < 2:
        raise TrainingError(f"embedding dimension must be >= 2, got {dim}")
    counts: Counter[str] = Counter()
    for sent in sentences:
        counts.update(sent)
    if len(counts) < 2:
        raise TrainingError(f"vocabulary of size {len(counts)} is too small to train")

    vocab = sorted(counts, key=lambda w: (-counts[w], w))
    index = {w: i for i, w in enumerate(vocab)}
    v = len(vocab)

    rng = np.random.default_rng(seed)
    # Unit-norm init keeps word identity visible next to the common component
    # that negative sampling grows on small, template-heavy corpora.
    w_in = rng.standard_normal((v, dim))
    w_in /= np.linalg.norm(w_in, axis=1, keepdims=True)
    w_out = np.zeros((v, dim))

    noise = np.array([counts[w] for w in vocab], dtype=np.float64) ** 0.75
    noise /= noise.sum()

    encoded = [np.array([index[t] for t in sent], dtype=np.intp) for sent in sentences if sent]
    pairs: list[tuple[int, int]] = []
    for sent in encoded:
        n = len(sent)
        for i in range(n):
            lo, hi = max(0, i - window), min(n, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    pairs.append((int(sent[i]), int(sent[j])))
    if not pairs:
        raise TrainingError("corpus has no co-occurring token pairs")

    total_steps = epochs * len(pairs)
    step = 0
    order = np.arange(len(pairs))
    for _ in range(epochs):
        rng.shuffle(order)
        for k in order:
            center, context = pairs[k]
            lr = learning_rate + (min_learning_rate - learning_rate) * (step / total_steps)
            step += 1

            negatives = rng.choice(v, size=negative, p=noise)
            targets = np.concatenate(([context], negatives))
            labels = np.zeros(len(targets))
            labels[0] = 1.0

            h = w_in[center]
            logits = w_out[targets] @ h
            sig = 1.0 / (1.0 + np.exp(-logits))
            g = (sig - labels) * lr
            grad_h = g @ w_out[targets]
            w_out[targets] -= np.outer(g, h)
            w_in[center] -= grad_h

    vectors = {w: w_in[index[w]].copy() for w in vocab}
    return EmbeddingStore(
        dim=dim,
        vectors=vectors,
        frequencies=dict(counts),
        total_count=sum(counts.values()),
    )


def embed_phrase_average(tokens: Sequence[str], store: EmbeddingStore) -> np.ndarray:
    """Elementwise mean of the member word vectors (OOV words use the hash rule)."""
    if not tokens:
        raise SimilarityError("cannot embed an empty phrase")
    return np.mean([store.vector(t) for t in tokens], axis=0)


@dataclass(frozen=True)
class SifContext:
    """Fitted SIF parameters: smoothing constant and removable component.

    ``principal_component`` is ``None`` when fitting was degenerate (all
    phrases identical); embedding then skips the removal step.
    """

    a: float
    principal_component: np.ndarray | None

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise EmbeddingError(f"SIF smoothing constant must be positive, got {self.a}")


def _sif_weighted_average(tokens: Sequence[str], store: EmbeddingStore, a: float) -> np.ndarray:
    weights = np.array([a / (a + store.probability(t)) for t in tokens])
    vecs = np.stack([store.vector(t) for t in tokens])
    return weights @ vecs / len(tokens)


def fit_sif(
    phrases: Iterable[Sequence[str]],
    store: EmbeddingStore,
    a: float = 1e-3,
) -> SifContext:
    """Fit a SIF context over a phrase set.

    Each phrase is embedded as the a/(a+p(w))-weighted average of its word
    vectors; the principal component is the first right-singular vector of the
    stacked weighted averages.  Requires at least two distinct phrases and
    fitted store frequencies.
    """
    if store.total_count == 0:
        raise EmbeddingError("SIF requires fitted word frequencies (store.total_count is 0)")
    cleaned = [tuple(p) for p in phrases if p]
    if len(cleaned) < 2:
        raise EmbeddingError(f"SIF fitting needs >= 2 phrases, got {len(cleaned)}")

    distinct = sorted(set(cleaned))
    rows = np.stack([_sif_weighted_average(p, store, a) for p in distinct])
    if len(distinct) < 2 or np.allclose(rows, rows[0], atol=1e-12):
        warnings.warn(
            "all phrase embeddings identical; SIF falls back to no component removal",
            stacklevel=2,
        )
        return SifContext(a=a, principal_component=None)

    _, _, vh = np.linalg.svd(rows, full_matrices=False)
    component = vh[0]
    # Canonical sign so fitting is reproducible across LAPACK builds.
    anchor = int(np.argmax(np.abs(component)))
    if component[anchor] < 0:
        component = -component
    return SifContext(a=a, principal_component=component / np.linalg.norm(component))


def embed_phrase_sif(tokens: Sequence[str], store: EmbeddingStore, ctx: SifContext) -> np.ndarray:
    """SIF phrase vector: weighted average minus its projection on the fitted component."""
    if not tokens:
        raise SimilarityError("cannot embed an empty phrase")
    vec = _sif_weighted_average(tokens, store, ctx.a)
    if ctx.principal_component is not None:
        u = ctx.principal_component
        vec = vec - np.dot(vec, u) * u
    return vec


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; raises :class:`SimilarityError` on zero vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise SimilarityError(f"vector length mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu < _ZERO_NORM or nv < _ZERO_NORM:
        raise SimilarityError("cosine undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))

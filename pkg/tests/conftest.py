"""Shared fixtures: small synthetic corpora and embedding stores.

Session scope keeps the expensive pieces (word2vec training, generator runs)
shared across test modules.
"""

from __future__ import annotations

import pytest

from tuplecover.embeddings import EmbeddingStore, train_embeddings
from tuplecover.synth import SynthSpec, generate_synthetic_corpus


@pytest.fixture(scope="session")
def generated40():
    """A small synthetic corpus with gold annotations and labels."""
    return generate_synthetic_corpus(7, SynthSpec(size=100))


@pytest.fixture(scope="session")
def hash_store(generated40):
    """Store with no trained vectors: every word uses the deterministic hash rule.

    Frequencies are fitted from the synthetic corpus so SIF weighting works.
    """
    sentences = [s for tok in generated40.corpus.tokenized().values() for s in tok.sentences]
    return EmbeddingStore(dim=32, vectors={}).with_frequencies(sentences)


@pytest.fixture(scope="session")
def trained_store(generated40):
    """Word vectors trained on the synthetic corpus."""
    sentences = [s for tok in generated40.corpus.tokenized().values() for s in tok.sentences]
    return train_embeddings(sentences, dim=64, window=3, epochs=3, seed=11)

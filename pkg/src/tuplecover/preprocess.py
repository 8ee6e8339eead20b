"""Turn raw test-case summaries into the token sequences the extractor consumes.

A summary is split into sentences on terminator punctuation, each sentence is
normalized to lowercase alphanumeric tokens (hyphens survive inside words, so
tool names like ``mesa-util`` stay distinguishable), and the sentences are
flattened into one sequence with a ``SEP`` marker between them.  All functions
here are pure.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import PreprocessingError

if TYPE_CHECKING:  # pragma: no cover
    from .corpus import TestCase

#: Sentence separator marker.  Brackets and uppercase cannot be produced by
#: ``normalize_tokens``, so the marker can never collide with a real token.
SEP = "[SEP]"

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.?!;])\s+")
_TOKEN = re.compile(r"[a-z0-9]+(?:-[a-z0-9]+)*")


@dataclass(frozen=True)
class TokenizedCase:
    """Tokenized view of one test case.

    ``sentences`` holds one token tuple per non-empty sentence; ``sep_sequence``
    is the flattened sequence with ``SEP`` between consecutive sentences.
    """

    sentences: tuple[tuple[str, ...], ...]
    sep_sequence: tuple[str, ...]

    @property
    def tokens(self) -> tuple[str, ...]:
        """All tokens of the case in order, without separator markers."""
        return tuple(tok for sent in self.sentences for tok in sent)


def split_sentences(text: str) -> list[str]:
    """Split ``text`` at '.', '?', '!' or ';' followed by whitespace or end.

    The terminator stays attached to its sentence.  Whitespace-only input
    yields an empty list with a warning.
    """
    stripped = text.strip()
    if not stripped:
        warnings.warn("sentence splitting on whitespace-only text", stacklevel=2)
        return []
    return [part for part in _SENTENCE_BOUNDARY.split(stripped) if part]


def normalize_tokens(sentence: str) -> list[str]:
    """Lowercase ``sentence`` and reduce it to alphanumeric tokens.

    Characters other than letters, digits and word-internal hyphens are
    treated as separators.  Applying this to already-normalized text is the
    identity.
    """
    return _TOKEN.findall(sentence.lower())


def assemble_sequence(case: "TestCase") -> TokenizedCase:
    """Tokenize a test case summary into a :class:`TokenizedCase`.

    Sentences that normalize to zero tokens are dropped; a summary with no
    surviving tokens raises :class:`PreprocessingError`.
    """
    return tokenize_text(case.summary, context=case.id)


def tokenize_text(text: str, context: str = "") -> TokenizedCase:
    """Tokenize raw text; ``context`` names the source in error messages."""
    sentences = []
    for raw in split_sentences(text):
        tokens = normalize_tokens(raw)
        if tokens:
            sentences.append(tuple(tokens))
    if not sentences:
        where = f" for {context!r}" if context else ""
        raise PreprocessingError(f"summary normalizes to zero tokens{where}: {text!r}")
    sep_sequence: list[str] = []
    for i, sent in enumerate(sentences):
        if i:
            sep_sequence.append(SEP)
        sep_sequence.extend(sent)
    return TokenizedCase(sentences=tuple(sentences), sep_sequence=tuple(sep_sequence))

"""Fine-grained redundancy detection for natural-language test cases.

The pipeline extracts five categories of test-oriented entities and four
categories of Component-anchored relations from test-case summaries, dissects
each case into atomic test tuples, and judges pairs redundant under a tuple
covering rule with per-slot similarity strategies.
"""

from .compare import (
    ComparisonConfig,
    DetectionResult,
    IndicativeLexicon,
    RedundancyVerdict,
    build_comparison_config,
    compare_behavior,
    compare_nounphrase,
    compare_prerequisite,
    covers,
    detect_redundancy,
    tuple_equivalent,
)
from .corpus import (
    CaseAnnotations,
    Corpus,
    EntityAnnotation,
    RedundancyLabel,
    RelationAnnotation,
    TestCase,
    load_annotations,
    load_corpus,
    load_labels,
    write_annotations,
    write_corpus,
    write_labels,
)
from .embeddings import (
    EmbeddingStore,
    SifContext,
    cosine,
    embed_phrase_average,
    embed_phrase_sif,
    fit_sif,
    load_word_vectors,
    save_word_vectors,
    train_embeddings,
)
from .extraction import (
    Extraction,
    ExtractionModel,
    TrainingParams,
    classify_entity,
    classify_relation,
    enumerate_spans,
    extract,
    global_context,
    gold_extractions,
    import_extractions,
    train_joint,
)
from .evaluate import (
    MetricReport,
    ablate,
    cohen_kappa,
    detection_metrics,
    extraction_metrics,
    mann_whitney_u,
    pearson,
    split_train_test,
)
from .preprocess import TokenizedCase, assemble_sequence, normalize_tokens, split_sentences
from .synth import GeneratedCorpus, SynthSpec, generate_synthetic_corpus
from .tuples import TestTuple, dissect, dissect_all

__version__ = "0.1.0"

__all__ = [
    "CaseAnnotations",
    "ComparisonConfig",
    "Corpus",
    "DetectionResult",
    "EmbeddingStore",
    "EntityAnnotation",
    "Extraction",
    "ExtractionModel",
    "GeneratedCorpus",
    "IndicativeLexicon",
    "MetricReport",
    "RedundancyLabel",
    "RedundancyVerdict",
    "RelationAnnotation",
    "SifContext",
    "SynthSpec",
    "TestCase",
    "TestTuple",
    "TokenizedCase",
    "TrainingParams",
    "ablate",
    "assemble_sequence",
    "build_comparison_config",
    "classify_entity",
    "classify_relation",
    "cohen_kappa",
    "compare_behavior",
    "compare_nounphrase",
    "compare_prerequisite",
    "cosine",
    "covers",
    "detect_redundancy",
    "detection_metrics",
    "dissect",
    "dissect_all",
    "embed_phrase_average",
    "embed_phrase_sif",
    "enumerate_spans",
    "extract",
    "extraction_metrics",
    "fit_sif",
    "generate_synthetic_corpus",
    "global_context",
    "gold_extractions",
    "import_extractions",
    "load_annotations",
    "load_corpus",
    "load_labels",
    "load_word_vectors",
    "mann_whitney_u",
    "normalize_tokens",
    "pearson",
    "save_word_vectors",
    "split_sentences",
    "split_train_test",
    "train_embeddings",
    "train_joint",
    "tuple_equivalent",
    "write_annotations",
    "write_corpus",
    "write_labels",
]

"""Subword segmentation toolkit grounded in a pre-trained word embedding space.

The package covers a full pipeline: corpus ingestion and vocabulary
construction, windowed co-occurrence counting, solving subword vectors
inside an existing skip-gram space, similarity-driven segmentation with
alternating refinement, distillation into a smoothed bigram segmenter with
beam search, and intrinsic evaluation (boundary P/R/F1, Renyi efficiency).
"""

from subseg.errors import (
    ArgumentError,
    CorpusIOError,
    CoverageError,
    NumericalError,
    ParseError,
    ValidationError,
)
from subseg.textio import (
    SegmentedLexicon,
    Vocabulary,
    bpe_segment,
    bpe_train,
    build_vocabulary,
    load_lexicon,
    load_merges,
    load_vocabulary,
    read_corpus,
    save_lexicon,
    save_merges,
    save_vocabulary,
)
from subseg.cooccur import (
    CooccurrenceCounts,
    count_cooccurrences,
    load_counts,
    save_counts,
)
from subseg.subspace import (
    EmbeddingTable,
    SegmentationMatrix,
    SubwordVocabulary,
    align_embeddings,
    build_segmentation_matrix,
    compute_subword_embeddings,
    default_ridge,
    load_embeddings,
    right_inverse_solve,
    save_embeddings,
    smoothed_log_target,
)
from subseg.lexseg import (
    IterationStats,
    RefinementState,
    ScoredSegmentation,
    cosine,
    embedding_segment,
    refine,
    segment_corpus,
)
from subseg.bigram import (
    START_SYMBOL,
    BigramModel,
    beam_segment,
    distill,
    exact_segment,
    iter_word_groups,
    load_model,
    save_model,
)
from subseg.metrics import (
    BoundaryReport,
    RenyiReport,
    boundary_prf,
    renyi_efficiency,
    segmentation_boundaries,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "BigramModel",
    "BoundaryReport",
    "CooccurrenceCounts",
    "CorpusIOError",
    "CoverageError",
    "EmbeddingTable",
    "IterationStats",
    "NumericalError",
    "ParseError",
    "RefinementState",
    "RenyiReport",
    "ScoredSegmentation",
    "SegmentationMatrix",
    "SegmentedLexicon",
    "START_SYMBOL",
    "SubwordVocabulary",
    "ValidationError",
    "Vocabulary",
    "align_embeddings",
    "beam_segment",
    "boundary_prf",
    "bpe_segment",
    "bpe_train",
    "build_segmentation_matrix",
    "build_vocabulary",
    "compute_subword_embeddings",
    "cosine",
    "count_cooccurrences",
    "default_ridge",
    "distill",
    "embedding_segment",
    "exact_segment",
    "iter_word_groups",
    "load_counts",
    "load_embeddings",
    "load_lexicon",
    "load_merges",
    "load_model",
    "load_vocabulary",
    "read_corpus",
    "refine",
    "renyi_efficiency",
    "right_inverse_solve",
    "save_counts",
    "save_embeddings",
    "save_lexicon",
    "save_merges",
    "save_model",
    "save_vocabulary",
    "segment_corpus",
    "segmentation_boundaries",
    "smoothed_log_target",
]

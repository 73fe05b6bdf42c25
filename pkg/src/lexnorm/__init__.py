"""Boundary-aware lexical normalization toolkit for unsegmented text.

The package covers everything around the neural model: corpus loading and
validation, the detection (tags + lengths) and generative (plain/struct/
span) target encodings with robust decoding of model output, span-level
scoring, difficulty indicators, and an end-to-end pipeline that talks to
models through a small wire protocol.
"""

from .corpus import (
    CorpusError,
    Dataset,
    GoldInstance,
    NormInstance,
    SentenceAnnotation,
    Token,
    apply_instances,
    dataset_stats,
    load_dataset,
    load_lexicon,
    load_split,
    sample_subset,
    save_split,
)
from .tagging import (
    DetectionEncoding,
    DetectionResult,
    MaskedInput,
    TaggingError,
    assemble_predictions,
    build_masked_input,
    decode_detection,
    encode_detection,
)
from .genformat import (
    GenFormatError,
    ParseOutcome,
    build_prompt,
    parse_span,
    parse_struct,
    render_target,
)
from .metrics import (
    PRF,
    ChrfScore,
    MetricsError,
    SentenceAccuracy,
    chrf,
    corpus_chrf,
    f_beta,
    score_detection,
    score_normalization,
    sentence_accuracy,
    tag_metrics,
    tag_metrics_corpus,
)
from .analysis import (
    AnalysisError,
    breakdown,
    norm_in_lex,
    pearson,
    surf_in_train,
    surf_outside_train,
)
from .backends import (
    Backend,
    BackendError,
    BridgeBackend,
    DictModel,
    GoldEchoBackend,
    dict_normalize,
    dict_train,
    leave_as_is,
)
from .pipeline import RunConfig, bench, run, run_detect_infill, run_generative

__version__ = "0.1.0"

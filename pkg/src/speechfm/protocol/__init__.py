from .sequence import (
    MAX_PROMPT_TOKENS,
    DecodedSequence,
    FormattedSample,
    Segment,
    Window,
    decode_sequence,
    encode_sequence,
    prompt_tokens,
    sample_prompt,
    segment_utterances,
    split_segments,
    task_prefix,
)
from .text import EXCLUDED, NormalizedText, normalize_text
from .vocab import (
    DEFAULT_CHARSET,
    DEFAULT_LANGUAGES,
    DEFAULT_ST_TARGETS,
    N_TIMESTAMPS,
    TIMESTAMP_STEP_S,
    Vocabulary,
    VocabularyError,
    build_vocabulary,
)

__all__ = [
    "DEFAULT_CHARSET",
    "DEFAULT_LANGUAGES",
    "DEFAULT_ST_TARGETS",
    "EXCLUDED",
    "MAX_PROMPT_TOKENS",
    "N_TIMESTAMPS",
    "TIMESTAMP_STEP_S",
    "DecodedSequence",
    "FormattedSample",
    "NormalizedText",
    "Segment",
    "Vocabulary",
    "VocabularyError",
    "Window",
    "build_vocabulary",
    "decode_sequence",
    "encode_sequence",
    "normalize_text",
    "prompt_tokens",
    "sample_prompt",
    "segment_utterances",
    "split_segments",
    "task_prefix",
]

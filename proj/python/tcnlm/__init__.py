"""Topic-compositional neural language model (C++ core)."""

from ._tcnlm import (
    coherence,
    compare_moe,
    compose_weight,
    evaluate,
    generate,
    parameter_count,
    preprocess,
    synth_corpus,
    tokenize,
    topics,
    train,
)

__all__ = [
    "coherence",
    "compare_moe",
    "compose_weight",
    "evaluate",
    "generate",
    "parameter_count",
    "preprocess",
    "synth_corpus",
    "tokenize",
    "topics",
    "train",
]

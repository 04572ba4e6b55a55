"""Synthetic labeled corpus with ground-truth masks, plus external loading."""

from .generate import (
    CorpusConfig,
    CorpusSample,
    gen_authentic,
    gen_smooth_fake,
    gen_spliced_fake,
    make_corpus,
)
from .load import load_external, write_corpus

__all__ = [
    "CorpusConfig",
    "CorpusSample",
    "gen_authentic",
    "gen_spliced_fake",
    "gen_smooth_fake",
    "make_corpus",
    "write_corpus",
    "load_external",
]

"""Synthetic glyph corpus, train/test splitting and the evaluation harness."""

from .evaluation import (EvaluationReport, SweepTable, evaluate, k_sweep, train, vectorize,
                         worker_count)
from .generate import (CorpusSpec, Sample, Style, generate_corpus, make_styles, read_manifest,
                       rescale, split, write_corpus)
from .templates import BASE_SIZE, GlyphTemplate, builtin_templates

__all__ = [
    "BASE_SIZE", "CorpusSpec", "EvaluationReport", "GlyphTemplate", "Sample", "Style",
    "SweepTable", "builtin_templates", "evaluate", "generate_corpus", "k_sweep", "make_styles",
    "read_manifest", "rescale", "split", "train", "vectorize", "worker_count", "write_corpus",
]

from .manifest import (EVAL, TRAIN, UNASSIGNED, UNKNOWN_PUBLICATION,
                       CorpusStats, GroundTruthPair, Manifest, StatsRow,
                       ValidationReport, corpus_stats, export_trainer_layout,
                       scan_corpus, split, validate_corpus)
from .synth import (Glyph, GlyphSet, SpacingParams, SynthLine,
                    load_glyph_set, save_glyph_set, synthesize_line,
                    write_synth_corpus)

__all__ = [
    "EVAL", "TRAIN", "UNASSIGNED", "UNKNOWN_PUBLICATION", "CorpusStats",
    "GroundTruthPair", "Manifest", "StatsRow", "ValidationReport",
    "corpus_stats", "export_trainer_layout", "scan_corpus", "split",
    "validate_corpus", "Glyph", "GlyphSet", "SpacingParams", "SynthLine",
    "load_glyph_set", "save_glyph_set", "synthesize_line",
    "write_synth_corpus",
]

import numpy as np
import pytest

from kurdocr.corpus import Glyph, GlyphSet, SpacingParams, write_synth_corpus

# a small pool of real Sorani words to compose synthetic lines from
SAMPLE_WORDS = ["سڵاو", "کورد", "ژمارە", "پەرتووک", "باش", "گوڵ", "خوێندن",
                "وەرزش", "چیا", "ڕۆژ", "نووسین", "دەنگ"]


def block_glyph(index: int) -> Glyph:
    """Distinct solid-ish glyph: full-height block with an index-keyed notch."""
    height = 8 + index % 3
    width = 4 + index % 4
    bits = np.ones((height, width), dtype=np.uint8)
    notch_row = index % (height - 2) + 1
    bits[notch_row, 1:width - 1] = 0
    return Glyph(bits=bits, baseline=height)


def make_glyph_set(chars: str, dpi: float = 300.0) -> GlyphSet:
    glyphs = {}
    for i, ch in enumerate(sorted(set(chars) - {" "})):
        glyphs[ch] = [block_glyph(i)]
    return GlyphSet(glyphs=glyphs, dpi=dpi)


def sample_lines(count: int, words_per_line: int = 3) -> list[str]:
    lines = []
    for i in range(count):
        words = [SAMPLE_WORDS[(i + j) % len(SAMPLE_WORDS)] for j in range(words_per_line)]
        lines.append(" ".join(words))
    return lines


@pytest.fixture
def glyph_set():
    return make_glyph_set("".join(SAMPLE_WORDS))


@pytest.fixture
def synth_corpus_dir(tmp_path, glyph_set):
    """A 12-line synthetic corpus on disk, scanned-ready."""
    texts = sample_lines(12)
    root = tmp_path / "corpus"
    write_synth_corpus(texts, glyph_set, root, SpacingParams(gap_mean=2.0),
                       seed=7, publication="synthetic", year=1939)
    return root

"""Synthetic line rendering from a collection of character glyph images.

Glyphs are placed right to left with randomized inter-glyph gaps and
baseline jitter, all driven by one seeded generator so the same inputs
always produce the same image.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import BadParameter, EmptyInput, MissingGlyph
from ..raster import BinaryImage, load_binary, save_png
from ..textnorm import NormalizationPolicy, normalize


@dataclass
class Glyph:
    bits: np.ndarray  # HxW uint8 of {0,1}
    baseline: int  # rows of the glyph above the baseline

    def __post_init__(self):
        if self.bits.sum() == 0:
            raise BadParameter("glyph has no ink")
        if not 0 <= self.baseline <= self.bits.shape[0]:
            raise BadParameter(f"baseline {self.baseline} outside glyph of height {self.bits.shape[0]}")


@dataclass
class GlyphSet:
    glyphs: dict[str, list[Glyph]]  # char -> variants
    dpi: float = 300.0

    def variants(self, ch: str) -> list[Glyph]:
        found = self.glyphs.get(ch)
        if not found:
            raise MissingGlyph(f"U+{ord(ch):04X}")
        return found


@dataclass
class SpacingParams:
    gap_mean: float = 2.0
    gap_sd: float = 0.0
    jitter_sd: float = 0.0
    space_width: int | None = None  # default 3 * gap_mean, at least 2

    def resolved_space_width(self) -> int:
        if self.space_width is not None:
            return max(1, self.space_width)
        return max(2, int(round(3 * self.gap_mean)))


@dataclass
class SynthLine:
    image: BinaryImage
    transcript: str


def synthesize_line(text: str, glyphs: GlyphSet,
                    spacing: SpacingParams | None = None,
                    seed: int = 0,
                    policy: NormalizationPolicy | None = None) -> SynthLine:
    """Render `text` right to left from the glyph collection.

    Glyph lookup happens on the normalized text; the returned transcript
    is the text as given.  Deterministic for a fixed (text, seed).
    """
    spacing = spacing or SpacingParams()
    rendered = normalize(text, policy)
    if not rendered:
        raise EmptyInput("cannot synthesize an empty line")
    rng = np.random.default_rng(seed)

    # choose glyphs and offsets first, then size the canvas to fit
    placements = []  # (glyph | None for space, advance_before, jitter)
    for i, ch in enumerate(rendered):
        if ch == " ":
            placements.append((None, spacing.resolved_space_width(), 0))
            continue
        variants = glyphs.variants(ch)
        glyph = variants[int(rng.integers(len(variants)))] if len(variants) > 1 else variants[0]
        gap = 0
        if placements and placements[-1][0] is not None:
            gap = max(0, int(round(rng.normal(spacing.gap_mean, spacing.gap_sd))))
        jitter = int(round(rng.normal(0.0, spacing.jitter_sd))) if spacing.jitter_sd > 0 else 0
        placements.append((glyph, gap, jitter))

    inked = [(g, gap, j) for g, gap, j in placements if g is not None]
    if not inked:
        raise EmptyInput("line contains no renderable glyphs")
    baseline_row = max(g.baseline - j for g, _, j in inked)
    height = baseline_row + max(g.bits.shape[0] - g.baseline + j for g, _, j in inked)
    width = sum(gap + (g.bits.shape[1] if g is not None else 0)
                for g, gap, _ in placements)

    canvas = np.zeros((height, width), dtype=np.uint8)
    x = width  # RTL: first glyph is rightmost
    for glyph, advance, jitter in placements:
        x -= advance
        if glyph is None:
            continue
        gw = glyph.bits.shape[1]
        gh = glyph.bits.shape[0]
        x -= gw
        top = baseline_row - glyph.baseline + jitter
        canvas[top:top + gh, x:x + gw] |= glyph.bits
    image = BinaryImage(canvas, glyphs.dpi)
    return SynthLine(image=image, transcript=text)


# -------------------------------------------------- glyph set on disk

def save_glyph_set(glyphs: GlyphSet, root: str | Path) -> None:
    root = Path(root)
    baselines: dict[str, int] = {}
    for ch, variants in glyphs.glyphs.items():
        sub = root / f"U+{ord(ch):04X}"
        sub.mkdir(parents=True, exist_ok=True)
        for i, glyph in enumerate(variants):
            name = f"{i:02d}.png"
            save_png(BinaryImage(glyph.bits, glyphs.dpi), sub / name)
            baselines[f"{sub.name}/{name}"] = glyph.baseline
    (root / "baseline.json").write_text(json.dumps(baselines, indent=2),
                                        encoding="utf-8")


def load_glyph_set(root: str | Path) -> GlyphSet:
    root = Path(root)
    baseline_path = root / "baseline.json"
    baselines: dict[str, int] = {}
    if baseline_path.is_file():
        baselines = json.loads(baseline_path.read_text(encoding="utf-8"))
    glyphs: dict[str, list[Glyph]] = {}
    dpi = None
    for sub in sorted(root.glob("U+*")):
        if not sub.is_dir():
            continue
        ch = chr(int(sub.name[2:], 16))
        variants = []
        for png in sorted(sub.glob("*.png")):
            binary = load_binary(png)
            if dpi is None:
                dpi = binary.dpi
            default_baseline = binary.height
            baseline = baselines.get(f"{sub.name}/{png.name}", default_baseline)
            variants.append(Glyph(binary.bits, int(baseline)))
        if variants:
            glyphs[ch] = variants
    if not glyphs:
        raise EmptyInput(f"no glyphs found under {root}")
    return GlyphSet(glyphs=glyphs, dpi=dpi or 300.0)


def write_synth_corpus(texts: list[str], glyphs: GlyphSet, out_dir: str | Path,
                       spacing: SpacingParams | None = None, seed: int = 0,
                       publication: str | None = None,
                       year: int | None = None,
                       id_prefix: str = "synth") -> list[Path]:
    """Render each text as a ground-truth pair under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, text in enumerate(texts):
        line = synthesize_line(text, glyphs, spacing, seed=seed + i)
        stem = f"{id_prefix}_{i:04d}"
        image_path = out_dir / f"{stem}.png"
        save_png(line.image, image_path)
        (out_dir / f"{stem}.gt.txt").write_text(line.transcript, encoding="utf-8")
        written.append(image_path)
    if publication is not None:
        meta = {"publication": publication}
        if year is not None:
            meta["year"] = year
        (out_dir / "meta.json").write_text(json.dumps(meta, ensure_ascii=False),
                                           encoding="utf-8")
    return written

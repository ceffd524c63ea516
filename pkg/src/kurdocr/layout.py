"""Page-to-line segmentation via horizontal projection profiles.

Pages are assumed deskewed.  Lines are found as runs of rows whose
smoothed ink count clears a noise floor, short gaps between runs are
merged, and each kept run is tightened horizontally to the columns that
actually contain ink.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParameter, OutOfBounds
from .raster import BinaryImage


@dataclass(frozen=True)
class LineSegment:
    index: int  # reading order, 0 = topmost
    box: tuple[int, int, int, int]  # (left, top, width, height)
    row_ink: int

    def to_json(self) -> dict:
        return {"index": self.index, "box": list(self.box), "row_ink": self.row_ink}


@dataclass
class SegmentationParams:
    noise_floor: int = 2
    min_gap: int = 4
    min_height: int = 8
    smooth_window: int = 3

    def __post_init__(self):
        if min(self.noise_floor, self.min_gap, self.min_height, self.smooth_window) < 0:
            raise BadParameter("segmentation parameters must be >= 0")
        if self.smooth_window % 2 == 0:
            raise BadParameter(f"smooth_window must be odd, got {self.smooth_window}")

    def to_json(self) -> dict:
        return {"noise_floor": self.noise_floor, "min_gap": self.min_gap,
                "min_height": self.min_height, "smooth_window": self.smooth_window}


def row_profile(img: BinaryImage) -> np.ndarray:
    """Per-row foreground pixel counts, length = image height."""
    return img.bits.sum(axis=1, dtype=np.int64)


def _runs_of_true(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal [start, end) runs where mask is True."""
    runs = []
    start = None
    for i, v in enumerate(mask):
        if v and start is None:
            start = i
        elif not v and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


def segment_lines(img: BinaryImage,
                  params: SegmentationParams | None = None) -> list[LineSegment]:
    """Find text lines top to bottom; empty list for blank pages."""
    p = params or SegmentationParams()
    profile = row_profile(img)
    if p.smooth_window > 1:
        kernel = np.ones(p.smooth_window) / p.smooth_window
        smoothed = np.convolve(profile.astype(np.float64), kernel, mode="same")
    else:
        smoothed = profile.astype(np.float64)
    text_rows = smoothed > p.noise_floor
    runs = _runs_of_true(text_rows)
    if not runs:
        return []

    # merge runs separated by gaps shorter than min_gap
    merged = [runs[0]]
    for start, end in runs[1:]:
        prev_start, prev_end = merged[-1]
        if start - prev_end < p.min_gap:
            merged[-1] = (prev_start, end)
        else:
            merged.append((start, end))

    segments = []
    for start, end in merged:
        if end - start < p.min_height:
            continue
        band = img.bits[start:end]
        ink = int(band.sum())
        if ink == 0:
            continue
        cols = np.nonzero(band.any(axis=0))[0]
        left, right = int(cols[0]), int(cols[-1]) + 1
        segments.append(LineSegment(
            index=len(segments),
            box=(left, start, right - left, end - start),
            row_ink=ink,
        ))
    return segments


def crop(img: BinaryImage, box: tuple[int, int, int, int]) -> BinaryImage:
    """Exact sub-image copy; dpi and meta carried over."""
    left, top, width, height = box
    if width < 1 or height < 1:
        raise OutOfBounds(f"degenerate box {box}")
    if left < 0 or top < 0 or left + width > img.width or top + height > img.height:
        raise OutOfBounds(f"box {box} exceeds {img.width}x{img.height} image")
    return BinaryImage(img.bits[top:top + height, left:left + width].copy(),
                       img.dpi, dict(img.meta))

"""Image value types: gray/RGBA rasters and ink/background bit grids.

Convention throughout the package: after polarity normalization images
are dark ink on a light background, and in a :class:`BinaryImage` bit 1
means foreground ink, bit 0 means background paper.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BadParameter

DEFAULT_DPI = 300.0


def _check_2d_uint8(a: np.ndarray, name: str, channels: int) -> None:
    expected = 2 if channels == 1 else 3
    if a.ndim != expected or (channels > 1 and a.shape[2] != channels):
        raise BadParameter(f"{name}: expected {'HxW' if channels == 1 else f'HxWx{channels}'} array, got shape {a.shape}")
    if a.dtype != np.uint8:
        raise BadParameter(f"{name}: expected uint8 samples, got {a.dtype}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise BadParameter(f"{name}: width and height must be >= 1, got {a.shape[1]}x{a.shape[0]}")


@dataclass
class RasterImage:
    """Gray (HxW) or RGBA (HxWx4) uint8 pixel grid with DPI metadata.

    ``meta`` carries provenance (source path, attached ground truth for
    mock engines); it is propagated, never interpreted, by image ops.
    """

    pixels: np.ndarray
    dpi: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pixels.ndim == 3:
            _check_2d_uint8(self.pixels, "RasterImage", 4)
        else:
            _check_2d_uint8(self.pixels, "RasterImage", 1)
        if self.dpi is not None and self.dpi <= 0:
            raise BadParameter(f"dpi must be positive, got {self.dpi}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> str:
        return "rgba8" if self.pixels.ndim == 3 else "gray8"

    @property
    def dpi_or_default(self) -> float:
        return self.dpi if self.dpi is not None else DEFAULT_DPI

    def with_pixels(self, pixels: np.ndarray, dpi: float | None = None) -> "RasterImage":
        return RasterImage(pixels, self.dpi if dpi is None else dpi, dict(self.meta))

    def same_content(self, other: "RasterImage") -> bool:
        return (self.pixels.shape == other.pixels.shape
                and bool(np.array_equal(self.pixels, other.pixels)))


@dataclass
class BinaryImage:
    """HxW grid of {0 = background/paper, 1 = foreground/ink} bits."""

    bits: np.ndarray
    dpi: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_2d_uint8(self.bits, "BinaryImage", 1)
        if not bool(np.all(self.bits <= 1)):
            raise BadParameter("BinaryImage samples must be 0 or 1")
        if self.dpi is not None and self.dpi <= 0:
            raise BadParameter(f"dpi must be positive, got {self.dpi}")

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def dpi_or_default(self) -> float:
        return self.dpi if self.dpi is not None else DEFAULT_DPI

    @property
    def ink_count(self) -> int:
        return int(self.bits.sum())

    def with_bits(self, bits: np.ndarray) -> "BinaryImage":
        return BinaryImage(bits, self.dpi, dict(self.meta))

    def same_content(self, other: "BinaryImage") -> bool:
        return (self.bits.shape == other.bits.shape
                and bool(np.array_equal(self.bits, other.bits)))

    def to_gray(self) -> RasterImage:
        """Foreground ink renders black (0), background white (255)."""
        gray = np.where(self.bits > 0, 0, 255).astype(np.uint8)
        return RasterImage(gray, self.dpi, dict(self.meta))


def binary_from_bool(mask: np.ndarray, dpi: float | None = None,
                     meta: dict | None = None) -> BinaryImage:
    return BinaryImage(mask.astype(np.uint8), dpi, dict(meta or {}))

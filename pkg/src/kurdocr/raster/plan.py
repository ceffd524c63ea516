"""Declarative preprocessing plan and its executor."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any

from ..errors import BadParameter
from .io import DEFAULT_MAX_IMAGE_MB
from .model import BinaryImage, RasterImage
from . import ops


@dataclass
class Binarizer:
    kind: str = "otsu"  # "otsu" or "sauvola"
    window: int = 31
    k: float = 0.5
    r: float = 128.0

    def __post_init__(self):
        if self.kind not in ("otsu", "sauvola"):
            raise BadParameter(f"unknown binarizer {self.kind!r}")
        if self.kind == "sauvola":
            if self.window % 2 == 0 or self.window < 3:
                raise BadParameter(f"sauvola window must be odd and >= 3, got {self.window}")
            if not 0 < self.k <= 1:
                raise BadParameter(f"sauvola k must be in (0, 1], got {self.k}")
            if self.r <= 0:
                raise BadParameter(f"sauvola R must be positive, got {self.r}")


@dataclass
class PreprocessPlan:
    """Everything applied to a page image before it reaches an engine."""

    flatten_alpha: bool = True
    force_polarity: bool = True
    target_dpi: float | None = None
    binarizer: Binarizer = field(default_factory=Binarizer)
    despeckle_max_area: int = 4  # pixels^2 at 300 dpi, scaled by (dpi/300)^2
    morphology: tuple[str, int] | None = None  # (op, kernel_radius)
    deskew: bool = True
    deskew_half_range: float = 10.0
    border: str = "trim_and_pad"  # or "none"
    border_pad: int = 10
    max_image_mb: float = DEFAULT_MAX_IMAGE_MB

    def __post_init__(self):
        if self.max_image_mb <= 0:
            raise BadParameter(f"max_image_mb must be positive, got {self.max_image_mb}")
        if self.border not in ("trim_and_pad", "none"):
            raise BadParameter(f"unknown border mode {self.border!r}")
        if self.despeckle_max_area < 0:
            raise BadParameter("despeckle_max_area must be >= 0")
        if self.morphology is not None:
            op, radius = self.morphology
            if op not in ("dilate", "erode") or radius < 1:
                raise BadParameter(f"bad morphology step {self.morphology!r}")

    def to_json(self) -> dict[str, Any]:
        data = asdict(self)
        data["morphology"] = list(self.morphology) if self.morphology else None
        return data

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "PreprocessPlan":
        data = dict(data)
        if isinstance(data.get("binarizer"), dict):
            data["binarizer"] = Binarizer(**data["binarizer"])
        if data.get("morphology"):
            op, radius = data["morphology"]
            data["morphology"] = (op, int(radius))
        return cls(**data)


def apply_plan(img: RasterImage, plan: PreprocessPlan) -> tuple[BinaryImage, dict]:
    """Run the full preprocessing chain; returns the bits plus a trace
    of the data-dependent choices (threshold, deskew angle, flags)."""
    trace: dict[str, Any] = {}
    if plan.flatten_alpha:
        img = ops.flatten_alpha(img)
    elif img.channels != "gray8":
        raise BadParameter("plan disables flatten_alpha but the image is not gray")
    if plan.force_polarity:
        img = ops.ensure_dark_on_light(img)
    if plan.target_dpi is not None and img.dpi is not None:
        img = ops.rescale_to_dpi(img, plan.target_dpi)

    if plan.binarizer.kind == "otsu":
        threshold, binary = ops.otsu_binarize(img)
        trace["otsu_threshold"] = threshold
    else:
        b = plan.binarizer
        binary = ops.sauvola_binarize(img, b.window, b.k, b.r)

    if plan.despeckle_max_area > 0:
        scale = (binary.dpi_or_default / 300.0) ** 2
        binary = ops.despeckle(binary, int(round(plan.despeckle_max_area * scale)))
    if plan.morphology is not None:
        op, radius = plan.morphology
        binary = ops.morphology(binary, op, radius)
    if plan.deskew:
        result = ops.deskew(binary, half_range=plan.deskew_half_range)
        trace["deskew_angle"] = result.angle
        trace["deskew_empty"] = result.empty
        binary = result.image
    if plan.border == "trim_and_pad":
        trimmed = ops.trim_and_pad(binary, plan.border_pad)
        trace["trim_empty"] = trimmed.empty
        binary = trimmed.image
    return binary, trace

"""PNG/TIFF reading and PNG writing with DPI metadata.

Decoded size is capped before pixel data is materialized; oversized
images are rejected the way the external trainer's --max_image_MB flag
rejects them.
"""

from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import BadParameter, ImageTooLarge, UndecodableImage
from .model import BinaryImage, RasterImage

DEFAULT_MAX_IMAGE_MB = 256.0

_CHANNEL_COUNT = {"1": 1, "L": 1, "LA": 2, "P": 1, "RGB": 3, "RGBA": 4, "I;16": 2, "I": 4}


def _decoded_bytes(im: Image.Image) -> int:
    return im.width * im.height * _CHANNEL_COUNT.get(im.mode, 4)


def _read_dpi(im: Image.Image) -> float | None:
    dpi = im.info.get("dpi")
    if not dpi:
        return None
    x = float(dpi[0]) if isinstance(dpi, (tuple, list)) else float(dpi)
    if x <= 0:
        return None
    return x


def load_raster(source: str | Path | bytes, dpi_override: float | None = None,
                max_image_mb: float = DEFAULT_MAX_IMAGE_MB) -> RasterImage:
    """Read a PNG or single-page TIFF as gray8 or rgba8.

    Paletted and RGB inputs are converted to the nearest supported
    channel layout (RGB -> gray via luma is NOT done here; RGB becomes
    RGBA so flatten_alpha owns the single gray conversion path).
    """
    if max_image_mb <= 0:
        raise BadParameter(f"max_image_mb must be positive, got {max_image_mb}")
    meta: dict = {}
    try:
        if isinstance(source, bytes):
            im = Image.open(io.BytesIO(source))
        else:
            meta["source_path"] = str(source)
            im = Image.open(source)
        im.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise UndecodableImage(f"cannot decode image: {exc}") from exc

    if _decoded_bytes(im) > max_image_mb * 1024 * 1024:
        size = _decoded_bytes(im) / (1024 * 1024)
        raise ImageTooLarge(
            f"decoded size {size:.1f} MB exceeds cap of {max_image_mb:g} MB")

    dpi = dpi_override if dpi_override is not None else _read_dpi(im)
    if im.mode in ("RGBA", "LA", "PA"):
        arr = np.asarray(im.convert("RGBA"), dtype=np.uint8)
    elif im.mode in ("RGB", "P"):
        arr = np.asarray(im.convert("RGBA"), dtype=np.uint8)
    else:
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    return RasterImage(arr, dpi, meta)


def load_binary(source: str | Path | bytes, dpi_override: float | None = None,
                max_image_mb: float = DEFAULT_MAX_IMAGE_MB) -> BinaryImage:
    """Read an already-binarized image: anything darker than mid-gray is ink."""
    raster = load_raster(source, dpi_override, max_image_mb)
    if raster.channels != "gray8":
        from .ops import flatten_alpha
        raster = flatten_alpha(raster)
    bits = (raster.pixels < 128).astype(np.uint8)
    return BinaryImage(bits, raster.dpi, dict(raster.meta))


def save_png(img: RasterImage | BinaryImage, path: str | Path) -> None:
    if isinstance(img, BinaryImage):
        arr = np.where(img.bits > 0, 0, 255).astype(np.uint8)
        mode = "L"
    else:
        arr = img.pixels
        mode = "RGBA" if img.channels == "rgba8" else "L"
    pil = Image.fromarray(arr, mode=mode)
    kwargs = {}
    if img.dpi is not None:
        kwargs["dpi"] = (img.dpi, img.dpi)
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    pil.save(path, format="PNG", **kwargs)


def encode_png(img: RasterImage | BinaryImage) -> bytes:
    if isinstance(img, BinaryImage):
        arr = np.where(img.bits > 0, 0, 255).astype(np.uint8)
        mode = "L"
    else:
        arr = img.pixels
        mode = "RGBA" if img.channels == "rgba8" else "L"
    buf = io.BytesIO()
    kwargs = {"dpi": (img.dpi, img.dpi)} if img.dpi is not None else {}
    Image.fromarray(arr, mode=mode).save(buf, format="PNG", **kwargs)
    return buf.getvalue()

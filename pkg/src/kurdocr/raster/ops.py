"""Preprocessing operations on raster and binary images.

All functions are pure: they never mutate their input and always carry
the dpi metadata through to the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from ..errors import BadParameter, OutOfBounds, UnknownDpi
from .model import BinaryImage, RasterImage

# Rec. 601 luma weights
_LUMA = (0.299, 0.587, 0.114)


def flatten_alpha(img: RasterImage) -> RasterImage:
    """Composite an RGBA image over opaque white and convert to gray.

    Gray input is returned unchanged.
    """
    if img.channels == "gray8":
        return img
    px = img.pixels.astype(np.float64)
    alpha = px[:, :, 3] / 255.0
    # composite each channel over white, then take luma; both are linear
    # so the order does not matter
    luma = _LUMA[0] * px[:, :, 0] + _LUMA[1] * px[:, :, 1] + _LUMA[2] * px[:, :, 2]
    gray = alpha * luma + (1.0 - alpha) * 255.0
    out = np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8)
    return RasterImage(out, img.dpi, dict(img.meta))


def ensure_dark_on_light(img: RasterImage) -> RasterImage:
    """Invert a gray image when the majority of it is dark.

    Mean gray below 127.5 means the background is dark, so the image is
    inverted; otherwise it is returned unchanged.  Applying this twice
    equals applying it once.
    """
    if img.channels != "gray8":
        raise BadParameter("ensure_dark_on_light expects a gray8 image")
    if float(img.pixels.mean()) < 127.5:
        return RasterImage((255 - img.pixels).astype(np.uint8), img.dpi, dict(img.meta))
    return img


def rescale_to_dpi(img: RasterImage, target: float,
                   source_dpi: float | None = None) -> RasterImage:
    """Bilinear resample so the image is `target` dots per inch."""
    if target <= 0:
        raise BadParameter(f"target dpi must be positive, got {target}")
    source = source_dpi if source_dpi is not None else img.dpi
    if source is None:
        raise UnknownDpi("image has no dpi metadata and no override was given")
    if source <= 0:
        raise BadParameter(f"source dpi must be positive, got {source}")
    factor = target / source
    if abs(factor - 1.0) < 1e-9:
        return RasterImage(img.pixels.copy(), target, dict(img.meta))
    new_w = max(1, int(math.floor(img.width * factor + 0.5)))
    new_h = max(1, int(math.floor(img.height * factor + 0.5)))
    mode = "RGBA" if img.channels == "rgba8" else "L"
    resized = Image.fromarray(img.pixels, mode=mode).resize((new_w, new_h), Image.BILINEAR)
    return RasterImage(np.asarray(resized, dtype=np.uint8), target, dict(img.meta))


def otsu_binarize(img: RasterImage) -> tuple[int, BinaryImage]:
    """Global threshold maximizing between-class variance.

    Returns the smallest maximizing threshold t* and the bit grid with
    1 where sample <= t*.  The argmax is computed in exact integer
    arithmetic, so it cannot drift from a brute-force scan.  A constant
    image yields (that value, all background).
    """
    if img.channels != "gray8":
        raise BadParameter("otsu_binarize expects a gray8 image")
    hist = np.bincount(img.pixels.ravel(), minlength=256)
    nonzero = np.nonzero(hist)[0]
    if len(nonzero) == 1:
        value = int(nonzero[0])
        bits = np.zeros_like(img.pixels)
        return value, BinaryImage(bits, img.dpi, dict(img.meta))

    total = int(hist.sum())
    total_sum = int((hist * np.arange(256, dtype=np.int64)).sum())
    # between-class variance at t is (s0*n1 - s1*n0)^2 / (n0*n1) up to a
    # constant factor; compare candidates by cross-multiplication
    best_t, best_num, best_den = 0, 0, 1
    n0 = 0
    s0 = 0
    for t in range(256):
        n0 += int(hist[t])
        s0 += t * int(hist[t])
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        a = s0 * n1 - (total_sum - s0) * n0
        num = a * a
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    bits = (img.pixels <= best_t).astype(np.uint8)
    return best_t, BinaryImage(bits, img.dpi, dict(img.meta))


def _window_sums(arr: np.ndarray, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel sum and cell count over a square window clipped to bounds."""
    h, w = arr.shape
    integral = np.zeros((h + 1, w + 1), dtype=np.int64)
    integral[1:, 1:] = np.cumsum(np.cumsum(arr.astype(np.int64), axis=0), axis=1)
    ys = np.arange(h)
    xs = np.arange(w)
    y0 = np.maximum(ys - radius, 0)
    y1 = np.minimum(ys + radius + 1, h)
    x0 = np.maximum(xs - radius, 0)
    x1 = np.minimum(xs + radius + 1, w)
    sums = (integral[np.ix_(y1, x1)] - integral[np.ix_(y0, x1)]
            - integral[np.ix_(y1, x0)] + integral[np.ix_(y0, x0)])
    counts = np.outer(y1 - y0, x1 - x0)
    return sums, counts


def sauvola_binarize(img: RasterImage, window: int = 31, k: float = 0.5,
                     r: float = 128.0) -> BinaryImage:
    """Local adaptive threshold T = m * (1 + k * (s/R - 1)) per pixel.

    m and s are the mean and population standard deviation over the
    window clipped to the image bounds.  The threshold is rounded to
    1e-6 before the comparison, which makes integral-image and naive
    evaluation orders agree bit for bit.
    """
    if img.channels != "gray8":
        raise BadParameter("sauvola_binarize expects a gray8 image")
    if window % 2 == 0 or window < 3:
        raise BadParameter(f"window must be odd and >= 3, got {window}")
    if k <= 0:
        raise BadParameter(f"k must be positive, got {k}")
    if r <= 0:
        raise BadParameter(f"R must be positive, got {r}")
    radius = window // 2
    px = img.pixels
    s1, n = _window_sums(px, radius)
    s2, _ = _window_sums(px.astype(np.int64) ** 2, radius)
    mean = s1 / n
    var = np.maximum(s2 / n - mean * mean, 0.0)
    std = np.sqrt(var)
    thresh = np.round(mean * (1.0 + k * (std / r - 1.0)), 6)
    bits = (px <= thresh).astype(np.uint8)
    return BinaryImage(bits, img.dpi, dict(img.meta))


_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


def despeckle(img: BinaryImage, max_area: int | None = None) -> BinaryImage:
    """Clear every 8-connected ink component of max_area pixels or fewer.

    Default cap is 4 pixels at 300 dpi, scaled by (dpi/300)^2.
    """
    if max_area is None:
        max_area = int(round(4 * (img.dpi_or_default / 300.0) ** 2))
    if max_area < 0:
        raise BadParameter(f"max_area must be >= 0, got {max_area}")
    labels, count = ndimage.label(img.bits, structure=_EIGHT_CONNECTED)
    if count == 0:
        return img.with_bits(img.bits.copy())
    areas = np.bincount(labels.ravel())
    small = areas <= max_area
    small[0] = False  # label 0 is background
    bits = np.where(small[labels], 0, img.bits).astype(np.uint8)
    return img.with_bits(bits)


def morphology(img: BinaryImage, op: str, radius: int = 1) -> BinaryImage:
    """Dilate or erode with a (2r+1) x (2r+1) square element.

    Out-of-bounds neighborhood counts as background, so border pixels
    always erode to 0.
    """
    if op not in ("dilate", "erode"):
        raise BadParameter(f"op must be 'dilate' or 'erode', got {op!r}")
    if radius < 1:
        raise BadParameter(f"radius must be >= 1, got {radius}")
    element = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    mask = img.bits.astype(bool)
    if op == "dilate":
        out = ndimage.binary_dilation(mask, structure=element, border_value=0)
    else:
        out = ndimage.binary_erosion(mask, structure=element, border_value=0)
    return img.with_bits(out.astype(np.uint8))


def _inverse_coords(h: int, w: int, angle_deg: float) -> tuple[np.ndarray, np.ndarray]:
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rad = math.radians(angle_deg)
    cos_a, sin_a = math.cos(rad), math.sin(rad)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    dx = xx - cx
    dy = yy - cy
    sx = cos_a * dx - sin_a * dy + cx
    sy = sin_a * dx + cos_a * dy + cy
    return sy, sx


def rotate_binary(img: BinaryImage, angle: float) -> BinaryImage:
    """Rotate by `angle` degrees, nearest-neighbor, background fill."""
    if angle == 0.0:
        return img.with_bits(img.bits.copy())
    h, w = img.bits.shape
    sy, sx = _inverse_coords(h, w, angle)
    si = np.rint(sy).astype(np.int64)
    sj = np.rint(sx).astype(np.int64)
    valid = (si >= 0) & (si < h) & (sj >= 0) & (sj < w)
    out = np.zeros((h, w), dtype=np.uint8)
    out[valid] = img.bits[si[valid], sj[valid]]
    return img.with_bits(out)


def rotate_gray(img: RasterImage, angle: float, fill: int = 255) -> RasterImage:
    """Rotate a gray image by `angle` degrees with bilinear resampling."""
    if img.channels != "gray8":
        raise BadParameter("rotate_gray expects a gray8 image")
    if angle == 0.0:
        return img.with_pixels(img.pixels.copy())
    h, w = img.pixels.shape
    sy, sx = _inverse_coords(h, w, angle)
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    fy = sy - y0
    fx = sx - x0
    px = img.pixels.astype(np.float64)

    def sample(yi, xi):
        inside = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        vals = np.full(yi.shape, float(fill))
        vals[inside] = px[yi[inside], xi[inside]]
        return vals

    v00 = sample(y0, x0)
    v01 = sample(y0, x0 + 1)
    v10 = sample(y0 + 1, x0)
    v11 = sample(y0 + 1, x0 + 1)
    top = v00 * (1 - fx) + v01 * fx
    bot = v10 * (1 - fx) + v11 * fx
    out = np.clip(np.floor(top * (1 - fy) + bot * fy + 0.5), 0, 255).astype(np.uint8)
    return img.with_pixels(out)


@dataclass
class DeskewResult:
    angle: float
    image: BinaryImage
    empty: bool = False


def _profile_variance(bits: np.ndarray) -> float:
    return float(np.var(bits.sum(axis=1, dtype=np.int64)))


def deskew(img: BinaryImage, half_range: float = 10.0, coarse: float = 1.0,
           fine: float = 0.1) -> DeskewResult:
    """Estimate and undo page skew by maximizing row-profile variance.

    Two-stage grid search over [-half_range, +half_range]: coarse step
    first, then a fine pass around the coarse winner.  Ties prefer the
    smaller magnitude angle, then the negative one.  A blank image comes
    back unrotated with the empty flag set.
    """
    if half_range <= 0 or coarse <= 0 or fine <= 0:
        raise BadParameter("half_range, coarse and fine must be positive")
    if img.ink_count == 0:
        return DeskewResult(0.0, img.with_bits(img.bits.copy()), empty=True)

    def search(candidates: list[float]) -> tuple[float, BinaryImage]:
        # preference order implements the tie-break: strictly greater
        # score is required to displace an earlier (preferred) candidate
        ordered = sorted(set(round(c, 6) for c in candidates), key=lambda a: (abs(a), a))
        best_angle, best_img, best_score = None, None, -1.0
        for cand in ordered:
            rotated = rotate_binary(img, -cand)
            score = _profile_variance(rotated.bits)
            if score > best_score:
                best_angle, best_img, best_score = cand, rotated, score
        return best_angle, best_img

    n = int(round(half_range / coarse))
    coarse_grid = [i * coarse for i in range(-n, n + 1)]
    coarse_best, _ = search(coarse_grid)

    m = int(round(coarse / fine))
    fine_grid = [coarse_best + j * fine for j in range(-m, m + 1)]
    fine_grid = [a for a in fine_grid if -half_range - 1e-9 <= a <= half_range + 1e-9]
    angle, rotated = search(fine_grid)
    return DeskewResult(angle, rotated, empty=False)


@dataclass
class TrimResult:
    image: BinaryImage
    empty: bool = False


def _clear_scan_borders(bits: np.ndarray, density: float) -> np.ndarray:
    """Clear edge-touching runs of rows/columns denser than the cutoff."""
    out = bits.copy()
    h, w = out.shape
    for y in range(h):
        if out[y].sum() / w > density:
            out[y] = 0
        else:
            break
    for y in range(h - 1, -1, -1):
        if out[y].sum() / w > density:
            out[y] = 0
        else:
            break
    for x in range(w):
        if out[:, x].sum() / h > density:
            out[:, x] = 0
        else:
            break
    for x in range(w - 1, -1, -1):
        if out[:, x].sum() / h > density:
            out[:, x] = 0
        else:
            break
    return out


def trim_and_pad(img: BinaryImage, pad: int = 10,
                 border_density: float = 0.6) -> TrimResult:
    """Remove dark scan borders, crop to the ink bounding box, add padding.

    When nothing remains the result is a pad x pad blank image (1x1
    minimum) flagged as empty.
    """
    if pad < 0:
        raise BadParameter(f"pad must be >= 0, got {pad}")
    bits = _clear_scan_borders(img.bits, border_density)
    ys, xs = np.nonzero(bits)
    if len(ys) == 0:
        side = max(pad, 1)
        blank = np.zeros((side, side), dtype=np.uint8)
        return TrimResult(BinaryImage(blank, img.dpi, dict(img.meta)), empty=True)
    y0, y1 = int(ys.min()), int(ys.max()) + 1
    x0, x1 = int(xs.min()), int(xs.max()) + 1
    cropped = bits[y0:y1, x0:x1]
    padded = np.pad(cropped, pad, mode="constant", constant_values=0)
    return TrimResult(BinaryImage(padded, img.dpi, dict(img.meta)), empty=False)

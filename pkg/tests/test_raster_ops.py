import math

import numpy as np
import pytest

from kurdocr.errors import BadParameter, UnknownDpi
from kurdocr.raster import (BinaryImage, RasterImage, deskew, despeckle,
                            ensure_dark_on_light, flatten_alpha, morphology,
                            otsu_binarize, rescale_to_dpi, rotate_binary,
                            sauvola_binarize, trim_and_pad)


def gray(arr, dpi=300.0):
    return RasterImage(np.asarray(arr, dtype=np.uint8), dpi)


def bits(arr, dpi=300.0):
    return BinaryImage(np.asarray(arr, dtype=np.uint8), dpi)


# ---------------------------------------------------------------- flatten

def test_flatten_opaque_black():
    rgba = np.zeros((1, 1, 4), dtype=np.uint8)
    rgba[0, 0] = [0, 0, 0, 255]
    out = flatten_alpha(RasterImage(rgba, 300.0))
    assert out.pixels[0, 0] == 0


def test_flatten_fully_transparent_shows_white():
    rgba = np.zeros((1, 2, 4), dtype=np.uint8)
    rgba[0, 0] = [10, 200, 99, 0]
    rgba[0, 1] = [255, 0, 0, 0]
    out = flatten_alpha(RasterImage(rgba, 300.0))
    assert out.pixels[0, 0] == 255
    assert out.pixels[0, 1] == 255


def test_flatten_half_alpha_black_over_white():
    # alpha 127/255 is the closest 8-bit value below one half; the
    # compositing formula gives round((1 - 127/255) * 255) = 128
    rgba = np.zeros((1, 2, 4), dtype=np.uint8)
    rgba[0, 0] = [0, 0, 0, 127]
    rgba[0, 1] = [0, 0, 0, 128]
    out = flatten_alpha(RasterImage(rgba, 300.0))
    for i, alpha in ((0, 127), (1, 128)):
        expected = math.floor((1 - alpha / 255) * 255 + 0.5)
        assert out.pixels[0, i] == expected
    assert out.pixels[0, 0] == 128


def test_flatten_gray_unchanged():
    img = gray([[5, 250]])
    assert flatten_alpha(img) is img


def test_flatten_preserves_dpi():
    rgba = np.zeros((2, 2, 4), dtype=np.uint8)
    out = flatten_alpha(RasterImage(rgba, 72.0))
    assert out.dpi == 72.0


# ------------------------------------------------------------- polarity

def test_polarity_light_unchanged():
    img = gray(np.full((10, 10), 200))
    out = ensure_dark_on_light(img)
    assert out.same_content(img)


def test_polarity_all_black_inverts():
    img = gray(np.zeros((4, 4)))
    out = ensure_dark_on_light(img)
    assert (out.pixels == 255).all()


def test_polarity_ten_percent_black_unchanged():
    px = np.full((10, 10), 255, dtype=np.uint8)
    px[0, :10] = 0  # 10 of 100 pixels black, mean 229.5
    img = gray(px)
    assert np.mean(px) == 229.5
    out = ensure_dark_on_light(img)
    assert out.same_content(img)


def test_polarity_applied_twice_equals_once():
    rng = np.random.default_rng(7)
    for _ in range(10):
        img = gray(rng.integers(0, 256, size=(16, 16)))
        once = ensure_dark_on_light(img)
        twice = ensure_dark_on_light(once)
        assert twice.same_content(once)


# -------------------------------------------------------------- rescale

def test_rescale_unit_scale_identity():
    img = gray(np.arange(100, dtype=np.uint8).reshape(10, 10), dpi=300.0)
    out = rescale_to_dpi(img, 300.0)
    assert out.same_content(img)
    assert out.dpi == 300.0


def test_rescale_doubling():
    img = gray(np.zeros((100, 100)), dpi=150.0)
    out = rescale_to_dpi(img, 300.0)
    assert (out.width, out.height) == (200, 200)
    assert out.dpi == 300.0


def test_rescale_odd_factor_dimensions():
    img = gray(np.zeros((37, 101)), dpi=72.0)
    out = rescale_to_dpi(img, 300.0)
    assert (out.width, out.height) == (421, 154)


def test_rescale_unknown_dpi_errors():
    img = RasterImage(np.zeros((4, 4), dtype=np.uint8), None)
    with pytest.raises(UnknownDpi):
        rescale_to_dpi(img, 300.0)
    out = rescale_to_dpi(img, 300.0, source_dpi=150.0)
    assert out.width == 8


# ----------------------------------------------------------------- otsu

def brute_force_otsu(pixels: np.ndarray) -> int:
    """Independent exhaustive scan over all 256 thresholds (Fractions)."""
    from fractions import Fraction
    hist = np.bincount(pixels.ravel(), minlength=256)
    best_t, best = 0, Fraction(-1)
    for t in range(256):
        lo = hist[: t + 1]
        hi = hist[t + 1:]
        n0, n1 = int(lo.sum()), int(hi.sum())
        if n0 == 0 or n1 == 0:
            continue
        mu0 = Fraction(int((lo * np.arange(t + 1)).sum()), n0)
        mu1 = Fraction(int((hi * np.arange(t + 1, 256)).sum()), n1)
        score = Fraction(n0, n0 + n1) * Fraction(n1, n0 + n1) * (mu0 - mu1) ** 2
        if score > best:
            best_t, best = t, score
    return best_t


def test_otsu_two_level_plateau_starts_at_lower_value():
    px = np.concatenate([np.full(32, 50), np.full(32, 200)]).astype(np.uint8)
    img = gray(px.reshape(8, 8))
    t, binary = otsu_binarize(img)
    assert t == brute_force_otsu(img.pixels) == 50
    assert binary.bits[img.pixels == 50].all()
    assert not binary.bits[img.pixels == 200].any()


def test_otsu_constant_image_degenerate():
    img = gray(np.full((5, 5), 77))
    t, binary = otsu_binarize(img)
    assert t == 77
    assert binary.ink_count == 0


def test_otsu_matches_brute_force_on_random_images():
    rng = np.random.default_rng(42)
    for _ in range(20):
        img = gray(rng.integers(0, 256, size=(64, 64)))
        t, _ = otsu_binarize(img)
        assert t == brute_force_otsu(img.pixels)


def test_otsu_preserves_dpi():
    img = gray(np.arange(64, dtype=np.uint8).reshape(8, 8), dpi=150.0)
    _, binary = otsu_binarize(img)
    assert binary.dpi == 150.0


# -------------------------------------------------------------- sauvola

def naive_sauvola(pixels: np.ndarray, window: int, k: float, r: float) -> np.ndarray:
    """Double-loop reference: window clipped to bounds, integer sums."""
    h, w = pixels.shape
    rad = window // 2
    out = np.zeros((h, w), dtype=np.uint8)
    px64 = pixels.astype(np.int64)
    for y in range(h):
        y0, y1 = max(0, y - rad), min(h, y + rad + 1)
        for x in range(w):
            x0, x1 = max(0, x - rad), min(w, x + rad + 1)
            block = px64[y0:y1, x0:x1]
            n = block.size
            s1 = int(block.sum())
            s2 = int((block * block).sum())
            m = s1 / n
            var = max(s2 / n - m * m, 0.0)
            t = np.round(m * (1.0 + k * (math.sqrt(var) / r - 1.0)), 6)
            out[y, x] = 1 if pixels[y, x] <= t else 0
    return out


def test_sauvola_constant_image_all_background():
    img = gray(np.full((9, 9), 100))
    out = sauvola_binarize(img, window=3, k=0.5, r=128.0)
    # s = 0 everywhere so T = m/2 = 50 < 100
    assert out.ink_count == 0


def test_sauvola_single_dark_pixel_is_ink():
    px = np.full((31, 31), 255, dtype=np.uint8)
    px[15, 15] = 0
    out = sauvola_binarize(gray(px), window=31)
    assert out.bits[15, 15] == 1


def test_sauvola_matches_naive_loop():
    rng = np.random.default_rng(3)
    for window in (3, 15, 31):
        img = rng.integers(0, 256, size=(24, 24)).astype(np.uint8)
        fast = sauvola_binarize(gray(img), window=window)
        assert np.array_equal(fast.bits, naive_sauvola(img, window, 0.5, 128.0))


def test_sauvola_bad_parameters():
    img = gray(np.zeros((4, 4)))
    with pytest.raises(BadParameter):
        sauvola_binarize(img, window=4)
    with pytest.raises(BadParameter):
        sauvola_binarize(img, window=3, k=0.0)
    with pytest.raises(BadParameter):
        sauvola_binarize(img, window=3, r=-1.0)


# ------------------------------------------------------------ despeckle

def test_despeckle_removes_isolated_pixel():
    b = np.zeros((9, 9), dtype=np.uint8)
    b[4, 4] = 1
    out = despeckle(bits(b), 4)
    assert out.ink_count == 0


def test_despeckle_keeps_block_above_cap():
    b = np.zeros((9, 9), dtype=np.uint8)
    b[3:6, 3:6] = 1
    out = despeckle(bits(b), 4)
    assert out.ink_count == 9


def test_despeckle_diagonal_pixels_are_one_component():
    b = np.zeros((5, 5), dtype=np.uint8)
    b[1, 1] = 1
    b[2, 2] = 1
    out = despeckle(bits(b), 1)
    assert out.ink_count == 2  # 8-connectivity: area 2 > 1, retained
    out2 = despeckle(bits(b), 2)
    assert out2.ink_count == 0


def test_despeckle_idempotent():
    rng = np.random.default_rng(11)
    for _ in range(10):
        b = bits((rng.random((32, 32)) < 0.2).astype(np.uint8))
        once = despeckle(b, 3)
        twice = despeckle(once, 3)
        assert twice.same_content(once)


def test_despeckle_default_area_scales_with_dpi():
    b = np.zeros((20, 20), dtype=np.uint8)
    b[5:8, 5:8] = 1  # area 9
    # at 600 dpi the default cap is 4 * (600/300)^2 = 16 >= 9 -> removed
    assert despeckle(bits(b, dpi=600.0)).ink_count == 0
    assert despeckle(bits(b, dpi=300.0)).ink_count == 9


# ----------------------------------------------------------- morphology

def test_dilate_single_pixel_to_block():
    b = np.zeros((5, 5), dtype=np.uint8)
    b[2, 2] = 1
    out = morphology(bits(b), "dilate", 1)
    expected = np.zeros((5, 5), dtype=np.uint8)
    expected[1:4, 1:4] = 1
    assert np.array_equal(out.bits, expected)


def test_erode_block_to_center():
    b = np.zeros((5, 5), dtype=np.uint8)
    b[1:4, 1:4] = 1
    out = morphology(bits(b), "erode", 1)
    expected = np.zeros((5, 5), dtype=np.uint8)
    expected[2, 2] = 1
    assert np.array_equal(out.bits, expected)


def test_border_pixels_erode_away():
    b = np.ones((4, 4), dtype=np.uint8)
    out = morphology(bits(b), "erode", 1)
    expected = np.zeros((4, 4), dtype=np.uint8)
    expected[1:3, 1:3] = 1
    assert np.array_equal(out.bits, expected)


def test_dilate_erode_duality_in_interior():
    rng = np.random.default_rng(5)
    for _ in range(10):
        b = (rng.random((32, 32)) < 0.3).astype(np.uint8)
        dilated = morphology(bits(b), "dilate", 1)
        inv = bits(1 - b)
        dual = morphology(inv, "erode", 1)
        dual_bits = 1 - dual.bits
        assert np.array_equal(dilated.bits[1:-1, 1:-1], dual_bits[1:-1, 1:-1])


def test_closing_never_removes_original_ink():
    rng = np.random.default_rng(6)
    for _ in range(10):
        b = (rng.random((24, 24)) < 0.25).astype(np.uint8)
        closed = morphology(morphology(bits(b), "dilate", 1), "erode", 1)
        interior = np.zeros_like(b, dtype=bool)
        interior[1:-1, 1:-1] = True
        # interior ink survives closing (border erosion is by contract lossy)
        assert (closed.bits >= b)[interior].all()


def test_opening_never_adds_ink():
    rng = np.random.default_rng(8)
    for _ in range(10):
        b = (rng.random((24, 24)) < 0.4).astype(np.uint8)
        opened = morphology(morphology(bits(b), "erode", 1), "dilate", 1)
        assert (opened.bits <= b).all()


# --------------------------------------------------------------- deskew

def stripe_page(width=160, height=120, rows=6, thickness=3, margin=18):
    b = np.zeros((height, width), dtype=np.uint8)
    step = (height - 2 * margin) // rows
    for i in range(rows):
        y = margin + i * step
        b[y:y + thickness, margin:width - margin] = 1
    return bits(b)


def test_deskew_horizontal_stripes_report_zero():
    page = stripe_page()
    result = deskew(page)
    assert result.angle == 0.0
    assert not result.empty


def test_deskew_recovers_known_rotation():
    page = stripe_page()
    skewed = rotate_binary(page, 3.0)
    result = deskew(skewed)
    assert abs(result.angle - 3.0) <= 0.25


def test_deskew_blank_image_flagged():
    blank = bits(np.zeros((20, 20)))
    result = deskew(blank)
    assert result.empty
    assert result.angle == 0.0
    assert result.image.same_content(blank)


def test_deskew_preserves_dpi():
    page = stripe_page()
    result = deskew(rotate_binary(page, -2.0))
    assert result.image.dpi == 300.0


# --------------------------------------------------------- trim and pad

def test_trim_single_pixel_pads_to_21():
    b = np.zeros((40, 40), dtype=np.uint8)
    b[17, 23] = 1
    out = trim_and_pad(bits(b), 10)
    assert not out.empty
    assert (out.image.width, out.image.height) == (21, 21)
    assert out.image.bits[10, 10] == 1
    assert out.image.ink_count == 1


def test_trim_removes_solid_scan_frame():
    b = np.zeros((60, 60), dtype=np.uint8)
    b[:5, :] = 1
    b[-5:, :] = 1
    b[:, :5] = 1
    b[:, -5:] = 1
    b[30, 20:40] = 1  # interior text stroke
    out = trim_and_pad(bits(b), 2)
    assert not out.empty
    assert out.image.ink_count == 20
    assert (out.image.width, out.image.height) == (24, 5)


def test_trim_blank_page_flagged():
    out = trim_and_pad(bits(np.zeros((30, 30))), 10)
    assert out.empty
    assert (out.image.width, out.image.height) == (10, 10)
    assert out.image.ink_count == 0


def test_all_ops_preserve_dpi():
    img = gray(np.full((20, 20), 240), dpi=144.0)
    img.pixels[5:9, 5:15] = 10
    assert ensure_dark_on_light(img).dpi == 144.0
    t, binary = otsu_binarize(img)
    assert binary.dpi == 144.0
    assert despeckle(binary, 2).dpi == 144.0
    assert morphology(binary, "dilate", 1).dpi == 144.0
    assert deskew(binary).image.dpi == 144.0
    assert trim_and_pad(binary, 3).image.dpi == 144.0
    assert sauvola_binarize(img, 3).dpi == 144.0

from .model import BinaryImage, RasterImage, binary_from_bool, DEFAULT_DPI
from .io import (DEFAULT_MAX_IMAGE_MB, encode_png, load_binary, load_raster,
                 save_png)
from .ops import (DeskewResult, TrimResult, deskew, despeckle,
                  ensure_dark_on_light, flatten_alpha, morphology,
                  otsu_binarize, rescale_to_dpi, rotate_binary, rotate_gray,
                  sauvola_binarize, trim_and_pad)
from .plan import Binarizer, PreprocessPlan, apply_plan

__all__ = [
    "BinaryImage", "RasterImage", "binary_from_bool", "DEFAULT_DPI",
    "DEFAULT_MAX_IMAGE_MB", "encode_png", "load_binary", "load_raster",
    "save_png", "DeskewResult", "TrimResult", "deskew", "despeckle",
    "ensure_dark_on_light", "flatten_alpha", "morphology", "otsu_binarize",
    "rescale_to_dpi", "rotate_binary", "rotate_gray", "sauvola_binarize",
    "trim_and_pad", "Binarizer", "PreprocessPlan", "apply_plan",
]

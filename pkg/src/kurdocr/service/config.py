"""Service configuration: JSON file with environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import BadParameter
from ..raster import DEFAULT_MAX_IMAGE_MB


@dataclass
class ServiceConfig:
    corpus_root: str | None = None
    port: int = 8077
    max_image_mb: float = DEFAULT_MAX_IMAGE_MB
    parallelism: int = field(default_factory=lambda: os.cpu_count() or 1)
    default_profile: str = "tesseract"
    ui_dist: str | None = None

    def __post_init__(self):
        if self.max_image_mb <= 0:
            raise BadParameter("max_image_mb must be positive")
        if self.parallelism < 1:
            raise BadParameter("parallelism must be >= 1")


_ENV_KEYS = {
    "KURDOCR_CORPUS_ROOT": ("corpus_root", str),
    "KURDOCR_PORT": ("port", int),
    "KURDOCR_MAX_IMAGE_MB": ("max_image_mb", float),
    "KURDOCR_PARALLELISM": ("parallelism", int),
    "KURDOCR_PROFILE": ("default_profile", str),
    "KURDOCR_UI_DIST": ("ui_dist", str),
}


def load_config(path: str | Path | None = None,
                env: dict[str, str] | None = None) -> ServiceConfig:
    data: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    env = os.environ if env is None else env
    for key, (attr, cast) in _ENV_KEYS.items():
        if key in env:
            data[attr] = cast(env[key])
    return ServiceConfig(**data)

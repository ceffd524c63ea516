"""External OCR engine adapter and the page-to-text pipeline.

Engines are separate operating-system processes invoked with a file
handoff; the built-in `mock:` family short-circuits in process and
exists for tests and pipeline closure checks:

  mock:fixed:<text>        always returns <text>
  mock:echo-gt             returns the ground truth attached to the image
                           (image meta, or a .gt.txt sidecar of its source)
  mock:corrupt:<p>[:<seed>] echo-gt output with per-character noise
"""

from __future__ import annotations

import hashlib
import json
import os
import shlex
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (BadOutputEncoding, BadParameter, EngineFailure,
                     EngineNotFound, EngineTimeout, KurdocrError)
from .layout import LineSegment, SegmentationParams, crop, segment_lines
from .raster import BinaryImage, PreprocessPlan, RasterImage, apply_plan, save_png
from .textnorm import NormalizationPolicy, normalize

MOCK_PREFIX = "mock:"

# letters used for random substitutions by mock:corrupt
CORRUPT_ALPHABET = tuple("ءئابپتجچحخدرڕزژسشعغفڤقکگلڵمنهھەوۆیێ")


@dataclass
class EngineSpec:
    name: str
    command_template: str
    timeout: float = 120.0
    output_kind: str = "stdout"  # "stdout" or "file"
    extra_env: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.timeout <= 0:
            raise BadParameter(f"timeout must be positive, got {self.timeout}")
        if self.output_kind == "standard-output":
            self.output_kind = "stdout"
        if self.output_kind not in ("stdout", "file"):
            raise BadParameter(f"output_kind must be 'stdout' or 'file', got {self.output_kind!r}")
        if "{input}" not in self.command_template:
            raise BadParameter("command_template must contain {input}")
        if self.output_kind == "file" and "{output}" not in self.command_template:
            raise BadParameter("file output_kind requires {output} in the template")

    @property
    def is_mock(self) -> bool:
        return self.name.startswith(MOCK_PREFIX)

    def to_json(self) -> dict:
        return {"name": self.name, "command_template": self.command_template,
                "timeout": self.timeout, "output_kind": self.output_kind,
                "extra_env": dict(self.extra_env)}

    @classmethod
    def from_json(cls, data: dict) -> "EngineSpec":
        return cls(**data)


def mock_spec(name: str) -> EngineSpec:
    return EngineSpec(name=name, command_template="{input}", output_kind="stdout")


def load_engine_spec(path: str | Path) -> EngineSpec:
    return EngineSpec.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def builtin_profile(name: str) -> EngineSpec:
    data = resources.files("kurdocr.data").joinpath(f"profiles/{name}.json").read_text("utf-8")
    return EngineSpec.from_json(json.loads(data))


def resolve_engine(profile: str) -> EngineSpec:
    """Accept a mock name, a profile JSON path, or a shipped profile name."""
    if profile.startswith(MOCK_PREFIX):
        return mock_spec(profile)
    if Path(profile).is_file():
        return load_engine_spec(profile)
    try:
        return builtin_profile(profile)
    except FileNotFoundError:
        raise EngineNotFound(f"no engine profile {profile!r}") from None


def mock_corrupt(gt: str, p: float, seed: int = 0,
                 alphabet: tuple[str, ...] = CORRUPT_ALPHABET) -> str:
    """Substitute each code point with a random letter with probability p."""
    if not 0 <= p <= 1:
        raise BadParameter(f"p must be in [0, 1], got {p}")
    if not alphabet:
        raise BadParameter("alphabet must be non-empty")
    if not gt:
        return gt
    rng = np.random.default_rng(seed)
    hits = rng.random(len(gt)) < p
    picks = rng.integers(0, len(alphabet), size=len(gt))
    return "".join(alphabet[picks[i]] if hits[i] else ch
                   for i, ch in enumerate(gt))


def expected_corruption_cer(gt: str, p: float,
                            alphabet: tuple[str, ...] = CORRUPT_ALPHABET) -> float:
    """Analytic expectation of per-character differences from mock_corrupt."""
    if not gt:
        return 0.0
    members = set(alphabet)
    size = len(alphabet)
    hit_changes = sum(1 - (1 / size if ch in members else 0.0) for ch in gt)
    return p * hit_changes / len(gt)


def _sidecar_gt(source_path: str) -> str | None:
    path = Path(source_path)
    for candidate in (path.parent / (path.name + ".gt.txt"),
                      path.parent / (path.stem + ".gt.txt")):
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8").rstrip("\n")
    return None


def _mock_ground_truth(image: BinaryImage | RasterImage) -> str:
    meta = image.meta
    if "gt_lines" in meta:
        lines = meta["gt_lines"]
        index = meta.get("line_index")
        if index is not None:
            if not 0 <= index < len(lines):
                raise EngineFailure(f"no ground-truth line {index} attached")
            return lines[index]
        return "\n".join(lines)
    if "gt_text" in meta:
        return meta["gt_text"]
    if "source_path" in meta:
        gt = _sidecar_gt(meta["source_path"])
        if gt is not None:
            return gt
    raise EngineFailure("echo-gt: image has no attached or sidecar ground truth")


def _run_mock(spec: EngineSpec, image: BinaryImage | RasterImage) -> str:
    rest = spec.name[len(MOCK_PREFIX):]
    if rest.startswith("fixed:"):
        return rest[len("fixed:"):]
    if rest == "echo-gt":
        return _mock_ground_truth(image)
    if rest.startswith("corrupt:"):
        parts = rest.split(":")
        try:
            p = float(parts[1])
            base_seed = int(parts[2]) if len(parts) > 2 else 0
        except (IndexError, ValueError):
            raise BadParameter(f"bad corrupt mock spec {spec.name!r}") from None
        gt = _mock_ground_truth(image)
        digest = hashlib.blake2b(f"{base_seed}\x1f{gt}".encode("utf-8"),
                                 digest_size=8).digest()
        return mock_corrupt(gt, p, seed=int.from_bytes(digest, "big"))
    raise EngineNotFound(f"unknown mock engine {spec.name!r}")


def run_engine(spec: EngineSpec, image: BinaryImage | RasterImage) -> str:
    """Hand the image to the engine and capture its text output.

    The image goes out as a temporary PNG; temp files are removed on
    every path, including timeout and failure.
    """
    if spec.is_mock:
        return _run_mock(spec, image)
    with tempfile.TemporaryDirectory(prefix="kurdocr-engine-") as tmpdir:
        input_path = os.path.join(tmpdir, "input.png")
        output_base = os.path.join(tmpdir, "out")
        save_png(image, input_path)
        tokens = [t.replace("{input}", input_path).replace("{output}", output_base)
                  for t in shlex.split(spec.command_template)]
        env = {**os.environ, **spec.extra_env}
        try:
            proc = subprocess.run(tokens, capture_output=True,
                                  timeout=spec.timeout, env=env)
        except FileNotFoundError:
            raise EngineNotFound(f"engine executable {tokens[0]!r} not found") from None
        except subprocess.TimeoutExpired:
            raise EngineTimeout(f"engine {spec.name!r} exceeded {spec.timeout:g}s") from None
        if proc.returncode != 0:
            raise EngineFailure(
                f"engine {spec.name!r} exited with status {proc.returncode}",
                exit_status=proc.returncode,
                stderr=proc.stderr.decode("utf-8", errors="replace"))
        if spec.output_kind == "stdout":
            raw = proc.stdout
        else:
            out_path = Path(output_base)
            if not out_path.is_file():
                # some engines append their own extension to the base
                out_path = Path(output_base + ".txt")
            if not out_path.is_file():
                raise EngineFailure(f"engine {spec.name!r} produced no output file",
                                    exit_status=proc.returncode,
                                    stderr=proc.stderr.decode("utf-8", errors="replace"))
            raw = out_path.read_bytes()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BadOutputEncoding(f"engine output is not UTF-8: {exc}") from None
        return text[:-1] if text.endswith("\n") else text


@dataclass
class OcrResult:
    text: str
    engine: str
    elapsed: float
    per_line: list[tuple[LineSegment, str]] | None = None
    preprocess: PreprocessPlan | None = None
    trace: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "engine": self.engine,
            "elapsed": self.elapsed,
            "per_line": None if self.per_line is None else [
                {"segment": seg.to_json(), "text": text}
                for seg, text in self.per_line],
            "preprocess": self.preprocess.to_json() if self.preprocess else None,
            "trace": self.trace,
        }


def _with_stage(exc: Exception, stage: str) -> Exception:
    if isinstance(exc, KurdocrError) and exc.stage is None:
        exc.stage = stage
    return exc


def _normalize_lines(text: str, policy: NormalizationPolicy) -> str:
    # normalize per line so whitespace collapse cannot eat line breaks
    return "\n".join(normalize(line, policy) for line in text.split("\n"))


def ocr_page(image: RasterImage | BinaryImage, plan: PreprocessPlan | None,
             spec: EngineSpec, by_line: bool = True,
             policy: NormalizationPolicy | None = None,
             seg_params: SegmentationParams | None = None,
             max_workers: int | None = None) -> OcrResult:
    """Preprocess, optionally segment, run the engine, normalize.

    Per-line invocations run concurrently up to max_workers (processor
    count by default); line order in the result is reading order
    regardless of completion order.
    """
    policy = policy or NormalizationPolicy()
    started = time.monotonic()
    trace: dict = {}
    if isinstance(image, BinaryImage):
        binary = image
    else:
        try:
            binary, trace = apply_plan(image, plan or PreprocessPlan())
        except Exception as exc:
            raise _with_stage(exc, "preprocess")

    if not by_line:
        try:
            raw = run_engine(spec, binary)
        except Exception as exc:
            raise _with_stage(exc, "engine")
        text = _normalize_lines(raw, policy)
        return OcrResult(text=text, engine=spec.name,
                         elapsed=time.monotonic() - started,
                         per_line=None, preprocess=plan, trace=trace)

    try:
        segments = segment_lines(binary, seg_params)
    except Exception as exc:
        raise _with_stage(exc, "segment")
    crops = []
    for seg in segments:
        line_img = crop(binary, seg.box)
        line_img.meta["line_index"] = seg.index
        crops.append(line_img)

    def recognize(line_img: BinaryImage) -> str:
        return normalize(run_engine(spec, line_img), policy)

    workers = max_workers or os.cpu_count() or 1
    try:
        if crops:
            with ThreadPoolExecutor(max_workers=min(workers, len(crops))) as pool:
                texts = list(pool.map(recognize, crops))
        else:
            texts = []
    except Exception as exc:
        raise _with_stage(exc, "engine")

    per_line = list(zip(segments, texts))
    return OcrResult(text="\n".join(texts), engine=spec.name,
                     elapsed=time.monotonic() - started,
                     per_line=per_line, preprocess=plan, trace=trace)

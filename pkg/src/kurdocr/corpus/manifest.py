"""Ground-truth corpus management.

A corpus is a directory of line images, each paired with a single-line
transcript file.  Transcript lookup honors both naming conventions:
`<image-name>.gt.txt` (the full image filename plus suffix) first, then
`<stem>.gt.txt`.  Publication metadata comes from a per-directory
`meta.json`.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import shutil
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..errors import (BadParameter, DuplicateId, IoError, NotADirectory,
                      UnassignedSplit)
from ..raster import load_raster, save_png
from ..textnorm import (LineIssue, NormalizationPolicy, decode_transcript,
                        validate_line)

IMAGE_SUFFIXES = (".bin.png", ".nrm.png", ".png", ".tif", ".tiff")

TRAIN, EVAL, UNASSIGNED = "train", "eval", "unassigned"


@dataclass
class GroundTruthPair:
    id: str
    image_path: str
    transcript: str
    publication: str | None = None
    year: int | None = None
    split: str = UNASSIGNED

    def to_json(self) -> dict:
        return {"id": self.id, "image_path": self.image_path,
                "transcript": self.transcript, "publication": self.publication,
                "year": self.year, "split": self.split}

    @classmethod
    def from_json(cls, data: dict) -> "GroundTruthPair":
        return cls(**data)


@dataclass
class Manifest:
    root: str
    pairs: list[GroundTruthPair]
    created: str
    policy: NormalizationPolicy = field(default_factory=NormalizationPolicy)
    orphans: list[dict] = field(default_factory=list)

    def pair_by_id(self, pair_id: str) -> GroundTruthPair | None:
        for pair in self.pairs:
            if pair.id == pair_id:
                return pair
        return None

    def to_json(self) -> dict:
        return {"root": self.root,
                "pairs": [p.to_json() for p in self.pairs],
                "created": self.created,
                "policy": self.policy.to_json(),
                "orphans": self.orphans}

    @classmethod
    def from_json(cls, data: dict) -> "Manifest":
        return cls(root=data["root"],
                   pairs=[GroundTruthPair.from_json(p) for p in data["pairs"]],
                   created=data["created"],
                   policy=NormalizationPolicy.from_json(data["policy"]),
                   orphans=list(data.get("orphans", [])))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), ensure_ascii=False, indent=2),
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Manifest":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _split_image_suffix(name: str) -> tuple[str, str] | None:
    lower = name.lower()
    for suffix in IMAGE_SUFFIXES:
        if lower.endswith(suffix):
            return name[: -len(suffix)], suffix
    return None


def _dir_meta(directory: Path, root: Path) -> tuple[str | None, int | None]:
    current = directory
    while True:
        meta_path = current / "meta.json"
        if meta_path.is_file():
            try:
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
                year = meta.get("year")
                return meta.get("publication"), int(year) if year is not None else None
            except (ValueError, TypeError):
                return None, None
        if current == root:
            return None, None
        current = current.parent


def scan_corpus(root: str | Path,
                policy: NormalizationPolicy | None = None) -> Manifest:
    """Pair every line image under root with its transcript.

    Orphans (images without transcripts, transcripts without images,
    undecodable transcript bytes) are reported in the manifest, never
    silently dropped.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectory(f"{root} is not a directory")

    image_files: list[Path] = []
    gt_files: set[Path] = set()
    for path in sorted(root.rglob("*")):
        if any(part.startswith(".") for part in path.relative_to(root).parts[:-1]):
            continue
        if not path.is_file():
            continue
        if path.name.endswith(".gt.txt"):
            gt_files.add(path)
        elif _split_image_suffix(path.name):
            image_files.append(path)

    pairs: list[GroundTruthPair] = []
    orphans: list[dict] = []
    seen: dict[str, Path] = {}
    claimed_gt: set[Path] = set()
    for image in image_files:
        stem, _suffix = _split_image_suffix(image.name)
        if stem in seen:
            raise DuplicateId(
                f"images {seen[stem]} and {image} share the stem {stem!r}")
        seen[stem] = image
        paper_style = image.parent / (image.name + ".gt.txt")
        trainer_style = image.parent / (stem + ".gt.txt")
        gt_path = paper_style if paper_style.is_file() else (
            trainer_style if trainer_style.is_file() else None)
        if gt_path is None:
            orphans.append({"path": str(image), "reason": "no transcript"})
            continue
        claimed_gt.add(gt_path)
        text, issues = decode_transcript(gt_path.read_bytes())
        if text is None:
            orphans.append({"path": str(gt_path),
                            "reason": f"undecodable transcript: {issues[0].detail}"})
            continue
        if text.endswith("\r\n"):
            text = text[:-2]
        elif text.endswith("\n"):
            text = text[:-1]
        publication, year = _dir_meta(image.parent, root)
        pairs.append(GroundTruthPair(id=stem, image_path=str(image),
                                     transcript=text, publication=publication,
                                     year=year))

    for gt_path in sorted(gt_files - claimed_gt):
        orphans.append({"path": str(gt_path), "reason": "no matching image"})

    pairs.sort(key=lambda p: p.id)
    return Manifest(root=str(root), pairs=pairs, created=_created_stamp(),
                    policy=policy or NormalizationPolicy(),
                    orphans=orphans)


def _created_stamp() -> str:
    # honor the reproducible-builds convention so identical inputs can
    # yield byte-identical manifests
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        return datetime.fromtimestamp(int(epoch), timezone.utc).isoformat()
    return datetime.now(timezone.utc).isoformat()


@dataclass
class ValidationReport:
    issues: dict[str, list[LineIssue]]
    pair_count: int
    clean_count: int

    @property
    def issue_total(self) -> int:
        return sum(len(v) for v in self.issues.values())

    def to_json(self) -> dict:
        by_kind: dict[str, int] = {}
        for issue_list in self.issues.values():
            for issue in issue_list:
                by_kind[issue.kind] = by_kind.get(issue.kind, 0) + 1
        return {"pairs": self.pair_count, "clean": self.clean_count,
                "issue_total": self.issue_total, "by_kind": by_kind,
                "issues": {k: [i.to_json() for i in v]
                           for k, v in self.issues.items()}}


def validate_corpus(manifest: Manifest,
                    alphabet: frozenset[str] | None = None) -> ValidationReport:
    """Run line validation and an image decode check on every pair."""
    issues: dict[str, list[LineIssue]] = {}
    for pair in manifest.pairs:
        found = validate_line(pair.transcript, alphabet)
        try:
            load_raster(pair.image_path)
        except Exception as exc:
            found = found + [LineIssue("UndecodableImage", None, str(exc))]
        if found:
            issues[pair.id] = found
    return ValidationReport(issues=issues, pair_count=len(manifest.pairs),
                            clean_count=len(manifest.pairs) - len(issues))


@dataclass(frozen=True)
class StatsRow:
    publication: str
    year: int | None
    lines: int
    chars: int

    def to_json(self) -> dict:
        return {"publication": self.publication, "year": self.year,
                "lines": self.lines, "chars": self.chars}


@dataclass
class CorpusStats:
    rows: list[StatsRow]
    total_lines: int
    total_chars: int

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows],
                "total_lines": self.total_lines, "total_chars": self.total_chars}


UNKNOWN_PUBLICATION = "(unknown)"


def corpus_stats(manifest: Manifest) -> CorpusStats:
    """Per-publication line and character counts; totals are the sums
    of the rows (a stated total that disagrees would be a data bug)."""
    grouped: dict[str, dict] = {}
    for pair in manifest.pairs:
        key = pair.publication or UNKNOWN_PUBLICATION
        bucket = grouped.setdefault(key, {"year": pair.year, "lines": 0, "chars": 0})
        bucket["lines"] += 1
        bucket["chars"] += len(pair.transcript)
    rows = [StatsRow(pub, b["year"], b["lines"], b["chars"])
            for pub, b in sorted(grouped.items())]
    return CorpusStats(rows=rows,
                       total_lines=sum(r.lines for r in rows),
                       total_chars=sum(r.chars for r in rows))


def _split_hash(seed: int, pair_id: str) -> int:
    digest = hashlib.blake2b(f"{seed}\x1f{pair_id}".encode("utf-8"),
                             digest_size=8).digest()
    return int.from_bytes(digest, "big")


def split(manifest: Manifest, eval_fraction: float, seed: int) -> Manifest:
    """Deterministic hash-ordered split: stable under corpus growth."""
    if not 0 <= eval_fraction < 1:
        raise BadParameter(f"eval_fraction must be in [0, 1), got {eval_fraction}")
    ordered = sorted(manifest.pairs, key=lambda p: (_split_hash(seed, p.id), p.id))
    eval_count = math.ceil(len(ordered) * eval_fraction)
    eval_ids = {p.id for p in ordered[:eval_count]}
    new_pairs = [
        GroundTruthPair(p.id, p.image_path, p.transcript, p.publication,
                        p.year, EVAL if p.id in eval_ids else TRAIN)
        for p in manifest.pairs
    ]
    return Manifest(root=manifest.root, pairs=new_pairs, created=manifest.created,
                    policy=manifest.policy, orphans=list(manifest.orphans))


def export_trainer_layout(manifest: Manifest, out: str | Path) -> Path:
    """Write the external trainer's ground-truth layout.

    `<out>/ground-truth/` holds `<id>.png` plus `<id>.gt.txt` per pair
    (single line, UTF-8, no trailing newline); `<out>/list.train` and
    `<out>/list.eval` hold the ids of each split.
    """
    out = Path(out)
    gt_dir = out / "ground-truth"
    gt_dir.mkdir(parents=True, exist_ok=True)
    train_ids: list[str] = []
    eval_ids: list[str] = []
    for pair in manifest.pairs:
        if pair.split == TRAIN:
            train_ids.append(pair.id)
        elif pair.split == EVAL:
            eval_ids.append(pair.id)
        else:
            raise UnassignedSplit(f"pair {pair.id} has no split assignment")
        source = Path(pair.image_path)
        target = gt_dir / f"{pair.id}.png"
        try:
            if source.suffix.lower() == ".png":
                shutil.copyfile(source, target)
            else:
                save_png(load_raster(source), target)
        except OSError as exc:
            raise IoError(f"cannot export {source}: {exc}") from exc
        (gt_dir / f"{pair.id}.gt.txt").write_text(pair.transcript, encoding="utf-8")
    (out / "list.train").write_text("".join(i + "\n" for i in train_ids), encoding="utf-8")
    (out / "list.eval").write_text("".join(i + "\n" for i in eval_ids), encoding="utf-8")
    return out

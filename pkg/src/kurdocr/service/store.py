"""Annotation session persistence.

The corpus directory is the single source of truth for transcripts;
the journal (append-only JSONL under `<root>/.kurdocr/`) is audit and
crash recovery.  A transcript write is: temp file in the same
directory, fsync, atomic rename, then a fsynced journal append.  A
crash can therefore leave the file at either the old or the new
content, never in between, and mounting reconciles any entry the
journal missed.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from ..corpus import Manifest, scan_corpus
from ..errors import KurdocrError
from ..textnorm import LineIssue, validate_line

UNLABELED, DRAFT, CONFIRMED = "unlabeled", "draft", "confirmed"
SAVE_DRAFT, CONFIRM, REOPEN = "save_draft", "confirm", "reopen"


class UnknownTask(KurdocrError):
    code = "UnknownTask"


class WriteConflict(KurdocrError):
    code = "WriteConflict"


class ValidationFailed(KurdocrError):
    code = "ValidationFailed"

    def __init__(self, issues: list[LineIssue]):
        super().__init__(f"{len(issues)} validation issue(s)")
        self.issues = issues


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class AnnotationTask:
    task_id: str
    image_path: str
    gt_path: str
    current_transcript: str | None
    status: str
    updated: str

    def to_json(self) -> dict:
        return {"task_id": self.task_id,
                "image_url": f"/api/tasks/{self.task_id}/image",
                "current_transcript": self.current_transcript,
                "status": self.status,
                "updated": self.updated}


@dataclass(frozen=True)
class JournalEntry:
    seq: int
    timestamp: str
    task_id: str
    action: str
    text_hash: str

    def to_json(self) -> dict:
        return {"seq": self.seq, "timestamp": self.timestamp,
                "task_id": self.task_id, "action": self.action,
                "text_hash": self.text_hash}


def read_journal(path: str | Path) -> list[JournalEntry]:
    entries: list[JournalEntry] = []
    path = Path(path)
    if not path.is_file():
        return entries
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        data = json.loads(line)
        entries.append(JournalEntry(**data))
    return entries


def replay_journal(entries: list[JournalEntry]) -> dict[str, tuple[str, str]]:
    """Final (status, text_hash) per task after applying all entries."""
    state: dict[str, tuple[str, str]] = {}
    for entry in entries:
        status = {SAVE_DRAFT: DRAFT, CONFIRM: CONFIRMED, REOPEN: DRAFT}[entry.action]
        state[entry.task_id] = (status, entry.text_hash)
    return state


class AnnotationStore:
    """Task queue, transcript writes and journal over one corpus root."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.state_dir = self.root / ".kurdocr"
        self.journal_path = self.state_dir / "journal.jsonl"
        self.reports_dir = self.state_dir / "reports"
        self.tasks: dict[str, AnnotationTask] = {}
        self.manifest: Manifest | None = None
        self._lock = threading.Lock()
        self._seq = 0

    # ------------------------------------------------------------- mount

    def mount(self) -> None:
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self._drop_stale_temp_files()
        manifest_path = self.state_dir / "manifest.json"
        scanned = scan_corpus(self.root)
        if manifest_path.is_file():
            # splits persisted by corpus-split; transcripts refresh from disk
            persisted = Manifest.load(manifest_path)
            split_by_id = {p.id: p.split for p in persisted.pairs}
            for pair in scanned.pairs:
                pair.split = split_by_id.get(pair.id, pair.split)
        self.manifest = scanned

        self.tasks = {}
        for pair in scanned.pairs:
            status = DRAFT if pair.transcript.strip() else UNLABELED
            self.tasks[pair.id] = AnnotationTask(
                task_id=pair.id, image_path=pair.image_path,
                gt_path=self._gt_path_for(pair.image_path),
                current_transcript=pair.transcript if pair.transcript else None,
                status=status, updated=_now())
        for orphan in scanned.orphans:
            if orphan["reason"] != "no transcript":
                continue
            image_path = orphan["path"]
            task_id = self._stem(image_path)
            self.tasks[task_id] = AnnotationTask(
                task_id=task_id, image_path=image_path,
                gt_path=self._gt_path_for(image_path),
                current_transcript=None, status=UNLABELED, updated=_now())

        entries = read_journal(self.journal_path)
        self._seq = entries[-1].seq if entries else 0
        for task_id, (status, digest) in replay_journal(entries).items():
            task = self.tasks.get(task_id)
            if task is None:
                continue
            actual = text_hash(task.current_transcript or "")
            if actual == digest:
                task.status = status
            else:
                # the write landed but the journal append did not (or the
                # directory changed outside this service): reconcile
                task.status = DRAFT if task.current_transcript else UNLABELED
                self._append_entry(task_id, SAVE_DRAFT,
                                   text_hash(task.current_transcript or ""))

    @staticmethod
    def _stem(image_path: str) -> str:
        name = Path(image_path).name
        for suffix in (".bin.png", ".nrm.png", ".png", ".tif", ".tiff"):
            if name.lower().endswith(suffix):
                return name[: -len(suffix)]
        return Path(image_path).stem

    @staticmethod
    def _gt_path_for(image_path: str) -> str:
        path = Path(image_path)
        paper_style = path.parent / (path.name + ".gt.txt")
        if paper_style.is_file():
            return str(paper_style)
        trainer_style = path.parent / (AnnotationStore._stem(image_path) + ".gt.txt")
        if trainer_style.is_file():
            return str(trainer_style)
        return str(paper_style)  # new transcripts use the paper convention

    def _drop_stale_temp_files(self) -> None:
        for leftover in self.root.rglob("*.gt.txt.kurdocr-tmp*"):
            leftover.unlink(missing_ok=True)

    # ------------------------------------------------------------- reads

    def next_task(self) -> AnnotationTask | None:
        for task_id in sorted(self.tasks):
            task = self.tasks[task_id]
            if task.status in (UNLABELED, DRAFT):
                return task
        return None

    def get(self, task_id: str) -> AnnotationTask:
        task = self.tasks.get(task_id)
        if task is None:
            raise UnknownTask(f"no task {task_id!r}")
        return task

    # ------------------------------------------------------------ writes

    def _append_entry(self, task_id: str, action: str, digest: str) -> None:
        self._seq += 1
        entry = JournalEntry(self._seq, _now(), task_id, action, digest)
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry.to_json(), ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def save_transcript(self, task_id: str, text: str, confirm: bool,
                        expected_updated: str | None = None) -> AnnotationTask:
        """Atomically persist a transcript; journal the action.

        Drafts may carry validation issues, confirms may not.  The
        optional expected_updated token is a compare-and-set guard: a
        stale token gets WriteConflict and changes nothing.
        """
        with self._lock:
            task = self.get(task_id)
            if expected_updated is not None and expected_updated != task.updated:
                raise WriteConflict(
                    f"task {task_id} changed at {task.updated}, caller saw {expected_updated}")
            if confirm:
                issues = validate_line(text)
                if issues:
                    raise ValidationFailed(issues)

            gt_path = Path(task.gt_path)
            tmp_path = gt_path.parent / f"{gt_path.name}.kurdocr-tmp{os.getpid()}"
            data = text.encode("utf-8")
            with open(tmp_path, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp_path, gt_path)
            self._append_entry(task_id, CONFIRM if confirm else SAVE_DRAFT,
                               text_hash(text))

            task.current_transcript = text
            task.status = CONFIRMED if confirm else DRAFT
            task.updated = _now()
            if self.manifest is not None:
                pair = self.manifest.pair_by_id(task_id)
                if pair is not None:
                    pair.transcript = text
            return task

    def reopen(self, task_id: str) -> AnnotationTask:
        with self._lock:
            task = self.get(task_id)
            self._append_entry(task_id, REOPEN,
                               text_hash(task.current_transcript or ""))
            task.status = DRAFT if task.current_transcript else UNLABELED
            task.updated = _now()
            return task

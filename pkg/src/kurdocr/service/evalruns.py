"""Evaluation runs over the mounted corpus, persisted as JSON reports."""

from __future__ import annotations

import json
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from ..corpus import EVAL, TRAIN
from ..engine import ocr_page, resolve_engine
from ..errors import EmptyInput, KurdocrError
from ..evalkit import aggregate, char_accuracy, report_from_counts
from ..raster import load_binary
from ..textnorm import NormalizationPolicy
from .store import AnnotationStore


class RunInFlight(KurdocrError):
    code = "RunInFlight"


class UnknownReport(KurdocrError):
    code = "UnknownReport"


class EvalRunner:
    def __init__(self, store: AnnotationStore, parallelism: int = 1):
        self.store = store
        self.parallelism = parallelism
        self._in_flight: set[tuple] = set()
        self._lock = threading.Lock()

    def _reports_dir(self) -> Path:
        path = self.store.reports_dir
        path.mkdir(parents=True, exist_ok=True)
        return path

    def _persist(self, payload: dict) -> str:
        report_id = uuid.uuid4().hex[:12]
        payload["id"] = report_id
        payload["created"] = datetime.now(timezone.utc).isoformat()
        path = self._reports_dir() / f"{report_id}.json"
        path.write_text(json.dumps(payload, ensure_ascii=False, indent=2),
                        encoding="utf-8")
        return report_id

    def load_report(self, report_id: str) -> dict:
        path = self._reports_dir() / f"{report_id}.json"
        if not path.is_file():
            raise UnknownReport(f"no report {report_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def run(self, profile: str, split_name: str = EVAL,
            fold: bool = False, by_line: bool = True) -> str:
        """OCR every pair of the split and evaluate against ground truth."""
        key = (profile, split_name, fold, by_line)
        with self._lock:
            if key in self._in_flight:
                raise RunInFlight(f"evaluation {key} already running")
            self._in_flight.add(key)
        try:
            return self._run_locked(profile, split_name, fold, by_line)
        finally:
            with self._lock:
                self._in_flight.discard(key)

    def _run_locked(self, profile: str, split_name: str, fold: bool,
                    by_line: bool) -> str:
        manifest = self.store.manifest
        if manifest is None:
            raise EmptyInput("no corpus mounted")
        if split_name == "all":
            pairs = list(manifest.pairs)
        elif split_name in (EVAL, TRAIN):
            pairs = [p for p in manifest.pairs if p.split == split_name]
        else:
            raise EmptyInput(f"unknown split {split_name!r}")
        if not pairs:
            raise EmptyInput(f"split {split_name!r} has no pairs")

        policy = NormalizationPolicy(historical_fold=fold)
        spec = resolve_engine(profile)
        reports = []
        lines = []
        for pair in pairs:
            image = load_binary(pair.image_path)
            image.meta["gt_text"] = pair.transcript
            result = ocr_page(image, None, spec, by_line=by_line, policy=policy,
                              max_workers=self.parallelism)
            report = char_accuracy(pair.transcript, result.text, policy,
                                   doc_id=pair.id, keep_ops=True)
            lines.append({"doc_id": pair.id,
                          "ref": pair.transcript, "hyp": result.text,
                          "ops": [op.to_json() for op in report.ops]})
            report.ops = None
            reports.append(report)
        total = aggregate(reports)
        payload = total.to_json()
        payload["lines"] = lines
        payload["parameters"] = {"profile": profile, "split": split_name,
                                 "fold": fold, "by_line": by_line}
        return self._persist(payload)

    def inject_counts(self, rows: list[dict]) -> str:
        """Build a report directly from externally computed counts."""
        if not rows:
            raise EmptyInput("no rows given")
        reports = [report_from_counts(str(r["doc_id"]), int(r["chars"]),
                                      int(r["errors"])) for r in rows]
        total = aggregate(reports)
        payload = total.to_json()
        payload["parameters"] = {"injected": True}
        return self._persist(payload)

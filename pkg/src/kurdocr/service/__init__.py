from .app import create_app
from .config import ServiceConfig, load_config
from .evalruns import EvalRunner, RunInFlight, UnknownReport
from .store import (CONFIRMED, DRAFT, UNLABELED, AnnotationStore,
                    AnnotationTask, JournalEntry, UnknownTask,
                    ValidationFailed, WriteConflict, read_journal,
                    replay_journal, text_hash)

__all__ = [
    "create_app", "ServiceConfig", "load_config", "EvalRunner",
    "RunInFlight", "UnknownReport", "CONFIRMED", "DRAFT", "UNLABELED",
    "AnnotationStore", "AnnotationTask", "JournalEntry", "UnknownTask",
    "ValidationFailed", "WriteConflict", "read_journal", "replay_journal",
    "text_hash",
]

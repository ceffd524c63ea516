"""Error hierarchy shared by all kurdocr modules.

Every domain error carries a stable ``code`` so the CLI and the HTTP
service can emit machine-parseable diagnostics.  ``stage`` is filled in
by pipeline code when an error is re-raised with attribution.
"""

from __future__ import annotations


class KurdocrError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "Error"

    def __init__(self, message: str = "", *, stage: str | None = None):
        super().__init__(message or self.code)
        self.stage = stage

    def to_json(self) -> dict:
        payload = {"error": self.code, "message": str(self)}
        if self.stage:
            payload["stage"] = self.stage
        return payload


class BadParameter(KurdocrError):
    code = "BadParameter"


class UnknownDpi(KurdocrError):
    code = "UnknownDpi"


class ImageTooLarge(KurdocrError):
    code = "ImageTooLarge"


class UndecodableImage(KurdocrError):
    code = "UndecodableImage"


class OutOfBounds(KurdocrError):
    code = "OutOfBounds"


class NotADirectory(KurdocrError):
    code = "NotADirectory"


class DuplicateId(KurdocrError):
    code = "DuplicateId"


class UnassignedSplit(KurdocrError):
    code = "UnassignedSplit"


class MissingGlyph(KurdocrError):
    code = "MissingGlyph"

    def __init__(self, codepoint: str, *, stage: str | None = None):
        super().__init__(f"no glyph for {codepoint}", stage=stage)
        self.codepoint = codepoint


class EmptyInput(KurdocrError):
    code = "EmptyInput"


class EngineNotFound(KurdocrError):
    code = "EngineNotFound"


class EngineTimeout(KurdocrError):
    code = "EngineTimeout"


class EngineFailure(KurdocrError):
    code = "EngineFailure"

    def __init__(self, message: str, *, exit_status: int | None = None,
                 stderr: str = "", stage: str | None = None):
        super().__init__(message, stage=stage)
        self.exit_status = exit_status
        self.stderr = stderr

    def to_json(self) -> dict:
        payload = super().to_json()
        payload["exit_status"] = self.exit_status
        payload["stderr"] = self.stderr
        return payload


class BadOutputEncoding(KurdocrError):
    code = "BadOutputEncoding"


class IoError(KurdocrError):
    code = "IoError"

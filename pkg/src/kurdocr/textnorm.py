"""Unicode normalization and validation for Sorani Kurdish transcripts.

Transcripts from different sources disagree on presentation forms,
Arabic-vs-Farsi yeh/kaf, digit blocks, and spacing; `normalize` maps
them onto one canonical shape so alignment counts real differences.
`historical_fold` additionally collapses the letters that pre-reform
presses substituted, so legacy prints and modern transcripts compare
as equal.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, asdict
from importlib import resources

from .errors import BadParameter

ZWNJ = "‌"
TATWEEL = "ـ"

# Unicode Arabic presentation form blocks
_PRESENTATION_RANGES = ((0xFB50, 0xFDFF), (0xFE70, 0xFEFF))

_YEH_KAF = str.maketrans({"ي": "ی", "ك": "ک"})

_DIACRITICS = re.compile("[ً-ٟ]")

_DIGITS_TO_ASCII = str.maketrans(
    "٠١٢٣٤٥٦٧٨٩"
    "۰۱۲۳۴۵۶۷۸۹",
    "01234567890123456789")

# modern letter -> the legacy letter old presses substituted for it
_HISTORICAL = str.maketrans({
    "گ": "ک",  # گ -> ک
    "ژ": "ز",  # ژ -> ز
    "چ": "ج",  # چ -> ج
    "پ": "ب",  # پ -> ب
    "ڕ": "ر",  # ڕ -> ر
    "ڵ": "ل",  # ڵ -> ل
})


@dataclass
class NormalizationPolicy:
    nfc: bool = True
    fold_presentation_forms: bool = True
    unify_yeh_kaf: bool = True
    strip_tatweel: bool = True
    digits: str = "preserve"  # or "to_ascii"
    strip_diacritics: bool = False
    collapse_whitespace: bool = True
    keep_zwnj: bool = True
    historical_fold: bool = False

    def __post_init__(self):
        if self.digits not in ("preserve", "to_ascii"):
            raise BadParameter(f"digits must be 'preserve' or 'to_ascii', got {self.digits!r}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "NormalizationPolicy":
        return cls(**data)


def _fold_presentation(text: str) -> str:
    out = []
    for ch in text:
        cp = ord(ch)
        if any(lo <= cp <= hi for lo, hi in _PRESENTATION_RANGES):
            out.append(unicodedata.normalize("NFKC", ch))
        else:
            out.append(ch)
    return "".join(out)


def normalize(text: str, policy: NormalizationPolicy | None = None) -> str:
    """Apply the policy's transforms in their fixed order; idempotent."""
    p = policy or NormalizationPolicy()
    if p.nfc:
        text = unicodedata.normalize("NFC", text)
    if p.fold_presentation_forms:
        text = _fold_presentation(text)
    if p.unify_yeh_kaf:
        text = text.translate(_YEH_KAF)
    if p.strip_tatweel:
        text = text.replace(TATWEEL, "")
    if p.digits == "to_ascii":
        text = text.translate(_DIGITS_TO_ASCII)
    if p.strip_diacritics:
        text = _DIACRITICS.sub("", text)
    if not p.keep_zwnj:
        text = text.replace(ZWNJ, "")
    if p.collapse_whitespace:
        text = " ".join(text.split())
    if p.nfc:
        # removals (tatweel, ZWNJ) can merge combining sequences into
        # non-canonical mark order; re-composing keeps the map idempotent
        text = unicodedata.normalize("NFC", text)
    if p.historical_fold:
        text = historical_fold(text)
    return text


def historical_fold(text: str) -> str:
    """Collapse modern Kurdish letters onto their legacy substitutes.

    One-to-one on code points, hence length-preserving and idempotent.
    Must be applied to both sides of any comparison.
    """
    return text.translate(_HISTORICAL)


# --------------------------------------------------------------- issues

EMPTY_TRANSCRIPT = "EmptyTranscript"
CONTAINS_NEWLINE = "ContainsNewline"
INVALID_ENCODING = "InvalidEncoding"
UNEXPECTED_CODEPOINT = "UnexpectedCodepoint"
EDGE_WHITESPACE = "EdgeWhitespace"
REPEATED_SPACE = "RepeatedSpace"


@dataclass(frozen=True)
class LineIssue:
    kind: str
    position: int | None = None
    detail: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind, "position": self.position, "detail": self.detail}


def parse_alphabet_text(text: str) -> frozenset[str]:
    """Parse a code-point list: one U+XXXX or U+XXXX..U+YYYY per line."""
    chars: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"U\+([0-9A-Fa-f]{4,6})(?:\.\.U\+([0-9A-Fa-f]{4,6}))?", line)
        if not m:
            raise BadParameter(f"alphabet line {lineno}: cannot parse {line!r}")
        lo = int(m.group(1), 16)
        hi = int(m.group(2), 16) if m.group(2) else lo
        if hi < lo:
            raise BadParameter(f"alphabet line {lineno}: inverted range {line!r}")
        chars.update(chr(cp) for cp in range(lo, hi + 1))
    return frozenset(chars)


def load_alphabet_file(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return parse_alphabet_text(fh.read())


def _default_alphabet() -> frozenset[str]:
    data = resources.files("kurdocr.data").joinpath("sorani_alphabet.txt").read_text("utf-8")
    return parse_alphabet_text(data)


DEFAULT_ALPHABET = _default_alphabet()

DEFAULT_PUNCTUATION = frozenset(
    ".,:;!?'\"()[]{}«»-–—/%&*+=_"
    "،؛؟٪٫٬")  # ، ؛ ؟ ٪ ٫ ٬

DEFAULT_DIGITS = frozenset("0123456789") | frozenset(
    chr(cp) for cp in range(0x0660, 0x066A)) | frozenset(
    chr(cp) for cp in range(0x06F0, 0x06FA))


def validate_line(text: str,
                  alphabet: frozenset[str] | None = None,
                  punctuation: frozenset[str] | None = None,
                  digits: frozenset[str] | None = None) -> list[LineIssue]:
    """Collect every problem with a single-line transcript.

    Issues are data, not failures; a clean line yields an empty list.
    """
    alphabet = DEFAULT_ALPHABET if alphabet is None else alphabet
    punctuation = DEFAULT_PUNCTUATION if punctuation is None else punctuation
    digits = DEFAULT_DIGITS if digits is None else digits
    allowed = alphabet | punctuation | digits | {" ", ZWNJ}

    issues: list[LineIssue] = []
    if text.strip() == "":
        issues.append(LineIssue(EMPTY_TRANSCRIPT, None, "transcript is empty"))
    for i, ch in enumerate(text):
        if ch in ("\n", "\r"):
            issues.append(LineIssue(CONTAINS_NEWLINE, i, "embedded line break"))
    if text:
        if text[0].isspace():
            issues.append(LineIssue(EDGE_WHITESPACE, 0, "leading whitespace"))
        if len(text) > 1 and text[-1].isspace():
            issues.append(LineIssue(EDGE_WHITESPACE, len(text) - 1, "trailing whitespace"))
    for m in re.finditer(r"\s{2,}", text):
        issues.append(LineIssue(REPEATED_SPACE, m.start(),
                                f"{len(m.group())} consecutive whitespace characters"))
    for i, ch in enumerate(text):
        if ch in allowed or ch in ("\n", "\r"):
            continue
        issues.append(LineIssue(UNEXPECTED_CODEPOINT, i,
                                f"U+{ord(ch):04X} {unicodedata.name(ch, '<unnamed>')}"))
    return issues


def decode_transcript(raw: bytes) -> tuple[str | None, list[LineIssue]]:
    """UTF-8 decode with InvalidEncoding reported at the byte offset."""
    try:
        return raw.decode("utf-8"), []
    except UnicodeDecodeError as exc:
        return None, [LineIssue(INVALID_ENCODING, exc.start,
                                f"invalid UTF-8 at byte {exc.start}: {exc.reason}")]

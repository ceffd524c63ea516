"""Reference/hypothesis alignment and accuracy arithmetic.

Characters are Unicode code points after normalization.  Accuracy
follows the ISRI convention (n - errors) / n and may be negative; the
aggregate over documents is always the micro-average computed from
summed counts, never the mean of per-document ratios.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal, getcontext

import numpy as np

from .errors import BadParameter, EmptyInput
from .textnorm import NormalizationPolicy, normalize

MATCH = "match"
SUBSTITUTE = "substitute"
INSERT = "insert"
DELETE = "delete"


@dataclass(frozen=True)
class EditOp:
    kind: str
    ref: str | None = None
    hyp: str | None = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "ref": self.ref, "hyp": self.hyp}


@dataclass
class Alignment:
    ops: list[EditOp]

    @property
    def distance(self) -> int:
        return sum(1 for op in self.ops if op.kind != MATCH)

    def reconstruct_ref(self) -> str:
        return "".join(op.ref for op in self.ops if op.ref is not None)

    def reconstruct_hyp(self) -> str:
        return "".join(op.hyp for op in self.ops if op.hyp is not None)


def _align_sequences(ref, hyp) -> list[EditOp]:
    m, n = len(ref), len(hyp)
    # unit-cost edit distance matrix
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        dp[i][0] = i
    for j in range(n + 1):
        dp[0][j] = j
    for i in range(1, m + 1):
        row = dp[i]
        prev = dp[i - 1]
        rc = ref[i - 1]
        for j in range(1, n + 1):
            if rc == hyp[j - 1]:
                row[j] = prev[j - 1]
            else:
                row[j] = 1 + min(prev[j - 1], prev[j], row[j - 1])
    # backtrace, preferring Match > Substitute > Delete > Insert
    ops: list[EditOp] = []
    i, j = m, n
    while i > 0 or j > 0:
        here = dp[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dp[i - 1][j - 1] == here:
            ops.append(EditOp(MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dp[i - 1][j - 1] + 1 == here:
            ops.append(EditOp(SUBSTITUTE, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and dp[i - 1][j] + 1 == here:
            ops.append(EditOp(DELETE, ref[i - 1], None))
            i = i - 1
        else:
            ops.append(EditOp(INSERT, None, hyp[j - 1]))
            j = j - 1
    ops.reverse()
    return ops


def align(ref: str, hyp: str) -> Alignment:
    """Minimum unit-cost edit script between two code point sequences."""
    return Alignment(_align_sequences(ref, hyp))


def _shared_ids(ref, hyp) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(ref, str) and isinstance(hyp, str):
        return (np.fromiter(map(ord, ref), dtype=np.int64, count=len(ref)),
                np.fromiter(map(ord, hyp), dtype=np.int64, count=len(hyp)))
    # token sequences share one table so equal tokens compare equal
    table: dict = {}
    return (np.fromiter((table.setdefault(t, len(table)) for t in ref),
                        dtype=np.int64, count=len(ref)),
            np.fromiter((table.setdefault(t, len(table)) for t in hyp),
                        dtype=np.int64, count=len(hyp)))


def edit_distance(ref, hyp) -> int:
    """Distance only, one vectorized matrix row at a time.

    dp[i][j] = min(cand[j], dp[i][j-1] + 1) with cand from the previous
    row unrolls to j + running-min of (cand - j), which keeps long page
    transcripts tractable.  Same metric as `align`, without the script.
    """
    ref_ids, hyp_ids = _shared_ids(ref, hyp)
    m, n = len(ref_ids), len(hyp_ids)
    if m == 0 or n == 0:
        return m or n
    j_idx = np.arange(n + 1, dtype=np.int64)
    prev = j_idx.copy()
    cand = np.empty(n + 1, dtype=np.int64)
    for i in range(1, m + 1):
        cost = (hyp_ids != ref_ids[i - 1]).astype(np.int64)
        cand[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + cost, out=cand[1:])
        prev = j_idx + np.minimum.accumulate(cand - j_idx)
    return int(prev[n])


def percent_display(numerator: int, denominator: int) -> str:
    """Exact half-up percentage with two decimals, e.g. '84.02'."""
    if denominator == 0:
        return "0.00"
    getcontext().prec = 50
    value = Decimal(numerator) * 100 / Decimal(denominator)
    return str(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def round_half_up(value: float, places: int = 2) -> float:
    getcontext().prec = 50
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


@dataclass
class WordStats:
    count: int = 0
    errors: int = 0
    wer: float = 0.0
    degenerate: bool = False


@dataclass
class EvalReport:
    doc_id: str
    chars: int
    errors: int
    accuracy: float
    cer: float
    word_count: int = 0
    word_errors: int = 0
    wer: float = 0.0
    degenerate: bool = False
    policy: NormalizationPolicy = field(default_factory=NormalizationPolicy)
    historical_fold: bool = False
    documents: list["EvalReport"] | None = None
    ops: list[EditOp] | None = None

    @property
    def accuracy_display(self) -> str:
        if self.chars > 0:
            return percent_display(self.chars - self.errors, self.chars)
        return percent_display(100 if self.errors == 0 else 0, 100)

    @property
    def cer_display(self) -> str:
        if self.chars > 0:
            return percent_display(self.errors, self.chars)
        return percent_display(0 if self.errors == 0 else 100, 100)

    def to_json(self, include_ops: bool = True) -> dict:
        data = {
            "doc_id": self.doc_id,
            "chars": self.chars,
            "errors": self.errors,
            "accuracy": self.accuracy,
            "cer": self.cer,
            "accuracy_display": self.accuracy_display,
            "cer_display": self.cer_display,
            "word_count": self.word_count,
            "word_errors": self.word_errors,
            "wer": self.wer,
            "degenerate": self.degenerate,
            "policy": self.policy.to_json(),
            "historical_fold": self.historical_fold,
        }
        if self.documents is not None:
            data["documents"] = [d.to_json(include_ops) for d in self.documents]
        if self.ops is not None and include_ops:
            data["ops"] = [op.to_json() for op in self.ops]
        return data


def report_from_counts(doc_id: str, chars: int, errors: int,
                       policy: NormalizationPolicy | None = None) -> EvalReport:
    """Build a report from externally computed (chars, errors) counts."""
    p = policy or NormalizationPolicy()
    if chars > 0:
        accuracy = (chars - errors) / chars
        cer = errors / chars
        degenerate = False
    else:
        accuracy = 1.0 if errors == 0 else 0.0
        cer = 0.0 if errors == 0 else 1.0
        degenerate = True
    return EvalReport(doc_id, chars, errors, accuracy, cer,
                      degenerate=degenerate, policy=p,
                      historical_fold=p.historical_fold)


def char_accuracy(ref: str, hyp: str, policy: NormalizationPolicy | None = None,
                  doc_id: str = "", keep_ops: bool = False) -> EvalReport:
    """Normalize both sides with the policy, align, and fill a report."""
    p = policy or NormalizationPolicy()
    nref = normalize(ref, p)
    nhyp = normalize(hyp, p)
    if keep_ops:
        alignment = align(nref, nhyp)
        errors = alignment.distance
    else:
        alignment = None
        errors = edit_distance(nref, nhyp)
    report = report_from_counts(doc_id, len(nref), errors, p)
    words = word_accuracy(ref, hyp, p)
    report.word_count = words.count
    report.word_errors = words.errors
    report.wer = words.wer
    if alignment is not None:
        report.ops = alignment.ops
    return report


def word_accuracy(ref: str, hyp: str,
                  policy: NormalizationPolicy | None = None) -> WordStats:
    """Unit-cost edit distance over whitespace-separated tokens."""
    p = policy or NormalizationPolicy()
    ref_tokens = normalize(ref, p).split()
    hyp_tokens = normalize(hyp, p).split()
    if not ref_tokens and not hyp_tokens:
        return WordStats(0, 0, 0.0, degenerate=True)
    errors = edit_distance(ref_tokens, hyp_tokens)
    count = len(ref_tokens)
    if count:
        return WordStats(count, errors, errors / count, degenerate=False)
    return WordStats(0, errors, 0.0 if errors == 0 else 1.0, degenerate=True)


def aggregate(reports: list[EvalReport]) -> EvalReport:
    """Micro-average: totals summed first, the ratio taken once."""
    if not reports:
        raise EmptyInput("cannot aggregate zero reports")
    chars = sum(r.chars for r in reports)
    errors = sum(r.errors for r in reports)
    total = report_from_counts("aggregate", chars, errors, reports[0].policy)
    total.word_count = sum(r.word_count for r in reports)
    total.word_errors = sum(r.word_errors for r in reports)
    total.wer = total.word_errors / total.word_count if total.word_count else 0.0
    total.documents = list(reports)
    return total


@dataclass(frozen=True)
class ConfusionRow:
    kind: str
    ref: str | None
    hyp: str | None
    count: int
    involves_space: bool

    def to_json(self) -> dict:
        return {"kind": self.kind, "ref": self.ref, "hyp": self.hyp,
                "count": self.count, "involves_space": self.involves_space}


def confusion_report(alignments: list[Alignment], top_k: int = 20) -> list[ConfusionRow]:
    """Most frequent substitutions/insertions/deletions, space ops flagged."""
    if top_k < 1:
        raise BadParameter(f"top_k must be >= 1, got {top_k}")
    counts: dict[tuple[str, str | None, str | None], int] = {}
    for alignment in alignments:
        for op in alignment.ops:
            if op.kind == MATCH:
                continue
            key = (op.kind, op.ref, op.hyp)
            counts[key] = counts.get(key, 0) + 1
    rows = [
        ConfusionRow(kind, ref, hyp, count, involves_space=" " in (ref, hyp))
        for (kind, ref, hyp), count in counts.items()
    ]
    rows.sort(key=lambda r: (-r.count, r.kind, r.ref or "", r.hyp or ""))
    return rows[:top_k]


_SPACE_MARK = "␣"  # visible low line for spaces in diffs
_GAP_MARK = "·"

_MARKERS = {MATCH: " ", SUBSTITUTE: "S", DELETE: "D", INSERT: "I"}


def render_diff(alignment: Alignment) -> str:
    """Three-line plain-text diff: ref row, hyp row, op marker row."""

    def cell(ch: str | None) -> str:
        if ch is None:
            return _GAP_MARK
        if ch == " ":
            return _SPACE_MARK
        return ch

    ref_row = "".join(cell(op.ref) for op in alignment.ops)
    hyp_row = "".join(cell(op.hyp) for op in alignment.ops)
    marks = "".join(_MARKERS[op.kind] for op in alignment.ops)
    return f"REF {ref_row}\nHYP {hyp_row}\nOPS {marks}"

"""Score response sheets: exact, similarity, acceptable, and Clozentropy.

All four methods put per-gap scores on a [0, 1] scale so totals stay
comparable. Cosine-based methods treat OOV answers as 0 and flag them
instead of failing, and an answer string-identical to the expected word
always scores 1 regardless of vocabulary coverage.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .cloze import ClozeTest, Gap, ResponseSheet
from .embeddings import EmbeddingModel, normalize_answer
from .errors import ClozeValError

METHODS = ("exact", "acceptable", "similarity", "clozentropy")

# Per-(student, gap) markers.
FLAG_BLANK = "blank"
FLAG_OOV = "oov"
FLAG_MULTIWORD = "multiword"
FLAG_EMPTY_POOL = "empty_pool"


@dataclass(frozen=True)
class StudentScore:
    scores: dict[int, float]
    total: float
    proportion: float


@dataclass(frozen=True)
class ScoreReport:
    test_id: str
    method: str
    gap_ids: tuple[int, ...]
    per_student: dict[str, StudentScore]
    flags: dict[str, dict[int, tuple[str, ...]]]
    # Signed cosine before clamping, kept for ranking use; None when unavailable.
    raw_cosine: dict[str, dict[int, float | None]] = field(default_factory=dict)

    def flags_for(self, student_id: str, gap_id: int) -> tuple[str, ...]:
        return self.flags.get(student_id, {}).get(gap_id, ())

    def to_dict(self) -> dict:
        out: dict = {
            "test_id": self.test_id,
            "method": self.method,
            "gap_ids": list(self.gap_ids),
            "students": {},
        }
        for sid, score in self.per_student.items():
            entry: dict = {
                "scores": {str(g): s for g, s in score.scores.items()},
                "total": score.total,
                "proportion": score.proportion,
                "flags": {
                    str(g): list(fl) for g, fl in sorted(self.flags.get(sid, {}).items())
                },
            }
            if sid in self.raw_cosine:
                entry["raw_cosine"] = {str(g): c for g, c in self.raw_cosine[sid].items()}
            out["students"][sid] = entry
        return out

    def to_csv_rows(self) -> list[list[str]]:
        rows = [["student_id", "gap_id", "method", "score", "flags"]]
        for sid, score in self.per_student.items():
            for gap_id in self.gap_ids:
                rows.append(
                    [
                        sid,
                        str(gap_id),
                        self.method,
                        format(score.scores[gap_id], ".10g"),
                        "|".join(self.flags_for(sid, gap_id)),
                    ]
                )
        return rows

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            csv.writer(fh).writerows(self.to_csv_rows())


_CellResult = tuple[float, tuple[str, ...], float | None]
_CellFn = Callable[[Gap, str, ResponseSheet], _CellResult]


def _build_report(
    test: ClozeTest,
    sheets: Sequence[ResponseSheet],
    method: str,
    cell: _CellFn,
    keep_raw: bool = False,
) -> ScoreReport:
    per_student: dict[str, StudentScore] = {}
    flags: dict[str, dict[int, tuple[str, ...]]] = {}
    raws: dict[str, dict[int, float | None]] = {}
    n_gaps = len(test.gaps)
    for sheet in sheets:
        scores: dict[int, float] = {}
        sheet_flags: dict[int, tuple[str, ...]] = {}
        sheet_raw: dict[int, float | None] = {}
        for gap in test.gaps:
            score, cell_flags, raw = cell(gap, sheet.answer_for(gap.gap_id), sheet)
            scores[gap.gap_id] = score
            if cell_flags:
                sheet_flags[gap.gap_id] = cell_flags
            sheet_raw[gap.gap_id] = raw
        total = float(sum(scores.values()))
        per_student[sheet.student_id] = StudentScore(
            scores=scores, total=total, proportion=total / n_gaps
        )
        if sheet_flags:
            flags[sheet.student_id] = sheet_flags
        if keep_raw:
            raws[sheet.student_id] = sheet_raw
    return ScoreReport(
        test_id=test.id,
        method=method,
        gap_ids=test.gap_ids,
        per_student=per_student,
        flags=flags,
        raw_cosine=raws,
    )


def score_exact(test: ClozeTest, sheets: Sequence[ResponseSheet]) -> ScoreReport:
    """Right/wrong credit: 1 only when the normalized answer equals the deleted word."""

    def cell(gap: Gap, raw_answer: str, sheet: ResponseSheet) -> _CellResult:
        norm = normalize_answer(raw_answer)
        if not norm:
            return 0.0, (FLAG_BLANK,), None
        return (1.0 if norm == gap.expected else 0.0), (), None

    return _build_report(test, sheets, "exact", cell)


def _similarity_cell(gap: Gap, raw_answer: str, model: EmbeddingModel) -> _CellResult:
    norm = normalize_answer(raw_answer)
    if not norm:
        return 0.0, (FLAG_BLANK,), None
    if norm == gap.expected:
        return 1.0, (), 1.0
    tokens = norm.split()
    cell_flags: list[str] = []
    if len(tokens) > 1:
        cell_flags.append(FLAG_MULTIWORD)
        answer_vec = model.phrase_vector(tokens)
    else:
        answer_vec = model.lookup(tokens[0])
    expected_vec = model.lookup(gap.expected)
    if answer_vec is None or expected_vec is None:
        cell_flags.append(FLAG_OOV)
        return 0.0, tuple(cell_flags), None
    raw = min(1.0, max(-1.0, float(np.dot(answer_vec, expected_vec))))
    return max(0.0, raw), tuple(cell_flags), raw


def score_similarity(
    test: ClozeTest, sheets: Sequence[ResponseSheet], model: EmbeddingModel
) -> ScoreReport:
    """Cosine credit: max(0, cos(answer, expected)); multi-word answers use the
    renormalized mean of their token vectors."""

    def cell(gap: Gap, raw_answer: str, sheet: ResponseSheet) -> _CellResult:
        return _similarity_cell(gap, raw_answer, model)

    return _build_report(test, sheets, "similarity", cell, keep_raw=True)


def score_acceptable(
    test: ClozeTest,
    sheets: Sequence[ResponseSheet],
    model: EmbeddingModel,
    threshold: float = 0.5,
) -> ScoreReport:
    """Binary credit for exact matches or similarity at/above the threshold."""
    if not 0.0 < threshold <= 1.0:
        raise ClozeValError(f"acceptable threshold must be in (0, 1], got {threshold}")

    def cell(gap: Gap, raw_answer: str, sheet: ResponseSheet) -> _CellResult:
        score, cell_flags, raw = _similarity_cell(gap, raw_answer, model)
        return (1.0 if score >= threshold else 0.0), cell_flags, raw

    return _build_report(test, sheets, "acceptable", cell)


def score_clozentropy(
    test: ClozeTest,
    sheets: Sequence[ResponseSheet],
    criterion: Sequence[ResponseSheet] | None = None,
    leave_one_out: bool = True,
) -> ScoreReport:
    """Criterion-group relative frequency of each answer.

    The score for a gap is (matching criterion answers) / (non-blank criterion
    answers). With leave_one_out (the default) a student's own response is
    removed from their pool, preventing self-agreement inflation.
    """
    group = list(sheets) if criterion is None else list(criterion)
    if not group:
        raise ClozeValError("clozentropy needs a non-empty criterion group")
    counts: dict[int, Counter] = {g.gap_id: Counter() for g in test.gaps}
    totals: dict[int, int] = {g.gap_id: 0 for g in test.gaps}
    own_answers: dict[int, dict[str, str]] = {g.gap_id: {} for g in test.gaps}
    for sheet in group:
        for gap in test.gaps:
            norm = normalize_answer(sheet.answer_for(gap.gap_id))
            own_answers[gap.gap_id][sheet.student_id] = norm
            if norm:
                counts[gap.gap_id][norm] += 1
                totals[gap.gap_id] += 1

    def cell(gap: Gap, raw_answer: str, sheet: ResponseSheet) -> _CellResult:
        norm = normalize_answer(raw_answer)
        if not norm:
            return 0.0, (FLAG_BLANK,), None
        pool = totals[gap.gap_id]
        matches = counts[gap.gap_id].get(norm, 0)
        if leave_one_out and sheet.student_id in own_answers[gap.gap_id]:
            own = own_answers[gap.gap_id][sheet.student_id]
            if own:
                pool -= 1
                if own == norm:
                    matches -= 1
        if pool <= 0:
            return 0.0, (FLAG_EMPTY_POOL,), None
        return matches / pool, (), None

    return _build_report(test, sheets, "clozentropy", cell)

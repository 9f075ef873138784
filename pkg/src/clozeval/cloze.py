"""Cloze test construction and ingestion of tests and response sheets.

A Cloze test deletes every nth word of a passage after an intact lead-in.
Tokenization is whitespace-based with punctuation left attached to its word,
which keeps the passage renderable; expected answers are stored normalized.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .embeddings import _is_punct, normalize_token
from .errors import ClozeError, IngestError

BLANK_MARKER = "_____"

_SENTENCE_ENDINGS = ".!?"


def split_affixes(token: str) -> tuple[str, str, str]:
    """Split a token into (leading punctuation, word core, trailing punctuation)."""
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[:start], token[start:end], token[end:]


def _ends_sentence(token: str) -> bool:
    prefix, core, suffix = split_affixes(token)
    tail = suffix if core else token
    return any(ch in _SENTENCE_ENDINGS for ch in tail)


@dataclass(frozen=True)
class Gap:
    """One deleted word: 1-based ordinal id, 1-based word position, the
    normalized expected answer, and the containing sentence with the blank."""

    gap_id: int
    position: int
    expected: str
    context: str


@dataclass(frozen=True)
class ClozeTest:
    id: str
    title: str
    tokens: tuple[str, ...]
    lead_len: int
    interval: int
    gaps: tuple[Gap, ...]

    def gap(self, gap_id: int) -> Gap:
        for g in self.gaps:
            if g.gap_id == gap_id:
                return g
        raise ClozeError(f"test {self.id!r} has no gap {gap_id}")

    @property
    def gap_ids(self) -> tuple[int, ...]:
        return tuple(g.gap_id for g in self.gaps)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "text": " ".join(self.tokens),
            "lead_len": self.lead_len,
            "interval": self.interval,
            "gaps": [
                {"gap_id": g.gap_id, "position": g.position, "expected": g.expected}
                for g in self.gaps
            ],
        }


@dataclass(frozen=True)
class ResponseSheet:
    """One student's raw answers keyed by gap id; missing gaps mean blank."""

    student_id: str
    answers: dict[int, str] = field(default_factory=dict)

    def answer_for(self, gap_id: int) -> str:
        return self.answers.get(gap_id, "")


def _sentence_span(tokens: tuple[str, ...], position: int) -> tuple[int, int]:
    """0-based [start, end] token indices of the sentence holding ``position``."""
    idx = position - 1
    start = 0
    for i in range(idx - 1, -1, -1):
        if _ends_sentence(tokens[i]):
            start = i + 1
            break
    end = len(tokens) - 1
    for i in range(idx, len(tokens)):
        if _ends_sentence(tokens[i]):
            end = i
            break
    return start, end


def _blank_token(token: str, marker: str) -> str:
    prefix, core, suffix = split_affixes(token)
    if not core:
        return marker
    return prefix + marker + suffix


def _build_context(tokens: tuple[str, ...], position: int, marker: str = BLANK_MARKER) -> str:
    start, end = _sentence_span(tokens, position)
    parts = list(tokens[start : end + 1])
    parts[position - 1 - start] = _blank_token(tokens[position - 1], marker)
    return " ".join(parts)


def generate_cloze(
    text: str,
    lead_len: int = 16,
    interval: int = 5,
    test_id: str = "cloze",
    title: str = "",
) -> ClozeTest:
    """Build a ClozeTest by deleting every ``interval``-th word after the lead-in.

    The first gap sits at word ``lead_len + 1`` (1-based) and the rest follow
    at period ``interval``, so a 200-word passage with the defaults yields 37
    gaps. Expected answers are the normalized source words at those positions.
    """
    if interval < 2:
        raise ClozeError(f"interval must be at least 2, got {interval}")
    if lead_len < 0:
        raise ClozeError(f"lead_len must be non-negative, got {lead_len}")
    tokens = tuple(text.split())
    if len(tokens) <= lead_len:
        raise ClozeError(
            f"text has {len(tokens)} words; need more than the {lead_len}-word lead-in"
        )
    gaps: list[Gap] = []
    for ordinal, pos in enumerate(range(lead_len + 1, len(tokens) + 1, interval), start=1):
        expected = normalize_token(tokens[pos - 1])
        if not expected:
            raise ClozeError(
                f"gap {ordinal} would fall on {tokens[pos - 1]!r} at word {pos}, which has no word core"
            )
        gaps.append(
            Gap(
                gap_id=ordinal,
                position=pos,
                expected=expected,
                context=_build_context(tokens, pos),
            )
        )
    return ClozeTest(
        id=test_id,
        title=title,
        tokens=tokens,
        lead_len=lead_len,
        interval=interval,
        gaps=tuple(gaps),
    )


def render_cloze(test: ClozeTest, marker: str = BLANK_MARKER) -> str:
    """Render the passage with every gap blanked; the title is never gapped."""
    out = list(test.tokens)
    for gap in test.gaps:
        out[gap.position - 1] = _blank_token(test.tokens[gap.position - 1], marker)
    body = " ".join(out)
    if test.title:
        return f"{test.title}\n\n{body}"
    return body


def extract_context(test: ClozeTest, gap_id: int) -> str:
    """Sentence containing the gap, with only this gap blanked.

    Sentences are bounded by ., ! or ? (or the passage edges). A sibling gap
    sharing the sentence stays visible as its source word.
    """
    return test.gap(gap_id).context


def write_test_file(test: ClozeTest, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(test.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


def parse_test_file(path: str | Path) -> ClozeTest:
    """Load a test definition JSON file.

    The gap list is optional on input; gaps are always regenerated from
    text/lead_len/interval, and a declared gap list must match regeneration.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise IngestError(f"{path}: expected a JSON object")
    for key in ("id", "title", "text", "lead_len", "interval"):
        if key not in data:
            raise IngestError(f"{path}: missing required key {key!r}")
    if not isinstance(data["id"], str) or not data["id"]:
        raise IngestError(f"{path}: 'id' must be a non-empty string")
    if not isinstance(data["title"], str):
        raise IngestError(f"{path}: 'title' must be a string")
    if not isinstance(data["text"], str):
        raise IngestError(f"{path}: 'text' must be a string")
    if not isinstance(data["lead_len"], int) or not isinstance(data["interval"], int):
        raise IngestError(f"{path}: 'lead_len' and 'interval' must be integers")
    test = generate_cloze(
        data["text"],
        lead_len=data["lead_len"],
        interval=data["interval"],
        test_id=data["id"],
        title=data["title"],
    )
    declared = data.get("gaps")
    if declared is not None:
        if not isinstance(declared, list):
            raise IngestError(f"{path}: 'gaps' must be a list")
        try:
            given = [(g["gap_id"], g["position"], g["expected"]) for g in declared]
        except (TypeError, KeyError) as exc:
            raise IngestError(f"{path}: malformed gap entry: {exc}") from exc
        actual = [(g.gap_id, g.position, g.expected) for g in test.gaps]
        if given != actual:
            for have, want in zip(given, actual):
                if have != want:
                    raise IngestError(
                        f"{path}: declared gap {have} does not match regenerated gap {want}"
                    )
            raise IngestError(
                f"{path}: declared {len(given)} gaps but regeneration yields {len(actual)}"
            )
    return test


RESPONSES_HEADER = ("student_id", "gap_id", "answer")


def parse_responses(path: str | Path, test: ClozeTest) -> list[ResponseSheet]:
    """Load student answers from CSV with header ``student_id,gap_id,answer``.

    Answers are kept raw; normalization happens at scoring time. Rows naming
    unknown gaps and duplicate (student, gap) pairs are rejected with their
    row number.
    """
    path = Path(path)
    valid_gaps = set(test.gap_ids)
    sheets: dict[str, dict[int, str]] = {}
    seen: set[tuple[str, int]] = set()
    try:
        fh = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty responses file") from None
        if tuple(h.strip() for h in header) != RESPONSES_HEADER:
            raise IngestError(
                f"{path}: header must be {','.join(RESPONSES_HEADER)!r}, got {','.join(header)!r}"
            )
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise IngestError(f"{path}, row {row_no}: expected 3 fields, got {len(row)}")
            student_id, gap_field, answer = row
            student_id = student_id.strip()
            if not student_id:
                raise IngestError(f"{path}, row {row_no}: empty student_id")
            try:
                gap_id = int(gap_field)
            except ValueError:
                raise IngestError(
                    f"{path}, row {row_no}: gap_id must be an integer, got {gap_field!r}"
                ) from None
            if gap_id not in valid_gaps:
                raise IngestError(
                    f"{path}, row {row_no}: unknown gap_id {gap_id} for test {test.id!r}"
                )
            if (student_id, gap_id) in seen:
                raise IngestError(
                    f"{path}, row {row_no}: duplicate answer for student {student_id!r}, gap {gap_id}"
                )
            seen.add((student_id, gap_id))
            sheets.setdefault(student_id, {})[gap_id] = answer
    return [ResponseSheet(student_id=sid, answers=ans) for sid, ans in sheets.items()]


def write_responses(sheets: list[ResponseSheet], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESPONSES_HEADER)
        for sheet in sheets:
            for gap_id in sorted(sheet.answers):
                writer.writerow([sheet.student_id, gap_id, sheet.answers[gap_id]])

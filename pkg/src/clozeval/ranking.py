"""Per-gap candidate rankings, judge aggregation, and Spearman correlation.

Ranks are 1-based with ties carrying fractional midranks, which keeps rank
sums at n(n+1)/2 and makes Pearson-on-ranks the correct tie-aware Spearman.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .cloze import ClozeTest, Gap, ResponseSheet
from .embeddings import EmbeddingModel, normalize_answer
from .errors import DegenerateRankingError, IngestError, RankingError

CONSENSUS_RANKER = "consensus"


def midranks(values: Sequence[float], descending: bool = False) -> list[float]:
    """Rank positions 1..n with exactly-equal values sharing their mean position."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i], reverse=descending)
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j + 2) / 2  # mean of 1-based positions i+1 .. j+1
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


@dataclass(frozen=True)
class RankingTable:
    """One ranker's ordering of a gap's candidates.

    ``degenerate`` marks tables where no real ordering exists (for a model,
    an OOV expected word ties every candidate).
    """

    gap_id: int
    ranker_id: str
    entries: tuple[tuple[str, float], ...]
    degenerate: bool = False

    @property
    def candidates(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.entries)

    @property
    def rank_map(self) -> dict[str, float]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def validate(self) -> None:
        """Check candidate uniqueness and that ranks form a midrank assignment."""
        names = [c for c, _ in self.entries]
        if len(set(names)) != len(names):
            dupes = sorted({c for c in names if names.count(c) > 1})
            raise RankingError(
                f"table {self.ranker_id!r}/gap {self.gap_id}: duplicate candidates {dupes}"
            )
        ranks = sorted(r for _, r in self.entries)
        i = 0
        while i < len(ranks):
            j = i
            while j + 1 < len(ranks) and ranks[j + 1] == ranks[i]:
                j += 1
            expected = (i + j + 2) / 2
            if not math.isclose(ranks[i], expected, abs_tol=1e-9):
                raise RankingError(
                    f"table {self.ranker_id!r}/gap {self.gap_id}: rank {ranks[i]} at sorted "
                    f"position {i + 1} is not a valid midrank (expected {expected})"
                )
            i = j + 1

    def to_dict(self) -> dict:
        return {
            "gap_id": self.gap_id,
            "ranker_id": self.ranker_id,
            "entries": [{"candidate": c, "rank": r} for c, r in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict, source: str = "<memory>") -> "RankingTable":
        try:
            gap_id = int(data["gap_id"])
            ranker_id = str(data["ranker_id"])
            entries = tuple(
                (str(e["candidate"]), float(e["rank"])) for e in data["entries"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise IngestError(f"{source}: malformed ranking table: {exc}") from exc
        table = cls(gap_id=gap_id, ranker_id=ranker_id, entries=entries)
        try:
            table.validate()
        except RankingError as exc:
            raise IngestError(f"{source}: {exc}") from exc
        return table

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )


def _table(gap_id: int, ranker_id: str, candidates: Sequence[str], ranks: Sequence[float],
           degenerate: bool = False) -> RankingTable:
    order = sorted(range(len(candidates)), key=lambda i: (ranks[i], candidates[i]))
    entries = tuple((candidates[i], ranks[i]) for i in order)
    return RankingTable(gap_id=gap_id, ranker_id=ranker_id, entries=entries, degenerate=degenerate)


def collect_candidates(test: ClozeTest, sheets: Sequence[ResponseSheet], gap_id: int) -> list[str]:
    """Distinct normalized non-blank answers for a gap, most frequent first,
    ties broken lexicographically."""
    test.gap(gap_id)  # raises on unknown gap
    counter: Counter[str] = Counter()
    for sheet in sheets:
        norm = normalize_answer(sheet.answer_for(gap_id))
        if norm:
            counter[norm] += 1
    return sorted(counter, key=lambda c: (-counter[c], c))


def filter_gaps(
    test: ClozeTest, sheets: Sequence[ResponseSheet], min_alternatives: int = 10
) -> list[int]:
    """Gap ids whose distinct candidate count strictly exceeds ``min_alternatives``."""
    return [
        g.gap_id
        for g in test.gaps
        if len(collect_candidates(test, sheets, g.gap_id)) > min_alternatives
    ]


def rank_by_similarity(
    gap: Gap, candidates: Sequence[str], model: EmbeddingModel, ranker_id: str | None = None
) -> RankingTable:
    """Rank candidates by descending signed cosine to the gap's expected word.

    OOV candidates tie below every in-vocabulary candidate so that candidate
    sets stay identical across rankers. An OOV expected word yields a
    degenerate all-tied table.
    """
    if not candidates:
        raise RankingError(f"gap {gap.gap_id}: no candidates to rank")
    ranker = ranker_id or model.name
    expected_vec = model.lookup(gap.expected)
    n = len(candidates)
    if expected_vec is None:
        ranks = [(n + 1) / 2] * n
        return _table(gap.gap_id, ranker, candidates, ranks, degenerate=True)
    keys: list[float] = []
    for candidate in candidates:
        if candidate == gap.expected:
            keys.append(1.0)
            continue
        tokens = candidate.split()
        vec = model.phrase_vector(tokens) if len(tokens) > 1 else model.lookup(candidate)
        if vec is None:
            keys.append(-math.inf)  # OOV: below any real cosine, tied together
        else:
            keys.append(min(1.0, max(-1.0, float(vec @ expected_vec))))
    ranks = midranks(keys, descending=True)
    return _table(gap.gap_id, ranker, candidates, ranks)


def aggregate_judges(tables: Sequence[RankingTable]) -> RankingTable:
    """Mean-rank consensus across judges, re-ranked with midranks."""
    if not tables:
        raise RankingError("cannot aggregate zero judge tables")
    gap_id = tables[0].gap_id
    base = set(tables[0].candidates)
    for t in tables[1:]:
        if t.gap_id != gap_id:
            raise RankingError(f"mixed gaps in aggregation: {gap_id} vs {t.gap_id}")
        if set(t.candidates) != base:
            missing = sorted(base - set(t.candidates))
            extra = sorted(set(t.candidates) - base)
            raise RankingError(
                f"gap {gap_id}: judge {t.ranker_id!r} candidate set differs "
                f"(missing {missing}, extra {extra})"
            )
    candidates = sorted(base)
    mean_ranks = [
        sum(t.rank_map[c] for t in tables) / len(tables) for c in candidates
    ]
    ranks = midranks(mean_ranks)
    return _table(gap_id, CONSENSUS_RANKER, candidates, ranks)


def drop_top_ranked(table: RankingTable) -> RankingTable:
    """Remove every candidate tied at the minimal rank and re-rank the rest."""
    if len(table.entries) < 2:
        raise RankingError(
            f"gap {table.gap_id}: need at least 2 candidates to drop the top one"
        )
    top = min(r for _, r in table.entries)
    survivors = [(c, r) for c, r in table.entries if r != top]
    if not survivors:
        raise RankingError(
            f"gap {table.gap_id}: all candidates tied at first position; nothing would remain"
        )
    names = [c for c, _ in survivors]
    ranks = midranks([r for _, r in survivors])
    return _table(table.gap_id, table.ranker_id, names, ranks, degenerate=table.degenerate)


def restrict_table(table: RankingTable, keep: Sequence[str]) -> RankingTable:
    """Project a table onto a candidate subset, recomputing midranks.

    Relative order (and tie structure) among surviving candidates is kept.
    """
    keep_set = set(keep)
    unknown = keep_set - set(table.candidates)
    if unknown:
        raise RankingError(
            f"gap {table.gap_id}: table {table.ranker_id!r} lacks candidates {sorted(unknown)}"
        )
    survivors = [(c, r) for c, r in table.entries if c in keep_set]
    names = [c for c, _ in survivors]
    ranks = midranks([r for _, r in survivors])
    return _table(table.gap_id, table.ranker_id, names, ranks, degenerate=table.degenerate)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation; on midrank vectors this is the tie-aware Spearman."""
    n = len(xs)
    if n != len(ys):
        raise RankingError(f"length mismatch: {n} vs {len(ys)}")
    if n < 2:
        raise RankingError("correlation needs at least 2 points")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    sxx = sum(d * d for d in dx)
    syy = sum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateRankingError("zero variance in a rank vector")
    if list(xs) == list(ys):
        return 1.0
    r = sum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def spearman(x: RankingTable, y: RankingTable) -> float:
    """Spearman rho between two rankings of the same candidate set.

    Computed as Pearson on the rank vectors; with no ties this equals
    1 - 6*sum(d^2) / (n(n^2-1)).
    """
    if set(x.candidates) != set(y.candidates):
        missing = sorted(set(x.candidates) - set(y.candidates))
        extra = sorted(set(y.candidates) - set(x.candidates))
        raise RankingError(
            f"candidate sets differ between {x.ranker_id!r} and {y.ranker_id!r} "
            f"(only in first: {missing}, only in second: {extra})"
        )
    order = sorted(x.candidates)
    x_map, y_map = x.rank_map, y.rank_map
    return pearson([x_map[c] for c in order], [y_map[c] for c in order])

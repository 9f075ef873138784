"""End-to-end validation: model rankings vs judge rankings.

Pipeline: keep gaps with enough distinct answers, build candidate lists,
rank candidates per embedding model, aggregate judge rankings into a
consensus, drop each gap's top consensus pick, then compare everything with
Spearman correlations and an aligned-rank-transform ANOVA over the rankers.
"""

from __future__ import annotations

import copy
import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .artstats import AnovaTable, art_anova
from .cloze import ClozeTest, ResponseSheet
from .embeddings import EmbeddingModel
from .errors import DegenerateRankingError, IngestError, PipelineError
from .ranking import (
    CONSENSUS_RANKER,
    RankingTable,
    aggregate_judges,
    collect_candidates,
    drop_top_ranked,
    filter_gaps,
    pearson,
    rank_by_similarity,
    restrict_table,
)


@dataclass(frozen=True)
class JudgeSession:
    """One judge's submitted rankings, as persisted by the serve mode."""

    session_id: str
    judge_id: str
    rankings: dict[int, RankingTable]
    submitted_at: dict[int, str] = field(default_factory=dict)
    complete: bool = False

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "judge_id": self.judge_id,
            "rankings": {str(g): t.to_dict() for g, t in sorted(self.rankings.items())},
            "submitted_at": {str(g): ts for g, ts in sorted(self.submitted_at.items())},
            "complete": self.complete,
        }

    @classmethod
    def from_dict(cls, data: dict, source: str = "<memory>") -> "JudgeSession":
        try:
            session_id = str(data["session_id"])
            judge_id = str(data["judge_id"])
            raw_rankings = data["rankings"]
        except (KeyError, TypeError) as exc:
            raise IngestError(f"{source}: malformed judge session: {exc}") from exc
        if not judge_id:
            raise IngestError(f"{source}: empty judge_id")
        rankings: dict[int, RankingTable] = {}
        for key, table_data in raw_rankings.items():
            table = RankingTable.from_dict(table_data, source=source)
            if int(key) != table.gap_id:
                raise IngestError(
                    f"{source}: rankings key {key} does not match table gap_id {table.gap_id}"
                )
            rankings[table.gap_id] = table
        submitted_at = {int(k): str(v) for k, v in data.get("submitted_at", {}).items()}
        return cls(
            session_id=session_id,
            judge_id=judge_id,
            rankings=rankings,
            submitted_at=submitted_at,
            complete=bool(data.get("complete", False)),
        )

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


def load_judge_sessions(directory: str | Path) -> list[JudgeSession]:
    """Load every ``*.json`` judge session in a directory, sorted by filename."""
    directory = Path(directory)
    if not directory.is_dir():
        raise IngestError(f"judge rankings directory not found: {directory}")
    sessions: list[JudgeSession] = []
    seen: dict[str, str] = {}
    for path in sorted(directory.glob("*.json")):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestError(f"{path}: cannot load judge session: {exc}") from exc
        session = JudgeSession.from_dict(data, source=str(path))
        if session.judge_id in seen:
            raise IngestError(
                f"{path}: duplicate judge_id {session.judge_id!r} (already in {seen[session.judge_id]})"
            )
        seen[session.judge_id] = str(path)
        sessions.append(session)
    if not sessions:
        raise IngestError(f"no judge session files in {directory}")
    return sessions


@dataclass(frozen=True)
class StatsReport:
    """Correlation matrix plus ART ANOVA for one validation run."""

    test_id: str
    gap_selection: list[int]
    dropped_words: dict[int, list[str]]
    rankers: list[str]
    spearman_concatenated: dict[str, dict[str, float]]
    spearman_per_gap: dict[int, dict[str, dict[str, float | None]]]
    judge_consensus_correlation: dict[str, float]
    model_consensus_correlation: dict[str, float]
    best_model: str
    anova: list[AnovaTable]
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "test_id": self.test_id,
            "gap_selection": list(self.gap_selection),
            "dropped_words": {str(g): list(w) for g, w in sorted(self.dropped_words.items())},
            "rankers": list(self.rankers),
            "spearman_concatenated": {
                a: dict(row) for a, row in self.spearman_concatenated.items()
            },
            "spearman_per_gap": {
                str(g): {a: dict(row) for a, row in m.items()}
                for g, m in sorted(self.spearman_per_gap.items())
            },
            "judge_consensus_correlation": dict(self.judge_consensus_correlation),
            "model_consensus_correlation": dict(self.model_consensus_correlation),
            "best_model": self.best_model,
            "anova": [t.to_dict() for t in self.anova],
            "provenance": copy.deepcopy(self.provenance),
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def write_spearman_csv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["ranker_a", "ranker_b", "rho"])
            for a in self.rankers:
                for b in self.rankers:
                    writer.writerow([a, b, format(self.spearman_concatenated[a][b], ".10g")])

    def write_anova_csv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["effect", "F", "df_num", "df_den", "p"])
            for t in self.anova:
                writer.writerow(
                    [t.effect, format(t.F, ".10g"), t.df_num, t.df_den, format(t.p, ".10g")]
                )


def _concatenated_vector(
    tables_by_gap: Mapping[int, Mapping[str, RankingTable]],
    gap_order: Sequence[int],
    ranker: str,
) -> list[float]:
    vec: list[float] = []
    for gap_id in gap_order:
        table = tables_by_gap[gap_id][ranker]
        rank_map = table.rank_map
        for candidate in sorted(rank_map):
            vec.append(rank_map[candidate])
    return vec


def run_validation(
    test: ClozeTest,
    sheets: Sequence[ResponseSheet],
    sessions: Sequence[JudgeSession],
    models: Mapping[str, EmbeddingModel],
    min_alternatives: int = 10,
    config_snapshot: dict | None = None,
) -> StatsReport:
    """Compare model rankings against judge rankings and build a StatsReport."""
    if not models:
        raise PipelineError("validation needs at least one embedding model")
    if not sessions:
        raise PipelineError("validation needs at least one judge session")
    model_names = sorted(models)
    reserved = set(model_names) & {CONSENSUS_RANKER}
    if reserved:
        raise PipelineError(f"model name {sorted(reserved)} collides with the consensus ranker")

    selected = filter_gaps(test, sheets, min_alternatives)
    if not selected:
        raise PipelineError(
            f"no gaps have more than {min_alternatives} distinct answers; nothing to validate"
        )

    rankers = model_names + [CONSENSUS_RANKER]
    tables_by_gap: dict[int, dict[str, RankingTable]] = {}
    judge_tables_by_gap: dict[int, dict[str, RankingTable]] = {}
    dropped_words: dict[int, list[str]] = {}
    usable_gaps: list[int] = []

    for gap_id in selected:
        gap = test.gap(gap_id)
        candidates = collect_candidates(test, sheets, gap_id)
        candidate_set = set(candidates)
        judge_tables: list[RankingTable] = []
        for session in sessions:
            table = session.rankings.get(gap_id)
            if table is None:
                raise PipelineError(
                    f"judge {session.judge_id!r} has no ranking for selected gap {gap_id}"
                )
            if set(table.candidates) != candidate_set:
                missing = sorted(candidate_set - set(table.candidates))
                extra = sorted(set(table.candidates) - candidate_set)
                raise PipelineError(
                    f"gap {gap_id}: judge {session.judge_id!r} ranked a different candidate set "
                    f"(missing {missing}, extra {extra})"
                )
            judge_tables.append(
                RankingTable(
                    gap_id=table.gap_id,
                    ranker_id=session.judge_id,
                    entries=table.entries,
                )
            )
        consensus = aggregate_judges(judge_tables)
        reduced_consensus = drop_top_ranked(consensus)
        survivors = reduced_consensus.candidates
        dropped_words[gap_id] = sorted(candidate_set - set(survivors))
        if len(survivors) < 2:
            # One survivor gives a rank vector with no variance; the gap can
            # contribute nothing to correlations or the ANOVA.
            continue
        usable_gaps.append(gap_id)
        per_ranker: dict[str, RankingTable] = {CONSENSUS_RANKER: reduced_consensus}
        for name in model_names:
            model_table = rank_by_similarity(gap, candidates, models[name], ranker_id=name)
            per_ranker[name] = restrict_table(model_table, survivors)
        tables_by_gap[gap_id] = per_ranker
        judge_tables_by_gap[gap_id] = {
            t.ranker_id: restrict_table(t, survivors) for t in judge_tables
        }

    if not usable_gaps:
        raise PipelineError("every selected gap collapsed to fewer than 2 candidates")

    spearman_concat: dict[str, dict[str, float]] = {r: {} for r in rankers}
    vectors = {r: _concatenated_vector(tables_by_gap, usable_gaps, r) for r in rankers}
    for a in rankers:
        for b in rankers:
            spearman_concat[a][b] = 1.0 if a == b else pearson(vectors[a], vectors[b])

    per_gap: dict[int, dict[str, dict[str, float | None]]] = {}
    for gap_id in usable_gaps:
        matrix: dict[str, dict[str, float | None]] = {r: {} for r in rankers}
        for a in rankers:
            for b in rankers:
                if a == b:
                    matrix[a][b] = 1.0
                    continue
                try:
                    rho = pearson(
                        _concatenated_vector(tables_by_gap, [gap_id], a),
                        _concatenated_vector(tables_by_gap, [gap_id], b),
                    )
                except DegenerateRankingError:
                    rho = None
                matrix[a][b] = rho
        per_gap[gap_id] = matrix

    judge_ids = sorted(judge_tables_by_gap[usable_gaps[0]])
    judge_consensus: dict[str, float] = {}
    for judge_id in judge_ids:
        jvec = _concatenated_vector(judge_tables_by_gap, usable_gaps, judge_id)
        judge_consensus[judge_id] = pearson(jvec, vectors[CONSENSUS_RANKER])

    model_consensus = {m: spearman_concat[m][CONSENSUS_RANKER] for m in model_names}
    best_model = max(model_names, key=lambda m: (model_consensus[m], m))

    observations = []
    for gap_id in usable_gaps:
        for ranker in rankers:
            for _, rank in tables_by_gap[gap_id][ranker].entries:
                observations.append((rank, {"ranker": ranker}))
    anova = art_anova(observations)

    provenance = {
        "test_id": test.id,
        "models": {
            name: (models[name].summary.path if models[name].summary else models[name].name)
            for name in model_names
        },
        "min_alternatives": min_alternatives,
        "judge_count": len(sessions),
        "student_count": len(sheets),
        "config": config_snapshot or {},
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    return StatsReport(
        test_id=test.id,
        gap_selection=list(selected),
        dropped_words=dropped_words,
        rankers=rankers,
        spearman_concatenated=spearman_concat,
        spearman_per_gap=per_gap,
        judge_consensus_correlation=judge_consensus,
        model_consensus_correlation=model_consensus,
        best_model=best_model,
        anova=anova,
        provenance=provenance,
    )

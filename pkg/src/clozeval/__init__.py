"""Cloze test construction, embedding-based scoring, and ranking validation."""

from .artstats import (
    AnovaTable,
    align_for_effect,
    art_anova,
    betainc,
    f_cdf,
    f_sf,
    factorial_anova,
)
from .cloze import (
    BLANK_MARKER,
    ClozeTest,
    Gap,
    ResponseSheet,
    extract_context,
    generate_cloze,
    parse_responses,
    parse_test_file,
    render_cloze,
    write_responses,
    write_test_file,
)
from .embeddings import (
    EmbeddingModel,
    LoadSummary,
    load_embeddings,
    normalize_answer,
    normalize_token,
)
from .errors import (
    ClozeError,
    ClozeValError,
    DegenerateRankingError,
    EmbeddingError,
    IngestError,
    OOVError,
    PipelineError,
    RankingError,
    StatsError,
)
from .ranking import (
    CONSENSUS_RANKER,
    RankingTable,
    aggregate_judges,
    collect_candidates,
    drop_top_ranked,
    filter_gaps,
    midranks,
    rank_by_similarity,
    restrict_table,
    spearman,
)
from .scoring import (
    METHODS,
    ScoreReport,
    StudentScore,
    score_acceptable,
    score_clozentropy,
    score_exact,
    score_similarity,
)
from .server import JudgeServer, JudgeStore, build_tasks, create_server
from .validation import JudgeSession, StatsReport, load_judge_sessions, run_validation

__version__ = "0.1.0"

"""Exception types shared across the toolkit.

Everything raised on bad input or bad state derives from ClozeValError so the
CLI can map domain failures to a single exit code.
"""


class ClozeValError(Exception):
    """Base class for all domain errors."""


class EmbeddingError(ClozeValError):
    """Malformed or unreadable embedding file."""


class OOVError(ClozeValError):
    """A similarity query hit words missing from the vocabulary."""

    def __init__(self, missing: tuple[str, ...]):
        self.missing = tuple(missing)
        super().__init__("out of vocabulary: " + ", ".join(repr(w) for w in self.missing))


class ClozeError(ClozeValError):
    """Invalid Cloze construction parameters or gap reference."""


class IngestError(ClozeValError):
    """Malformed test, response, or judge-session file."""


class RankingError(ClozeValError):
    """Invalid ranking table or ranking operation."""


class DegenerateRankingError(RankingError):
    """Correlation is undefined, e.g. a rank vector with zero variance."""


class StatsError(ClozeValError):
    """Degenerate design or numerical failure in the statistics layer."""


class PipelineError(ClozeValError):
    """End-to-end validation could not be completed."""

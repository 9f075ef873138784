"""Pretrained word-embedding stores and cosine similarity queries.

Two text formats are supported: word2vec-text (a ``<count> <dimension>``
header line followed by rows) and glove-text (rows only). Every vector is
L2-normalized once at load, so a similarity query is a plain dot product.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmbeddingError, OOVError

FORMATS = ("auto", "word2vec-text", "glove-text")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def normalize_token(raw: str, fold_diacritics: bool = False) -> str:
    """Canonical form of a single written word.

    Lowercases (Unicode-aware), trims whitespace, and strips leading and
    trailing punctuation. Interior hyphens stay ("guarda-chuva") and
    diacritics stay ("não" is not "nao"); pass fold_diacritics=True to
    drop combining marks, at the cost of collapsing real minimal pairs.
    An empty result is legal and means the input held no word.
    """
    token = raw.lower()
    start, end = 0, len(token)
    # Punctuation and whitespace strip together: removing a trailing comma
    # may expose a space that must go too.
    while start < end and (_is_punct(token[start]) or token[start].isspace()):
        start += 1
    while end > start and (_is_punct(token[end - 1]) or token[end - 1].isspace()):
        end -= 1
    token = token[start:end]
    if fold_diacritics:
        decomposed = unicodedata.normalize("NFKD", token)
        token = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    return token


def normalize_answer(raw: str, fold_diacritics: bool = False) -> str:
    """Normalize a free answer, which may hold several words.

    Each whitespace-separated token is normalized; empty leftovers are
    dropped and the rest joined with single spaces.
    """
    parts = (normalize_token(t, fold_diacritics) for t in raw.split())
    return " ".join(p for p in parts if p)


@dataclass(frozen=True)
class LoadSummary:
    path: str
    source_format: str
    vocab_size: int
    dimension: int
    duplicates: int
    duplicate_words: tuple[str, ...]
    declared_vocab: int | None = None


@dataclass(frozen=True, eq=False)
class EmbeddingModel:
    """Immutable vocabulary of unit-normalized word vectors.

    ``vocab`` maps each word to its row in ``vectors``; rows are already
    normalized, so cosine similarity between stored words reduces to a
    dot product. Safe for concurrent readers.
    """

    name: str
    dimension: int
    vocab: dict[str, int]
    vectors: np.ndarray
    source_format: str
    summary: LoadSummary | None = None

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def __len__(self) -> int:
        return len(self.vocab)

    def lookup(self, token: str) -> np.ndarray | None:
        """Stored unit vector for a normalized token, or None when OOV."""
        idx = self.vocab.get(token)
        if idx is None:
            return None
        return self.vectors[idx]

    def phrase_vector(self, tokens: Sequence[str]) -> np.ndarray | None:
        """Renormalized mean of the in-vocabulary token vectors.

        Returns None when every token is OOV or the mean vector has zero
        norm (opposed vectors can cancel exactly).
        """
        rows = [self.vocab[t] for t in tokens if t in self.vocab]
        if not rows:
            return None
        mean = self.vectors[rows].mean(axis=0)
        norm = float(np.linalg.norm(mean))
        if norm == 0.0:
            return None
        return mean / norm

    def cosine_similarity(self, a: str, b: str) -> float:
        """Cosine between two in-vocabulary tokens, clamped to [-1, 1].

        Identical tokens return exactly 1.0. Raises OOVError naming every
        token missing from the vocabulary.
        """
        missing = tuple(t for t in (a, b) if t not in self.vocab)
        if missing:
            raise OOVError(missing)
        if a == b:
            return 1.0
        raw = float(np.dot(self.vectors[self.vocab[a]], self.vectors[self.vocab[b]]))
        return min(1.0, max(-1.0, raw))

    @classmethod
    def from_vectors(
        cls,
        name: str,
        rows: Mapping[str, Sequence[float]] | Iterable[tuple[str, Sequence[float]]],
        source_format: str = "memory",
    ) -> "EmbeddingModel":
        """Build a model from in-memory rows (tests, toy fixtures).

        Applies the same normalization and validation as the file loader;
        later duplicates overwrite earlier rows.
        """
        items = rows.items() if isinstance(rows, Mapping) else rows
        words: list[str] = []
        vecs: list[np.ndarray] = []
        index: dict[str, int] = {}
        dimension: int | None = None
        for word, components in items:
            vec = np.asarray(components, dtype=np.float64)
            if dimension is None:
                dimension = int(vec.shape[0])
                if dimension <= 0:
                    raise EmbeddingError(f"model {name!r}: empty vector for {word!r}")
            if vec.shape != (dimension,):
                raise EmbeddingError(
                    f"model {name!r}: word {word!r} has {vec.shape[0]} components, expected {dimension}"
                )
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise EmbeddingError(f"model {name!r}: zero-norm vector for word {word!r}")
            vec = vec / norm
            if word in index:
                vecs[index[word]] = vec
            else:
                index[word] = len(words)
                words.append(word)
                vecs.append(vec)
        if dimension is None:
            raise EmbeddingError(f"model {name!r}: no vector rows")
        return cls(name, dimension, index, np.vstack(vecs), source_format)


def _looks_like_header(parts: list[str]) -> bool:
    if len(parts) != 2:
        return False
    return all(p.isdigit() for p in parts)


def load_embeddings(path: str | Path, fmt: str = "auto", name: str | None = None) -> EmbeddingModel:
    """Parse a pretrained embedding text file into an EmbeddingModel.

    ``fmt`` is one of FORMATS; in auto mode a first line of exactly two
    integers is taken as a word2vec-text header, anything else as
    glove-text. Rows are normalized in place; duplicate words keep the
    last occurrence and are counted in the attached LoadSummary.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    try:
        fh = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise EmbeddingError(f"cannot read {path}: {exc}") from exc

    words: list[str] = []
    vecs: list[np.ndarray] = []
    index: dict[str, int] = {}
    dup_words: list[str] = []
    duplicates = 0
    dimension: int | None = None
    declared_vocab: int | None = None

    with fh:
        first = fh.readline()
        if first == "":
            raise EmbeddingError(f"{path}: empty file")
        first_parts = first.split()
        detected = fmt
        if fmt == "auto":
            detected = "word2vec-text" if _looks_like_header(first_parts) else "glove-text"

        data_start_line = 1
        if detected == "word2vec-text":
            if not _looks_like_header(first_parts):
                raise EmbeddingError(
                    f"{path}, line 1: expected '<vocab_count> <dimension>' header, got {first.strip()!r}"
                )
            declared_vocab = int(first_parts[0])
            dimension = int(first_parts[1])
            if dimension <= 0:
                raise EmbeddingError(f"{path}, line 1: non-positive dimension {dimension}")
            rows_iter: Iterable[tuple[int, str]] = enumerate(fh, start=2)
            data_start_line = 2
        else:
            rows_iter = enumerate([first] + list(fh), start=1)

        for line_no, line in rows_iter:
            parts = line.split()
            if not parts:
                continue  # ignore stray blank lines
            word = parts[0]
            row_no = line_no - (data_start_line - 1)
            if len(parts) < 2:
                raise EmbeddingError(f"{path}, line {line_no}: row {row_no} has no components")
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingError(
                    f"{path}, line {line_no}: row {row_no} has a non-numeric component ({exc})"
                ) from exc
            if dimension is None:
                dimension = int(vec.shape[0])
            elif vec.shape[0] != dimension:
                raise EmbeddingError(
                    f"{path}, line {line_no}: row {row_no} has {vec.shape[0]} components, expected {dimension}"
                )
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise EmbeddingError(f"{path}, line {line_no}: zero-norm vector for word {word!r}")
            vec = vec / norm
            if word in index:
                duplicates += 1
                dup_words.append(word)
                vecs[index[word]] = vec
            else:
                index[word] = len(words)
                words.append(word)
                vecs.append(vec)

    if not words:
        raise EmbeddingError(f"{path}: no vector rows")
    assert dimension is not None
    summary = LoadSummary(
        path=str(path),
        source_format=detected,
        vocab_size=len(words),
        dimension=dimension,
        duplicates=duplicates,
        duplicate_words=tuple(dup_words),
        declared_vocab=declared_vocab,
    )
    return EmbeddingModel(
        name=name or path.stem,
        dimension=dimension,
        vocab=index,
        vectors=np.vstack(vecs),
        source_format=detected,
        summary=summary,
    )

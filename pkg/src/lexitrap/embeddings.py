"""Victim-model dictionary embeddings: file I/O, row selection and KNN search.

The binary layout is: 4-byte magic b"EMB1", uint32 rows, uint32 dim (both
little-endian), then rows*dim little-endian float32 values in row-major order.
A plain-text fallback (one row per line, space-separated decimals) is accepted
and detected by the missing magic.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmbeddingError

MAGIC = b"EMB1"

METRIC_COSINE = "cosine"
METRIC_EUCLIDEAN = "euclidean"

# Cosine distance assigned to zero-norm rows: the maximum of the metric's range.
_ZERO_NORM_DISTANCE = 2.0


@dataclass(frozen=True)
class EmbeddingMatrix:
    data: np.ndarray  # float32, shape (rows, dim)

    def __post_init__(self) -> None:
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise EmbeddingError(f"embedding matrix must be 2-D, got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise EmbeddingError("embedding matrix contains non-finite values")

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class AntonymLexicon:
    table: dict[str, str]

    def __post_init__(self) -> None:
        for word, anto in self.table.items():
            if not word or not anto:
                raise EmbeddingError("antonym lexicon entries must be non-empty words")


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    raw = Path(path).read_bytes()
    if raw[:4] == MAGIC:
        header = np.frombuffer(raw, dtype="<u4", count=2, offset=4)
        rows, dim = int(header[0]), int(header[1])
        if rows < 1 or dim < 1:
            raise EmbeddingError(f"empty matrix in header: rows={rows} dim={dim}")
        body = raw[12:]
        expected = rows * dim * 4
        if len(body) != expected:
            raise EmbeddingError(
                f"size mismatch: header promises {expected} bytes, file has {len(body)}"
            )
        data = np.frombuffer(body, dtype="<f4").reshape(rows, dim)
        return EmbeddingMatrix(np.ascontiguousarray(data))
    try:
        text = raw.decode("utf-8")
        rows = [line.split() for line in text.splitlines() if line.strip()]
        data = np.array([[float(v) for v in row] for row in rows], dtype=np.float32)
    except (UnicodeDecodeError, ValueError) as exc:
        raise EmbeddingError(f"unreadable embedding file: {exc}") from exc
    if data.size == 0:
        raise EmbeddingError("empty embedding file")
    return EmbeddingMatrix(data)


def save_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    header = np.array([matrix.rows, matrix.dim], dtype="<u4").tobytes()
    body = matrix.data.astype("<f4").tobytes()
    Path(path).write_bytes(MAGIC + header + body)


def token_embeddings(matrix: EmbeddingMatrix, ids: list[int]) -> np.ndarray:
    for idx in ids:
        if not 0 <= idx < matrix.rows:
            raise EmbeddingError(f"embedding row out of range: {idx}")
    return matrix.data[np.asarray(ids, dtype=np.int64)]


def mean_embedding(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise EmbeddingError("mean_embedding needs at least one row")
    return rows.mean(axis=0)


def load_antonym_lexicon(path: str | Path) -> AntonymLexicon:
    table: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise EmbeddingError(f"malformed lexicon line {lineno}: {line!r}")
        table[parts[0].strip()] = parts[1].strip()
    return AntonymLexicon(table)


def antonym(lexicon: AntonymLexicon, word: str) -> str:
    if word not in lexicon.table:
        raise EmbeddingError(
            f"no antonym entry for {word!r}; supply one explicitly via configuration"
        )
    return lexicon.table[word]


def distances_to(
    matrix: np.ndarray, query: np.ndarray, metric: str = METRIC_COSINE
) -> np.ndarray:
    """Distance from every row of matrix to query."""
    query = np.asarray(query, dtype=np.float64)
    rows = np.asarray(matrix, dtype=np.float64)
    if query.ndim != 1 or rows.shape[1] != query.shape[0]:
        raise EmbeddingError(
            f"dimension mismatch: rows are {rows.shape[1]}-d, query is {query.shape}"
        )
    if metric == METRIC_EUCLIDEAN:
        return np.linalg.norm(rows - query, axis=1)
    if metric == METRIC_COSINE:
        qn = np.linalg.norm(query)
        rn = np.linalg.norm(rows, axis=1)
        out = np.full(rows.shape[0], _ZERO_NORM_DISTANCE)
        if qn == 0.0:
            return out
        ok = rn > 0.0
        out[ok] = 1.0 - (rows[ok] @ query) / (rn[ok] * qn)
        return out
    raise EmbeddingError(f"unknown metric: {metric}")


def knn(
    matrix: EmbeddingMatrix,
    query: np.ndarray,
    n: int,
    exclude: set[int] | frozenset[int] = frozenset(),
    metric: str = METRIC_COSINE,
) -> list[int]:
    """The n ids nearest to query, excluding `exclude`.

    Output is sorted ascending by distance with ties broken by ascending id,
    identical to an exhaustive scan.
    """
    if n < 1:
        raise EmbeddingError("n must be positive")
    available = matrix.rows - len([i for i in exclude if 0 <= i < matrix.rows])
    if n > available:
        raise EmbeddingError(f"n={n} exceeds {available} available rows")
    dist = distances_to(matrix.data, query, metric)
    order = np.lexsort((np.arange(matrix.rows), dist))
    out: list[int] = []
    for idx in order:
        if int(idx) in exclude:
            continue
        out.append(int(idx))
        if len(out) == n:
            break
    return out

"""Distance matrices and optimal trigger-candidate pairing.

Maximization is run as minimization of (max(Q) - Q) through a
Jonker-Volgenant-class solver; co-optimal solutions are resolved to the
lexicographically smallest permutation so attack plans are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .embeddings import METRIC_COSINE, METRIC_EUCLIDEAN, distances_to
from .errors import LexitrapError

# Relative slack when deciding whether a candidate prefix is still co-optimal;
# only matters for exact ties, where float totals agree to this precision.
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Assignment:
    perm: tuple[int, ...]
    total: float


def pairwise_distances(
    a: np.ndarray, b: np.ndarray, metric: str = METRIC_COSINE
) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise LexitrapError(f"incompatible shapes: {a.shape} vs {b.shape}")
    if a.shape[0] != b.shape[0]:
        raise LexitrapError(
            f"row counts must match for a square instance: {a.shape[0]} vs {b.shape[0]}"
        )
    if metric not in (METRIC_COSINE, METRIC_EUCLIDEAN):
        raise LexitrapError(f"unknown metric: {metric}")
    return np.stack([distances_to(b, row, metric) for row in a])


def _check_square(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 1:
        raise LexitrapError(f"assignment matrix must be square, got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise LexitrapError("assignment matrix must be finite")
    return q


def _total(q: np.ndarray, perm: tuple[int, ...]) -> float:
    return float(sum(q[i, perm[i]] for i in range(len(perm))))


def _max_total(q: np.ndarray) -> float:
    cost = q.max() - q
    rows, cols = linear_sum_assignment(cost)
    perm = tuple(int(c) for c in cols[np.argsort(rows)])
    return _total(q, perm)


def solve_max_assignment(q: np.ndarray) -> Assignment:
    """Permutation maximizing sum(Q[i, perm[i]]).

    Among co-optimal permutations, returns the lexicographically smallest,
    found by fixing columns row by row and re-solving the remainder.
    """
    q = _check_square(q)
    n = q.shape[0]
    optimum = _max_total(q)
    tol = _TIE_RTOL * (1.0 + abs(optimum))
    perm: list[int] = []
    free_cols = list(range(n))
    fixed = 0.0
    for i in range(n):
        chosen = None
        for j in free_cols:
            rest_rows = list(range(i + 1, n))
            rest_cols = [c for c in free_cols if c != j]
            rest = (
                _max_total(q[np.ix_(rest_rows, rest_cols)]) if rest_rows else 0.0
            )
            if fixed + q[i, j] + rest >= optimum - tol:
                chosen = j
                break
        assert chosen is not None, "co-optimal refinement lost the optimum"
        perm.append(chosen)
        fixed += q[i, chosen]
        free_cols.remove(chosen)
    return Assignment(tuple(perm), _total(q, tuple(perm)))


def brute_force_assignment(q: np.ndarray, max_n: int = 10) -> Assignment:
    """Exhaustive oracle with the same tie-break (first in lexicographic order)."""
    q = _check_square(q)
    n = q.shape[0]
    if n > max_n:
        raise LexitrapError(f"brute force capped at n={max_n}, got {n}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    totals = q[np.arange(n), perms].sum(axis=1)
    # permutations() yields lexicographic order and argmax keeps the first
    # maximum, which is exactly the solver's co-optimal tie-break
    best = int(np.argmax(totals))
    perm = tuple(int(c) for c in perms[best])
    return Assignment(perm, _total(q, perm))

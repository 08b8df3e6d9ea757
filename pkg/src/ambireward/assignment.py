"""Maximum-weight one-to-one matching between predictions and gold answers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


class NonBinaryMatrix(ValueError):
    pass


@dataclass(frozen=True)
class Assignment:
    matches: tuple[tuple[int, int], ...]
    value: float


def as_matrix(scores, n_gold: int | None = None) -> np.ndarray:
    """Validate a similarity grid (rows = predictions, columns = golds)."""
    S = np.asarray(scores, dtype=np.float64)
    if S.size == 0:
        S = S.reshape(0, n_gold if n_gold is not None else (S.shape[-1] if S.ndim == 2 else 0))
    if S.ndim != 2:
        raise ValueError(f"similarity matrix must be 2-D, got shape {S.shape}")
    if S.size and (np.isnan(S).any() or S.min() < 0.0 or S.max() > 1.0):
        raise ValueError("similarity entries must lie in [0, 1]")
    return S


def hungarian_min(cost) -> list[int]:
    """Minimum-cost perfect matching on a square cost matrix.

    Returns ``col_of_row``. Shortest augmenting path formulation with row/column
    potentials, O(n^3). Works on any ordered numeric entries; exact for ints.
    """
    c = [list(row) for row in cost]
    n = len(c)
    INF = math.inf
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    row_of_col = [0] * (n + 1)  # 1-based; 0 = free
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        row_of_col[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = row_of_col[j0]
            delta = INF
            j1 = 0
            ci = c[i0 - 1]
            ui = u[i0]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = ci[j - 1] - ui - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[row_of_col[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if row_of_col[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            row_of_col[j0] = row_of_col[j1]
            j0 = j1
    col_of_row = [0] * n
    for j in range(1, n + 1):
        col_of_row[row_of_col[j] - 1] = j - 1
    return col_of_row


def _exact_weights(S: np.ndarray) -> tuple[list[list[int]], int]:
    """Scale scores to integers over a common power-of-two denominator.

    Every float in [0, 1] is a dyadic rational, so sums and comparisons on the
    scaled grid are exact and ties need no tolerance.
    """
    fracs = [[Fraction(float(x)) for x in row] for row in S]
    denom = max((f.denominator for row in fracs for f in row), default=1)
    return [[int(f * denom) for f in row] for row in fracs], denom


def _max_matching(W: list[list[int]], rows: Sequence[int], cols: Sequence[int]) -> tuple[list[tuple[int, int]], int]:
    """A maximum-weight matching of size min(|rows|, |cols|) and its weight."""
    if not rows or not cols:
        return [], 0
    k = max(len(rows), len(cols))
    sub = [[W[i][j] for j in cols] + [0] * (k - len(cols)) for i in rows]
    sub += [[0] * k for _ in range(k - len(rows))]
    top = max(max(r) for r in sub)
    # maximisation as minimisation of (max_entry - S); padding scores 0
    assign = hungarian_min([[top - x for x in r] for r in sub])
    pairs = [(rows[a], cols[b]) for a, b in enumerate(assign) if a < len(rows) and b < len(cols)]
    return pairs, sum(W[i][j] for i, j in pairs)


def optimal_assignment(scores) -> Assignment:
    """Optimal matching with lexicographically smallest match set among optima.

    Greedy over pairs in lexicographic order: a pair is fixed when the remaining
    rows and columns can still complete an optimal matching.
    """
    S = as_matrix(scores)
    m, n = S.shape
    k = min(m, n)
    if k == 0:
        return Assignment((), 0.0)
    W, denom = _exact_weights(S)
    _, best = _max_matching(W, range(m), range(n))

    chosen: list[tuple[int, int]] = []
    fixed = 0
    free_cols = list(range(n))
    next_row = 0
    while len(chosen) < k:
        need = k - len(chosen) - 1
        pick = None
        for i in range(next_row, m - need):
            for j in free_cols:
                rest_cols = [c for c in free_cols if c != j]
                _, rest = _max_matching(W, range(i + 1, m), rest_cols) if need else ([], 0)
                if fixed + W[i][j] + rest == best:
                    pick = (i, j)
                    break
            if pick:
                break
        i, j = pick
        chosen.append(pick)
        fixed += W[i][j]
        free_cols.remove(j)
        next_row = i + 1
    return Assignment(tuple(chosen), float(Fraction(best, denom)))


def binary_match_count(scores) -> int:
    S = as_matrix(scores)
    if S.size and not np.isin(S, (0.0, 1.0)).all():
        raise NonBinaryMatrix("binary_match_count requires entries in {0, 1}")
    return int(round(optimal_assignment(S).value))


def matched_triples(S: np.ndarray, assignment: Assignment) -> list[tuple[int, int, float]]:
    return [(i, j, float(S[i, j])) for i, j in assignment.matches]

"""
Kuhn-Munkres assignment with a deterministic tie-break.

`_solve` is the O(m^3) shortest-augmenting-path form with row/column
potentials. `hungarian` then fixes rows in order, taking for each row the
smallest column that still admits an optimal completion, which yields the
lexicographically smallest optimal permutation.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from src.utils.errors import NumericalError, ShapeError


def _pad_square(cost: np.ndarray) -> np.ndarray:
    rows, cols = cost.shape
    size = max(rows, cols)
    if rows == cols:
        return cost
    padded = np.zeros((size, size))
    padded[:rows, :cols] = cost
    return padded


def _solve(cost: np.ndarray) -> Tuple[np.ndarray, float]:
    """Minimum-cost perfect matching of a square matrix; returns (row -> column, total)."""
    m = cost.shape[0]
    if m == 0:
        return np.zeros(0, dtype=np.int64), 0.0
    u = np.zeros(m + 1)
    v = np.zeros(m + 1)
    match = np.zeros(m + 1, dtype=np.int64)  # match[column] = row, 1-based, 0 = free
    way = np.zeros(m + 1, dtype=np.int64)
    for row in range(1, m + 1):
        match[0] = row
        column = 0
        min_slack = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[column] = True
            current_row = match[column]
            delta = np.inf
            next_column = 0
            for j in range(1, m + 1):
                if used[j]:
                    continue
                slack = cost[current_row - 1, j - 1] - u[current_row] - v[j]
                if slack < min_slack[j]:
                    min_slack[j] = slack
                    way[j] = column
                if min_slack[j] < delta:
                    delta = min_slack[j]
                    next_column = j
            for j in range(m + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    min_slack[j] -= delta
            column = next_column
            if match[column] == 0:
                break
        while column:
            previous = way[column]
            match[column] = match[previous]
            column = previous

    assignment = np.zeros(m, dtype=np.int64)
    for j in range(1, m + 1):
        assignment[match[j] - 1] = j - 1
    return assignment, float(cost[np.arange(m), assignment].sum())


def hungarian(cost: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Permutation minimizing total cost; assignment[i] is the column of row i.

    Rectangular inputs are zero-padded to square first, so padded rows or
    columns appear in the returned permutation. Among optimal permutations
    the lexicographically smallest is returned.

    Raises:
        NumericalError: NaN or infinite cost.
        ShapeError: cost is not a matrix.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ShapeError(f"Cost must be a matrix, got shape {cost.shape}")
    if not np.isfinite(cost).all():
        raise NumericalError("Assignment cost contains NaN or Inf")
    square = _pad_square(cost)
    m = square.shape[0]
    _, optimum = _solve(square)
    tolerance = 1e-12 * (abs(optimum) + 1.0)

    assignment = np.full(m, -1, dtype=np.int64)
    fixed_cost = 0.0
    free_columns = list(range(m))
    for row in range(m):
        rest_rows = np.arange(row + 1, m)
        for column in free_columns:
            remaining = [c for c in free_columns if c != column]
            _, rest = _solve(square[np.ix_(rest_rows, remaining)])
            if fixed_cost + square[row, column] + rest <= optimum + tolerance:
                assignment[row] = column
                fixed_cost += square[row, column]
                free_columns = remaining
                break
        else:
            raise NumericalError(f"Could not extend an optimal assignment at row {row}")
    return assignment, float(square[np.arange(m), assignment].sum())


__all__ = ["hungarian"]

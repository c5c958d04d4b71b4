"""Brute-force reference counts for tests.

Nothing here reuses the matching code in ``constraint``; patterns are read
as raw cell tuples and checked cell by cell.  Keep it that way.
"""

from __future__ import annotations

import itertools

import numpy as np

STAR = -1
GRID_BUDGET = 2 ** 25
STRIP_BUDGET = 2 ** 30
CHUNK = 2 ** 18


class OracleBudget(ValueError):
    pass


def _pattern_cells(constraint):
    return [tuple(p.cells) for p in constraint.patterns]


def _grids(q: int, n_cells: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((len(idx), n_cells), dtype=np.int8)
    for k in range(n_cells - 1, -1, -1):
        idx, digits[:, k] = np.divmod(idx, q)
    return digits


def brute_count_avoiding(n_rows: int, n_cols: int, constraint) -> int:
    """Count every n_rows x n_cols grid that contains no forbidden pattern."""
    q = constraint.q
    total = q ** (n_rows * n_cols)
    if total > GRID_BUDGET:
        raise OracleBudget(f"{total} grids exceeds oracle budget {GRID_BUDGET}")
    pats = _pattern_cells(constraint)
    count = 0
    for start in range(0, total, CHUNK):
        g = _grids(q, n_rows * n_cols, start, min(total, start + CHUNK))
        bad = np.zeros(len(g), dtype=bool)
        for i in range(n_rows - 2):
            for j in range(n_cols - 2):
                for cells in pats:
                    hit = np.ones(len(g), dtype=bool)
                    for a in range(3):
                        for b in range(3):
                            v = cells[3 * a + b]
                            if v != STAR:
                                hit &= g[:, (i + a) * n_cols + (j + b)] == v
                    bad |= hit
        count += int((~bad).sum())
    return count


def brute_valid_pairs(n: int, constraint) -> int:
    """Number of constraint-avoiding n x 3 strips (valid pairs at height n)."""
    q = constraint.q
    total = q ** (3 * n)
    if total <= GRID_BUDGET:
        return brute_count_avoiding(n, 3, constraint)
    if total > STRIP_BUDGET:
        raise OracleBudget(f"{total} strips exceeds oracle budget {STRIP_BUDGET}")
    return _strips_by_middle_column(n, constraint)


def _strips_by_middle_column(n: int, constraint) -> int:
    # Same exhaustive count, but the outer columns are broadcast against each
    # middle column so the q^(3n) strips never materialize at once.
    q = constraint.q
    pats = _pattern_cells(constraint)
    outer = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int8)
    count = 0
    for mid in itertools.product(range(q), repeat=n):
        bad = np.zeros((len(outer), len(outer)), dtype=bool)
        for i in range(n - 2):
            for cells in pats:
                if any(cells[3 * a + 1] not in (STAR, mid[i + a]) for a in range(3)):
                    continue
                left = np.ones(len(outer), dtype=bool)
                right = np.ones(len(outer), dtype=bool)
                for a in range(3):
                    if cells[3 * a] != STAR:
                        left &= outer[:, i + a] == cells[3 * a]
                    if cells[3 * a + 2] != STAR:
                        right &= outer[:, i + a] == cells[3 * a + 2]
                bad |= left[:, None] & right[None, :]
        count += int(bad.size - bad.sum())
    return count


def brute_max_min_outdeg(adj) -> int:
    """Max over non-empty induced subgraphs of the min out-degree (<= 14 vertices)."""
    a = np.asarray(adj.todense() if hasattr(adj, "todense") else adj, dtype=np.int64)
    n = a.shape[0]
    if n > 14:
        raise OracleBudget(f"{n} vertices exceeds 14")
    if n == 0:
        return 0
    masks = np.arange(1, 2 ** n, dtype=np.int64)
    member = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)  # subsets x vertices
    deg = member @ a.T  # deg[s, v] = out-neighbours of v inside s
    deg = np.where(member == 1, deg, np.iinfo(np.int64).max)
    return int(deg.min(axis=1).max())

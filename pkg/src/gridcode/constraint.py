"""Forbidden 3x3 pattern constraints on 2D arrays.

A constraint is a set of 3x3 patterns over the alphabet ``{0..q-1}`` plus a
don't-care symbol.  A grid *contains* a pattern if some fully-fitting 3x3
window agrees with every cared-for cell of it.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DONT_CARE = -1
MIN_Q, MAX_Q = 2, 16
SYMBOLS = "0123456789abcdef"


class ConstraintError(ValueError):
    """Malformed constraint or constraint file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AlphabetOutOfRange(ConstraintError):
    pass


@dataclass(frozen=True, order=True)
class Pattern:
    """3x3 pattern stored row-major; ``DONT_CARE`` marks free cells."""

    cells: tuple[int, ...]

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        if len(cells) != 9:
            raise ConstraintError(f"pattern needs 9 cells, got {len(cells)}")
        if all(c == DONT_CARE for c in cells):
            raise ConstraintError("pattern has no cared-for cell")
        if any(c < DONT_CARE or c >= MAX_Q for c in cells):
            raise ConstraintError(f"bad pattern cell in {cells}")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int | None]]) -> "Pattern":
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ConstraintError("pattern must be 3x3")
        return cls(tuple(DONT_CARE if c is None else c for r in rows for c in r))

    def cell(self, r: int, c: int) -> int:
        return self.cells[3 * r + c]

    @property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.cells[3 * r:3 * r + 3] for r in range(3))

    def column(self, c: int) -> tuple[int, int, int]:
        return (self.cells[c], self.cells[3 + c], self.cells[6 + c])

    def mirrored(self) -> "Pattern":
        """Column-reversed copy."""
        return Pattern(tuple(v for row in self.rows for v in reversed(row)))

    def transposed(self) -> "Pattern":
        return Pattern(tuple(self.cell(c, r) for r in range(3) for c in range(3)))

    def text(self) -> str:
        return "\n".join(
            "".join("*" if v == DONT_CARE else SYMBOLS[v] for v in row)
            for row in self.rows
        )

    def max_symbol(self) -> int:
        return max(self.cells)


@dataclass(frozen=True)
class Constraint:
    """Forbidden constraint: alphabet size plus a canonically ordered pattern set."""

    q: int
    patterns: tuple[Pattern, ...] = ()
    name: str = ""

    def __post_init__(self):
        if not MIN_Q <= self.q <= MAX_Q:
            raise AlphabetOutOfRange(f"alphabet size {self.q} outside [{MIN_Q}, {MAX_Q}]")
        for p in self.patterns:
            if p.max_symbol() >= self.q:
                raise ConstraintError(f"pattern symbol >= q={self.q}:\n{p.text()}")
        # canonical order: lexicographic on the flattened cell string
        pats = tuple(sorted(set(self.patterns), key=lambda p: p.text().replace("\n", "")))
        object.__setattr__(self, "patterns", pats)

    def __eq__(self, other):
        if not isinstance(other, Constraint):
            return NotImplemented
        return self.q == other.q and self.patterns == other.patterns

    def __hash__(self):
        return hash((self.q, self.patterns))

    def __len__(self):
        return len(self.patterns)

    def with_patterns(self, extra: Iterable[Pattern]) -> "Constraint":
        return Constraint(self.q, self.patterns + tuple(extra), self.name)

    def transposed(self) -> "Constraint":
        return Constraint(self.q, tuple(p.transposed() for p in self.patterns))

    @property
    def digest(self) -> bytes:
        """32-byte SHA-256 of the canonical serialization."""
        return hashlib.sha256(serialize_constraint(self).encode()).digest()

    @property
    def fhash(self) -> str:
        return self.digest.hex()


def as_grid(grid) -> np.ndarray:
    a = np.asarray(grid, dtype=np.int64)
    if a.ndim != 2:
        raise ValueError("grid must be 2-dimensional")
    return a


def matches_at(grid, pattern: Pattern, i: int, j: int) -> bool:
    """Does ``pattern`` match the window whose top-left corner is (i-1, j-1)?

    Indices are 1-based window origins as in the usual [N-2] x [N-2] range.
    """
    g = as_grid(grid)
    n_rows, n_cols = g.shape
    if not (1 <= i <= n_rows - 2 and 1 <= j <= n_cols - 2):
        raise IndexError(f"window ({i}, {j}) does not fit a {n_rows}x{n_cols} grid")
    window = g[i - 1:i + 2, j - 1:j + 2].ravel()
    return all(c == DONT_CARE or c == w for c, w in zip(pattern.cells, window))


def match_windows(grid, pattern: Pattern) -> np.ndarray:
    """Boolean (n_rows-2, n_cols-2) map of window origins where ``pattern`` matches."""
    g = as_grid(grid)
    n_rows, n_cols = g.shape
    if n_rows < 3 or n_cols < 3:
        return np.zeros((max(n_rows - 2, 0), max(n_cols - 2, 0)), dtype=bool)
    hit = np.ones((n_rows - 2, n_cols - 2), dtype=bool)
    for r in range(3):
        for c in range(3):
            v = pattern.cell(r, c)
            if v != DONT_CARE:
                hit &= g[r:r + n_rows - 2, c:c + n_cols - 2] == v
    return hit


def first_violation(grid, constraint: Constraint):
    """Return ``(i, j, pattern)`` of the first matching window (row-major, 1-based), or None."""
    g = as_grid(grid)
    if g.shape[0] < 3 or g.shape[1] < 3:
        return None
    best = None
    for p in constraint.patterns:
        hits = np.argwhere(match_windows(g, p))
        if len(hits):
            cand = (int(hits[0][0]) + 1, int(hits[0][1]) + 1)
            if best is None or cand < best[:2]:
                best = (*cand, p)
    return best


def contains(grid, constraint: Constraint) -> bool:
    g = as_grid(grid)
    return any(match_windows(g, p).any() for p in constraint.patterns)


# -- precomputed match tables used by the graph builders ------------------

def column_match_masks(columns: np.ndarray, triple: Sequence[int]) -> np.ndarray:
    """For each column (rows of ``columns``), bitmask of window offsets i where
    ``column[i:i+3]`` agrees with ``triple`` (DONT_CARE entries are free).

    Bit i corresponds to the window covering rows i, i+1, i+2.
    """
    n_cols, height = columns.shape
    n_win = height - 2
    if n_win <= 0:
        return np.zeros(n_cols, dtype=np.uint64)
    if n_win > 64:
        raise ValueError("column height exceeds 66")
    ok = np.ones((n_cols, n_win), dtype=bool)
    for r, v in enumerate(triple):
        if v != DONT_CARE:
            ok &= columns[:, r:r + n_win] == v
    weights = np.left_shift(np.uint64(1), np.arange(n_win, dtype=np.uint64))
    return (ok.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)


def row_match_vectors(q: int, pattern: Pattern) -> list[np.ndarray]:
    """Three boolean vectors over all q^3 rows: does row r match pattern row k."""
    rows = np.array(list(itertools.product(range(q), repeat=3)), dtype=np.int64)
    out = []
    for k in range(3):
        ok = np.ones(len(rows), dtype=bool)
        for c in range(3):
            v = pattern.cell(k, c)
            if v != DONT_CARE:
                ok &= rows[:, c] == v
        out.append(ok)
    return out


def forbidden_window_table(constraint: Constraint) -> np.ndarray:
    """Boolean tensor ``bad[r1, r2, r3]`` over row indices in [0, q^3):
    True iff the 3x3 stack of those rows matches some pattern."""
    q = constraint.q
    if q > 8:
        raise AlphabetOutOfRange(f"q={q} too large to tabulate q^9 windows (max 8)")
    n = q ** 3
    bad = np.zeros((n, n, n), dtype=bool)
    for p in constraint.patterns:
        m0, m1, m2 = row_match_vectors(q, p)
        bad |= m0[:, None, None] & m1[None, :, None] & m2[None, None, :]
    return bad


def is_mirror_symmetric(constraint: Constraint) -> bool:
    """Is the set of forbidden 3x3 windows closed under column reversal?"""
    q = constraint.q
    bad = forbidden_window_table(constraint)
    rows = np.array(list(itertools.product(range(q), repeat=3)))
    rev = rows[:, ::-1] @ (q ** np.arange(2, -1, -1))
    return bool(np.array_equal(bad, bad[np.ix_(rev, rev, rev)]))


# -- built-ins --------------------------------------------------------------

_ = DONT_CARE


def _nib(center: int, arm: int) -> Pattern:
    return Pattern.from_rows([[_, arm, _], [arm, center, arm], [_, arm, _]])


def _builtins() -> dict[str, Constraint]:
    ici = tuple(
        Pattern.from_rows([[_, 3, _], [3, v, 3], [_, 3, _]]) for v in range(3)
    )
    return {
        "nib-asym": Constraint(2, (_nib(0, 1),), "nib-asym"),
        "nib-sym": Constraint(2, (_nib(0, 1), _nib(1, 0)), "nib-sym"),
        "ici-q4": Constraint(4, ici, "ici-q4"),
    }


BUILTINS: dict[str, Constraint] = _builtins()

BUILTIN_DESCRIPTIONS = {
    "nib-asym": "binary, no isolated 0 inside four orthogonal 1s",
    "nib-sym": "binary, no isolated bit of either polarity",
    "ici-q4": "quaternary, no 3-v-3 crisscross (v in 0,1,2) in both directions at once",
}


def builtin(name: str) -> Constraint:
    try:
        return BUILTINS[name]
    except KeyError:
        raise ConstraintError(
            f"unknown built-in constraint {name!r}; choose from {sorted(BUILTINS)}"
        ) from None


def empty_constraint(q: int = 2) -> Constraint:
    return Constraint(q, (), "empty")


# -- .fct files ------------------------------------------------------------

def serialize_constraint(constraint: Constraint) -> str:
    blocks = [p.text() for p in constraint.patterns]
    return f"alphabet={constraint.q}\n" + "".join("\n" + b + "\n" for b in blocks)


def parse_constraint(text: str, name: str = "") -> Constraint:
    lines = [(k, ln.rstrip("\r")) for k, ln in enumerate(text.split("\n"), 1)]
    lines = [(k, ln) for k, ln in lines if not ln.lstrip().startswith("#")]
    while lines and not lines[-1][1].strip():
        lines.pop()
    if not lines:
        raise ConstraintError("empty constraint file", 1)

    k0, header = lines[0]
    key, _sep, val = header.strip().partition("=")
    if key.strip() != "alphabet" or not val.strip().isdigit():
        raise ConstraintError(f"expected 'alphabet=<q>', got {header!r}", k0)
    q = int(val)
    if not MIN_Q <= q <= MAX_Q:
        raise AlphabetOutOfRange(f"alphabet size {q} outside [{MIN_Q}, {MAX_Q}]", k0)

    patterns = []
    block: list[tuple[int, str]] = []

    def flush():
        if not block:
            return
        if len(block) != 3:
            raise ConstraintError(f"pattern has {len(block)} rows, expected 3", block[0][0])
        cells = []
        for k, row in block:
            if len(row) != 3:
                raise ConstraintError(f"row {row!r} has length {len(row)}, expected 3", k)
            for ch in row:
                if ch == "*":
                    cells.append(DONT_CARE)
                elif ch in SYMBOLS[:q]:
                    cells.append(SYMBOLS.index(ch))
                else:
                    raise ConstraintError(f"bad symbol {ch!r} for alphabet {q}", k)
        try:
            patterns.append(Pattern(tuple(cells)))
        except ConstraintError as e:
            raise ConstraintError(str(e), block[0][0]) from None
        block.clear()

    for k, ln in lines[1:]:
        s = ln.strip()
        if not s:
            flush()
        else:
            block.append((k, s.lower()))
    flush()
    if len(set(patterns)) != len(patterns):
        raise ConstraintError("duplicate pattern")
    return Constraint(q, tuple(patterns), name)


def load_constraint(source: str) -> Constraint:
    """Built-in name, ``empty[:q]``, or path to a .fct file."""
    if source in BUILTINS:
        return BUILTINS[source]
    if source == "empty" or source.startswith("empty:"):
        q = int(source.partition(":")[2] or 2)
        return empty_constraint(q)
    with open(source, encoding="utf-8") as fh:
        return parse_constraint(fh.read(), name=source)

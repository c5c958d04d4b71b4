"""Column-by-column encoder and decoder over a min-degree core.

Each message symbol picks the next column: from state ``(x, y)`` inside the
code set S, the successors ``z`` with ``(y, z)`` also in S are listed in
ascending key order and message m (1-based) selects the m-th one.  Only the
first M = min out-degree indices are ever used, so the rate is fixed.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .constraint import SYMBOLS, Constraint, first_violation
from .pairgraph import PairGraph, column_key, column_symbols
from .subopt import CoreResult, induced_min_out_degree


class CodecError(Exception):
    pass


class EmptyCore(CodecError):
    pass


class MessageOutOfRange(CodecError):
    def __init__(self, index: int, value: int, m: int):
        self.index = index
        super().__init__(f"message {index} = {value} outside [1, {m}]")


class UnknownState(CodecError):
    pass


class UnknownTransition(CodecError):
    pass


class HashMismatch(CodecError):
    pass


class FormatError(ValueError):
    pass


@dataclass(eq=False)
class Codebook:
    graph: PairGraph = field(repr=False)
    vertices: np.ndarray  # sorted keys of S
    m: int
    v_init: int
    _in_s: np.ndarray = field(repr=False, default=None)  # bool [left, right]

    def __post_init__(self):
        if self._in_s is None:
            Q = self.graph.n_columns
            mask = np.zeros(Q * Q, dtype=bool)
            mask[self.vertices] = True
            self._in_s = mask.reshape(Q, Q)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def q(self) -> int:
        return self.graph.q

    @property
    def fhash(self) -> str:
        return self.graph.constraint.fhash

    def contains_state(self, x: int, y: int) -> bool:
        return bool(self._in_s[x, y])

    def labels(self, x: int, y: int) -> np.ndarray:
        """phi_v as an array: entry m-1 is the right column of phi_v(m)."""
        if not self._in_s[x, y]:
            raise UnknownState(f"state ({x}, {y}) not in code set")
        succ = self.graph.block(y)[x] & self._in_s[y]
        return np.flatnonzero(succ)

    def to_bytes(self) -> bytes:
        head = f"CB1 {self.fhash} {self.q} {self.n} {self.m} {self.v_init}\n".encode()
        return head + self.vertices.astype("<u8").tobytes()

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()


def build_codebook(g: PairGraph, core: CoreResult) -> Codebook:
    if core.k < 1 or len(core.vertices) == 0:
        raise EmptyCore(f"core has min out-degree {core.k}; no code for N={g.n}")
    vertices = np.sort(np.asarray(core.vertices, dtype=np.int64))
    v_init = int(vertices[0])
    if g.q ** (3 * g.n) <= 2 ** 24:
        g.dense()
    return Codebook(g, vertices, int(core.k), v_init)


@dataclass
class EncodedArray:
    n: int
    q: int
    fhash: str
    init: tuple[int, int]  # keys of X(-1), X(0)
    columns: list[int]  # keys of X(1)..X(n)

    def grid(self) -> np.ndarray:
        """n x n array, column i = X(i)."""
        cols = [column_symbols(c, self.n, self.q) for c in self.columns]
        return np.array(cols, dtype=np.int64).T

    def extended_grid(self) -> np.ndarray:
        cols = [column_symbols(c, self.n, self.q) for c in (*self.init, *self.columns)]
        return np.array(cols, dtype=np.int64).T


def encode(cb: Codebook, msgs) -> EncodedArray:
    msgs = [int(m) for m in msgs]
    if len(msgs) != cb.n:
        raise ValueError(f"expected {cb.n} messages, got {len(msgs)}")
    for i, m in enumerate(msgs, 1):
        if not 1 <= m <= cb.m:
            raise MessageOutOfRange(i, m, cb.m)
    Q = cb.graph.n_columns
    x, y = divmod(cb.v_init, Q)
    init = (x, y)
    out = []
    for m in msgs:
        z = int(cb.labels(x, y)[m - 1])
        out.append(z)
        x, y = y, z
    return EncodedArray(cb.n, cb.q, cb.fhash, init, out)


def decode(cb: Codebook, arr: EncodedArray) -> list[int]:
    if arr.fhash != cb.fhash:
        raise HashMismatch(f"array written for constraint {arr.fhash[:12]}, "
                           f"codebook is {cb.fhash[:12]}")
    Q = cb.graph.n_columns
    if arr.n != cb.n or arr.q != cb.q or tuple(arr.init) != divmod(cb.v_init, Q):
        raise HashMismatch("array dimensions or initial columns differ from codebook")
    x, y = arr.init
    out = []
    for i, z in enumerate(arr.columns, 1):
        labels = cb.labels(x, y)
        pos = int(np.searchsorted(labels, z))
        if pos >= min(cb.m, len(labels)) or labels[pos] != z:
            raise UnknownTransition(f"column {i}: successor {z} not a label of ({x}, {y})")
        out.append(pos + 1)
        x, y = y, z
    return out


def code_rate(cb: Codebook) -> float:
    return math.log2(cb.m) / (cb.n * math.log2(cb.q))


def verify_codebook(cb: Codebook) -> None:
    """Recount the minimum in-set out-degree of S."""
    got = induced_min_out_degree(cb.graph, cb.vertices)
    if got != cb.m:
        raise AssertionError(f"codebook min out-degree {got} != M={cb.m}")


@dataclass
class VerifyReport:
    clean: bool
    violation: tuple[int, int] | None = None
    pattern: str | None = None
    extended_clean: bool = True

    def describe(self) -> str:
        if self.clean and self.extended_clean:
            return "clean"
        if not self.clean:
            i, j = self.violation
            return f"violation at window ({i}, {j}):\n{self.pattern}"
        return "grid clean, but initial columns form a forbidden window"


def verify(arr, constraint: Constraint) -> VerifyReport:
    """Scan the grid (and, for encoder output, the init-extended grid)."""
    if isinstance(arr, EncodedArray):
        grid, ext = arr.grid(), arr.extended_grid()
    else:
        grid, ext = np.asarray(arr), None
    hit = first_violation(grid, constraint)
    ext_ok = ext is None or first_violation(ext, constraint) is None
    if hit is None:
        return VerifyReport(True, extended_clean=ext_ok)
    i, j, p = hit
    return VerifyReport(False, (i, j), p.text(), ext_ok)


# -- file formats ----------------------------------------------------------


def _col_text(key: int, n: int, q: int) -> str:
    return "".join(SYMBOLS[s] for s in column_symbols(key, n, q))


def write_g2d(arr: EncodedArray) -> str:
    lines = [
        f"N={arr.n} q={arr.q} fhash={arr.fhash}",
        "init=" + " ".join(_col_text(c, arr.n, arr.q) for c in arr.init),
    ]
    grid = arr.grid()
    lines += ["".join(SYMBOLS[v] for v in row) for row in grid]
    return "\n".join(lines) + "\n"


def read_g2d(text: str) -> EncodedArray:
    lines = text.rstrip("\n").split("\n")
    if len(lines) < 2:
        raise FormatError("g2d needs a header and an init line")
    try:
        fields = dict(tok.split("=", 1) for tok in lines[0].split())
        n, q, fhash = int(fields["N"]), int(fields["q"]), fields["fhash"]
    except (KeyError, ValueError):
        raise FormatError(f"line 1: bad header {lines[0]!r}") from None
    if not lines[1].startswith("init="):
        raise FormatError("line 2: expected 'init=<col> <col>'")
    init_cols = lines[1][5:].split()
    if len(init_cols) != 2 or any(len(c) != n for c in init_cols):
        raise FormatError("line 2: need two init columns of height N")

    def parse_symbols(s: str, lineno: int) -> list[int]:
        try:
            vals = [SYMBOLS.index(ch) for ch in s.lower()]
        except ValueError:
            raise FormatError(f"line {lineno}: bad symbol in {s!r}") from None
        if any(v >= q for v in vals):
            raise FormatError(f"line {lineno}: symbol outside alphabet {q}")
        return vals

    init = tuple(column_key(parse_symbols(c, 2), q) for c in init_cols)
    rows = lines[2:]
    if len(rows) != n:
        raise FormatError(f"expected {n} grid rows, got {len(rows)}")
    grid = np.array([parse_symbols(r, k) for k, r in enumerate(rows, 3)])
    if grid.shape != (n, n):
        raise FormatError(f"grid must be {n}x{n}")
    columns = [column_key(grid[:, j], q) for j in range(n)]
    return EncodedArray(n, q, fhash, init, columns)


def write_messages(msgs) -> str:
    """1-based messages to the 0-based one-per-line file format."""
    return "".join(f"{int(m) - 1}\n" for m in msgs)


def read_messages(text: str) -> list[int]:
    out = []
    for k, ln in enumerate(text.splitlines(), 1):
        s = ln.strip()
        if not s:
            continue
        try:
            out.append(int(s) + 1)
        except ValueError:
            raise FormatError(f"line {k}: not an integer: {s!r}") from None
    return out

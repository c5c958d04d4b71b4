"""Maximal valid pair graph on column pairs.

Vertices are pairs of height-N columns ``(x, y)``; there is a transition
``(x, y) -> (y, z)`` whenever the N x 3 strip with columns x, y, z avoids the
constraint.  Columns are indexed by their base-q value with the top symbol most
significant, so ascending keys are lexicographic order of the symbol vectors
(for q a power of two this is exactly bit packing).  A vertex key is
``x * q**N + y``.

The transition relation is stored as a packed bit tensor indexed
``[y, x, z]`` (grouped by the shared middle column): ``q**(3N)`` bits.
"""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sps

from .constraint import Constraint, column_match_masks, is_mirror_symmetric

DEFAULT_BUDGET_LOG2 = 30
# the CSR form used for peeling costs ~20 bytes per edge while it is built
EDGE_BUDGET_LOG2 = 27
MAGIC = b"VPG1"


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget_log2: int, what: str = "triple checks"):
        self.required = required
        self.budget_log2 = budget_log2
        super().__init__(
            f"needs {required} {what} (2^{math.log2(required):.1f}), "
            f"budget is 2^{budget_log2}"
        )


def column_digits(n: int, q: int) -> np.ndarray:
    """All q**n columns as an (q**n, n) int8 array, row k = symbols of key k."""
    keys = np.arange(q ** n, dtype=np.int64)
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((keys[:, None] // powers[None, :]) % q).astype(np.int8)


def column_key(symbols, q: int) -> int:
    key = 0
    for s in symbols:
        key = key * q + int(s)
    return key


def column_symbols(key: int, n: int, q: int) -> list[int]:
    out = []
    for _ in range(n):
        key, s = divmod(key, q)
        out.append(s)
    return out[::-1]


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("GRIDCODE_THREADS", "1")))
    except ValueError:
        return 1


def triple_valid(x, y, z, constraint: Constraint) -> bool:
    """Direct check on the N x 3 strip (x | y | z)."""
    from .constraint import contains

    x, y, z = (np.asarray(c, dtype=np.int64) for c in (x, y, z))
    if not (len(x) == len(y) == len(z)):
        raise ValueError("columns must have equal height")
    return not contains(np.stack([x, y, z], axis=1), constraint)


@dataclass(eq=False)
class PairGraph:
    q: int
    n: int
    constraint: Constraint
    bits: np.ndarray  # uint8 [Q, Q, ceil(Q/8)], little bit order along z
    n_transitions: int  # L
    self_loops: int  # K
    _dense: np.ndarray | None = field(default=None, repr=False)
    _csr: sps.csr_matrix | None = field(default=None, repr=False)

    @property
    def n_columns(self) -> int:
        return self.q ** self.n

    @property
    def n_vertices(self) -> int:
        return self.q ** (2 * self.n)

    def block(self, y: int) -> np.ndarray:
        """Bool (x, z) matrix of valid triples with middle column y."""
        if self._dense is not None:
            return self._dense[y]
        Q = self.n_columns
        return np.unpackbits(self.bits[y], axis=-1, count=Q, bitorder="little").astype(bool)

    def dense(self) -> np.ndarray:
        """Bool tensor ``valid[y, x, z]``; cached."""
        if self._dense is None:
            Q = self.n_columns
            self._dense = np.unpackbits(
                self.bits, axis=-1, count=Q, bitorder="little"
            ).astype(bool)
        return self._dense

    def has_transition(self, x: int, y: int, z: int) -> bool:
        byte = self.bits[y, x, z >> 3]
        return bool((byte >> (z & 7)) & 1)

    def successors(self, v: int) -> np.ndarray:
        """Sorted successor right-columns z of vertex v = (x, y)."""
        x, y = divmod(v, self.n_columns)
        row = np.unpackbits(self.bits[y, x], count=self.n_columns, bitorder="little")
        return np.flatnonzero(row)

    def out_degrees(self) -> np.ndarray:
        """Out-degree per vertex key (length q**2N)."""
        deg = np.bitwise_count(self.bits).sum(axis=-1, dtype=np.int64)  # [y, x]
        return deg.T.reshape(-1)

    def in_degrees(self) -> np.ndarray:
        """In-degree per vertex key: indeg((y, z)) = #{x : (x, y, z) valid}."""
        Q = self.n_columns
        out = np.empty((Q, Q), dtype=np.int64)
        for y in range(Q):
            out[y] = self.block(y).sum(axis=0)
        return out.reshape(-1)

    def out_degree(self, v: int) -> int:
        x, y = divmod(v, self.n_columns)
        return int(np.bitwise_count(self.bits[y, x]).sum())

    def min_out_degree(self) -> int:
        return int(self.out_degrees().min())

    def to_csr(self) -> sps.csr_matrix:
        """0/1 adjacency over vertex keys; row v holds successors (y, z) sorted by z."""
        if self._csr is None:
            if self.n_transitions > 2 ** EDGE_BUDGET_LOG2:
                raise BudgetExceeded(self.n_transitions, EDGE_BUDGET_LOG2, "edges in memory")
            Q = self.n_columns
            d = self.dense()
            xyz = np.transpose(d, (1, 0, 2)).reshape(Q * Q, Q)  # row = x*Q + y
            counts = xyz.sum(axis=1, dtype=np.int64)
            indptr = np.zeros(Q * Q + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            rows, z = np.nonzero(xyz)
            cols = (rows % Q) * Q + z
            self._csr = sps.csr_matrix(
                (np.ones(len(cols), dtype=np.int8), cols.astype(np.int32), indptr),
                shape=(Q * Q, Q * Q),
            )
        return self._csr

    @property
    def mirror_symmetric(self) -> bool:
        return is_mirror_symmetric(self.constraint)

    def density(self) -> "Density":
        return density(self)


def _match_tables(constraint: Constraint, cols: np.ndarray):
    tables = []
    for p in constraint.patterns:
        tables.append(tuple(column_match_masks(cols, p.column(c)) for c in range(3)))
    return tables


def build(n: int, constraint: Constraint, budget_log2: int = DEFAULT_BUDGET_LOG2,
          threads: int | None = None) -> PairGraph:
    """Enumerate all valid triples (x, y, z) and return the maximal pair graph."""
    q = constraint.q
    required = q ** (3 * n)
    if required > 2 ** budget_log2:
        raise BudgetExceeded(required, budget_log2)
    if n < 1:
        raise ValueError("column height must be >= 1")
    Q = q ** n
    cols = column_digits(n, q)
    tables = _match_tables(constraint, cols)
    nbytes = (Q + 7) // 8
    bits = np.empty((Q, Q, nbytes), dtype=np.uint8)

    def fill(y: int) -> tuple[int, int]:
        bad = np.zeros((Q, Q), dtype=bool)
        for mx, my, mz in tables:
            ym = my[y]
            if not ym:
                continue
            xs = np.flatnonzero(mx & ym)
            if len(xs) == 0:
                continue
            bad[xs] |= (mx[xs, None] & mz[None, :] & ym) != 0
        good = ~bad
        bits[y] = np.packbits(good, axis=-1, bitorder="little")
        return int(good.sum()), int(good[y, y])

    threads = threads or thread_count()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(fill, range(Q)))
    else:
        results = [fill(y) for y in range(Q)]
    L = sum(r[0] for r in results)
    K = sum(r[1] for r in results)
    return PairGraph(q, n, constraint, bits, L, K)


@dataclass(frozen=True)
class Density:
    value: Fraction
    mode: str  # "undirected" (mirror-symmetric) or "directed"

    def __float__(self):
        return float(self.value)


def density(g: PairGraph) -> Density:
    """Simple-graph density (L/2 - K) / q^2N, or L / q^2N in directed mode."""
    if g.mirror_symmetric:
        simple_edges = Fraction(g.n_transitions, 2) - g.self_loops
        return Density(simple_edges / g.n_vertices, "undirected")
    return Density(Fraction(g.n_transitions, g.n_vertices), "directed")


# -- VPG1 binary dump --------------------------------------------------------

_HEADER = struct.Struct("<4sII32sQQ")


def dump_graph(g: PairGraph, path) -> None:
    """CSR dump: header, (q^2N + 1) u64 offsets, then u32 successor z-keys."""
    Q = g.n_columns
    offsets = np.zeros(Q * Q + 1, dtype="<u8")
    np.cumsum(g.out_degrees(), out=offsets[1:])
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.q, g.n, g.constraint.digest,
                              g.n_transitions, g.self_loops))
        fh.write(offsets.tobytes())
        for x in range(Q):
            for y in range(Q):
                row = np.unpackbits(g.bits[y, x], count=Q, bitorder="little")
                fh.write(np.flatnonzero(row).astype("<u4").tobytes())


def read_graph_header(path) -> tuple[int, int, bytes, int, int]:
    with open(path, "rb") as fh:
        magic, q, n, digest, L, K = _HEADER.unpack(fh.read(_HEADER.size))
    if magic != MAGIC:
        raise ValueError(f"{path}: not a VPG1 file")
    return q, n, digest, L, K


def load_graph(path, constraint: Constraint) -> PairGraph:
    q, n, digest, L, K = read_graph_header(path)
    if digest != constraint.digest or q != constraint.q:
        raise ValueError(f"{path}: constraint hash mismatch")
    Q = q ** n
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        offsets = np.frombuffer(fh.read(8 * (Q * Q + 1)), dtype="<u8").astype(np.int64)
        succ = np.frombuffer(fh.read(4 * int(offsets[-1])), dtype="<u4").astype(np.int64)
    if len(succ) != offsets[-1] or offsets[-1] != L:
        raise ValueError(f"{path}: truncated graph dump")
    dense = np.zeros((Q, Q, Q), dtype=bool)  # [y, x, z]
    src = np.repeat(np.arange(Q * Q), np.diff(offsets))
    dense[src % Q, src // Q, succ] = True
    bits = np.packbits(dense, axis=-1, bitorder="little")
    return PairGraph(q, n, constraint, bits, L, K)


def build_cached(n: int, constraint: Constraint, path=None,
                 budget_log2: int = DEFAULT_BUDGET_LOG2) -> PairGraph:
    """Build, reusing a VPG1 dump at ``path`` when its hash and N match."""
    if path is not None and os.path.exists(path):
        try:
            q, m, digest, _, _ = read_graph_header(path)
            if m == n and digest == constraint.digest:
                return load_graph(path, constraint)
        except (ValueError, struct.error):
            pass
    g = build(n, constraint, budget_log2)
    if path is not None:
        dump_graph(g, path)
    return g

"""Counting graph on 2x3 row-pair states and the asymptotic rate bound.

A state is a pair of length-3 rows ``(r1, r2)`` packed as ``r1 * q^3 + r2``
(each row itself base-q, leftmost symbol most significant).  There is an edge
``(r1, r2) -> (r2, r3)`` when the 3x3 stack ``r1; r2; r3`` avoids the
constraint, so walks of N-2 steps enumerate the constraint-avoiding N x 3
strips, i.e. the transitions of the height-N pair graph.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sps

from .constraint import AlphabetOutOfRange, Constraint, forbidden_window_table

TOL = 1e-10
MAX_ITER = 100_000


class SpectralError(RuntimeError):
    pass


class NoEdges(SpectralError):
    pass


class NonConvergence(SpectralError):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"power iteration did not converge in {iterations} "
                         f"iterations (last relative change {residual:.3e})")


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    q: int
    matrix: sps.csr_matrix  # 0/1, shape (q^6, q^6)

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def restricted(self, states: np.ndarray) -> "TransferMatrix":
        """Principal submatrix on ``states`` (used for constant-row self-loop counting)."""
        return TransferMatrix(self.q, self.matrix[states][:, states].tocsr())


def build_counting_graph(constraint: Constraint) -> TransferMatrix:
    q = constraint.q
    if q > 8:
        raise AlphabetOutOfRange(f"q={q}: counting graph needs q <= 8")
    n = q ** 3
    ok = ~forbidden_window_table(constraint)
    r1, r2, r3 = np.nonzero(ok)
    rows = r1 * n + r2
    cols = r2 * n + r3
    m = sps.csr_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(n * n, n * n)
    )
    m.sort_indices()
    return TransferMatrix(q, m)


def constant_row_states(q: int) -> np.ndarray:
    """States whose two rows are both constant (a,a,a), (b,b,b)."""
    const = np.array([a * (q * q + q + 1) for a in range(q)])
    return (const[:, None] * q ** 3 + const[None, :]).ravel()


def walk_count(tm: TransferMatrix, n: int) -> int:
    """Number of constraint-avoiding n x 3 strips: 1' M^(n-2) 1, exactly."""
    return walk_counts(tm, [n])[n]


def walk_counts(tm: TransferMatrix, ns) -> dict[int, int]:
    ns = sorted(set(int(n) for n in ns))
    if ns and ns[0] < 3:
        raise ValueError("walk counts need n >= 3")
    m = tm.matrix
    indptr, indices = m.indptr, m.indices
    nonempty = np.flatnonzero(np.diff(indptr))
    starts = indptr[nonempty]
    # python ints: L_n grows like lambda^n and overflows int64 quickly
    v = np.ones(tm.n_states, dtype=object)
    out = {}
    steps = 0
    for n in ns:
        while steps < n - 2:
            nxt = np.zeros(tm.n_states, dtype=object)
            if len(indices):
                nxt[nonempty] = np.add.reduceat(v[indices], starts)
            v = nxt
            steps += 1
        out[n] = int(sum(v))
    return out


def spectral_radius(tm: TransferMatrix, tol: float = TOL, max_iter: int = MAX_ITER):
    """Perron root by growth-ratio power iteration from the all-ones vector.

    Returns ``(lambda_max, iterations, residual)`` where residual is
    ``|M x - lambda x|_1 / |x|_1`` at the final iterate.
    """
    m = tm.matrix.astype(np.float64)
    if m.nnz == 0:
        raise NoEdges("counting graph has no edges")
    x = np.ones(m.shape[0]) / m.shape[0]
    est = None
    change = math.inf
    for it in range(1, max_iter + 1):
        y = m @ x
        s = y.sum()
        if s == 0:
            raise NoEdges("all walks die out (nilpotent counting graph)")
        new = s / x.sum()
        x = y / s
        if est is not None:
            change = abs(new - est) / new
            if change < tol:
                est = new
                break
        est = new
    else:
        raise NonConvergence(max_iter, change)
    residual = float(np.abs(m @ x - est * x).sum() / np.abs(x).sum())
    return float(est), it, residual


@dataclass
class SpectralReport:
    lambda_max: float
    alpha: float
    rate_lower_bound: float
    iterations: int
    residual: float
    walk_counts: dict[int, int] = field(default_factory=dict)
    self_loop_growth: float = 0.0
    self_loop_ratio: float = 0.0
    self_loop_ratio_n: int = 0
    alpha_supported: bool = True

    def to_json(self) -> dict:
        d = asdict(self)
        d["walk_counts"] = {str(k): v for k, v in self.walk_counts.items()}
        return d


def alpha_from_lambda(lam: float, q: int) -> float:
    return math.log2(lam) - 2 * math.log2(q)


def spectral_report(constraint: Constraint, walk_ns=range(3, 22),
                    tm: TransferMatrix | None = None) -> SpectralReport:
    """Perron root, growth exponent alpha and the rate bound alpha / log2 q.

    Also checks that self-loops are negligible against transitions: the
    self-loop count K_N grows like the Perron root of the constant-row
    submatrix, so K = o(L) iff that root is strictly below lambda_max.
    """
    q = constraint.q
    tm = tm or build_counting_graph(constraint)
    lam, iters, resid = spectral_radius(tm)
    rs = tm.row_sums()
    # Perron root of a nonnegative matrix lies between min and max row sums
    assert rs.min() - 1e-9 <= lam <= rs.max() + 1e-9 and lam <= q ** 3 + 1e-9
    alpha = alpha_from_lambda(lam, q)

    counts = walk_counts(tm, walk_ns) if walk_ns else {}
    const = tm.restricted(constant_row_states(q))
    try:
        loop_growth, _, _ = spectral_radius(const)
    except NoEdges:
        loop_growth = 0.0
    ratio, ratio_n = 0.0, 0
    if counts:
        ratio_n = max(counts)
        k_n = walk_count(const, ratio_n)
        ratio = k_n / (counts[ratio_n] / 2) if counts[ratio_n] else math.inf
    supported = loop_growth < lam * (1 - 1e-9)
    return SpectralReport(
        lambda_max=lam,
        alpha=alpha,
        rate_lower_bound=alpha / math.log2(q),
        iterations=iters,
        residual=resid,
        walk_counts=counts,
        self_loop_growth=loop_growth,
        self_loop_ratio=ratio,
        self_loop_ratio_n=ratio_n,
        alpha_supported=supported,
    )

"""Induced subgraphs with large minimum out-degree.

The largest achievable minimum out-degree over induced subgraphs is found
exactly by peeling: the maximal set in which every vertex keeps at least t
out-neighbours is unique, and removing violators in any order reaches it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sps

from .pairgraph import PairGraph, density


class DegenerateCore(ValueError):
    """No induced subgraph has positive minimum out-degree."""


@dataclass
class CoreResult:
    k: int
    vertices: np.ndarray  # sorted vertex keys
    is_exact_max: bool = True

    def __len__(self):
        return len(self.vertices)


@dataclass
class RateReport:
    n: int
    k: int
    rate: float
    density: float
    density_bound_k: int
    alpha_bound: float | None
    mode: str
    core_size: int

    def to_json(self) -> dict:
        return asdict(self)


def adjacency(g) -> sps.csr_matrix:
    """Coerce a PairGraph, sparse matrix or dense 0/1 array to CSR."""
    if isinstance(g, PairGraph):
        return g.to_csr()
    if sps.issparse(g):
        return sps.csr_matrix(g)
    return sps.csr_matrix(np.asarray(g))


def _in_adjacency(a: sps.csr_matrix) -> sps.csr_matrix:
    # row w lists predecessors of w
    return sps.csr_matrix(a.T)


def _peel(a: sps.csr_matrix, at: sps.csr_matrix, alive: np.ndarray,
          deg: np.ndarray, t: int) -> None:
    """Remove, in place, every vertex whose alive out-degree drops below t."""
    doomed = np.flatnonzero(alive & (deg < t))
    while len(doomed):
        alive[doomed] = False
        preds = at[doomed].indices
        if len(preds):
            deg -= np.bincount(preds, minlength=len(deg))
        doomed = np.flatnonzero(alive & (deg < t))


def peel_to_threshold(g, t: int, order: Iterable[int] | None = None) -> np.ndarray:
    """Maximal vertex set where every member has >= t out-neighbours inside it.

    With ``order`` given, violating vertices are deleted one at a time, the
    scan restarting from the front of ``order`` after each deletion; the
    result does not depend on the order.
    """
    a = adjacency(g)
    n = a.shape[0]
    deg = np.asarray(a.sum(axis=1)).ravel().astype(np.int64)
    alive = np.ones(n, dtype=bool)
    if order is None:
        _peel(a, _in_adjacency(a), alive, deg, t)
        return np.flatnonzero(alive)

    order = list(order)
    at = _in_adjacency(a)
    changed = True
    while changed:
        changed = False
        for v in order:
            if alive[v] and deg[v] < t:
                alive[v] = False
                for u in at.indices[at.indptr[v]:at.indptr[v + 1]]:
                    deg[u] -= 1
                changed = True
                break
    return np.flatnonzero(alive)


def induced_min_out_degree(g, vertices) -> int:
    a = adjacency(g)
    vs = np.asarray(vertices, dtype=np.int64)
    if len(vs) == 0:
        return 0
    mask = np.zeros(a.shape[0], dtype=np.int64)
    mask[vs] = 1
    return int((a[vs] @ mask).min())


def max_min_outdegree(g) -> CoreResult:
    """Largest k for which the k-peel is non-empty, with that peel's vertex set."""
    a = adjacency(g)
    n = a.shape[0]
    if n == 0:
        return CoreResult(0, np.empty(0, dtype=np.int64), True)
    at = _in_adjacency(a)
    deg = np.asarray(a.sum(axis=1)).ravel().astype(np.int64)
    alive = np.ones(n, dtype=bool)
    best_k = int(deg.min())
    best = alive.copy()
    while True:
        _peel(a, at, alive, deg, best_k + 1)
        if not alive.any():
            break
        best_k = int(deg[alive].min())
        best = alive.copy()
    vertices = np.flatnonzero(best)
    got = induced_min_out_degree(a, vertices)
    if got != best_k:
        raise AssertionError(f"core recount {got} != peeled k {best_k}")
    return CoreResult(best_k, vertices, True)


def density_floor(eps) -> int:
    """Smallest integer min-degree guaranteed by the density bound."""
    return math.ceil(eps)


def rate_exact(g: PairGraph, core: CoreResult | None = None,
               alpha_bound: float | None = None) -> RateReport:
    core = core if core is not None else max_min_outdegree(g)
    if core.k < 1:
        raise DegenerateCore(f"no code exists for N={g.n}: max min out-degree is 0")
    dens = density(g)
    return RateReport(
        n=g.n,
        k=core.k,
        rate=math.log2(core.k) / (g.n * math.log2(g.q)),
        density=float(dens.value),
        density_bound_k=density_floor(dens.value),
        alpha_bound=alpha_bound,
        mode=dens.mode,
        core_size=len(core.vertices),
    )

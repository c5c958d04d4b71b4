import math

import numpy as np
import pytest
import scipy.sparse as sps

from gridcode import spectral as sp
from gridcode.constraint import builtin, empty_constraint
from gridcode.oracles import brute_valid_pairs

from conftest import graph


@pytest.fixture(scope="module")
def matrices():
    return {name: sp.build_counting_graph(builtin(name)) for name in ("nib-asym", "nib-sym", "ici-q4")}


def test_empty_is_full_shift():
    tm = sp.build_counting_graph(empty_constraint())
    assert tm.n_states == 64
    assert (tm.row_sums() == 8).all()
    m = tm.matrix.toarray()
    for u in range(64):
        assert list(np.flatnonzero(m[u])) == [(u % 8) * 8 + r for r in range(8)]


def test_dimensions(matrices):
    assert matrices["nib-asym"].matrix.shape == (64, 64)
    assert matrices["ici-q4"].matrix.shape == (4096, 4096)
    for tm in matrices.values():
        assert set(np.unique(tm.matrix.data)) <= {1}
        assert tm.row_sums().max() <= tm.q ** 3


def test_walk_count_n3_is_total_ones(matrices):
    for tm in matrices.values():
        assert sp.walk_count(tm, 3) == tm.matrix.sum()
    assert sp.walk_count(matrices["nib-sym"], 3) == 480


@pytest.mark.parametrize("n", [4, 5])
def test_walk_count_vs_brute(matrices, n):
    for name in ("nib-asym", "nib-sym"):
        assert sp.walk_count(matrices[name], n) == brute_valid_pairs(n, builtin(name))


def test_walk_count_big_integers(matrices):
    counts = sp.walk_counts(matrices["ici-q4"], [30])
    assert counts[30] > 2 ** 63
    assert isinstance(counts[30], int)


def test_walk_counts_equal_pair_graph_L():
    for name, n in [("nib-sym", 6), ("nib-asym", 7), ("ici-q4", 3)]:
        tm = sp.build_counting_graph(builtin(name))
        assert sp.walk_count(tm, n) == graph(name, n).n_transitions


def test_spectral_radius_empty_exact():
    lam, _, resid = sp.spectral_radius(sp.build_counting_graph(empty_constraint()))
    assert abs(lam - 8) < 1e-9
    assert resid < 1e-12


def test_spectral_radius_against_dense_eigenvalues(matrices):
    for name in ("nib-asym", "nib-sym"):
        tm = matrices[name]
        lam, _, resid = sp.spectral_radius(tm)
        ref = max(abs(np.linalg.eigvals(tm.matrix.toarray().astype(float))))
        assert abs(lam - ref) < 1e-8
        assert resid <= 1e-8


def test_nib_asym_lambda(matrices):
    lam, _, _ = sp.spectral_radius(matrices["nib-asym"])
    assert abs(lam - 7.750) < 0.005


def test_ici_lambda(matrices):
    lam, _, resid = sp.spectral_radius(matrices["ici-q4"])
    assert abs(lam - 2 ** 5.996) < 0.1
    assert resid <= 1e-8


def test_no_edges():
    tm = sp.TransferMatrix(2, sps.csr_matrix((64, 64), dtype=np.int64))
    with pytest.raises(sp.NoEdges):
        sp.spectral_radius(tm)


def test_nilpotent_matrix_no_edges():
    m = sps.csr_matrix(np.array([[0, 1], [0, 0]]))
    with pytest.raises(sp.NoEdges):
        sp.spectral_radius(sp.TransferMatrix(2, m))


def test_non_convergence_reported():
    # period-2 bipartite graph with unequal degrees: the growth ratio oscillates
    m = sps.csr_matrix(np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]]))
    with pytest.raises(sp.NonConvergence) as exc:
        sp.spectral_radius(sp.TransferMatrix(2, m), max_iter=50)
    assert exc.value.iterations == 50


def test_reducible_matrix():
    # two components with roots 2 and 3; positive start vector sees both
    m = np.zeros((5, 5))
    m[0, 0] = m[0, 1] = m[1, 0] = m[1, 1] = 1
    m[2:, 2:] = 1
    lam, _, _ = sp.spectral_radius(sp.TransferMatrix(2, sps.csr_matrix(m)))
    assert abs(lam - 3) < 1e-9


def test_row_sum_bounds(matrices):
    for tm in matrices.values():
        lam, _, _ = sp.spectral_radius(tm)
        rs = tm.row_sums()
        assert rs.min() <= lam + 1e-9 and lam <= rs.max() + 1e-9


def test_monotone_lambda(matrices):
    a, _, _ = sp.spectral_radius(matrices["nib-asym"])
    s, _, _ = sp.spectral_radius(matrices["nib-sym"])
    assert s <= a


@pytest.mark.parametrize("name", ["nib-asym", "nib-sym", "ici-q4"])
def test_growth_rate_converges(name):
    rep = sp.spectral_report(builtin(name), walk_ns=[20, 21])
    growth = math.log2(rep.walk_counts[21] / rep.walk_counts[20])
    assert abs(growth - math.log2(rep.lambda_max)) < 0.01


@pytest.mark.parametrize("name", ["nib-asym", "nib-sym", "ici-q4"])
def test_report_invariants(name):
    c = builtin(name)
    rep = sp.spectral_report(c, walk_ns=[3, 10])
    assert rep.alpha == pytest.approx(math.log2(rep.lambda_max) - 2 * math.log2(c.q), abs=1e-12)
    assert rep.rate_lower_bound == pytest.approx(rep.alpha / math.log2(c.q), abs=1e-12)
    assert 0 <= rep.lambda_max <= c.q ** 3
    assert rep.alpha_supported
    assert rep.self_loop_growth == c.q  # every constant strip is allowed
    assert rep.self_loop_ratio < 1e-3


def test_self_loop_count_via_constant_rows():
    tm = sp.build_counting_graph(builtin("nib-sym"))
    const = tm.restricted(sp.constant_row_states(2))
    for n in (3, 4, 5):
        assert sp.walk_count(const, n) == graph("nib-sym", n).self_loops


def test_report_json_keys():
    d = sp.spectral_report(builtin("nib-asym"), walk_ns=[3, 4]).to_json()
    for key in ("lambda_max", "alpha", "rate_lower_bound", "iterations", "residual", "walk_counts"):
        assert key in d
    assert d["walk_counts"] == {"3": 496, "4": 3840}

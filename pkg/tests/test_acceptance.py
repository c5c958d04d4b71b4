"""Acceptance criteria, one test each, at the pinned tolerances.

Every criterion records a one-line PASS/FAIL summary that is printed at the
end of the pytest run (see ``pytest_terminal_summary`` in conftest.py).
"""

import math
import time

import numpy as np
import pytest

from gridcode import codec, pairgraph as pg, spectral as sp
from gridcode.cli import main, paper_table
from gridcode.constraint import BUILTINS, builtin, empty_constraint
from gridcode.oracles import brute_max_min_outdeg, brute_valid_pairs
from gridcode.subopt import max_min_outdegree, rate_exact

RESULTS: list[str] = []


def record(label: str, ok: bool, detail: str) -> None:
    RESULTS.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    assert ok, f"{label}: {detail}"


def timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


def test_c01_spectral_nib_asym():
    rep, dt = timed(sp.spectral_report, builtin("nib-asym"), walk_ns=None)
    ok = (abs(rep.lambda_max - 7.750) <= 0.005
          and abs(rep.rate_lower_bound - 0.954) <= 0.002 and dt < 1.0)
    record("C1 nib-asym lambda/bound", ok,
           f"lambda={rep.lambda_max:.4f} (7.750+-0.005), bound={rep.rate_lower_bound:.4f} "
           f"(0.954+-0.002), {dt:.3f}s (<1s)")


def test_c02_spectral_nib_sym():
    rep, dt = timed(sp.spectral_report, builtin("nib-sym"), walk_ns=None)
    ok = abs(rep.rate_lower_bound - 0.861) <= 0.002 and dt < 1.0
    record("C2 nib-sym bound", ok,
           f"bound={rep.rate_lower_bound:.4f} (0.861+-0.002), lambda={rep.lambda_max:.4f}, "
           f"{dt:.3f}s (<1s)")


def test_c03_spectral_ici_q4():
    rep, dt = timed(sp.spectral_report, builtin("ici-q4"), walk_ns=None)
    ok = (abs(rep.alpha - 1.996) <= 0.003
          and abs(rep.rate_lower_bound - 0.998) <= 0.002 and dt < 30.0)
    record("C3 ici-q4 alpha/bound", ok,
           f"alpha={rep.alpha:.4f} (1.996+-0.003), bound={rep.rate_lower_bound:.4f} "
           f"(0.998+-0.002), {dt:.2f}s (<30s)")


def test_c04_exact_oracle_equivalence():
    t = time.perf_counter()
    rows, ok = [], True
    for name, c in BUILTINS.items():
        tm = sp.build_counting_graph(c)
        for n in (3, 4, 5):
            walks = sp.walk_count(tm, n)
            brute = brute_valid_pairs(n, c)
            L = pg.build(n, c).n_transitions
            ok &= walks == brute == L
            rows.append(f"{name}/N={n}:{walks}")
    dt = time.perf_counter() - t
    ok &= dt < 60 and sp.walk_count(sp.build_counting_graph(builtin("nib-sym")), 3) == 480
    record("C4 walk_count = brute = L", ok, f"{', '.join(rows)}; {dt:.1f}s (<60s)")


def test_c05_core_degree_beats_density():
    cases = [(name, n) for name in ("nib-asym", "nib-sym") for n in range(4, 8)]
    cases += [("ici-q4", n) for n in (3, 4)]
    bad = []
    for name, n in cases:
        g = pg.build(n, builtin(name))
        k = max_min_outdegree(g).k
        eps = g.density().value
        if not k >= eps:
            bad.append(f"{name}/N={n}: k={k} < eps={float(eps):.3f}")
    record("C5 k >= density", not bad, "; ".join(bad) or f"{len(cases)} graphs, all k >= eps")


def test_c06_finite_rate_sequence():
    seq, bad = [], []
    for n in range(4, 9):
        g = pg.build(n, builtin("nib-sym"))
        r = rate_exact(g)
        floor = math.log2(math.ceil(g.density().value)) / n
        seq.append(f"R_{n}={r.rate:.4f}")
        if not (r.rate > 0 and r.rate >= floor):
            bad.append(f"N={n}: R={r.rate} floor={floor}")
    table = paper_table()["nib_sym_exact_rates"]
    reported = sorted(int(n) for n in table) == list(range(4, 9))
    record("C6 nib-sym R_N >= log2 ceil(eps)/N", not bad and reported,
           "; ".join(bad) or ", ".join(seq) + ("" if reported else " (table missing rows)"))


def test_c07_peeling_exactness():
    rng = np.random.default_rng(20240607)
    t = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(1, 15))
        p = rng.uniform(0.05, 0.9)
        adj = (rng.random((n, n)) < p).astype(int)
        if max_min_outdegree(adj).k != brute_max_min_outdeg(adj):
            mismatches += 1
    dt = time.perf_counter() - t
    record("C7 peeling = brute force", mismatches == 0 and dt < 60,
           f"{200 - mismatches}/200 equal, {dt:.1f}s (<60s)")


def test_c08_codec_end_to_end():
    rng = np.random.default_rng(8)
    t = time.perf_counter()
    failures = []
    for name in ("nib-sym", "nib-asym"):
        for n in (4, 6, 8):
            g = pg.build(n, builtin(name))
            cb = codec.build_codebook(g, max_min_outdegree(g))
            for _ in range(1000):
                m = [int(v) for v in rng.integers(1, cb.m + 1, size=n)]
                arr = codec.encode(cb, m)
                rep = codec.verify(arr, g.constraint)
                if codec.decode(cb, arr) != m or not (rep.clean and rep.extended_clean):
                    failures.append(f"{name}/N={n}")
                    break
    dt = time.perf_counter() - t
    record("C8 codec roundtrip + clean", not failures and dt < 60,
           f"6000 sequences, failures={failures or 'none'}, {dt:.1f}s (<60s)")


def test_c09_trivial_closed_forms():
    bad = []
    for q in (2, 4):
        c = empty_constraint(q)
        rep = sp.spectral_report(c, walk_ns=None)
        if abs(rep.lambda_max - q ** 3) > 1e-9 or abs(rep.rate_lower_bound - 1.0) > 1e-9:
            bad.append(f"q={q}: lambda={rep.lambda_max}, bound={rep.rate_lower_bound}")
        for n in ((3, 4, 5) if q == 2 else (3,)):
            g = pg.build(n, c)
            core = max_min_outdegree(g)
            rate = codec.code_rate(codec.build_codebook(g, core))
            if core.k != q ** n or rate != 1.0:
                bad.append(f"q={q} N={n}: k={core.k}, code_rate={rate}")
    record("C9 empty-constraint closed forms", not bad, "; ".join(bad) or "all exact")


def test_c10_determinism(tmp_path, capsys):
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        main(["bound", "--constraint", "ici-q4", "--out", str(d / "bound.json")])
        main(["exact", "--constraint", "nib-sym", "--n", "6", "--out", str(d / "exact.json")])
        main(["encode", "--constraint", "nib-sym", "--n", "8", "--seed", "11",
              "--out", str(d / "arr.g2d")])
        outputs.append([(d / f).read_bytes() for f in ("bound.json", "exact.json", "arr.g2d")])
    capsys.readouterr()
    record("C10 byte-identical reports", outputs[0] == outputs[1],
           "bound.json, exact.json, arr.g2d identical across runs")


@pytest.mark.parametrize("name", list(BUILTINS))
def test_note_growth_rate(name):
    rep = sp.spectral_report(builtin(name), walk_ns=[20, 21])
    gap = abs(math.log2(rep.walk_counts[21] / rep.walk_counts[20]) - math.log2(rep.lambda_max))
    record(f"Note growth {name}", gap < 0.01, f"|log2(L21/L20) - log2 lambda| = {gap:.2e} (<0.01)")

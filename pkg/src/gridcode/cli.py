"""gridcode command line.

Exit codes: 0 ok, 1 verify found a violation, 2 parse/format/input errors,
3 budget or convergence failures, 4 decode errors (unknown state/transition,
hash mismatch).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import codec, pairgraph, spectral, subopt
from .constraint import BUILTIN_DESCRIPTIONS, BUILTINS, ConstraintError, load_constraint

PAPER_BOUNDS = {"nib-asym": 0.954, "nib-sym": 0.861, "ici-q4": 0.998}
NIB_CAPACITY = 0.923
TABLE_NS = range(4, 9)


@dataclass
class RunConfig:
    constraint: str
    n: int | None = None
    budget: int = pairgraph.DEFAULT_BUDGET_LOG2
    out: str | None = None
    inp: str | None = None
    json: bool = False
    seed: int | None = None
    dump_graph: str | None = None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            constraint=getattr(args, "constraint", None),
            n=getattr(args, "n", None),
            budget=getattr(args, "budget", pairgraph.DEFAULT_BUDGET_LOG2),
            out=getattr(args, "out", None),
            inp=getattr(args, "inp", None),
            json=getattr(args, "json", False),
            seed=getattr(args, "seed", None),
            dump_graph=getattr(args, "dump_graph", None),
        )


class UsageError(Exception):
    pass


def _emit(report: dict, text: str, cfg: RunConfig) -> None:
    payload = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(payload)
    sys.stdout.write(payload if cfg.json else text)


def _base(cfg: RunConfig):
    c = load_constraint(cfg.constraint)
    return c, {"constraint": cfg.constraint, "fhash": c.fhash, "q": c.q}


def _need_n(cfg: RunConfig) -> int:
    if cfg.n is None or cfg.n < 3:
        raise UsageError("--n must be given and >= 3")
    return cfg.n


def cmd_bound(cfg: RunConfig) -> int:
    c, report = _base(cfg)
    sr = spectral.spectral_report(c)
    report["spectral"] = sr.to_json()
    text = (
        f"constraint        {cfg.constraint} (q={c.q}, {len(c)} patterns)\n"
        f"lambda_max        {sr.lambda_max:.3f}\n"
        f"alpha             {sr.alpha:.3f}\n"
        f"rate_lower_bound  {sr.rate_lower_bound:.3f}\n"
    )
    if not sr.alpha_supported:
        text += "warning: self-loops not negligible; alpha unsupported\n"
    _emit(report, text, cfg)
    return 0


def _exact(c, cfg: RunConfig, n: int):
    g = pairgraph.build_cached(n, c, cfg.dump_graph, cfg.budget)
    core = subopt.max_min_outdegree(g)
    return g, core


def cmd_exact(cfg: RunConfig) -> int:
    c, report = _base(cfg)
    n = _need_n(cfg)
    report["N"] = n
    g, core = _exact(c, cfg, n)
    sr = spectral.spectral_report(c, walk_ns=[n])
    rr = subopt.rate_exact(g, core, alpha_bound=sr.rate_lower_bound)
    exact = rr.to_json()
    exact.update(L=g.n_transitions, K=g.self_loops, density_bound_ok=core.k >= rr.density)
    report["exact"] = exact
    report["spectral"] = sr.to_json()
    text = (
        f"constraint        {cfg.constraint} (q={c.q})  N={n}  mode={rr.mode}\n"
        f"transitions L     {g.n_transitions}\n"
        f"self-loops K      {g.self_loops}\n"
        f"density           {rr.density:.4f}  (guarantees k >= {rr.density_bound_k})\n"
        f"max min degree k  {rr.k}  (core of {rr.core_size} states)\n"
        f"R_N               {rr.rate:.4f}\n"
        f"asymptotic bound  {sr.rate_lower_bound:.3f}\n"
    )
    _emit(report, text, cfg)
    return 0


def _codebook(c, n: int, cfg: RunConfig) -> codec.Codebook:
    g, core = _exact(c, cfg, n)
    return codec.build_codebook(g, core)


def cmd_encode(cfg: RunConfig) -> int:
    c = load_constraint(cfg.constraint)
    n = _need_n(cfg)
    cb = _codebook(c, n, cfg)
    if cfg.inp:
        with open(cfg.inp) as fh:
            msgs = codec.read_messages(fh.read())
    elif cfg.seed is not None:
        rng = np.random.default_rng(cfg.seed)
        msgs = [int(m) for m in rng.integers(1, cb.m + 1, size=n)]
    else:
        raise UsageError("encode needs --in <messages> or --seed")
    try:
        arr = codec.encode(cb, msgs)
    except ValueError as e:
        raise UsageError(str(e)) from None
    body = codec.write_g2d(arr)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(body)
        report = {"constraint": cfg.constraint, "fhash": c.fhash, "q": c.q, "N": n,
                  "codec": {"M": cb.m, "code_rate": codec.code_rate(cb),
                            "v_init": cb.v_init, "messages": [m - 1 for m in msgs]}}
        if cfg.json:
            sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(body)
    return 0


def _read_array(path: str) -> codec.EncodedArray:
    if not path:
        raise UsageError("--in <file.g2d> is required")
    with open(path) as fh:
        return codec.read_g2d(fh.read())


def cmd_decode(cfg: RunConfig) -> int:
    c = load_constraint(cfg.constraint)
    arr = _read_array(cfg.inp)
    if arr.fhash != c.fhash:
        raise codec.HashMismatch(
            f"{cfg.inp} was written for constraint hash {arr.fhash[:12]}…, "
            f"not {cfg.constraint} ({c.fhash[:12]}…)")
    if cfg.n is not None and cfg.n != arr.n:
        raise UsageError(f"--n {cfg.n} disagrees with file N={arr.n}")
    cb = _codebook(c, arr.n, cfg)
    body = codec.write_messages(codec.decode(cb, arr))
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    c = load_constraint(cfg.constraint)
    arr = _read_array(cfg.inp)
    rep = codec.verify(arr, c)
    if cfg.json:
        sys.stdout.write(json.dumps({
            "clean": rep.clean, "extended_clean": rep.extended_clean,
            "violation": list(rep.violation) if rep.violation else None,
            "pattern": rep.pattern}, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(rep.describe() + "\n")
    return 0 if rep.clean and rep.extended_clean else 1


def paper_table() -> dict:
    rows = []
    for name, paper in PAPER_BOUNDS.items():
        sr = spectral.spectral_report(BUILTINS[name], walk_ns=None)
        rows.append({
            "constraint": name,
            "q": BUILTINS[name].q,
            "lambda_max": sr.lambda_max,
            "alpha": sr.alpha,
            "rate_lower_bound": sr.rate_lower_bound,
            "paper": paper,
            "deviation": abs(sr.rate_lower_bound - paper),
            "capacity_reference": NIB_CAPACITY if name == "nib-sym" else None,
        })
    sequence = {}
    for n in TABLE_NS:
        g = pairgraph.build(n, BUILTINS["nib-sym"])
        rr = subopt.rate_exact(g)
        sequence[str(n)] = {"k": rr.k, "R_N": rr.rate, "density_bound_k": rr.density_bound_k}
    return {"bounds": rows, "nib_sym_exact_rates": sequence}


def format_paper_table(t: dict) -> str:
    out = [f"{'constraint':<10} {'q':>2} {'lambda':>8} {'alpha':>7} {'bound':>7} "
           f"{'paper':>7} {'|dev|':>7} {'capacity':>9}"]
    for r in t["bounds"]:
        cap = f"{r['capacity_reference']:.3f}" if r["capacity_reference"] else "-"
        out.append(
            f"{r['constraint']:<10} {r['q']:>2} {r['lambda_max']:>8.3f} {r['alpha']:>7.3f} "
            f"{r['rate_lower_bound']:>7.3f} {r['paper']:>7.3f} {r['deviation']:>7.3f} {cap:>9}")
    out.append("")
    out.append("nib-sym exact finite-N rates")
    out.append(f"{'N':>3} {'k':>5} {'R_N':>7} {'ceil(eps)':>10}")
    for n, r in t["nib_sym_exact_rates"].items():
        out.append(f"{n:>3} {r['k']:>5} {r['R_N']:>7.3f} {r['density_bound_k']:>10}")
    return "\n".join(out) + "\n"


def cmd_paper_table(cfg: RunConfig) -> int:
    t = paper_table()
    _emit(t, format_paper_table(t), cfg)
    return 0


def cmd_constraints(cfg: RunConfig) -> int:
    for name, c in BUILTINS.items():
        sys.stdout.write(f"{name:<10} q={c.q} patterns={len(c)}  {BUILTIN_DESCRIPTIONS[name]}\n")
    return 0


COMMANDS = {
    "bound": cmd_bound,
    "exact": cmd_exact,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "verify": cmd_verify,
    "paper-table": cmd_paper_table,
    "constraints": cmd_constraints,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcode",
        description="Column-by-column 2D constraint codes: exact rates and spectral bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help, constraint=True, n=False, io=False):
        p = sub.add_parser(name, help=help)
        if constraint:
            p.add_argument("--constraint", required=True,
                           help="built-in name, empty[:q], or path to a .fct file")
        if n:
            p.add_argument("--n", type=int, help="column height N")
            p.add_argument("--budget", type=int, default=pairgraph.DEFAULT_BUDGET_LOG2,
                           help="log2 of the allowed triple enumerations (default 30)")
            p.add_argument("--dump-graph", metavar="PATH",
                           help="VPG1 graph cache; reused when hash and N match")
        if io:
            p.add_argument("--in", dest="inp", metavar="PATH")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--json", action="store_true", help="print the JSON report")
        return p

    add("bound", "asymptotic rate lower bound from the counting graph")
    add("exact", "exact finite-N rate via min-degree core", n=True)
    add("encode", "encode messages into an N x N array", n=True, io=True).add_argument(
        "--seed", type=int, help="draw random messages instead of reading --in")
    add("decode", "decode a .g2d array to messages", n=True, io=True)
    add("verify", "check a .g2d array against a constraint", io=True)
    add("paper-table", "reproduce the published bounds", constraint=False)
    add("constraints", "list built-in constraints", constraint=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    cfg = RunConfig.from_args(args)
    try:
        return COMMANDS[args.command](cfg)
    except (ConstraintError, codec.FormatError, UsageError, codec.MessageOutOfRange,
            OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (pairgraph.BudgetExceeded, spectral.SpectralError, subopt.DegenerateCore,
            codec.EmptyCore) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (codec.UnknownState, codec.UnknownTransition, codec.HashMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

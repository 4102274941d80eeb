"""Command-line entry point.

Every command prints one JSON document on stdout.  Exit codes: 0 completed,
1 usage or input error, 2 budget exceeded, 3 internal check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BudgetExceeded, GroupWLError, InvariantViolation

log = logging.getLogger("groupwl")

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- helpers


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _inputs(*paths: str) -> list[dict]:
    return [{"path": p, "sha256": _digest(p)} for p in paths]


def _read_graph(path: str):
    from .graphs import Graph
    return Graph.read(path)


def _read_group(path: str):
    from .cayley import CayleyGroup
    return CayleyGroup.read(path)


def _plot_path(args, name: str) -> Path | None:
    if not args.plot_dir:
        return None
    return Path(args.plot_dir) / name


_GROUP_NAME = re.compile(r"^(Z|D)(\d+)$|^Q8$|^H(\d+)$")


def group_from_name(name: str):
    """``Z4``, ``D8`` (dihedral of order 8), ``Q8``, ``H3`` (Heisenberg mod 3), joined by ``x``."""
    from .cayley import cyclic, dihedral, direct_product, heisenberg, quaternion8
    out = None
    for part in name.split("x"):
        m = _GROUP_NAME.match(part)
        if not m:
            raise UsageError(f"unknown group name {part!r}")
        if part == "Q8":
            g = quaternion8()
        elif m.group(1) == "Z":
            g = cyclic(int(m.group(2)))
        elif m.group(1) == "D":
            order = int(m.group(2))
            if order % 2 or order < 4:
                raise UsageError("dihedral groups are named by their (even) order")
            g = dihedral(order // 2)
        else:
            g = heisenberg(int(m.group(3)))
        out = g if out is None else direct_product(out, g)
    return out


# ---------------------------------------------------------------- commands


def cmd_cfi_build(args) -> dict:
    from .cfi import build_cfi, parse_edge
    base = _read_graph(args.base)
    cfi = build_cfi(base, [parse_edge(t) for t in args.twist])
    out = {"vertices": cfi.n, "edges": cfi.graph.m, "twisted": sorted(f"{u}-{v}" for u, v in cfi.twisted)}
    if args.output:
        cfi.graph.write(args.output)
        side = args.output + ".json"
        Path(side).write_text(cfi.sidecar_json(), encoding="ascii")
        out.update(output=args.output, sidecar=side)
    else:
        out["graph"] = cfi.graph.to_text()
    return out


def _graph_verdict(v, k: int) -> dict:
    dG, dH = v.digests()
    return {"k": k, "rounds": v.round, "outcome": v.outcome,
            "histogram_digest_G": dG, "histogram_digest_H": dH}


def cmd_wl_graph(args) -> dict:
    from .graphs import graph_wl
    G, H = _read_graph(args.g1), _read_graph(args.g2)
    v = graph_wl(G, H, args.k, args.max_rounds, args.engine)
    if (p := _plot_path(args, f"wl_graph_k{args.k}.png")):
        from .plotting import class_sizes
        class_sizes(v, p)
    return _graph_verdict(v, args.k)


def cmd_wl_group(args) -> dict:
    from .wlgroups import verdict_report, wl_group
    G, H = _read_group(args.g1), _read_group(args.g2)
    v = wl_group(G, H, args.k, args.version, args.max_rounds, args.engine, args.work_budget)
    if (p := _plot_path(args, f"wl_group_{args.version}_k{args.k}.png")):
        from .plotting import class_sizes
        class_sizes(v, p)
    return verdict_report(v, args.version, args.k)


def cmd_game_solve(args) -> dict:
    from .wlgroups import game_solve
    G, H = _read_group(args.g1), _read_group(args.g2)
    winner = game_solve(G, H, args.pebbles, args.version, args.max_order, args.state_budget)
    return {"version": args.version, "pebble_pairs": args.pebbles, "winner": winner}


def _mekler(args):
    from .mekler import MeklerGroup
    return MeklerGroup(_read_graph(args.graph), args.p)


def cmd_mekler_build(args) -> dict:
    G = _mekler(args)
    out = {"n": G.n, "p": G.p, "non_edges": [list(e) for e in G.non_edges],
           "order": f"{G.p}^{G.order_exponent}"}
    if args.output:
        G.to_cayley(args.max_order).write(args.output)
        out["output"] = args.output
    return out


def cmd_mekler_mul(args) -> dict:
    G = _mekler(args)
    x = G.identity()
    for lit in args.elements:
        x = G.mul(x, G.parse(lit))
    return {"product": G.format(x)}


def cmd_mekler_centralizer(args) -> dict:
    G = _mekler(args)
    x = G.parse(args.element)
    basis = G.centralizer_basis(x)
    a, b = G.centralizer_log_order(x), G.centralizer_log_order_by_rank(x)
    if a != b:
        raise InvariantViolation(f"centralizer order {a} by components, {b} by rank")
    return {"element": G.format(x), "basis": [G.format(y) for y in basis], "log_order": a}


def cmd_mekler_commuting(args) -> dict:
    G = _mekler(args)
    g, reps = G.commuting_graph(args.cap, args.budget)
    out = {"vertices": g.n, "edges": g.m, "cap": args.cap}
    if args.output:
        g.write(args.output)
        out["output"] = args.output
    if (p := _plot_path(args, "commuting_degrees.png")):
        from .plotting import degree_histogram
        degree_histogram(g.degrees(), p)
    return out


def cmd_group_table(args) -> dict:
    G = group_from_name(args.name)
    G.write(args.output)
    return {"name": args.name, "order": G.order, "output": args.output}


def cmd_group_invariants(args) -> dict:
    from .cayley import invariants
    return invariants(_read_group(args.table))


def cmd_group_profile(args) -> dict:
    from .cayley import profile, profile_summary
    prof = profile(_read_group(args.table), args.k, args.budget)
    return {"k": args.k, "subgroups": sum(prof.values()), "types": profile_summary(prof)}


def cmd_group_iso(args) -> dict:
    from .cayley import iso_oracle
    phi = iso_oracle(_read_group(args.g1), _read_group(args.g2), args.node_budget)
    return {"isomorphic": phi is not None, "map": phi}


def _pair(args):
    from .cfi import parse_edge
    from .cfigroups import CfiGroupPair
    edge = parse_edge(args.twist) if args.twist else None
    return CfiGroupPair(_read_graph(args.base), args.p, edge)


def cmd_distinguish(args) -> dict:
    from .cfigroups import distinguish_cfi_groups
    return distinguish_cfi_groups(_pair(args))


def cmd_check_lemmas(args) -> dict:
    from .cfigroups import centralizer_profile_check, distinguish_cfi_groups, parity_choice_bits, twist_pipeline
    from .mekler import free_reduce, word_of
    pair = _pair(args)
    rng = np.random.default_rng(args.seed)
    out: dict = {}

    G = pair.G1
    bad = 0
    for _ in range(args.mul_trials):
        x, y = G.random_element(rng), G.random_element(rng)
        if G.mul(x, y) != free_reduce(G, word_of(G, x) + word_of(G, y)):
            bad += 1
    out["multiplication"] = {"trials": args.mul_trials, "mismatches": bad}

    out["centralizers"] = [centralizer_profile_check(H, args.samples, args.seed) for H in (pair.G1, pair.G2)]
    if (p := _plot_path(args, "centralizer_ratios.png")):
        from .plotting import ratio_bars
        ratio_bars(out["centralizers"][0], p)

    verdict = distinguish_cfi_groups(pair)
    verdict["choice_bits"] = [sorted(parity_choice_bits(c, seed=args.seed)) for c in (pair.cfi1, pair.cfi2)]
    out["parity"] = verdict

    out["twist_pipeline"] = twist_pipeline(pair, args.k, args.trials, args.seed)

    if args.commuting:
        from .graphs import graph_wl
        g1, _ = pair.G1.commuting_graph(args.cap)
        g2, _ = pair.G2.commuting_graph(args.cap)
        v = graph_wl(g1, g2, 1)
        out["commuting_graphs"] = {"vertices": g1.n, "edges": [g1.m, g2.m], "outcome": v.outcome, "rounds": v.round}

    problems = []
    if bad:
        problems.append("multiplication")
    if any(r["violations"] for r in out["centralizers"]):
        problems.append("centralizers")
    if not verdict["distinguished"] or any(len(b) != 1 for b in verdict["choice_bits"]):
        problems.append("parity")
    tp = out["twist_pipeline"]
    if tp["failures"]:
        problems.append("twist_pipeline")
    out["problems"] = problems
    return out


# ---------------------------------------------------------------- parser


def _global_options(p: argparse.ArgumentParser, default) -> None:
    p.add_argument("--threads", type=int, default=default, help="worker threads (default: all cores)")
    p.add_argument("--seed", type=int, default=default)
    p.add_argument("--plot-dir", default=default, help="write PNG figures here")
    p.add_argument("--timings", action="store_true", default=default, help="log wall time on stderr")
    p.add_argument("-v", "--verbose", action="store_true", default=default)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="groupwl", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"groupwl {__version__}")
    _global_options(ap, argparse.SUPPRESS)
    ap.set_defaults(threads=None, seed=0, plot_dir=None, timings=False, verbose=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, argparse.SUPPRESS)

    top = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    cfi = top.add_parser("cfi").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    b = cfi.add_parser("build", parents=[common], help="CFI graph of a base graph")
    b.add_argument("base")
    b.add_argument("--twist", action="append", default=[], metavar="U-V")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_cfi_build)

    wl = top.add_parser("wl").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    g = wl.add_parser("graph", parents=[common], help="k-WL on two graph files")
    g.add_argument("g1")
    g.add_argument("g2")
    g.add_argument("-k", type=int, required=True)
    g.add_argument("--max-rounds", type=int, default=None)
    g.add_argument("--engine", choices=("auto", "exact", "hashed"), default="auto")
    g.set_defaults(func=cmd_wl_graph)
    g = wl.add_parser("group", parents=[common], help="k-WL on two group tables")
    g.add_argument("g1")
    g.add_argument("g2")
    g.add_argument("-k", type=int, required=True)
    g.add_argument("--version", dest="version", choices=("I", "II", "III"), default="I")
    g.add_argument("--max-rounds", type=int, default=None)
    g.add_argument("--engine", choices=("auto", "exact", "hashed"), default="auto")
    g.add_argument("--work-budget", type=float, default=5e9)
    g.set_defaults(func=cmd_wl_group)

    game = top.add_parser("game").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    g = game.add_parser("solve", parents=[common], help="bijective pebble game on two group tables")
    g.add_argument("g1")
    g.add_argument("g2")
    g.add_argument("--pebbles", type=int, default=3)
    g.add_argument("--version", dest="version", choices=("I", "II"), default="I")
    g.add_argument("--max-order", type=int, default=6)
    g.add_argument("--state-budget", type=float, default=1e10)
    g.set_defaults(func=cmd_game_solve)

    mk = top.add_parser("mekler").add_subparsers(dest="sub", required=True, parser_class=_Parser)

    def mekler_cmd(name, func, help):
        c = mk.add_parser(name, parents=[common], help=help)
        c.add_argument("graph")
        c.add_argument("-p", type=int, required=True)
        c.set_defaults(func=func)
        return c

    c = mekler_cmd("build", cmd_mekler_build, "group of a graph; optional Cayley table")
    c.add_argument("-o", "--output")
    c.add_argument("--max-order", type=int, default=10_000)
    c = mekler_cmd("mul", cmd_mekler_mul, "product of element literals")
    c.add_argument("elements", nargs="+")
    c = mekler_cmd("centralizer", cmd_mekler_centralizer, "centralizer basis of an element")
    c.add_argument("element")
    c = mekler_cmd("commuting-graph", cmd_mekler_commuting, "commuting graph on centre cosets")
    c.add_argument("--cap", type=int, default=3)
    c.add_argument("--budget", type=int, default=2_000_000)
    c.add_argument("-o", "--output")

    grp = top.add_parser("group").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    c = grp.add_parser("table", parents=[common], help="write a named group's table (Z4, D8, Q8, H3, Z2xZ2, ...)")
    c.add_argument("name")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_group_table)
    c = grp.add_parser("invariants", parents=[common])
    c.add_argument("table")
    c.set_defaults(func=cmd_group_invariants)
    c = grp.add_parser("profile", parents=[common])
    c.add_argument("table")
    c.add_argument("-k", type=int, default=2)
    c.add_argument("--budget", type=int, default=2_000_000)
    c.set_defaults(func=cmd_group_profile)
    c = grp.add_parser("iso", parents=[common])
    c.add_argument("g1")
    c.add_argument("g2")
    c.add_argument("--node-budget", type=int, default=1_000_000)
    c.set_defaults(func=cmd_group_iso)

    dist = top.add_parser("distinguish").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    c = dist.add_parser("cfi-groups", parents=[common], help="parity verdict for the groups over a CFI pair")
    c.add_argument("base")
    c.add_argument("-p", type=int, required=True)
    c.add_argument("--twist", metavar="U-V", default=None)
    c.set_defaults(func=cmd_distinguish)

    chk = top.add_parser("check").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    c = chk.add_parser("lemmas", parents=[common], help="invariant suites on the groups over a CFI pair")
    c.add_argument("base")
    c.add_argument("-p", type=int, required=True)
    c.add_argument("--twist", metavar="U-V", default=None)
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--mul-trials", type=int, default=200)
    c.add_argument("-k", type=int, default=3, help="tuple length for the twist pipeline")
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--commuting", action="store_true", help="also compare reduced commuting graphs")
    c.add_argument("--cap", type=int, default=3)
    c.set_defaults(func=cmd_check_lemmas)
    return ap


def _input_paths(args) -> list[str]:
    names = ("base", "graph", "table", "g1", "g2")
    return [getattr(args, n) for n in names if isinstance(getattr(args, n, None), str)
            and Path(getattr(args, n)).exists()]


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    from .refine import set_threads
    set_threads(args.threads if args.threads else os.cpu_count())
    argv_echo = list(sys.argv[1:] if argv is None else argv)
    t0 = time.perf_counter()
    try:
        inputs = _inputs(*_input_paths(args))
        result = args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvariantViolation, AssertionError) as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, GroupWLError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.timings:
        print(f"wall time {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    report = {"command": argv_echo, "inputs": inputs, "seed": args.seed, "result": result}
    json.dump(report, sys.stdout, sort_keys=True, indent=1)
    sys.stdout.write("\n")
    if args.cmd == "check" and result.get("problems"):
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Weisfeiler-Leman refinement on groups (Versions I, II, III) and the bijective pebble game."""

from __future__ import annotations

import json
import math
from collections import OrderedDict
from itertools import combinations, permutations, product
from typing import Sequence

import numpy as np

from .cayley import CayleyGroup, marked_certificate, marked_hashes_all
from .errors import BudgetExceeded, ParameterError
from .graphs import Graph, graph_space
from .refine import (DISTINGUISHED, STABLE_EQUAL, HashedRefiner, Histogram, TupleSpace,
                     Verdict, choose_engine, compare_refiners, refine_pair)

VERSIONS = ("I", "II", "III")
GAMMA_TUPLE_BUDGET = 5_000_000_000  # (|Gamma_G|)**(k+1) work units for Version III
EXACT_CERT_LIMIT = 200_000  # tuples for which Version II certificates are built in Python


def _check_version(version: str) -> str:
    v = str(version).upper()
    if v not in VERSIONS:
        raise ParameterError(f"unknown WL version {version!r}; expected I, II or III")
    return v


# ---------------------------------------------------------------- initial colours

def init_color_v1(G: CayleyGroup, tup: Sequence[int]) -> tuple:
    """Equality pattern and the set of index triples (i, j, m) with g_i g_j = g_m."""
    k = len(tup)
    if k < 2:
        raise ParameterError("Version I colours need k >= 2")
    eq = tuple(tup[i] == tup[j] for i, j in combinations(range(k), 2))
    triples = frozenset((i, j, m) for i, j, m in product(range(k), repeat=3)
                        if G.table[tup[i], tup[j]] == tup[m])
    return eq, triples


def init_color_v2(G: CayleyGroup, tup: Sequence[int]):
    """Marked isomorphism type of the tuple."""
    return marked_certificate(G, tup)


def _pack_bits(bits: list[np.ndarray]) -> np.ndarray:
    """Pack boolean arrays into int64 columns of at most 62 bits each."""
    cols = []
    for start in range(0, len(bits), 62):
        acc = np.zeros(bits[0].shape, dtype=np.int64)
        for off, b in enumerate(bits[start:start + 62]):
            acc |= b.astype(np.int64) << off
        cols.append(acc)
    return np.stack(cols, axis=-1)


def v1_keys(G: CayleyGroup, k: int) -> np.ndarray:
    """Version I key of every k-tuple, shape ``(n,)*k + (F,)``."""
    if k < 2:
        raise ParameterError("Version I colours need k >= 2")
    n = G.order
    T = G.table
    grids = np.indices((n,) * k, sparse=True)
    full = (n,) * k
    bits = [np.broadcast_to(grids[i] == grids[j], full) for i, j in combinations(range(k), 2)]
    for i, j, m in product(range(k), repeat=3):
        bits.append(np.broadcast_to(T[grids[i], grids[j]] == grids[m], full))
    return _pack_bits(bits)


def v2_keys_joint(G: CayleyGroup, H: CayleyGroup, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Version II keys with exact joint naming of the marked certificates."""
    certs = []
    for X in (G, H):
        certs.append([marked_certificate(X, t).key() for t in product(range(X.order), repeat=k)])
    names = {c: i for i, c in enumerate(sorted(set(certs[0]) | set(certs[1])))}
    shape = (G.order,) * k
    return tuple(np.array([names[c] for c in cs], dtype=np.int64).reshape(shape) for cs in certs)


def v2_keys_hashed(G: CayleyGroup, k: int) -> np.ndarray:
    """Version II keys as 64-bit certificate hashes (partner independent)."""
    return marked_hashes_all(G, k).view(np.int64)


# ---------------------------------------------------------------- Version III graph

def gamma_graph(G: CayleyGroup, max_vertices: int = 20_000) -> Graph:
    """Element vertices ``0..n-1`` plus a four-vertex gadget per ordered pair (g, h).

    Gadget ``(g, h)`` occupies ``n + 4*(g*n + h) + (0, 1, 2, 3)`` for ``a, b, c, d``
    with edges ``{g,a}, {h,b}, {gh,d}, {a,b}, {b,c}, {c,d}``.
    """
    n = G.order
    N = n + 4 * n * n
    if N > max_vertices:
        raise BudgetExceeded("gadget graph vertices", N, max_vertices)
    g, h = np.divmod(np.arange(n * n), n)
    base = n + 4 * np.arange(n * n)
    a, b, c, d = base, base + 1, base + 2, base + 3
    gh = G.table[g, h]
    E = np.concatenate([np.stack(x, axis=1) for x in
                        ((g, a), (h, b), (gh, d), (a, b), (b, c), (c, d))])
    return Graph(N, map(tuple, E.tolist()))


# ---------------------------------------------------------------- refinement

_REFINER_CACHE: "OrderedDict[tuple, HashedRefiner]" = OrderedDict()
REFINER_CACHE_SIZE = 6


def _cached_refiner(key: tuple, make) -> HashedRefiner:
    if key in _REFINER_CACHE:
        _REFINER_CACHE.move_to_end(key)
        return _REFINER_CACHE[key]
    R = HashedRefiner(make())
    _REFINER_CACHE[key] = R
    while len(_REFINER_CACHE) > REFINER_CACHE_SIZE:
        _REFINER_CACHE.popitem(last=False)
    return R


def clear_cache() -> None:
    _REFINER_CACHE.clear()


def _group_key(G: CayleyGroup) -> bytes:
    return G.table.tobytes()


def _empty_verdict() -> Verdict:
    e = Histogram.of(np.zeros(0, dtype=np.int64))
    return Verdict(DISTINGUISHED, 0, (e, e), "none")


def group_space(G: CayleyGroup, k: int, version: str, keys: np.ndarray | None = None) -> TupleSpace:
    version = _check_version(version)
    if version == "I":
        return TupleSpace(G.order, k, v1_keys(G, k))
    if version == "II":
        return TupleSpace(G.order, k, v2_keys_hashed(G, k) if keys is None else keys)
    space = graph_space(gamma_graph(G), k, restrict=G.order)
    return space


def wl_group(G: CayleyGroup, H: CayleyGroup, k: int, version: str = "I",
             max_rounds: int | None = None, engine: str = "auto",
             work_budget: float = GAMMA_TUPLE_BUDGET, use_cache: bool = True) -> Verdict:
    """k-WL (Version I, II or III) on two groups with joint colour naming."""
    version = _check_version(version)
    if k < 2:
        raise ParameterError("group WL needs k >= 2")
    if G.order != H.order:
        return _empty_verdict()
    n = G.order
    dom = n if version != "III" else n + 4 * n * n
    work = float(dom) ** (k + 1)
    if work > work_budget:
        # the initial colouring costs dom**k and may already separate the groups
        if float(dom) ** k > work_budget or (max_rounds is not None and max_rounds > 0):
            raise BudgetExceeded(f"Version {version} refinement work", work, work_budget)
        try:
            return wl_group(G, H, k, version, 0, engine, float("inf"), use_cache)
        except BudgetExceeded:
            raise BudgetExceeded(f"Version {version} refinement work", work, work_budget) from None
    eng = choose_engine(dom, k, engine)
    if eng == "exact":
        if version == "II":
            if n ** k <= EXACT_CERT_LIMIT:
                kG, kH = v2_keys_joint(G, H, k)
            else:
                kG, kH = v2_keys_hashed(G, k), v2_keys_hashed(H, k)
            A, B = TupleSpace(n, k, kG), TupleSpace(n, k, kH)
        else:
            A, B = group_space(G, k, version), group_space(H, k, version)
        return refine_pair(A, B, "exact", max_rounds)
    if use_cache:
        RA = _cached_refiner((_group_key(G), k, version), lambda: group_space(G, k, version))
        RB = _cached_refiner((_group_key(H), k, version), lambda: group_space(H, k, version))
    else:
        RA, RB = HashedRefiner(group_space(G, k, version)), HashedRefiner(group_space(H, k, version))
    return compare_refiners(RA, RB, max_rounds)


def verdict_report(v: Verdict, version: str, k: int) -> dict:
    dG, dH = v.digests()
    return {
        "version": _check_version(version),
        "k": k,
        "rounds": v.round,
        "outcome": v.outcome,
        "histogram_digest_G": dG,
        "histogram_digest_H": dH,
    }


def verdict_json(v: Verdict, version: str, k: int) -> str:
    return json.dumps(verdict_report(v, version, k), sort_keys=True)


# ---------------------------------------------------------------- pebble game

def _partial_cert(G: CayleyGroup, tup: Sequence[int | None], version: str):
    present = tuple(i for i, x in enumerate(tup) if x is not None)
    elems = [tup[i] for i in present]
    if version == "I":
        eq = tuple(elems[i] == elems[j] for i, j in combinations(range(len(elems)), 2))
        trip = frozenset((i, j, m) for i, j, m in product(range(len(elems)), repeat=3)
                         if G.table[elems[i], elems[j]] == elems[m])
        return present, eq, trip
    return present, marked_certificate(G, elems).key()


def game_solve(G: CayleyGroup, H: CayleyGroup, pebble_pairs: int, version: str = "I",
               max_order: int = 6, state_budget: float = 1e10) -> str:
    """Winner ("spoiler" or "duplicator") of the bijective pebble game under optimal play.

    Spoiler wins from a position iff for some pebble pair either the remaining
    pebbles already differ in their initial colour, or every bijection admits a
    placement leading to a Spoiler win.  The set of winning positions is the least
    fixpoint of that rule; bijections are enumerated explicitly.
    """
    version = _check_version(version)
    if version == "III":
        raise ParameterError("the game solver handles Versions I and II")
    P = int(pebble_pairs)
    if P < 1:
        raise ParameterError("need at least one pebble pair")
    if G.order != H.order:
        return "spoiler"
    n = G.order
    if n > max_order:
        raise BudgetExceeded("game board order", n, max_order)
    V = n * n + 1  # slot value 0 = beside the board, 1 + g*n + h otherwise
    S = V ** P
    perms = np.array(list(permutations(range(n))), dtype=np.int64)
    if float(S) * P * len(perms) * n > state_budget:
        raise BudgetExceeded("game positions x bijections", float(S) * P * len(perms) * n, state_budget)

    def decode(v: int):
        return (None, None) if v == 0 else divmod(v - 1, n)

    # bad[r] for every configuration r of P-1 remaining slots
    R = V ** (P - 1)
    bad_rest = np.zeros(R, dtype=bool)
    for r in range(R):
        vals, x = [], r
        for _ in range(P - 1):
            x, v = divmod(x, V)
            vals.append(v)
        pairs = [decode(v) for v in vals]
        tg = [a for a, _ in pairs]
        th = [b for _, b in pairs]
        bad_rest[r] = _partial_cert(G, tg, version) != _partial_cert(H, th, version)

    states = np.arange(S, dtype=np.int64)
    digits = np.stack([(states // V ** i) % V for i in range(P)], axis=1)
    pw = V ** np.arange(P, dtype=np.int64)
    rest_index = np.zeros((S, P), dtype=np.int64)
    for i in range(P):
        others = [j for j in range(P) if j != i]
        rw = V ** np.arange(P - 1, dtype=np.int64)
        rest_index[:, i] = digits[:, others] @ rw
    immediate = bad_rest[rest_index].any(axis=1)

    win = immediate.copy()
    gh = 1 + np.arange(n)[:, None] * n + np.arange(n)[None, :]  # slot value for (g, h)
    rows = np.arange(n)
    chunk = max(1, 4_000_000 // (len(perms) * n))
    while True:
        new = win.copy()
        for i in range(P):
            cleared = states - digits[:, i] * pw[i]
            todo = np.flatnonzero(~new)
            for lo in range(0, todo.size, chunk):
                s = todo[lo:lo + chunk]
                nxt = cleared[s][:, None, None] + gh[None, :, :] * pw[i]
                M = win[nxt]  # (batch, g, h): Spoiler wins after pebbling (g, f(g)=h)
                hit = M[:, rows[None, :], perms].any(axis=2)  # (batch, perms)
                new[s[hit.all(axis=1)]] = True
        if np.array_equal(new, win):
            break
        win = new
    return "spoiler" if win[0] else "duplicator"


# ---------------------------------------------------------------- version relations

def compare_versions(G: CayleyGroup, H: CayleyGroup, k: int,
                     work_budget: float = GAMMA_TUPLE_BUDGET) -> dict:
    """Run the affordable versions and check I(k) => II(k) => III(ceil(k/2)+2)."""
    runs: dict[str, dict] = {}
    skipped: list[str] = []

    def run(version: str, kk: int):
        try:
            v = wl_group(G, H, kk, version, work_budget=work_budget)
        except BudgetExceeded as exc:
            skipped.append(f"{version}@{kk}: {exc}")
            return None
        runs[f"{version}@{kk}"] = verdict_report(v, version, kk)
        return v.distinguished

    k3 = math.ceil(k / 2) + 2
    d1 = run("I", k)
    d2 = run("II", k)
    d3 = run("III", k3)
    violations = []
    if d1 and d2 is False:
        violations.append(f"Version I distinguishes at k={k} but Version II does not")
    if d2 and d3 is False:
        violations.append(f"Version II distinguishes at k={k} but Version III does not at k={k3}")
    return {"k": k, "runs": runs, "skipped": skipped, "violations": violations}

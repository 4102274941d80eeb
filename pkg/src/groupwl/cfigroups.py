"""Class-2 groups over a CFI pair: twist bookkeeping, subgroup certificates and
the checks that separate the two sides.

Both groups are quotients of the relatively free group ``F`` on the CFI vertex
set; their relators are the edge commutators.  Quotients are never built as
groups here.  A subgroup ``<t> N / N`` is described by its generator-exponent
matrix, the wedge of that matrix, and the set of commutator columns that the
edge set kills.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .cfi import BaseEdge, CfiGraph, all_choices, build_cfi, norm_edge, parity_invariant, zero_choice
from .errors import ValidationError
from .fpalgebra import FpMatrix, check_odd_prime, column_space_equal, rank, row_kernel
from .graphs import Graph, complement, is_isomorphism
from .mekler import InducedMap, MeklerElement, MeklerGroup, free_group, zeroed_wedge


# ---------------------------------------------------------------- the pair


@dataclass(eq=False)
class CfiGroupPair:
    """Untwisted and once-twisted CFI graphs over a 3-regular base, with their groups."""

    base: Graph
    p: int
    twisted_edge: BaseEdge | None = None
    cfi1: CfiGraph = field(init=False)
    cfi2: CfiGraph = field(init=False)

    def __post_init__(self):
        check_odd_prime(self.p)
        if any(self.base.degree(v) != 3 for v in range(self.base.n)):
            raise ValidationError("base graph must be 3-regular")
        if not self.base.is_connected():
            raise ValidationError("base graph must be connected")
        if self.twisted_edge is None:
            self.twisted_edge = self.base.sorted_edges()[0]
        self.twisted_edge = norm_edge(self.twisted_edge)
        self.cfi1 = build_cfi(self.base)
        self.cfi2 = build_cfi(self.base, [self.twisted_edge])

    @property
    def n(self) -> int:
        return self.cfi1.n

    @cached_property
    def G1(self) -> MeklerGroup:
        return MeklerGroup(self.cfi1.graph, self.p)

    @cached_property
    def G2(self) -> MeklerGroup:
        return MeklerGroup(self.cfi2.graph, self.p)

    @cached_property
    def free(self) -> MeklerGroup:
        return free_group(self.n, self.p)

    def edges_twisted_at(self, e: BaseEdge) -> frozenset:
        """Edge set of the CFI graph whose only crossed link is ``e``."""
        e = norm_edge(e)
        self._check_edge(e)
        E = set(self.cfi1.graph.edges)
        E.difference_update(self.cfi1.links[e].edges)
        E.update(_crossed(self.cfi1.links[e].vertices))
        return frozenset(E)

    def _check_edge(self, e: BaseEdge) -> None:
        if e not in self.cfi1.links:
            raise ValidationError(f"{e} is not an edge of the base graph")


def _crossed(vertices) -> tuple[tuple[int, int], tuple[int, int]]:
    av, bv, aw, bw = vertices
    return ((av, bw), (bv, aw))


def _straight(vertices) -> tuple[tuple[int, int], tuple[int, int]]:
    av, bv, aw, bw = vertices
    return ((av, aw), (bv, bw))


def _swap_columns(pair: CfiGroupPair, e: BaseEdge) -> list[tuple[int, int]]:
    """Commutator columns exchanged by the twist at ``e``, as (column, column) pairs."""
    e = norm_edge(e)
    pair._check_edge(e)
    col = pair.free.col
    (av, aw), (bv, bw) = _straight(pair.cfi1.links[e].vertices)
    # all link vertices of the smaller gadget precede those of the larger one
    return [(col[(av, aw)], col[(av, bw)]), (col[(bv, bw)], col[(bv, aw)])]


# ---------------------------------------------------------------- twist map


def twist_map(tup: Sequence[MeklerElement], e: BaseEdge, pair: CfiGroupPair) -> tuple[MeklerElement, ...]:
    """Exchange the commutator coordinates of the straight and crossed link pairs at ``e``."""
    F = pair.free
    swaps = _swap_columns(pair, e)
    out = []
    for x in tup:
        if len(x.gen) != F.n or len(x.comm) != F.m:
            raise ValidationError("element is not over the free group on the CFI vertices")
        c = list(x.comm)
        for s, t in swaps:
            c[s], c[t] = c[t], c[s]
        out.append(MeklerElement(x.gen, tuple(c)))
    return tuple(out)


def twist_columns(M: FpMatrix, e: BaseEdge, pair: CfiGroupPair) -> FpMatrix:
    """The same exchange applied to the columns of a wedge matrix."""
    perm = np.arange(M.cols)
    for s, t in _swap_columns(pair, e):
        perm[s], perm[t] = t, s
    return FpMatrix(M.data[:, perm], M.p, row_labels=M.row_labels, col_labels=M.col_labels)


# ---------------------------------------------------------------- subgroup certificates


@dataclass(frozen=True)
class SubgroupCertificate:
    k: int
    rank: int
    kernel: FpMatrix

    def to_json(self) -> dict:
        return {"k": self.k, "rank": self.rank, "kernel": np.asarray(self.kernel.data).tolist()}


def b1_matrix(tup: Sequence[MeklerElement], n: int, p: int) -> FpMatrix:
    return FpMatrix(np.array([x.gen for x in tup], dtype=np.int64).reshape(len(tup), n), p)


def subgroup_certificate(tup: Sequence[MeklerElement], edge_set_to_zero: Iterable, p: int,
                         n: int | None = None) -> SubgroupCertificate:
    """(k, rank, left kernel) of the wedge of B1 with the given pair columns zeroed."""
    if n is None:
        if not tup:
            raise ValidationError("empty tuple needs an explicit generator count")
        n = len(tup[0].gen)
    B2 = zeroed_wedge(b1_matrix(tup, n, p), edge_set_to_zero)
    return SubgroupCertificate(len(tup), rank(B2), row_kernel(B2))


def twist_edge_search(tup: Sequence[MeklerElement], pair: CfiGroupPair, start: int = 0) -> BaseEdge | None:
    """First base edge whose twist leaves the column space of the zeroed wedge unchanged.

    Edges are scanned in sorted order, cyclically from position ``start``.
    """
    edges = pair.base.sorted_edges()
    start %= len(edges)
    edges = edges[start:] + edges[:start]
    B1 = b1_matrix(tup, pair.n, pair.p)
    E1 = pair.cfi1.graph.edges
    A = zeroed_wedge(B1, E1)
    if A.rows == 0:
        return edges[0]
    for e in edges:
        B = zeroed_wedge(B1, pair.edges_twisted_at(e))
        if column_space_equal(A, B):
            return e
    return None


# ---------------------------------------------------------------- the group A


@dataclass(frozen=True)
class GadgetTwist:
    """Permutation of the CFI vertices acting inside every gadget."""

    perm: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.perm[x]

    def compose(self, other: "GadgetTwist") -> "GadgetTwist":
        """``self`` after ``other``."""
        return GadgetTwist(tuple(self.perm[other.perm[x]] for x in range(len(self.perm))))

    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.perm))


def identity_twist(cfi: CfiGraph) -> GadgetTwist:
    return GadgetTwist(tuple(range(cfi.n)))


def validate_twist(cfi: CfiGraph, sigma: GadgetTwist) -> None:
    perm = sigma.perm
    if sorted(perm) != list(range(cfi.n)):
        raise ValidationError("not a permutation of the CFI vertex set")
    for x, y in enumerate(perm):
        if cfi.gadget_of[x] != cfi.gadget_of[y]:
            raise ValidationError(f"vertex {x} leaves its gadget")
        kx, ky = cfi.kind_of[x], cfi.kind_of[y]
        if (kx[0] == "m") != (ky[0] == "m") or (kx[0] != "m" and kx[1] != ky[1]):
            raise ValidationError(f"vertex {x} is not sent to a vertex of the same kind")
    for u, v in cfi.graph.edges:
        if cfi.gadget_of[u] == cfi.gadget_of[v]:
            a, b = perm[u], perm[v]
            if (min(a, b), max(a, b)) not in cfi.graph.edges:
                raise ValidationError(f"gadget edge {(u, v)} is not preserved")


def gadget_generator(cfi: CfiGraph, v: int, i: int, j: int) -> GadgetTwist:
    """Swap a_i/b_i and a_j/b_j at gadget v and flip bits i, j of its internal vertices."""
    d = cfi.base.degree(v)
    if not (0 <= i < d and 0 <= j < d) or i == j:
        raise ValidationError(f"bad slot pair ({i}, {j}) at gadget {v}")
    perm = list(range(cfi.n))
    for s in (i, j):
        a, b = cfi.external[(v, s, "a")], cfi.external[(v, s, "b")]
        perm[a], perm[b] = b, a
    by_bits = {cfi.kind_of[x][1]: x for x in cfi.internal[v]}
    for bits, x in by_bits.items():
        flipped = list(bits)
        flipped[i] ^= 1
        flipped[j] ^= 1
        perm[x] = by_bits[tuple(flipped)]
    return GadgetTwist(tuple(perm))


def a_generators(cfi: CfiGraph) -> list[GadgetTwist]:
    out = []
    for v in range(cfi.base.n):
        d = cfi.base.degree(v)
        out += [gadget_generator(cfi, v, i, j) for i in range(d) for j in range(i + 1, d)]
    return out


def line_graph_path(base: Graph, src: BaseEdge, dst: BaseEdge) -> list[BaseEdge]:
    """Shortest sequence of base edges from src to dst, consecutive ones sharing a vertex."""
    src, dst = norm_edge(src), norm_edge(dst)
    prev = {src: None}
    queue = deque([src])
    while queue:
        e = queue.popleft()
        if e == dst:
            break
        for x in e:
            for y in base.neighbors(x):
                f = norm_edge((x, y))
                if f not in prev:
                    prev[f] = e
                    queue.append(f)
    if dst not in prev:
        raise ValidationError(f"no path between {src} and {dst}")
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1]


def sigma_for_edge(pair: CfiGroupPair, e: BaseEdge) -> tuple[GadgetTwist, list[BaseEdge]]:
    """Element of A moving the crossed link from ``e`` to the pair's twisted edge, and the path used."""
    cfi = pair.cfi1
    path = line_graph_path(pair.base, e, pair.twisted_edge)
    sigma = identity_twist(cfi)
    for f, g in zip(path, path[1:]):
        (v,) = set(f) & set(g)
        i = cfi.pair_index(v, f[1] if f[0] == v else f[0])
        j = cfi.pair_index(v, g[1] if g[0] == v else g[0])
        sigma = gadget_generator(cfi, v, i, j).compose(sigma)
    return sigma, path


_INDUCED_CACHE: dict = {}


def _induced(pair: CfiGroupPair, sigma: GadgetTwist) -> InducedMap:
    key = (id(pair.free), sigma.perm)
    f = _INDUCED_CACHE.get(key)
    if f is None:
        if len(_INDUCED_CACHE) > 64:
            _INDUCED_CACHE.clear()
        f = _INDUCED_CACHE[key] = InducedMap(pair.free, pair.free, sigma.perm)
    return f


def apply_gadget_twist(sigma: GadgetTwist, tup: Sequence[MeklerElement], pair: CfiGroupPair) -> tuple[MeklerElement, ...]:
    """Image of a tuple over F under the automorphism induced by ``sigma``."""
    validate_twist(pair.cfi1, sigma)
    if sigma.is_identity():
        return tuple(tup)
    f = _induced(pair, sigma)
    return tuple(f(x) for x in tup)


# ---------------------------------------------------------------- the transfer pipeline


def transfer_check(tup: Sequence[MeklerElement], pair: CfiGroupPair, start: int = 0) -> dict:
    """Certificate of ``t`` modulo the first edge set against its transferred image modulo the second."""
    e = twist_edge_search(tup, pair, start)
    report = {"k": len(tup), "edge": None, "path": None, "match": False}
    if e is None:
        return report
    sigma, path = sigma_for_edge(pair, e)
    image = apply_gadget_twist(sigma, twist_map(tup, e, pair), pair)
    c1 = subgroup_certificate(tup, pair.cfi1.graph.edges, pair.p, pair.n)
    c2 = subgroup_certificate(image, pair.cfi2.graph.edges, pair.p, pair.n)
    report.update(edge=list(e), path=[list(x) for x in path], rank=c1.rank, match=c1 == c2)
    return report


def random_tuple(pair: CfiGroupPair, k: int, rng: np.random.Generator, local: bool,
                 centre: int | None = None) -> tuple[MeklerElement, ...]:
    """Random k-tuple over F; ``local`` keeps the support inside one gadget and its neighbours."""
    F = pair.free
    out = []
    for _ in range(k):
        gen = np.zeros(F.n, dtype=np.int64)
        if local:
            v = int(rng.integers(pair.base.n)) if centre is None else centre
            gadgets = {v, *pair.base.neighbors(v)}
            verts = [x for x in range(F.n) if pair.cfi1.gadget_of[x] in gadgets]
            pick = rng.choice(verts, size=int(rng.integers(1, 6)), replace=False)
            gen[pick] = rng.integers(1, F.p, size=len(pick))
        else:
            gen = rng.integers(0, F.p, size=F.n)
        comm = rng.integers(0, F.p, size=F.m)
        out.append(MeklerElement(tuple(gen.tolist()), tuple(comm.tolist())))
    return tuple(out)


def twist_pipeline(pair: CfiGroupPair, k: int, trials: int, seed: int) -> dict:
    """Transfer checks on random tuples: a third dense, a third around a random gadget,
    a third around an end of the designated twisted link."""
    rng = np.random.default_rng(seed)
    n_edges = pair.base.m
    rows = []
    for t in range(trials):
        centre = pair.twisted_edge[t % 2] if t % 3 == 2 else None
        tup = random_tuple(pair, k, rng, local=t % 3 != 0, centre=centre)
        rows.append(transfer_check(tup, pair, start=int(rng.integers(n_edges))))
    return {
        "k": k,
        "trials": trials,
        "found": sum(r["edge"] is not None for r in rows),
        "matched": sum(r["match"] for r in rows),
        "nontrivial_sigma": sum(r["path"] is not None and len(r["path"]) > 1 for r in rows),
        "edges": dict(sorted(Counter("-".join(map(str, r["edge"])) for r in rows if r["edge"]).items())),
        "failures": [i for i, r in enumerate(rows) if not r["match"]],
    }


# ---------------------------------------------------------------- centralizer lemma checks


def _check_cfi_group(G: MeklerGroup) -> None:
    g = G.graph
    if any(g.degree(v) != 3 for v in range(g.n)):
        raise ValidationError("group graph must be 3-regular")
    if not g.is_connected() or not complement(g).is_connected():
        raise ValidationError("group graph and its complement must both be connected")


def _sample_support(G: MeklerGroup, rng: np.random.Generator) -> np.ndarray:
    while True:
        if rng.random() < 0.5:
            gen = rng.integers(0, G.p, size=G.n)
        else:
            gen = np.zeros(G.n, dtype=np.int64)
            pick = rng.choice(G.n, size=int(rng.integers(2, 5)), replace=False)
            gen[pick] = rng.integers(1, G.p, size=len(pick))
        if np.count_nonzero(gen) >= 2:
            return gen


def centralizer_profile_check(G: MeklerGroup, samples: int, seed: int = 0, cross_check: int = 200) -> dict:
    """|C(x)|/|Z| exponents: 4 for vertex generators, at most 3 for sampled larger supports.

    Every vertex and the first ``cross_check`` samples are also counted through
    the rank of the commutator map.
    """
    _check_cfi_group(G)
    rng = np.random.default_rng(seed)
    z = G.m + len(G.universal_vertices)
    violations = []
    vertex_ratios = Counter()
    for v in range(G.n):
        x = G.vertex(v)
        a, b = G.centralizer_log_order(x), G.centralizer_log_order_by_rank(x)
        vertex_ratios[a - z] += 1
        if a != b or a - z != 4:
            violations.append({"element": G.format(x), "ratio_exponent": a - z, "rank_route": b - z})
    sample_ratios = Counter()
    for t in range(samples):
        gen = _sample_support(G, rng)
        x = G.element(gen.tolist())
        a = G.centralizer_log_order(x)
        sample_ratios[a - z] += 1
        bad = a - z > 3
        if t < cross_check:
            b = G.centralizer_log_order_by_rank(x)
            bad = bad or a != b
        if bad:
            violations.append({"element": G.format(x), "ratio_exponent": a - z})
    return {
        "p": G.p,
        "vertices": G.n,
        "center_log_order": z,
        "vertex_ratio_exponents": {str(k): v for k, v in sorted(vertex_ratios.items())},
        "sample_ratio_exponents": {str(k): v for k, v in sorted(sample_ratios.items())},
        "samples": samples,
        "violations": violations,
    }


# ---------------------------------------------------------------- parity discriminator


def parity_verdict(c1: CfiGraph, c2: CfiGraph) -> dict:
    b1 = parity_invariant(c1, zero_choice(c1))
    b2 = parity_invariant(c2, zero_choice(c2))
    return {"distinguished": b1 != b2, "bits": [b1, b2], "choice": "zero"}


def distinguish_cfi_groups(pair: CfiGroupPair) -> dict:
    """Separate the two groups by the edge parity of the special set in their graphs."""
    out = parity_verdict(pair.cfi1, pair.cfi2)
    out["twisted_edge"] = list(pair.twisted_edge)
    out["p"] = pair.p
    return out


def parity_choice_bits(cfi: CfiGraph, limit: int = 5000, seed: int = 0) -> set[int]:
    """Parity values over all internal choices, or over ``limit`` random ones if there are more."""
    total = 1
    for ids in cfi.internal.values():
        total *= len(ids)
    if total <= limit:
        return {parity_invariant(cfi, ch) for ch in all_choices(cfi)}
    rng = np.random.default_rng(seed)
    verts = sorted(cfi.internal)
    bits = set()
    for _ in range(limit):
        ch = {v: cfi.internal[v][int(rng.integers(len(cfi.internal[v])))] for v in verts}
        bits.add(parity_invariant(cfi, ch))
    return bits


def sigma_is_isomorphism(pair: CfiGroupPair, e: BaseEdge) -> bool:
    """Whether the A-element built for ``e`` carries the graph crossed at e onto the second graph."""
    sigma, _ = sigma_for_edge(pair, e)
    return is_isomorphism(build_cfi(pair.base, [e]).graph, pair.cfi2.graph, list(sigma.perm))

"""Simple undirected graphs, k-WL refinement and a backtracking isomorphism oracle."""

from __future__ import annotations

from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .errors import BudgetExceeded, ParameterError, ValidationError
from .refine import (DISTINGUISHED, Histogram, TupleSpace, Verdict, finish_hash, mix64,
                     hash_features, refine_pair, stable_coloring)


class Graph:
    """Finite simple undirected graph on vertices ``0..n-1`` with optional vertex colours."""

    __slots__ = ("n", "edges", "colors", "_adj", "_nbrs")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (),
                 colors: Sequence[int] | None = None):
        if n < 0:
            raise ValidationError("vertex count must be non-negative")
        es = set()
        for e in edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise ValidationError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u}, {v}) out of range for {n} vertices")
            es.add((min(u, v), max(u, v)))
        self.n = int(n)
        self.edges = frozenset(es)
        if colors is not None:
            if len(colors) != n:
                raise ValidationError("colour list length differs from vertex count")
            colors = tuple(int(c) for c in colors)
        self.colors = colors
        self._adj = None
        self._nbrs = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency(self) -> np.ndarray:
        if self._adj is None:
            A = np.zeros((self.n, self.n), dtype=bool)
            if self.edges:
                e = np.array(self.sorted_edges())
                A[e[:, 0], e[:, 1]] = True
                A[e[:, 1], e[:, 0]] = True
            A.setflags(write=False)
            self._adj = A
        return self._adj

    def neighbors(self, v: int) -> tuple[int, ...]:
        if self._nbrs is None:
            lists = [[] for _ in range(self.n)]
            for u, w in self.edges:
                lists[u].append(w)
                lists[w].append(u)
            self._nbrs = [tuple(sorted(x)) for x in lists]
        return self._nbrs[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def degrees(self) -> list[int]:
        return [self.degree(v) for v in range(self.n)]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def vertex_color(self, v: int) -> int:
        return 0 if self.colors is None else self.colors[v]

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph in which old vertex ``v`` becomes ``perm[v]``."""
        if sorted(perm) != list(range(self.n)):
            raise ValidationError("relabelling is not a permutation")
        cols = None
        if self.colors is not None:
            cols = [0] * self.n
            for v, c in enumerate(self.colors):
                cols[perm[v]] = c
        return Graph(self.n, [(perm[u], perm[v]) for u, v in self.edges], cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges and self.colors == other.colors

    def __hash__(self) -> int:
        return hash((self.n, self.edges, self.colors))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    # text format ----------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines += [f"{u} {v}" for u, v in self.sorted_edges()]
        if self.colors is not None:
            lines += [f"c {v} {c}" for v, c in enumerate(self.colors)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise ValidationError("empty graph file")
        head = lines[0].split()
        if len(head) != 2:
            raise ValidationError("header must be 'n m'")
        try:
            n, m = int(head[0]), int(head[1])
        except ValueError as exc:
            raise ValidationError(f"bad header {lines[0]!r}") from exc
        if n < 0 or m < 0:
            raise ValidationError("negative counts in header")
        body = lines[1:]
        if len(body) < m:
            raise ValidationError(f"expected {m} edge lines, found {len(body)}")
        edges: list[tuple[int, int]] = []
        seen = set()
        for ln in body[:m]:
            parts = ln.split()
            if len(parts) != 2:
                raise ValidationError(f"bad edge line {ln!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValidationError(f"bad edge line {ln!r}") from exc
            if u == v:
                raise ValidationError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u}, {v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
            edges.append(key)
        colors = None
        rest = body[m:]
        if rest:
            colors = [0] * n
            given = set()
            for ln in rest:
                parts = ln.split()
                if len(parts) != 3 or parts[0] != "c":
                    raise ValidationError(f"bad colour line {ln!r}")
                try:
                    v, c = int(parts[1]), int(parts[2])
                except ValueError as exc:
                    raise ValidationError(f"bad colour line {ln!r}") from exc
                if not 0 <= v < n or v in given:
                    raise ValidationError(f"bad or repeated colour vertex {v}")
                given.add(v)
                colors[v] = c
        return cls(n, edges, colors)

    @classmethod
    def read(cls, path) -> "Graph":
        return cls.from_text(Path(path).read_text(encoding="ascii"))

    def write(self, path) -> None:
        Path(path).write_bytes(self.to_text().encode("ascii"))

    def to_networkx(self):
        import networkx as nx
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    @classmethod
    def from_networkx(cls, g) -> "Graph":
        nodes = sorted(g.nodes())
        idx = {v: i for i, v in enumerate(nodes)}
        return cls(len(nodes), [(idx[u], idx[v]) for u, v in g.edges()])


# ---------------------------------------------------------------- basic operations

def complement(G: Graph) -> Graph:
    A = G.adjacency()
    return Graph(G.n, [(u, v) for u, v in combinations(range(G.n), 2) if not A[u, v]], G.colors)


def induced_subgraph(G: Graph, S: Iterable[int]) -> Graph:
    verts = sorted(set(int(v) for v in S))
    for v in verts:
        if not 0 <= v < G.n:
            raise ValidationError(f"vertex {v} out of range")
    idx = {v: i for i, v in enumerate(verts)}
    edges = [(idx[u], idx[v]) for u, v in G.edges if u in idx and v in idx]
    cols = None if G.colors is None else [G.colors[v] for v in verts]
    return Graph(len(verts), edges, cols)


def disjoint_union(G: Graph, H: Graph) -> Graph:
    edges = list(G.edges) + [(u + G.n, v + G.n) for u, v in H.edges]
    cols = None
    if G.colors is not None or H.colors is not None:
        cols = [G.vertex_color(v) for v in range(G.n)] + [H.vertex_color(v) for v in range(H.n)]
    return Graph(G.n + H.n, edges, cols)


def canonicity_condition(G: Graph) -> bool:
    """True iff no ordered pair v != w has N(v) contained in the closed neighbourhood N[w]."""
    n = G.n
    if n < 2:
        return True
    A = G.adjacency().astype(np.int64)
    closed = A + np.eye(n, dtype=np.int64)
    bad = A @ (1 - closed).T  # bad[v, w] = |N(v) \ N[w]|
    np.fill_diagonal(bad, 1)
    return not bool((bad == 0).any())


# ---------------------------------------------------------------- constructors

def empty_graph(n: int) -> Graph:
    return Graph(n)


def complete_graph(n: int) -> Graph:
    return Graph(n, combinations(range(n), 2))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ParameterError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def star_graph(leaves: int) -> Graph:
    return complete_bipartite(1, leaves)


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def random_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    return Graph(n, [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p])


def random_regular_graph(d: int, n: int, seed: int) -> Graph:
    import networkx as nx
    return Graph.from_networkx(nx.random_regular_graph(d, n, seed=seed))


def all_graphs(n: int) -> list[Graph]:
    """Every labelled graph on ``n`` vertices (2**C(n,2) of them)."""
    pairs = list(combinations(range(n), 2))
    out = []
    for mask in range(1 << len(pairs)):
        out.append(Graph(n, [pairs[i] for i in range(len(pairs)) if mask >> i & 1]))
    return out


# ---------------------------------------------------------------- k-WL

def atomic_keys(G: Graph, k: int) -> np.ndarray:
    """Atomic type of every k-tuple: equalities, adjacencies and vertex colours.

    Shape ``(n,)*k + (F,)`` with ``F = k*(k-1) + k``.
    """
    n = G.n
    A = G.adjacency() if k > 1 else None
    col = np.array([G.vertex_color(v) for v in range(n)], dtype=np.int64)
    grids = np.indices((n,) * k, sparse=True)
    feats = []
    for i, j in combinations(range(k), 2):
        feats.append(np.broadcast_to(grids[i] == grids[j], (n,) * k))
        feats.append(np.broadcast_to(A[grids[i], grids[j]], (n,) * k))
    for i in range(k):
        feats.append(np.broadcast_to(col[grids[i]], (n,) * k))
    return np.stack([np.asarray(f, dtype=np.int64) for f in feats], axis=-1)


def graph_space(G: Graph, k: int, restrict: int | None = None) -> TupleSpace:
    if k < 1:
        raise ParameterError("WL dimension k must be at least 1")
    nbrs = None
    if k == 1:
        nbrs = [np.array(G.neighbors(v), dtype=np.int64) for v in range(G.n)]
    return TupleSpace(G.n, k, atomic_keys(G, k), nbrs, restrict)


def graph_wl(G1: Graph, G2: Graph, k: int, max_rounds: int | None = None,
             engine: str = "auto") -> Verdict:
    """k-WL on two graphs with joint colour naming."""
    if k < 1:
        raise ParameterError("WL dimension k must be at least 1")
    if G1.n != G2.n:
        empty = Histogram.of(np.zeros(0, dtype=np.int64))
        return Verdict(DISTINGUISHED, 0, (empty, empty), "none")
    return refine_pair(graph_space(G1, k), graph_space(G2, k), engine, max_rounds)


def wl_history(G: Graph, k: int, max_rounds: int | None = None):
    """Per-round colourings of a single graph up to its stable colouring."""
    return stable_coloring(graph_space(G, k), max_rounds)


# ---------------------------------------------------------------- isomorphism oracle

@njit(cache=True)
def _hash_refine(indptr, indices, colors):
    """Colour refinement with 64-bit content names until the class count stops growing."""
    N = colors.size
    c = colors.copy()
    classes = np.unique(c).size
    while True:
        new = np.empty(N, np.uint64)
        for v in range(N):
            s1 = np.uint64(0)
            s2 = np.uint64(0)
            for t in range(indptr[v], indptr[v + 1]):
                h = mix64(c[indices[t]] + np.uint64(0x9E3779B97F4A7C15))
                s1 += h
                s2 += h * h
            new[v] = finish_hash(c[v], s1, s2)
        nc = np.unique(new).size
        c = new
        if nc == classes:
            return c
        classes = nc


@njit(cache=True)
def _balanced_target(c, n):
    """Return (-1 if the halves' colour multisets differ, 0 if discrete, 1 otherwise), target colour."""
    a = np.sort(c[:n])
    b = np.sort(c[n:])
    for i in range(n):
        if a[i] != b[i]:
            return -1, np.uint64(0)
    best = n + 1
    col = np.uint64(0)
    i = 0
    while i < n:
        j = i
        while j < n and a[j] == a[i]:
            j += 1
        if 1 < j - i < best:
            best = j - i
            col = a[i]
        i = j
    if best == n + 1:
        return 0, col
    return 1, col


@njit(cache=True)
def _iso_search(indptr, indices, init, n, budget):
    """Depth-first individualisation-refinement; returns (status, phi, nodes).

    status: 1 found, 0 exhausted, -1 budget exceeded.
    """
    N = 2 * n
    colors = np.empty((n + 1, N), np.uint64)
    cands = np.empty((n + 1, n), np.int64)
    ncand = np.zeros(n + 1, np.int64)
    pos = np.zeros(n + 1, np.int64)
    vsel = np.zeros(n + 1, np.int64)
    fresh = np.zeros(n + 1, np.uint64)
    phi = np.full(n, -1, np.int64)
    nodes = 0
    depth = 0
    colors[0] = _hash_refine(indptr, indices, init)
    nodes += 1
    # expand the root
    status, tcol = _balanced_target(colors[0], n)
    if status == -1:
        return 0, phi, nodes
    if status == 0:
        c = colors[0]
        for v in range(n):
            for w in range(n):
                if c[n + w] == c[v]:
                    phi[v] = w
        return 1, phi, nodes
    while True:
        if pos[depth] == 0 and ncand[depth] == 0:
            c = colors[depth]
            k = 0
            for w in range(n):
                if c[n + w] == tcol:
                    cands[depth, k] = w
                    k += 1
            ncand[depth] = k
            for v in range(n):
                if c[v] == tcol:
                    vsel[depth] = v
                    break
            fresh[depth] = mix64(tcol ^ mix64(np.uint64(depth + 1) * np.uint64(0x9E3779B97F4A7C15)))
        if pos[depth] >= ncand[depth]:
            # backtrack
            ncand[depth] = 0
            pos[depth] = 0
            if depth == 0:
                return 0, phi, nodes
            depth -= 1
            continue
        w = cands[depth, pos[depth]]
        pos[depth] += 1
        nodes += 1
        if nodes > budget:
            return -1, phi, nodes
        c2 = colors[depth].copy()
        c2[vsel[depth]] = fresh[depth]
        c2[n + w] = fresh[depth]
        c2 = _hash_refine(indptr, indices, c2)
        status, tcol = _balanced_target(c2, n)
        if status == -1:
            continue
        if status == 0:
            for v in range(n):
                for u in range(n):
                    if c2[n + u] == c2[v]:
                        phi[v] = u
            return 1, phi, nodes
        depth += 1
        colors[depth] = c2
        ncand[depth] = 0
        pos[depth] = 0


def graph_iso_oracle(G1: Graph, G2: Graph, node_budget: int = 2_000_000) -> list[int] | None:
    """Isomorphism G1 -> G2 as a list ``phi`` (``phi[v]`` = image of v), or None.

    Individualisation-refinement search over the disjoint union, pruned by colour
    refinement.  Colour names are content hashes, which can only merge classes,
    never split classes an isomorphism would keep together, so pruning stays
    sound; any map found is checked edge by edge.  Raises
    :class:`BudgetExceeded` when more than ``node_budget`` search nodes are needed.
    """
    if G1.n != G2.n or G1.m != G2.m:
        return None
    n = G1.n
    if n == 0:
        return []
    if sorted(G1.degrees()) != sorted(G2.degrees()):
        return None
    U = disjoint_union(G1, G2)
    indptr = np.zeros(2 * n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([U.degree(v) for v in range(2 * n)])
    indices = np.array([w for v in range(2 * n) for w in U.neighbors(v)], dtype=np.int64)
    init = hash_features(np.array([U.vertex_color(v) for v in range(2 * n)], dtype=np.int64))
    status, phi, nodes = _iso_search(indptr, indices, init, n, node_budget)
    if status == -1:
        raise BudgetExceeded("graph isomorphism search nodes", nodes, node_budget)
    if status == 0:
        return None
    phi = phi.tolist()
    if not is_isomorphism(G1, G2, phi):
        raise AssertionError("isomorphism oracle produced an invalid map")
    return phi


def is_isomorphism(G1: Graph, G2: Graph, phi: Sequence[int]) -> bool:
    if G1.n != G2.n or sorted(phi) != list(range(G1.n)):
        return False
    if G1.m != G2.m:
        return False
    if any(G1.vertex_color(v) != G2.vertex_color(phi[v]) for v in range(G1.n)):
        return False
    return all(G2.has_edge(phi[u], phi[v]) for u, v in G1.edges)

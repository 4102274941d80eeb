"""Class-2 exponent-p groups presented by a graph.

``G_Gamma`` is generated by one element ``v_i`` per vertex, subject to
``v_i^p = 1``, class 2, and ``[v_i, v_j] = 1`` for every edge.  Every element has
the normal form ``v_1^d_1 ... v_n^d_n * prod [v_j, v_i]^e_(j,i)`` where the
commutators run over the non-edges ``j < i`` in lexicographic order.  The
commutator convention is ``[g, h] = g h g^-1 h^-1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .cayley import CayleyGroup
from .errors import BudgetExceeded, ValidationError
from .fpalgebra import FpMatrix, check_odd_prime, index_pairs, rank, row_kernel, wedge
from .graphs import Graph, complement, induced_subgraph, is_isomorphism


@dataclass(frozen=True)
class MeklerElement:
    gen: tuple[int, ...]
    comm: tuple[int, ...]

    def is_identity(self) -> bool:
        return not any(self.gen) and not any(self.comm)


class MeklerGroup:
    def __init__(self, graph: Graph, p: int):
        self.graph = graph
        self.p = check_odd_prime(p)
        self.n = graph.n
        self.non_edges: list[tuple[int, int]] = [e for e in combinations(range(graph.n), 2)
                                                 if e not in graph.edges]
        self.m = len(self.non_edges)
        self.col = {e: c for c, e in enumerate(self.non_edges)}
        ne = np.array(self.non_edges, dtype=np.int64).reshape(-1, 2)
        self._lo, self._hi = ne[:, 0], ne[:, 1]

    def __repr__(self) -> str:
        return f"MeklerGroup(n={self.n}, m={self.m}, p={self.p})"

    @property
    def order_exponent(self) -> int:
        return self.n + self.m

    @property
    def order(self) -> int:
        return self.p ** (self.n + self.m)

    @cached_property
    def universal_vertices(self) -> list[int]:
        return [v for v in range(self.n) if self.graph.degree(v) == self.n - 1]

    # elements ------------------------------------------------------------

    def element(self, gen: Sequence[int] = (), comm: Sequence[int] = ()) -> MeklerElement:
        gen = list(gen) + [0] * (self.n - len(gen))
        comm = list(comm) + [0] * (self.m - len(comm))
        if len(gen) != self.n or len(comm) != self.m:
            raise ValidationError("exponent vector has the wrong length")
        return MeklerElement(tuple(int(x) % self.p for x in gen), tuple(int(x) % self.p for x in comm))

    def identity(self) -> MeklerElement:
        return MeklerElement((0,) * self.n, (0,) * self.m)

    def vertex(self, i: int, e: int = 1) -> MeklerElement:
        gen = [0] * self.n
        gen[i] = e
        return self.element(gen)

    def basic_commutator(self, j: int, i: int) -> MeklerElement:
        """``[v_j, v_i]`` for a non-edge; identity for an edge."""
        if j == i:
            return self.identity()
        lo, hi = min(i, j), max(i, j)
        if (lo, hi) not in self.col:
            return self.identity()
        comm = [0] * self.m
        comm[self.col[(lo, hi)]] = 1 if j < i else -1
        return self.element((), comm)

    def _check(self, *xs: MeklerElement) -> None:
        for x in xs:
            if len(x.gen) != self.n or len(x.comm) != self.m:
                raise ValidationError("element does not belong to this group")

    # batch arithmetic on arrays ----------------------------------------

    def correction(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Commutator coordinates picked up when merging normal forms ``x`` then ``y``."""
        return -X[..., self._hi] * Y[..., self._lo]

    def mul_arrays(self, XG, XC, YG, YC) -> tuple[np.ndarray, np.ndarray]:
        p = self.p
        G = (XG + YG) % p
        C = (XC + YC + self.correction(XG, YG)) % p
        return G, C

    def commutator_arrays(self, XG, YG) -> np.ndarray:
        """Commutator coordinates of ``[x, y]``: ``d_j f_i - d_i f_j`` on non-edge ``(j, i)``."""
        lo, hi = self._lo, self._hi
        return (XG[..., lo] * YG[..., hi] - XG[..., hi] * YG[..., lo]) % self.p

    # element arithmetic --------------------------------------------------

    def mul(self, x: MeklerElement, y: MeklerElement) -> MeklerElement:
        self._check(x, y)
        G, C = self.mul_arrays(np.array(x.gen), np.array(x.comm), np.array(y.gen), np.array(y.comm))
        return MeklerElement(tuple(G.tolist()), tuple(C.tolist()))

    def inv(self, x: MeklerElement) -> MeklerElement:
        self._check(x)
        d = np.array(x.gen)
        C = -(np.array(x.comm) + self.correction(d, -d)) % self.p
        return MeklerElement(tuple((-d % self.p).tolist()), tuple(C.tolist()))

    def pow(self, x: MeklerElement, e: int) -> MeklerElement:
        e = int(e)
        if e < 0:
            x, e = self.inv(x), -e
        e %= self.p
        result, base = self.identity(), x
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def commutator(self, x: MeklerElement, y: MeklerElement) -> MeklerElement:
        return self.mul(self.mul(self.mul(x, y), self.inv(x)), self.inv(y))

    def commutes(self, x: MeklerElement, y: MeklerElement) -> bool:
        return not self.commutator_arrays(np.array(x.gen), np.array(y.gen)).any()

    def product(self, xs: Iterable[MeklerElement]) -> MeklerElement:
        r = self.identity()
        for x in xs:
            r = self.mul(r, x)
        return r

    def random_element(self, rng: np.random.Generator) -> MeklerElement:
        return MeklerElement(tuple(rng.integers(0, self.p, self.n).tolist()),
                             tuple(rng.integers(0, self.p, self.m).tolist()))

    # structure -------------------------------------------------------------

    def support(self, x: MeklerElement) -> frozenset[int]:
        return frozenset(i for i, d in enumerate(x.gen) if d % self.p)

    def commutator_basis(self) -> list[MeklerElement]:
        return [self.basic_commutator(j, i) for j, i in self.non_edges]

    def center_basis(self) -> list[MeklerElement]:
        return self.commutator_basis() + [self.vertex(v) for v in self.universal_vertices]

    def is_central(self, x: MeklerElement) -> bool:
        return all(v in self.universal_vertices for v in self.support(x))

    def centralizer_parts(self, x: MeklerElement) -> tuple[list[list[int]], list[int]]:
        """Non-singleton components of the complement on supp(x), and the common closed neighbours."""
        S = sorted(self.support(x))
        co = complement(induced_subgraph(self.graph, S))
        comps = _components(co)
        big = [[S[i] for i in c] for c in comps if len(c) > 1]
        A = self.graph.adjacency()
        common = [v for v in range(self.n) if all(v == u or A[v, u] for u in S)]
        return big, common

    def centralizer_basis(self, x: MeklerElement) -> list[MeklerElement]:
        """Basis of C(x): ``x_C`` per non-singleton component C, the common closed
        neighbours of supp(x), and the commutator basis."""
        self._check(x)
        big, common = self.centralizer_parts(x)
        out = []
        for comp in big:
            gen = [0] * self.n
            for v in comp:
                gen[v] = x.gen[v]
            out.append(self.element(gen))
        out += [self.vertex(v) for v in common]
        return out + self.commutator_basis()

    def centralizer_log_order(self, x: MeklerElement) -> int:
        big, common = self.centralizer_parts(x)
        return len(big) + len(common) + self.m

    def centralizer_log_order_by_rank(self, x: MeklerElement) -> int:
        """Same quantity from linear algebra: ``n - rank(f -> [x, f]) + m``."""
        return self.centralizer_log_order_arrays(np.array([x.gen]))[0]

    def centralizer_log_order_arrays(self, XG: np.ndarray) -> list[int]:
        out = []
        for d in np.asarray(XG) % self.p:
            M = np.zeros((self.m, self.n), dtype=np.int64)
            r = np.arange(self.m)
            M[r, self._hi] = d[self._lo]
            M[r, self._lo] = -d[self._hi]
            rk = rank(FpMatrix(M, self.p)) if self.m else 0
            out.append(self.n - rk + self.m)
        return out

    # cosets and commuting graph -------------------------------------------

    def coset_gen_vectors(self, cap: int, budget: int = 2_000_000) -> np.ndarray:
        """Representatives of the non-trivial centre cosets with support size 1..cap.

        A coset is represented by its generator exponents with the universal
        coordinates cleared.  Rows are ordered by support size, then support set,
        then exponents.
        """
        free = [v for v in range(self.n) if v not in self.universal_vertices]
        from math import comb
        total = sum(comb(len(free), s) * (self.p - 1) ** s for s in range(1, cap + 1))
        if total > budget:
            raise BudgetExceeded("commuting graph vertices", total, budget)
        rows = np.zeros((total, self.n), dtype=np.int64)
        r = 0
        for s in range(1, cap + 1):
            exps = np.array(np.meshgrid(*([np.arange(1, self.p)] * s), indexing="ij")).reshape(s, -1).T
            for supp in combinations(free, s):
                rows[r:r + len(exps)][:, list(supp)] = exps
                r += len(exps)
        return rows

    def commuting_graph(self, cap: int, budget: int = 2_000_000) -> tuple[Graph, np.ndarray]:
        """Commuting graph on centre cosets with support size 1..cap, and the coset representatives."""
        X = self.coset_gen_vectors(cap, budget)
        p = self.p
        weights = p ** np.arange(self.n, dtype=np.int64)[::-1]
        index = {int(k): i for i, k in enumerate((X @ weights).tolist())}
        univ = set(self.universal_vertices)
        edges = set()
        for a, row in enumerate(X):
            x = self.element(row)
            big, common = self.centralizer_parts(x)
            basis = []
            for comp in big:
                g = np.zeros(self.n, dtype=np.int64)
                g[comp] = row[comp]
                basis.append(g)
            for v in common:
                if v not in univ:
                    g = np.zeros(self.n, dtype=np.int64)
                    g[v] = 1
                    basis.append(g)
            B = np.array(basis, dtype=np.int64).reshape(-1, self.n)
            coeffs = np.array(np.meshgrid(*([np.arange(p)] * len(B)), indexing="ij")).reshape(len(B), -1).T
            span = (coeffs @ B) % p
            nz = np.count_nonzero(span, axis=1)
            for y in span[(nz >= 1) & (nz <= cap)]:
                b = index[int(y @ weights)]
                if b != a:
                    edges.add((min(a, b), max(a, b)))
        return Graph(len(X), edges), X

    # B-matrices and subgroups -------------------------------------------

    def b_matrices(self, tup: Sequence[MeklerElement]) -> tuple[FpMatrix, FpMatrix]:
        """Generator-exponent matrix B1 and its wedge B2 with edge columns zeroed."""
        self._check(*tup)
        B1 = FpMatrix(np.array([x.gen for x in tup], dtype=np.int64).reshape(len(tup), self.n), self.p)
        return B1, zeroed_wedge(B1, self.graph.edges)

    def closure(self, tup: Sequence[MeklerElement], budget: int = 200_000) -> set[MeklerElement]:
        seen = {self.identity()}
        frontier = [self.identity()]
        while frontier:
            nxt = []
            for x in frontier:
                for g in tup:
                    y = self.mul(g, x)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
                        if len(seen) > budget:
                            raise BudgetExceeded("subgroup closure elements", len(seen), budget)
            frontier = nxt
        return seen

    def subgroup_log_order_formula(self, tup: Sequence[MeklerElement]) -> int:
        """log_p |<tup>| = rank B1 + dim span(B2 rows, commutator parts of kernel words)."""
        if not tup:
            return 0
        B1, B2 = self.b_matrices(tup)
        r = rank(B1)
        rows = [np.asarray(B2.data)[:, [self._pair_col_full(e) for e in self.non_edges]]] if len(tup) >= 2 else []
        K = row_kernel(B1)
        for lam in K.data:
            w = self.product(self.pow(g, int(c)) for g, c in zip(tup, lam))
            rows.append(np.array([w.comm], dtype=np.int64))
        if not rows or self.m == 0:
            return r
        M = np.vstack([x.reshape(-1, self.m) for x in rows])
        return r + rank(FpMatrix(M, self.p))

    def _pair_col_full(self, e: tuple[int, int]) -> int:
        i, j = e
        n = self.n
        return i * n - i * (i + 1) // 2 + (j - i - 1)

    def subgroup_order(self, tup: Sequence[MeklerElement], budget: int = 200_000) -> int:
        """|<tup>| by closure, cross-checked against the rank formula."""
        self._check(*tup)
        expected = self.p ** self.subgroup_log_order_formula(tup)
        if expected > budget:
            raise BudgetExceeded("subgroup closure elements", expected, budget)
        size = len(self.closure(tup, budget))
        if size != expected:
            raise AssertionError(f"closure gives {size}, rank formula gives {expected}")
        return size

    # tables ----------------------------------------------------------------

    def element_index(self, x: MeklerElement) -> int:
        idx = 0
        for d in x.gen + x.comm:
            idx = idx * self.p + d
        return idx

    def element_at(self, idx: int) -> MeklerElement:
        digits = []
        for _ in range(self.n + self.m):
            idx, d = divmod(idx, self.p)
            digits.append(d)
        digits.reverse()
        return MeklerElement(tuple(digits[: self.n]), tuple(digits[self.n:]))

    def all_elements_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        N = self.order
        L = self.n + self.m
        idx = np.arange(N, dtype=np.int64)
        digits = (idx[:, None] // (self.p ** np.arange(L - 1, -1, -1, dtype=np.int64))[None, :]) % self.p
        return digits[:, : self.n], digits[:, self.n:]

    def to_cayley(self, max_order: int = 10_000) -> CayleyGroup:
        """Cayley table over all normal forms in lexicographic order; identity at index 0."""
        N = self.order
        if N > max_order:
            raise BudgetExceeded("Cayley table order", N, max_order)
        XG, XC = self.all_elements_arrays()
        L = self.n + self.m
        w = self.p ** np.arange(L - 1, -1, -1, dtype=np.int64)
        wg, wc = w[: self.n], w[self.n:]
        T = np.empty((N, N), dtype=np.int32)
        block = max(1, 2_000_000 // (N * max(L, 1)))
        for lo in range(0, N, block):
            hi = min(N, lo + block)
            G, C = self.mul_arrays(XG[lo:hi, None, :], XC[lo:hi, None, :], XG[None, :, :], XC[None, :, :])
            T[lo:hi] = G @ wg + C @ wc
        return CayleyGroup(T)

    # literals --------------------------------------------------------------

    def format(self, x: MeklerElement) -> str:
        parts = []
        for i, d in enumerate(x.gen):
            if d:
                parts.append(f"v{i + 1}" + (f"^{d}" if d != 1 else ""))
        for (j, i), e in zip(self.non_edges, x.comm):
            if e:
                parts.append(f"[v{j + 1},v{i + 1}]" + (f"^{e}" if e != 1 else ""))
        return "*".join(parts) if parts else "1"

    def parse(self, text: str) -> MeklerElement:
        s = re.sub(r"\s+", "", text)
        if s in ("", "1", "e"):
            return self.identity()
        result = self.identity()
        for tok in _split_factors(s):
            m = _FACTOR.fullmatch(tok)
            if not m:
                raise ValidationError(f"bad factor {tok!r} in element literal")
            e = int(m.group("exp")) if m.group("exp") else 1
            if m.group("v"):
                i = int(m.group("v")) - 1
                if not 0 <= i < self.n:
                    raise ValidationError(f"vertex v{i + 1} out of range")
                f = self.vertex(i, e % self.p)
            else:
                j, i = int(m.group("c1")) - 1, int(m.group("c2")) - 1
                if not (0 <= i < self.n and 0 <= j < self.n):
                    raise ValidationError(f"commutator [v{j + 1},v{i + 1}] out of range")
                f = self.pow(self.basic_commutator(j, i), e)
            result = self.mul(result, f)
        return result


_FACTOR = re.compile(r"(?:v(?P<v>\d+)|\[v(?P<c1>\d+),v(?P<c2>\d+)\])(?:\^(?P<exp>-?\d+))?")


def _split_factors(s: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "*" and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return out


def _components(G: Graph) -> list[list[int]]:
    seen = [False] * G.n
    comps = []
    for s in range(G.n):
        if seen[s]:
            continue
        seen[s] = True
        comp, stack = [s], [s]
        while stack:
            u = stack.pop()
            for w in G.neighbors(u):
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def build(graph: Graph, p: int) -> MeklerGroup:
    return MeklerGroup(graph, p)


def free_group(n: int, p: int) -> MeklerGroup:
    """The relatively free class-2 exponent-p group on n generators."""
    return MeklerGroup(Graph(n), p)


def zeroed_wedge(B1: FpMatrix, zero_pairs) -> FpMatrix:
    """wedge(B1) with the columns of the given vertex pairs zeroed (zero rows if B1 has one row)."""
    n = B1.cols
    pairs = index_pairs(n)
    if B1.rows < 2 or n < 2:
        return FpMatrix(np.zeros((0, len(pairs)), dtype=np.int64), B1.p, col_labels=pairs)
    W = wedge(B1)
    col = {e: c for c, e in enumerate(pairs)}
    return W.with_zero_columns(sorted(col[tuple(sorted(e))] for e in zero_pairs))


# ---------------------------------------------------------------- free reduction oracle

def free_reduce(G: MeklerGroup, word: Sequence[tuple]) -> MeklerElement:
    """Normal form of a word by rewriting with the defining relations.

    Letters are ``("v", i, e)`` or ``("c", j, i, e)`` for ``[v_j, v_i]^e``.
    Commutator letters are central and are collected on the right; generator
    letters are bubble sorted using ``v_i^a v_j^b = v_j^b v_i^a [v_i, v_j]^(ab)``
    (a consequence of ``gh = [g,h] hg`` with central commutators), and
    ``[v_i, v_j] = [v_j, v_i]^-1``, ``[v_i, v_j] = 1`` on edges, ``v^p = 1``.
    """
    p = G.p
    gens = [(w[1], w[2] % p) for w in word if w[0] == "v"]
    comm: dict[tuple[int, int], int] = {}

    def add_comm(a: int, b: int, e: int) -> None:
        if a == b or G.graph.has_edge(a, b):
            return
        if a > b:
            a, b, e = b, a, -e
        comm[(a, b)] = (comm.get((a, b), 0) + e) % p

    for w in word:
        if w[0] == "c":
            add_comm(w[1], w[2], w[3])
    changed = True
    while changed:
        changed = False
        out: list[tuple[int, int]] = []
        for g in gens:
            if g[1] == 0:
                continue
            if out and out[-1][0] == g[0]:
                s = (out[-1][1] + g[1]) % p
                out.pop()
                if s:
                    out.append((g[0], s))
                changed = True
                continue
            out.append(g)
        gens = out
        for t in range(len(gens) - 1):
            (i, a), (j, b) = gens[t], gens[t + 1]
            if i > j:
                gens[t], gens[t + 1] = (j, b), (i, a)
                add_comm(i, j, a * b)
                changed = True
                break
    gen = [0] * G.n
    for i, a in gens:
        gen[i] = a
    return G.element(gen, [comm.get(e, 0) for e in G.non_edges])


def word_of(G: MeklerGroup, x: MeklerElement) -> list[tuple]:
    w: list[tuple] = [("v", i, d) for i, d in enumerate(x.gen) if d]
    w += [("c", j, i, e) for (j, i), e in zip(G.non_edges, x.comm) if e]
    return w


# ---------------------------------------------------------------- induced maps

@dataclass
class InducedMap:
    """Element map ``G1 -> G2`` induced by a vertex bijection.

    The image of ``v_1^d_1 ... v_n^d_n`` is ``v_phi(1)^d_1 ... v_phi(n)^d_n`` brought
    back into normal form, so pairs of generators whose order is reversed by phi
    pick up a commutator correction.
    """

    source: MeklerGroup
    target: MeklerGroup
    phi: tuple[int, ...]

    def __post_init__(self):
        G1, G2, phi = self.source, self.target, self.phi
        self.gen_perm = np.array(phi, dtype=np.int64)
        src_cols, dst_cols, signs = [], [], []
        for c, (j, i) in enumerate(G1.non_edges):
            a, b = phi[j], phi[i]
            src_cols.append(c)
            dst_cols.append(G2.col[(min(a, b), max(a, b))])
            signs.append(1 if a < b else -1)
        self.src_cols = np.array(src_cols, dtype=np.int64)
        self.dst_cols = np.array(dst_cols, dtype=np.int64)
        self.signs = np.array(signs, dtype=np.int64)
        inv_lo, inv_hi, inv_col = [], [], []
        for j, i in combinations(range(G1.n), 2):
            a, b = phi[j], phi[i]
            if a > b and (b, a) in G2.col:
                inv_lo.append(j)
                inv_hi.append(i)
                inv_col.append(G2.col[(b, a)])
        self.inv_lo = np.array(inv_lo, dtype=np.int64)
        self.inv_hi = np.array(inv_hi, dtype=np.int64)
        self.inv_col = np.array(inv_col, dtype=np.int64)

    def apply_arrays(self, XG: np.ndarray, XC: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = self.target.p
        XG = np.asarray(XG)
        XC = np.asarray(XC)
        YG = np.zeros(XG.shape[:-1] + (self.target.n,), dtype=np.int64)
        YG[..., self.gen_perm] = XG
        YC = np.zeros(XC.shape[:-1] + (self.target.m,), dtype=np.int64)
        if self.src_cols.size:
            YC[..., self.dst_cols] = XC[..., self.src_cols] * self.signs
        if self.inv_col.size:
            # v_phi(i)^d_i is written before v_phi(j)^d_j although phi(j) < phi(i)
            YC[..., self.inv_col] -= XG[..., self.inv_lo] * XG[..., self.inv_hi]
        return YG % p, YC % p

    def __call__(self, x: MeklerElement) -> MeklerElement:
        G, C = self.apply_arrays(np.array(x.gen), np.array(x.comm))
        return MeklerElement(tuple(G.tolist()), tuple(C.tolist()))

    def check_random(self, trials: int, rng: np.random.Generator) -> bool:
        G1, G2 = self.source, self.target
        p = G1.p
        XG, XC = rng.integers(0, p, (trials, G1.n)), rng.integers(0, p, (trials, G1.m))
        YG, YC = rng.integers(0, p, (trials, G1.n)), rng.integers(0, p, (trials, G1.m))
        PG, PC = G1.mul_arrays(XG, XC, YG, YC)
        lhs = self.apply_arrays(PG, PC)
        a, b = self.apply_arrays(XG, XC), self.apply_arrays(YG, YC)
        rhs = G2.mul_arrays(a[0], a[1], b[0], b[1])
        return bool(np.array_equal(lhs[0], rhs[0]) and np.array_equal(lhs[1], rhs[1]))


def graph_iso_to_group_iso(phi: Sequence[int], G1: MeklerGroup, G2: MeklerGroup,
                           trials: int = 1000, seed: int = 0) -> InducedMap:
    """Group isomorphism induced by a graph isomorphism, verified on random products."""
    if G1.p != G2.p:
        raise ValidationError("groups are over different primes")
    if not is_isomorphism(G1.graph, G2.graph, list(phi)):
        raise ValidationError("vertex map is not a graph isomorphism")
    f = InducedMap(G1, G2, tuple(int(x) for x in phi))
    if not f.check_random(trials, np.random.default_rng(seed)):
        raise AssertionError("induced map failed the multiplicativity check")
    return f

"""Finite groups given by explicit multiplication tables."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .errors import BudgetExceeded, ParameterError, ValidationError
from .fpalgebra import check_odd_prime
from .refine import mix64

FULL_ASSOC_LIMIT = 128  # above this order associativity is checked with Light's test


class TableIndexError(ValidationError, IndexError):
    """A table entry points outside the element range."""


class CayleyGroup:
    """A finite group as a multiplication table ``table[g, h] = g*h``."""

    def __init__(self, table, validate: bool = True):
        T = np.array(table, dtype=np.int64)
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
            raise ValidationError(f"table must be a non-empty square grid, got shape {T.shape}")
        n = T.shape[0]
        if T.min() < 0 or T.max() >= n:
            bad = np.argwhere((T < 0) | (T >= n))[0]
            raise TableIndexError(f"entry table[{bad[0]}][{bad[1]}] = {T[bad[0], bad[1]]} is out of range 0..{n - 1}")
        T = T.astype(np.int32 if n < 2**31 else np.int64)
        T.setflags(write=False)
        self.table = T
        self.order = n
        if validate:
            _validate(T)
        ident = _find_identity(T)
        if ident is None:
            raise ValidationError("no two-sided identity element")
        self.identity = ident
        inv = np.argmax(T == ident, axis=1)
        if not np.all(T[np.arange(n), inv] == ident) or not np.all(T[inv, np.arange(n)] == ident):
            raise ValidationError("missing inverse")
        inv.setflags(write=False)
        self.inverse = inv

    def mul(self, g: int, h: int) -> int:
        return int(self.table[g, h])

    def inv(self, g: int) -> int:
        return int(self.inverse[g])

    def pow(self, g: int, e: int) -> int:
        if e < 0:
            g, e = self.inv(g), -e
        r = self.identity
        for _ in range(e):
            r = int(self.table[r, g])
        return r

    def commutator(self, g: int, h: int) -> int:
        """[g, h] = g h g^-1 h^-1."""
        T, I = self.table, self.inverse
        return int(T[T[T[g, h], I[g]], I[h]])

    @cached_property
    def rows(self) -> list[list[int]]:
        return self.table.tolist()

    @cached_property
    def element_orders(self) -> np.ndarray:
        n = self.order
        orders = np.zeros(n, dtype=np.int64)
        cur = np.arange(n)
        idx = np.arange(n)
        for e in range(1, n + 1):
            hit = (cur == self.identity) & (orders == 0)
            orders[hit] = e
            if orders.all():
                break
            cur = self.table[cur, idx]
        return orders

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CayleyGroup):
            return NotImplemented
        return np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash(self.table.tobytes())

    def __repr__(self) -> str:
        return f"CayleyGroup(order={self.order})"

    # text format --------------------------------------------------------

    def to_text(self) -> str:
        lines = [str(self.order)] + [" ".join(map(str, row)) for row in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CayleyGroup":
        lines = [ln for ln in (x.strip() for x in text.splitlines()) if ln]
        if not lines:
            raise ValidationError("empty group table file")
        try:
            n = int(lines[0])
        except ValueError as exc:
            raise ValidationError(f"bad order line {lines[0]!r}") from exc
        if n < 1 or len(lines) != n + 1:
            raise ValidationError(f"expected {n} table rows, found {len(lines) - 1}")
        try:
            rows = [[int(x) for x in ln.split()] for ln in lines[1:]]
        except ValueError as exc:
            raise ValidationError("non-integer table entry") from exc
        if any(len(r) != n for r in rows):
            raise ValidationError("every row must have exactly n entries")
        G = cls(rows)
        if G.identity != 0:
            raise ValidationError("element 0 must be the identity")
        return G

    @classmethod
    def read(cls, path) -> "CayleyGroup":
        return cls.from_text(Path(path).read_text(encoding="ascii"))

    def write(self, path) -> None:
        Path(path).write_bytes(self.to_text().encode("ascii"))


def from_table(grid) -> CayleyGroup:
    return CayleyGroup(grid)


def _find_identity(T: np.ndarray) -> int | None:
    n = T.shape[0]
    ar = np.arange(n)
    rows = np.flatnonzero((T == ar[None, :]).all(axis=1))
    for e in rows.tolist():
        if np.array_equal(T[:, e], ar):
            return e
    return None


def _magma_generators(T: np.ndarray) -> list[int]:
    """Greedy set whose closure under the table (as a magma) is everything."""
    n = T.shape[0]
    inside = np.zeros(n, dtype=bool)
    gens: list[int] = []
    members: list[int] = []
    while not inside.all():
        g = int(np.flatnonzero(~inside)[0])
        gens.append(g)
        frontier = [g]
        if not inside[g]:
            inside[g] = True
            members.append(g)
        while frontier:
            new = []
            for x in frontier:
                for y in list(members):
                    for z in (T[x, y], T[y, x]):
                        z = int(z)
                        if not inside[z]:
                            inside[z] = True
                            members.append(z)
                            new.append(z)
            frontier = new
    return gens


def _validate(T: np.ndarray) -> None:
    """Latin-square and associativity checks; the witness triple is named on failure."""
    n = T.shape[0]
    ar = np.arange(n)
    for axis, name in ((1, "row"), (0, "column")):
        s = np.sort(T, axis=axis)
        ok = (s == (ar[None, :] if axis == 1 else ar[:, None])).all(axis=axis)
        if not ok.all():
            i = int(np.flatnonzero(~ok)[0])
            raise ValidationError(f"{name} {i} is not a permutation, so some element has no inverse")
    if n <= FULL_ASSOC_LIMIT:
        lhs = T[T[:, :, None], ar[None, None, :]]          # (ab)c
        rhs = T[ar[:, None, None], T[None, :, :]]          # a(bc)
        bad = np.argwhere(lhs != rhs)
    else:
        # Light's test: (a s) b == a (s b) for every a, b and every s in a magma generating set
        bad = np.zeros((0, 3), dtype=np.int64)
        for s in _magma_generators(T):
            right = T[s][None, :]
            for lo in range(0, n, 512):
                a = ar[lo:lo + 512]
                diff = T[T[a, s][:, None], ar[None, :]] != T[a[:, None], right]
                if diff.any():
                    i, b = np.argwhere(diff)[0]
                    bad = np.array([[lo + i, s, b]])
                    break
            if bad.size:
                break
    if bad.size:
        a, b, c = (int(x) for x in bad[0])
        raise ValidationError(f"not associative: witness triple ({a}, {b}, {c})")


# ---------------------------------------------------------------- constructors

def cyclic(n: int) -> CayleyGroup:
    if n < 1:
        raise ParameterError("cyclic group order must be at least 1")
    a = np.arange(n)
    return CayleyGroup((a[:, None] + a[None, :]) % n, validate=False)


def direct_product(G: CayleyGroup, H: CayleyGroup) -> CayleyGroup:
    """Element ``(g, h)`` has index ``g*|H| + h``."""
    ng, nh = G.order, H.order
    g = np.repeat(np.arange(ng), nh)
    h = np.tile(np.arange(nh), ng)
    T = G.table[g[:, None], g[None, :]].astype(np.int64) * nh + H.table[h[:, None], h[None, :]]
    return CayleyGroup(T, validate=False)


def dihedral(n: int) -> CayleyGroup:
    """Symmetries of the n-gon, order 2n; ``r^i s^j`` has index ``i + n*j``."""
    if n < 1:
        raise ParameterError("dihedral parameter must be at least 1")
    T = np.empty((2 * n, 2 * n), dtype=np.int64)
    for i1, j1, i2, j2 in product(range(n), range(2), range(n), range(2)):
        # r^i1 s^j1 r^i2 s^j2 = r^(i1 + (-1)^j1 i2) s^(j1+j2)
        i = (i1 + (i2 if j1 == 0 else -i2)) % n
        T[i1 + n * j1, i2 + n * j2] = i + n * ((j1 + j2) % 2)
    return CayleyGroup(T, validate=False)


def quaternion8() -> CayleyGroup:
    """Q8 with elements 1, i, j, k, -1, -i, -j, -k at indices 0..7."""
    unit = {(0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
            (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
            (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
            (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0)}
    T = np.empty((8, 8), dtype=np.int64)
    for a in range(8):
        for b in range(8):
            sa, ua = (1 if a < 4 else -1), a % 4
            sb, ub = (1 if b < 4 else -1), b % 4
            s, u = unit[(ua, ub)]
            s *= sa * sb
            T[a, b] = u if s == 1 else u + 4
    return CayleyGroup(T, validate=False)


def heisenberg(p: int) -> CayleyGroup:
    """Unitriangular 3x3 matrices over F_p; ``(a, b, c)`` has index ``a p^2 + b p + c``."""
    p = check_odd_prime(p)
    idx = np.arange(p ** 3)
    a, b, c = idx // (p * p), (idx // p) % p, idx % p
    A = (a[:, None] + a[None, :]) % p
    B = (b[:, None] + b[None, :]) % p
    C = (c[:, None] + c[None, :] + a[:, None] * b[None, :]) % p
    return CayleyGroup(A * p * p + B * p + C, validate=False)


def relabel(G: CayleyGroup, perm: Sequence[int]) -> CayleyGroup:
    """Copy of G in which element ``g`` is renamed ``perm[g]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(G.order)):
        raise ValidationError("relabelling is not a permutation")
    T = np.empty_like(G.table, dtype=np.int64)
    T[perm[:, None], perm[None, :]] = perm[G.table]
    return CayleyGroup(T, validate=False)


def random_relabel(G: CayleyGroup, rng: np.random.Generator, keep_identity: bool = True) -> tuple[CayleyGroup, np.ndarray]:
    perm = rng.permutation(G.order)
    if keep_identity:
        j = int(np.flatnonzero(perm == 0)[0])
        perm[j], perm[G.identity] = perm[G.identity], 0
    return relabel(G, perm), perm


# ---------------------------------------------------------------- structure

def subgroup_closure(G: CayleyGroup, gens: Iterable[int]) -> frozenset[int]:
    gens = [int(g) for g in gens]
    for g in gens:
        if not 0 <= g < G.order:
            raise ValidationError(f"element {g} out of range")
    rows = G.rows
    seen = {G.identity}
    order = [G.identity]
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        for g in gens:
            y = rows[g][x]
            if y not in seen:
                seen.add(y)
                order.append(y)
    return frozenset(seen)


def center(G: CayleyGroup) -> frozenset[int]:
    T = G.table
    return frozenset(np.flatnonzero((T == T.T).all(axis=1)).tolist())


def centralizer(G: CayleyGroup, x: int) -> frozenset[int]:
    T = G.table
    return frozenset(np.flatnonzero(T[x, :] == T[:, x]).tolist())


def commutator_table(G: CayleyGroup) -> np.ndarray:
    T, I = G.table, G.inverse
    return T[T[T, I[:, None]], I[None, :]]


def derived_subgroup(G: CayleyGroup) -> frozenset[int]:
    return subgroup_closure(G, np.unique(commutator_table(G)).tolist())


def conjugacy_classes(G: CayleyGroup) -> list[frozenset[int]]:
    T, I = G.table, G.inverse
    ar = np.arange(G.order)
    conj = T[T[ar[:, None], ar[None, :]], I[:, None]]  # conj[g, x] = g x g^-1
    seen = np.zeros(G.order, dtype=bool)
    classes = []
    for x in range(G.order):
        if not seen[x]:
            cls = np.unique(conj[:, x])
            seen[cls] = True
            classes.append(frozenset(cls.tolist()))
    return classes


def conjugacy_class_sizes(G: CayleyGroup) -> list[int]:
    return sorted(len(c) for c in conjugacy_classes(G))


def exponent(G: CayleyGroup) -> int:
    return int(np.lcm.reduce(G.element_orders))


def nilpotency_class(G: CayleyGroup) -> int | None:
    """Length of the lower central series, or None when the group is not nilpotent."""
    T, I = G.table, G.inverse
    cur = frozenset(range(G.order))
    limit = max(1, math.ceil(math.log2(G.order))) if G.order > 1 else 0
    c = 0
    everything = np.arange(G.order)
    while len(cur) > 1:
        if c >= limit:
            return None
        a = np.array(sorted(cur))
        comms = T[T[T[a[:, None], everything[None, :]], I[a][:, None]], I[everything][None, :]]
        nxt = subgroup_closure(G, np.unique(comms).tolist())
        if nxt == cur:
            return None
        cur = nxt
        c += 1
    return c


def invariants(G: CayleyGroup) -> dict:
    cls = nilpotency_class(G)
    return {
        "order": G.order,
        "exponent": exponent(G),
        "class": cls if cls is not None else "not nilpotent",
        "center_size": len(center(G)),
        "conj_class_sizes": conjugacy_class_sizes(G),
    }


def invariants_json(G: CayleyGroup) -> str:
    return json.dumps(invariants(G), sort_keys=True)


def greedy_generators(G: CayleyGroup) -> list[int]:
    """Greedy small generating tuple: repeatedly add the element that enlarges the closure most."""
    gens: list[int] = []
    cur = subgroup_closure(G, gens)
    orders = G.element_orders
    while len(cur) < G.order:
        best, best_size = None, -1
        cands = sorted((x for x in range(G.order) if x not in cur), key=lambda x: (-orders[x], x))
        for x in cands:
            size = len(subgroup_closure(G, gens + [x]))
            if size > best_size:
                best, best_size = x, size
                if size == G.order:
                    break
        gens.append(best)
        cur = subgroup_closure(G, gens)
    return gens


def minimal_generating_size(G: CayleyGroup, budget: int = 5_000_000) -> int:
    """Exact minimum size of a generating set (exhaustive over tuples)."""
    if G.order == 1:
        return 0
    ub = len(greedy_generators(G))
    for d in range(1, ub):
        if G.order ** d > budget:
            raise BudgetExceeded("generating-set search tuples", G.order ** d, budget)
        for tup in product(range(G.order), repeat=d):
            if list(tup) != sorted(tup):
                continue
            if len(subgroup_closure(G, tup)) == G.order:
                return d
    return ub


# ---------------------------------------------------------------- marked certificates

@dataclass(frozen=True, order=True)
class MarkedCertificate:
    """Marked isomorphism type of a tuple.

    Elements of ``<g_1..g_k>`` are discovered breadth first from the identity:
    identity first, then the generators, then ``g_j * d`` for discovered ``d`` in
    discovery order and ``j`` in tuple order.  ``action[i][j]`` is the discovery
    index of ``g_j * d_i``.  This is the left regular representation of the
    subgroup written in word order, so equal certificates means the map
    ``g_i -> h_i`` extends to an isomorphism.
    """

    k: int
    size: int
    generator_positions: tuple[int, ...]
    action: tuple[tuple[int, ...], ...]

    def key(self) -> tuple:
        return (self.k, self.size, self.generator_positions, self.action)

    def flat(self) -> list[int]:
        out = [self.k, self.size, *self.generator_positions]
        for row in self.action:
            out.extend(row)
        return out

    def hash64(self) -> int:
        """Same value as the batch kernel :func:`marked_hashes_all` produces."""
        flat = np.array([x for row in self.action for x in row], dtype=np.int64)
        return int(_cert_hash(flat, self.size, np.array(self.generator_positions, dtype=np.int64), self.k))

    def canonical_table(self) -> list[list[int]]:
        """Multiplication table of the subgroup in discovery order."""
        size, k = self.size, self.k
        if k == 0:
            return [[0]]
        gen_perm = [[self.action[i][j] for i in range(size)] for j in range(k)]
        # left-multiplication permutation of every discovered element
        perms: list[list[int] | None] = [None] * size
        perms[0] = list(range(size))
        for j, pos in enumerate(self.generator_positions):
            if perms[pos] is None:
                perms[pos] = gen_perm[j]
        for i in range(size):
            for j in range(k):
                t = self.action[i][j]
                if perms[t] is None:
                    perms[t] = [gen_perm[j][x] for x in perms[i]]
        return [[perms[a][b] for b in range(size)] for a in range(size)]


def discover(G: CayleyGroup, tup: Sequence[int]) -> tuple[list[int], MarkedCertificate]:
    """Discovery list of ``<tup>`` and its marked certificate."""
    rows = G.rows
    tup = [int(g) for g in tup]
    pos = {G.identity: 0}
    disc = [G.identity]
    gp = []
    for g in tup:
        if g not in pos:
            pos[g] = len(disc)
            disc.append(g)
        gp.append(pos[g])
    action = []
    i = 0
    while i < len(disc):
        d = disc[i]
        row = []
        for g in tup:
            y = rows[g][d]
            if y not in pos:
                pos[y] = len(disc)
                disc.append(y)
            row.append(pos[y])
        action.append(tuple(row))
        i += 1
    return disc, MarkedCertificate(len(tup), len(disc), tuple(gp), tuple(action))


def marked_certificate(G: CayleyGroup, tup: Sequence[int]) -> MarkedCertificate:
    return discover(G, tup)[1]


@njit(cache=True)
def _hash_sequence(xs):
    h = np.uint64(0x243F6A8885A308D3)
    for x in xs:
        h = mix64(h ^ (np.uint64(x) + np.uint64(0x9E3779B97F4A7C15)))
    return h


@njit(cache=True)
def _cert_hash(action_flat, size, gp, k):
    h = np.uint64(0x243F6A8885A308D3)
    for x in action_flat:
        h = mix64(h ^ (np.uint64(x) + np.uint64(0x9E3779B97F4A7C15)))
    h = mix64(h ^ (np.uint64(size) * np.uint64(0xC2B2AE3D27D4EB4F)))
    for j in range(k):
        h = mix64(h ^ (np.uint64(gp[j]) + np.uint64(0x165667B19E3779F9)))
    return mix64(h ^ np.uint64(k))


@njit(cache=True)
def _marked_hashes(T, ident, k, start, count):
    """Certificate hashes for tuples ``start..start+count`` in row-major tuple order."""
    n = T.shape[0]
    out = np.empty(count, np.uint64)
    pos = np.full(n, -1, np.int64)
    disc = np.empty(n, np.int64)
    tup = np.empty(k, np.int64)
    for t in range(count):
        idx = start + t
        for j in range(k - 1, -1, -1):
            tup[j] = idx % n
            idx //= n
        size = 1
        disc[0] = ident
        pos[ident] = 0
        gp = np.empty(k, np.int64)
        for j in range(k):
            g = tup[j]
            if pos[g] == -1:
                pos[g] = size
                disc[size] = g
                size += 1
            gp[j] = pos[g]
        # hashed on the fly in the order used by _cert_hash
        h = np.uint64(0x243F6A8885A308D3)
        i = 0
        while i < size:
            d = disc[i]
            for j in range(k):
                y = T[tup[j], d]
                if pos[y] == -1:
                    pos[y] = size
                    disc[size] = y
                    size += 1
                h = mix64(h ^ (np.uint64(pos[y]) + np.uint64(0x9E3779B97F4A7C15)))
            i += 1
        h = mix64(h ^ (np.uint64(size) * np.uint64(0xC2B2AE3D27D4EB4F)))
        for j in range(k):
            h = mix64(h ^ (np.uint64(gp[j]) + np.uint64(0x165667B19E3779F9)))
        h = mix64(h ^ np.uint64(k))
        out[t] = h
        for i in range(size):
            pos[disc[i]] = -1
    return out


def marked_hash(G: CayleyGroup, tup: Sequence[int]) -> int:
    """64-bit hash of the marked certificate (same value as the batch kernel)."""
    k = len(tup)
    idx = 0
    for g in tup:
        idx = idx * G.order + int(g)
    return int(_marked_hashes(np.ascontiguousarray(G.table, dtype=np.int64), G.identity, k, idx, 1)[0])


def marked_hashes_all(G: CayleyGroup, k: int) -> np.ndarray:
    """Certificate hash of every k-tuple, shape ``(n,)*k``."""
    T = np.ascontiguousarray(G.table, dtype=np.int64)
    n = G.order
    return _marked_hashes(T, G.identity, k, 0, n ** k).reshape((n,) * k)


# ---------------------------------------------------------------- isomorphism and profiles

def iso_oracle(G: CayleyGroup, H: CayleyGroup, node_budget: int = 1_000_000) -> list[int] | None:
    """Explicit isomorphism ``phi`` (``phi[g]`` in H) or None.

    Images of a greedy generating tuple are chosen by backtracking; every prefix
    must have equal marked certificates, which prunes by element order and by all
    relations among the already placed generators.
    """
    if G.order != H.order:
        return None
    if sorted(G.element_orders.tolist()) != sorted(H.element_orders.tolist()):
        return None
    gens = greedy_generators(G)
    oG, oH = G.element_orders, H.element_orders
    cG = np.array([len(centralizer(G, x)) for x in gens])
    cH = np.array([len(centralizer(H, y)) for y in range(H.order)])
    cand = [[y for y in range(H.order) if oH[y] == oG[g] and cH[y] == cG[i]] for i, g in enumerate(gens)]
    nodes = [0]

    def rec(i: int, imgs: list[int]):
        nodes[0] += 1
        if nodes[0] > node_budget:
            raise BudgetExceeded("group isomorphism search nodes", nodes[0], node_budget)
        if i == len(gens):
            return imgs
        for y in cand[i]:
            t = imgs + [y]
            if marked_certificate(G, gens[: i + 1]) == marked_certificate(H, t):
                r = rec(i + 1, t)
                if r is not None:
                    return r
        return None

    imgs = rec(0, [])
    if imgs is None:
        return None
    dg, _ = discover(G, gens)
    dh, _ = discover(H, imgs)
    if len(dh) != H.order:
        return None
    phi = np.empty(G.order, dtype=np.int64)
    phi[np.array(dg)] = np.array(dh)
    if not is_isomorphism(G, H, phi):
        raise AssertionError("group isomorphism oracle produced an invalid map")
    return phi.tolist()


def is_isomorphism(G: CayleyGroup, H: CayleyGroup, phi) -> bool:
    phi = np.asarray(phi, dtype=np.int64)
    if G.order != H.order or phi.shape != (G.order,):
        return False
    if np.unique(phi).size != G.order:
        return False
    return bool(np.array_equal(phi[G.table], H.table[phi[:, None], phi[None, :]]))


def unmarked_certificate(G: CayleyGroup, elements: frozenset[int], budget: int = 2_000_000) -> tuple:
    """Isomorphism type of a subgroup: least marked certificate over its shortest generating tuples."""
    elems = sorted(elements)
    if len(elems) == 1:
        return marked_certificate(G, []).key()
    for d in range(1, len(elems)):
        if len(elems) ** d > budget:
            raise BudgetExceeded("subgroup certificate tuples", len(elems) ** d, budget)
        best = None
        for tup in product(elems, repeat=d):
            c = marked_certificate(G, tup)
            if c.size != len(elems):
                continue
            k = c.key()
            if best is None or k < best:
                best = k
        if best is not None:
            return best
    raise AssertionError("subgroup has no generating tuple")


def subgroups_up_to(G: CayleyGroup, k: int, budget: int = 2_000_000) -> list[frozenset[int]]:
    """Distinct subgroups generated by at most k elements."""
    total = sum(G.order ** j for j in range(k + 1))
    if total > budget:
        raise BudgetExceeded("profile tuples", total, budget)
    seen = set()
    out = []
    for j in range(k + 1):
        for tup in product(range(G.order), repeat=j):
            if list(tup) != sorted(tup):
                continue
            S = subgroup_closure(G, tup)
            if S not in seen:
                seen.add(S)
                out.append(S)
    return out


def profile(G: CayleyGroup, k: int, budget: int = 2_000_000) -> Counter:
    """Multiset of isomorphism types of the subgroups generated by at most k elements."""
    return Counter(unmarked_certificate(G, S, budget) for S in subgroups_up_to(G, k, budget))


def profile_summary(prof: Counter) -> list[dict]:
    rows = []
    for key, mult in prof.items():
        digest = int(_hash_sequence(np.array(MarkedCertificate(*key).flat(), dtype=np.int64)))
        rows.append({"order": key[1], "generators": key[0], "type": f"{digest:016x}", "count": mult})
    return sorted(rows, key=lambda r: (r["order"], r["type"]))

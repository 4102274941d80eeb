"""k-tuple colour refinement engines shared by graph and group WL.

Two engines produce the same partitions:

* ``exact``: joint naming over the disjoint union of both tuple spaces.  Every
  round builds per-tuple certificates (old colour followed by the sorted
  multiset of replacement signatures), sorts the distinct certificates and
  hands out dense ids.  Memory is about ``n**(k+1)`` machine words.
* ``hashed``: per-structure 64-bit content hashes computed by numba kernels.
  Names are derived from content alone, so colours of two separately refined
  structures are directly comparable and a structure can be refined once and
  compared against many partners.  Only arities 2 and 3 are supported.

Both engines stop once the histograms diverge (optionally only over the
sub-box of tuples drawn from the first ``restrict`` domain points) or when the
partitions of both structures are stable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .errors import BudgetExceeded, ParameterError

# The bundled TBB is too old for numba; OpenMP avoids a warning at first use.
numba.config.THREADING_LAYER = "omp"

EXACT_LIMIT = 20_000_000  # max n**(k+1) handled by the exact engine in "auto" mode

DISTINGUISHED = "distinguished"
STABLE_EQUAL = "stable_equal"


@dataclass(frozen=True)
class Histogram:
    """Colour multiset as parallel sorted arrays."""

    colors: np.ndarray
    counts: np.ndarray

    @classmethod
    def of(cls, colors: np.ndarray) -> "Histogram":
        c, n = np.unique(np.asarray(colors).ravel(), return_counts=True)
        return cls(c, n.astype(np.int64))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return (self.colors.shape == other.colors.shape
                and bool(np.array_equal(self.colors, other.colors))
                and bool(np.array_equal(self.counts, other.counts)))

    def __hash__(self) -> int:
        return hash(self.digest())

    def __len__(self) -> int:
        return int(self.colors.size)

    def total(self) -> int:
        return int(self.counts.sum())

    def digest(self) -> str:
        """Order-independent encoding: sha256 over the sorted (colour, count) pairs."""
        h = hashlib.sha256()
        h.update(self.colors.astype(np.uint64).tobytes())
        h.update(self.counts.astype(np.int64).tobytes())
        return h.hexdigest()

    def as_dict(self) -> dict[int, int]:
        return {int(c): int(n) for c, n in zip(self.colors.tolist(), self.counts.tolist())}


@dataclass(frozen=True)
class Verdict:
    outcome: str
    round: int
    histograms: tuple[Histogram, Histogram]
    engine: str = "exact"

    @property
    def distinguished(self) -> bool:
        return self.outcome == DISTINGUISHED

    def digests(self) -> tuple[str, str]:
        return self.histograms[0].digest(), self.histograms[1].digest()


@dataclass
class Coloring:
    """Colouring of all k-tuples over a domain of size n, as an ``(n,)*k`` array."""

    k: int
    colors: np.ndarray
    round: int

    def color(self, tup) -> int:
        return int(self.colors[tuple(tup)])

    def num_classes(self) -> int:
        return int(np.unique(self.colors).size)


# ---------------------------------------------------------------- hashing

@njit(inline="always")
def mix64(z):
    """splitmix64 finaliser."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def finish_hash(old, s1, s2):
    return mix64(mix64(old ^ np.uint64(0x5851F42D4C957F2D)) + mix64(s1 ^ np.uint64(0x2545F4914F6CDD1D)) * np.uint64(3) + s2)


@njit(cache=True)
def _hash_rows(F):
    out = np.empty(F.shape[0], np.uint64)
    for r in range(F.shape[0]):
        h = np.uint64(0x243F6A8885A308D3) + np.uint64(F.shape[1])
        for c in range(F.shape[1]):
            h = mix64(h ^ (np.uint64(F[r, c]) + np.uint64(0x9E3779B97F4A7C15)))
        out[r] = h
    return out


@njit(parallel=True, cache=True)
def _hash_round2(C, CT):
    n = C.shape[0]
    out = np.empty((n, n), np.uint64)
    for u in prange(n):
        for v in range(n):
            s1 = np.uint64(0)
            s2 = np.uint64(0)
            for x in range(n):
                h = mix64(CT[v, x] * np.uint64(0x9E3779B97F4A7C15) + C[u, x] * np.uint64(0xC2B2AE3D27D4EB4F))
                s1 += h
                s2 += h * h
            out[u, v] = finish_hash(C[u, v], s1, s2)
    return out


@njit(parallel=True, cache=True)
def _hash_round3(C, T1, T2):
    n = C.shape[0]
    out = np.empty((n, n, n), np.uint64)
    for u in prange(n):
        for v in range(n):
            r3 = C[u, v]
            for w in range(n):
                r1 = T1[v, w]
                r2 = T2[u, w]
                s1 = np.uint64(0)
                s2 = np.uint64(0)
                for x in range(n):
                    h = mix64(r1[x] * np.uint64(0x9E3779B97F4A7C15)
                             + r2[x] * np.uint64(0xC2B2AE3D27D4EB4F)
                             + r3[x] * np.uint64(0x165667B19E3779F9))
                    s1 += h
                    s2 += h * h
                out[u, v, w] = finish_hash(r3[w], s1, s2)
    return out


def hash_features(features: np.ndarray) -> np.ndarray:
    """Content hash of each row of an integer feature matrix."""
    F = np.ascontiguousarray(features, dtype=np.int64)
    if F.ndim == 1:
        F = F[:, None]
    return _hash_rows(F)


def set_threads(n: int | None) -> None:
    if n is not None and n > 0:
        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------- problem setup

@dataclass
class TupleSpace:
    """One structure's refinement input.

    ``keys`` holds initial colour keys for every tuple (shape ``(n,)*k`` plus an
    optional trailing feature axis).  Keys must be comparable across the two
    structures of a comparison.  For ``k == 1`` the refinement aggregates over
    ``neighbors`` instead of over all replacements.
    """

    n: int
    k: int
    keys: np.ndarray
    neighbors: list[np.ndarray] | None = None
    restrict: int | None = None
    label: str = ""

    def feature_matrix(self) -> np.ndarray:
        F = np.asarray(self.keys, dtype=np.int64)
        return F.reshape(self.n ** self.k, -1)


def _box(colors: np.ndarray, k: int, r: int | None) -> np.ndarray:
    if r is None:
        return colors
    return colors[(slice(0, r),) * k]


def _check_pair(A: TupleSpace, B: TupleSpace) -> None:
    if A.k != B.k:
        raise ParameterError("structures must use the same arity")
    if A.k < 1:
        raise ParameterError("arity must be at least 1")
    if A.n != B.n:
        raise ParameterError("domain sizes differ")
    if A.feature_matrix().shape[1] != B.feature_matrix().shape[1]:
        raise ParameterError("initial key widths differ")


def choose_engine(n: int, k: int, engine: str = "auto") -> str:
    if engine not in ("auto", "exact", "hashed"):
        raise ParameterError(f"unknown engine {engine!r}")
    if engine == "auto":
        if k in (2, 3) and n ** (k + 1) > EXACT_LIMIT // 10:
            return "hashed"
        return "exact"
    if engine == "hashed" and k not in (2, 3):
        raise ParameterError("hashed engine supports k = 2 and k = 3 only")
    return engine


# ---------------------------------------------------------------- exact engine

def _joint_rename(rows: np.ndarray) -> tuple[np.ndarray, int]:
    """Dense ids for the rows of a 2-d int array in sorted row order."""
    if rows.shape[1] == 1:
        u, inv = np.unique(rows[:, 0], return_inverse=True)
        return inv.astype(np.int64).ravel(), int(u.size)
    u, inv = np.unique(rows, axis=0, return_inverse=True)
    return inv.astype(np.int64).ravel(), int(u.shape[0])


def _combine_columns(cols: list[np.ndarray], base: int) -> np.ndarray:
    """Injectively combine k colour arrays into one int64 array."""
    if base ** len(cols) < 2 ** 62:
        out = cols[0].astype(np.int64)
        for c in cols[1:]:
            out = out * base + c
        return out
    out = cols[0].astype(np.int64)
    for c in cols[1:]:
        stacked = np.stack([out.ravel(), c.ravel()], axis=1)
        ids, _ = _joint_rename(stacked)
        out = ids.reshape(out.shape)
    return out


def _exact_signatures(C: np.ndarray, k: int, base: int) -> np.ndarray:
    """Sorted replacement multiset per tuple, shape (n**k, n)."""
    n = C.shape[0]
    cols = []
    for i in range(k):
        # entry i replaced by x, x placed on a new last axis
        moved = np.moveaxis(C, i, -1)  # axes: others..., x
        expand = np.expand_dims(moved, axis=i)  # broadcast over slot i
        cols.append(np.broadcast_to(expand, (n,) * k + (n,)))
    combo = _combine_columns(cols, base)
    combo = combo.reshape(n ** k, n)
    return np.sort(combo, axis=1)


def _neighbor_signatures(C: np.ndarray, nbrs: list[np.ndarray], width: int) -> np.ndarray:
    n = C.shape[0]
    sig = np.full((n, width), -1, dtype=np.int64)
    for v in range(n):
        nb = nbrs[v]
        if len(nb):
            sig[v, : len(nb)] = np.sort(C[nb])[::-1]
    return sig


def exact_rounds(A: TupleSpace, B: TupleSpace):
    """Yield ``(colors_A, colors_B, num_classes)`` for round 0, 1, ... (joint names)."""
    _check_pair(A, B)
    n, k = A.n, A.k
    N = n ** k
    F = np.vstack([A.feature_matrix(), B.feature_matrix()])
    ids, nc = _joint_rename(F)
    shape = (n,) * k
    CA, CB = ids[:N].reshape(shape), ids[N:].reshape(shape)
    yield CA, CB, nc
    if k == 1:
        width = max([len(x) for x in (A.neighbors or [])] + [len(x) for x in (B.neighbors or [])] + [0])
    while True:
        if k == 1:
            SA = _neighbor_signatures(CA, A.neighbors, width)
            SB = _neighbor_signatures(CB, B.neighbors, width)
        else:
            SA = _exact_signatures(CA, k, nc)
            SB = _exact_signatures(CB, k, nc)
        rows = np.vstack([
            np.hstack([CA.reshape(N, 1), SA]),
            np.hstack([CB.reshape(N, 1), SB]),
        ])
        del SA, SB
        ids, nc = _joint_rename(rows)
        del rows
        CA, CB = ids[:N].reshape(shape), ids[N:].reshape(shape)
        yield CA, CB, nc


# ---------------------------------------------------------------- hashed engine

class HashedRefiner:
    """Per-structure refinement with content-derived 64-bit names.

    Per-round statistics are kept for every round; only the latest colour array
    is kept, so a refiner can be extended on demand and reused across pairs.
    """

    def __init__(self, space: TupleSpace):
        if space.k not in (2, 3):
            raise ParameterError("hashed engine supports k = 2 and k = 3 only")
        self.n, self.k, self.restrict = space.n, space.k, space.restrict
        shape = (space.n,) * space.k
        self.colors = hash_features(space.feature_matrix()).reshape(shape)
        self.hists: list[Histogram] = []
        self.classes: list[int] = []
        self._record()

    def _record(self) -> None:
        self.hists.append(Histogram.of(_box(self.colors, self.k, self.restrict)))
        self.classes.append(int(np.unique(self.colors).size))

    @property
    def round(self) -> int:
        return len(self.classes) - 1

    def stable_at(self, r: int) -> bool:
        return r >= 1 and self.classes[r] == self.classes[r - 1]

    def advance(self) -> None:
        C = self.colors
        if self.k == 2:
            self.colors = _hash_round2(C, np.ascontiguousarray(C.T))
        else:
            T1 = np.ascontiguousarray(np.moveaxis(C, 0, -1))
            T2 = np.ascontiguousarray(np.moveaxis(C, 1, -1))
            self.colors = _hash_round3(C, T1, T2)
            del T1, T2
        self._record()

    def ensure(self, r: int) -> None:
        while self.round < r:
            self.advance()

    def coloring(self) -> Coloring:
        return Coloring(self.k, self.colors, self.round)


def compare_refiners(RA: HashedRefiner, RB: HashedRefiner, max_rounds: int | None = None) -> Verdict:
    """Joint verdict from two hashed refiners (advancing them as needed)."""
    if RA.n != RB.n or RA.k != RB.k:
        raise ParameterError("refiners describe different tuple spaces")
    r = 0
    while True:
        RA.ensure(r)
        RB.ensure(r)
        hA, hB = RA.hists[r], RB.hists[r]
        if hA != hB:
            return Verdict(DISTINGUISHED, r, (hA, hB), "hashed")
        if RA.stable_at(r) and RB.stable_at(r):
            return Verdict(STABLE_EQUAL, r - 1, (RA.hists[r - 1], RB.hists[r - 1]), "hashed")
        if max_rounds is not None and r >= max_rounds:
            raise BudgetExceeded("refinement rounds", r + 1, max_rounds)
        r += 1


# ---------------------------------------------------------------- driver

def refine_pair(A: TupleSpace, B: TupleSpace, engine: str = "auto",
                max_rounds: int | None = None) -> Verdict:
    """Joint refinement of two structures; verdict over the (restricted) histograms."""
    _check_pair(A, B)
    eng = choose_engine(A.n, A.k, engine)
    if eng == "hashed":
        return compare_refiners(HashedRefiner(A), HashedRefiner(B), max_rounds)
    k, rA, rB = A.k, A.restrict, B.restrict
    prev_nc = None
    prev_h = None
    for r, (CA, CB, nc) in enumerate(exact_rounds(A, B)):
        hA, hB = Histogram.of(_box(CA, k, rA)), Histogram.of(_box(CB, k, rB))
        if hA != hB:
            return Verdict(DISTINGUISHED, r, (hA, hB), "exact")
        if prev_nc is not None and nc == prev_nc:
            return Verdict(STABLE_EQUAL, r - 1, prev_h, "exact")
        if max_rounds is not None and r >= max_rounds:
            raise BudgetExceeded("refinement rounds", r + 1, max_rounds)
        prev_nc, prev_h = nc, (hA, hB)
    raise AssertionError("unreachable")


def stable_coloring(space: TupleSpace, max_rounds: int | None = None) -> list[Coloring]:
    """Exact refinement history of a single structure, ending at the stable colouring."""
    hist: list[Coloring] = []
    prev = None
    for r, (C, _, nc) in enumerate(exact_rounds(space, space)):
        if prev is not None and nc == prev:
            return hist
        hist.append(Coloring(space.k, C, r))
        prev = nc
        if max_rounds is not None and r >= max_rounds:
            return hist
    return hist


def partition_of(colors: np.ndarray) -> np.ndarray:
    """Canonical partition labels (first-occurrence order) of a colour array."""
    flat = np.asarray(colors).ravel()
    _, first, inv = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inv.ravel()]


def refines(fine: np.ndarray, coarse: np.ndarray) -> bool:
    """True if every class of ``fine`` lies inside one class of ``coarse``."""
    f, c = partition_of(fine), partition_of(coarse)
    pairs = np.unique(np.stack([f, c], axis=1), axis=0)
    return pairs.shape[0] == np.unique(f).size

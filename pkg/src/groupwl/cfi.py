"""CFI graphs over a base graph, with gadget/link metadata and the parity invariant."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping

from .errors import ValidationError
from .graphs import Graph, induced_subgraph

BaseEdge = tuple[int, int]


def norm_edge(e) -> BaseEdge:
    u, v = (int(x) for x in e)
    return (min(u, v), max(u, v))


def parse_edge(text: str) -> BaseEdge:
    """``"0-1"`` -> ``(0, 1)``."""
    try:
        u, v = text.split("-")
        return norm_edge((int(u), int(v)))
    except ValueError as exc:
        raise ValidationError(f"bad edge literal {text!r}; expected 'u-v'") from exc


def even_strings(d: int) -> list[tuple[int, ...]]:
    """Even-weight bit strings of length d in lexicographic order."""
    return [bits for bits in product((0, 1), repeat=d) if sum(bits) % 2 == 0]


@dataclass(frozen=True)
class Link:
    edge: BaseEdge
    vertices: tuple[int, int, int, int]  # a_i^v, b_i^v, a_j^w, b_j^w
    edges: tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class CfiGraph:
    base: Graph
    graph: Graph
    gadget_of: tuple[int, ...]
    kind_of: tuple[tuple, ...]  # ("a"|"b", pair index) or ("m", bits)
    links: Mapping[BaseEdge, Link]
    twisted: frozenset
    external: Mapping[tuple[int, int, str], int]  # (base vertex, pair index, "a"/"b") -> vertex
    internal: Mapping[int, tuple[int, ...]]  # base vertex -> its internal vertices

    @property
    def n(self) -> int:
        return self.graph.n

    def pair_index(self, v: int, w: int) -> int:
        """Pair slot used at gadget ``v`` for the base edge towards ``w``."""
        return self.base.neighbors(v).index(w)

    def kind_label(self, x: int) -> str:
        kind = self.kind_of[x]
        if kind[0] == "m":
            return "m" + "".join(map(str, kind[1]))
        return f"{kind[0]}{kind[1]}"

    def is_internal(self, x: int) -> bool:
        return self.kind_of[x][0] == "m"

    def sidecar(self) -> dict:
        return {
            "gadget_of": list(self.gadget_of),
            "kind_of": [self.kind_label(x) for x in range(self.n)],
            "links": {f"{e[0]}-{e[1]}": {"vertices": list(l.vertices), "edges": [list(x) for x in l.edges]}
                      for e, l in sorted(self.links.items())},
            "twisted": [f"{u}-{v}" for u, v in sorted(self.twisted)],
        }

    def sidecar_json(self) -> str:
        return json.dumps(self.sidecar(), indent=1, sort_keys=True) + "\n"


def build_cfi(base: Graph, twist: Iterable = ()) -> CfiGraph:
    """CFI graph of ``base`` with the links of ``twist`` crossed.

    Pair slots at a gadget follow the sorted neighbour order of its base vertex.
    Vertices are numbered gadget by gadget: ``a_0, b_0, a_1, b_1, ...`` and then
    the internal vertices in lexicographic order of their bit strings.
    """
    if base.n == 0 or not base.is_connected():
        raise ValidationError("base graph must be non-empty and connected")
    if any(base.degree(v) == 0 for v in range(base.n)):
        raise ValidationError("base graph must have minimum degree at least 1")
    tw = frozenset(norm_edge(e) for e in twist)
    for e in tw:
        if e not in base.edges:
            raise ValidationError(f"twist edge {e} is not an edge of the base graph")

    gadget_of: list[int] = []
    kind_of: list[tuple] = []
    external: dict[tuple[int, int, str], int] = {}
    internal: dict[int, tuple[int, ...]] = {}
    edges: list[tuple[int, int]] = []
    for v in range(base.n):
        d = base.degree(v)
        for i in range(d):
            for side in "ab":
                external[(v, i, side)] = len(gadget_of)
                gadget_of.append(v)
                kind_of.append((side, i))
        ids = []
        for bits in even_strings(d):
            x = len(gadget_of)
            ids.append(x)
            gadget_of.append(v)
            kind_of.append(("m", bits))
            for i, b in enumerate(bits):
                edges.append((x, external[(v, i, "b" if b else "a")]))
        internal[v] = tuple(ids)

    links: dict[BaseEdge, Link] = {}
    for v, w in base.sorted_edges():
        i = base.neighbors(v).index(w)
        j = base.neighbors(w).index(v)
        av, bv = external[(v, i, "a")], external[(v, i, "b")]
        aw, bw = external[(w, j, "a")], external[(w, j, "b")]
        pair = ((av, bw), (bv, aw)) if (v, w) in tw else ((av, aw), (bv, bw))
        edges.extend(pair)
        links[(v, w)] = Link((v, w), (av, bv, aw, bw), pair)

    graph = Graph(len(gadget_of), edges)
    return CfiGraph(base, graph, tuple(gadget_of), tuple(kind_of), links, tw, external, internal)


def expected_vertex_count(base: Graph) -> int:
    return sum(2 * base.degree(v) + 2 ** (base.degree(v) - 1) for v in range(base.n))


def zero_choice(cfi: CfiGraph) -> dict[int, int]:
    """Internal choice picking the all-zero string in every gadget."""
    return {v: ids[0] for v, ids in cfi.internal.items()}


def all_choices(cfi: CfiGraph):
    """Every internal choice, as dicts base vertex -> internal vertex."""
    verts = sorted(cfi.internal)
    for pick in product(*(cfi.internal[v] for v in verts)):
        yield dict(zip(verts, pick))


def special_set(cfi: CfiGraph, choice: Mapping[int, int]) -> list[int]:
    """Chosen internal vertices together with all their (external) neighbours."""
    for v in range(cfi.base.n):
        if v not in choice:
            raise ValidationError(f"no internal vertex chosen for gadget {v}")
        x = choice[v]
        if not (0 <= x < cfi.n) or cfi.gadget_of[x] != v or not cfi.is_internal(x):
            raise ValidationError(f"vertex {x} is not an internal vertex of gadget {v}")
    S = set()
    for v in range(cfi.base.n):
        x = choice[v]
        S.add(x)
        S.update(cfi.graph.neighbors(x))
    return sorted(S)


def parity_invariant(cfi: CfiGraph, choice: Mapping[int, int]) -> int:
    """Edge count mod 2 of the subgraph induced by :func:`special_set`."""
    return induced_subgraph(cfi.graph, special_set(cfi, choice)).m % 2

from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupwl.cayley import (centralizer, center, derived_subgroup, heisenberg, iso_oracle, minimal_generating_size,
                            subgroup_closure)
from groupwl.errors import BudgetExceeded, ParameterError, ValidationError
from groupwl.graphs import (Graph, all_graphs, complete_bipartite, complete_graph, cycle_graph, empty_graph,
                            path_graph)
from groupwl.mekler import (InducedMap, build, free_group, free_reduce, graph_iso_to_group_iso, word_of,
                            zeroed_wedge)


def small_groups(max_order=729):
    for n in range(1, 5):
        for G in all_graphs(n):
            M = build(G, 3)
            if M.order <= max_order:
                yield M


@st.composite
def group_and_elements(draw, count=3, max_n=5):
    n = draw(st.integers(1, max_n))
    p = draw(st.sampled_from([3, 5]))
    pairs = list(combinations(range(n), 2))
    edges = [e for e, keep in zip(pairs, draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs))))
             if keep]
    M = build(Graph(n, edges), p)
    elems = []
    for _ in range(count):
        gen = draw(st.lists(st.integers(0, p - 1), min_size=M.n, max_size=M.n))
        comm = draw(st.lists(st.integers(0, p - 1), min_size=M.m, max_size=M.m))
        elems.append(M.element(gen, comm))
    return M, elems


def test_orders():
    assert free_group(3, 3).order == 3 ** 6
    assert build(path_graph(3), 3).order == 81
    assert build(complete_graph(4), 5).order == 5 ** 4
    assert build(empty_graph(2), 3).order == 27


def test_even_prime_rejected():
    with pytest.raises(ParameterError):
        build(path_graph(3), 2)
    with pytest.raises(ParameterError):
        build(path_graph(3), 9)


def test_swapping_non_adjacent_generators():
    M = build(path_graph(3), 3)
    v1, v3 = M.vertex(0), M.vertex(2)
    assert M.format(M.mul(v3, v1)) == "v1*v3*[v1,v3]^2"
    # adjacent generators commute
    assert M.mul(M.vertex(1), v1) == M.mul(v1, M.vertex(1))


def test_commutator_of_products():
    M = free_group(3, 5)
    x = M.parse("v1^2*v2")
    y = M.parse("v2^3*v3")
    c = M.commutator(x, y)
    assert c.gen == (0, 0, 0)
    # exponents d_j f_i - d_i f_j on each pair (j < i)
    assert M.format(c) == "[v1,v2]*[v1,v3]^2*[v2,v3]"


def test_support():
    M = free_group(3, 5)
    assert M.support(M.parse("v1*v2^5*v3")) == {0, 2}
    assert M.support(M.parse("[v1,v2]")) == frozenset()


@given(group_and_elements())
def test_mul_matches_rewriting(data):
    M, (x, y, _) = data
    assert M.mul(x, y) == free_reduce(M, word_of(M, x) + word_of(M, y))


@given(group_and_elements())
def test_group_axioms(data):
    M, (x, y, z) = data
    assert M.mul(M.mul(x, y), z) == M.mul(x, M.mul(y, z))
    assert M.mul(x, M.inv(x)).is_identity()
    assert M.mul(M.inv(x), x).is_identity()
    assert M.pow(x, M.p).is_identity()
    assert M.pow(x, -1) == M.inv(x)


@given(group_and_elements())
def test_commutators_are_central(data):
    M, (x, y, z) = data
    c = M.commutator(x, y)
    assert not any(c.gen)
    assert M.mul(c, z) == M.mul(z, c)
    assert M.commutes(x, y) == c.is_identity()


@given(group_and_elements())
def test_parse_format_roundtrip(data):
    M, (x, _, _) = data
    assert M.parse(M.format(x)) == x


def test_parse_accepts_any_order():
    M = build(path_graph(3), 3)
    assert M.parse("v3 * v1") == M.mul(M.vertex(2), M.vertex(0))
    assert M.parse("[v3,v1]") == M.inv(M.parse("[v1,v3]"))
    assert M.parse("v1^-1") == M.vertex(0, 2)
    assert M.parse("1").is_identity()
    with pytest.raises(ValidationError):
        M.parse("v4")
    with pytest.raises(ValidationError):
        M.parse("w1")


def test_centers():
    p = 3
    assert len(build(complete_bipartite(2, 2), p).center_basis()) == 2
    assert len(build(path_graph(3), p).center_basis()) == 2
    M = build(complete_graph(4), p)
    assert len(M.center_basis()) == 4
    assert all(M.is_central(M.vertex(i)) for i in range(4))


def test_centers_against_table():
    for M in small_groups():
        C = M.to_cayley()
        assert len(center(C)) == M.p ** len(M.center_basis())


def test_bipartite_centralizer_example():
    M = build(complete_bipartite(2, 2), 3)
    x = M.parse("v1*v2*v3*v4")
    basis = [M.format(b) for b in M.centralizer_basis(x)]
    assert basis == ["v1*v2", "v3*v4", "[v1,v2]", "[v3,v4]"]
    assert M.centralizer_log_order(x) == 4


def test_centralizers_against_table():
    rng = np.random.default_rng(0)
    for M in small_groups(243):
        C = M.to_cayley()
        for _ in range(8):
            x = M.random_element(rng)
            size = len(centralizer(C, M.element_index(x)))
            assert size == M.p ** M.centralizer_log_order(x)
            assert M.centralizer_log_order(x) == M.centralizer_log_order_by_rank(x)
            basis = M.centralizer_basis(x)
            assert all(M.commutes(x, b) for b in basis)
            assert len(subgroup_closure(C, [M.element_index(b) for b in basis])) == size


@given(group_and_elements(count=1, max_n=6))
def test_centralizer_routes_agree(data):
    M, (x,) = data
    assert M.centralizer_log_order(x) == M.centralizer_log_order_by_rank(x)


@given(group_and_elements(count=1, max_n=6))
def test_centralizer_shrinks_with_support(data):
    M, (x,) = data
    for v in M.support(x):
        assert M.centralizer_log_order(x) <= M.centralizer_log_order(M.vertex(v))


def test_cayley_table_identity_and_order():
    M = build(path_graph(3), 3)
    C = M.to_cayley()
    assert C.order == 81 and C.identity == 0
    assert M.element_at(M.element_index(M.parse("v2*[v1,v3]"))) == M.parse("v2*[v1,v3]")
    with pytest.raises(BudgetExceeded):
        free_group(4, 3).to_cayley()


def test_two_free_generators_give_heisenberg():
    assert iso_oracle(build(empty_graph(2), 3).to_cayley(), heisenberg(3)) is not None


def test_generating_rank_is_vertex_count():
    # for a p-group the minimal number of generators is the rank of G / G'G^p
    for M in small_groups():
        C = M.to_cayley()
        frattini = subgroup_closure(C, list(derived_subgroup(C)) + [C.pow(g, M.p) for g in range(C.order)])
        assert C.order // len(frattini) == M.p ** M.n


def test_minimal_generators_small():
    for G in [path_graph(2), empty_graph(2), complete_graph(3), path_graph(3)]:
        assert minimal_generating_size(build(G, 3).to_cayley()) == G.n


def test_subgroup_orders():
    M = free_group(3, 3)
    assert M.subgroup_order([]) == 1
    assert M.subgroup_order([M.vertex(0)]) == 3
    assert M.subgroup_order([M.vertex(0), M.vertex(1)]) == 27
    assert M.subgroup_order([M.vertex(0), M.vertex(0, 2)]) == 3
    assert M.subgroup_order([M.parse("[v1,v2]"), M.vertex(2)]) == 9


@given(group_and_elements(count=3, max_n=4))
def test_subgroup_order_formula_matches_closure(data):
    M, tup = data
    if M.p ** (M.n + 3) > 200_000:
        tup = tup[:2]
    M.subgroup_order(tup)


def test_b_matrices():
    M = build(path_graph(3), 3)
    B1, B2 = M.b_matrices([M.vertex(0), M.vertex(1), M.vertex(2)])
    assert B1.tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    # pair rows (1,2), (1,3), (2,3); only the non-edge column (1,3) survives
    assert B2.tolist() == [[0, 0, 0], [0, 1, 0], [0, 0, 0]]
    K = build(complete_graph(3), 3)
    assert not np.asarray(K.b_matrices([K.vertex(0), K.vertex(1)])[1].data).any()


def test_zeroed_wedge_only_clears_listed_pairs():
    M = free_group(3, 3)
    B1, B2 = M.b_matrices([M.parse("v1*v2"), M.parse("v2*v3^2")])
    Z = zeroed_wedge(B1, [(0, 1)])
    assert np.asarray(Z.data)[:, 0].tolist() == [0]
    assert np.asarray(Z.data)[:, 1:].tolist() == np.asarray(B2.data)[:, 1:].tolist()


def test_induced_identity_and_reversal():
    M = free_group(3, 3)
    ident = InducedMap(M, M, (0, 1, 2))
    x = M.parse("v1*v2^2*[v1,v3]")
    assert ident(x) == x
    rev = InducedMap(M, M, (2, 1, 0))
    # v3 v2^2 v1 rewritten into normal form
    assert rev(M.parse("v1*v2^2*v3")) == M.product([M.vertex(2), M.vertex(1, 2), M.vertex(0)])


def test_cycle_rotation_and_bipartite_swap():
    C5 = build(cycle_graph(5), 3)
    f = graph_iso_to_group_iso((1, 2, 3, 4, 0), C5, C5)
    rng = np.random.default_rng(1)
    for _ in range(50):
        x, y = C5.random_element(rng), C5.random_element(rng)
        assert f(C5.mul(x, y)) == C5.mul(f(x), f(y))
    K = build(complete_bipartite(2, 2), 5)
    g = graph_iso_to_group_iso((2, 3, 0, 1), K, K)
    assert g(K.parse("[v1,v2]")) == K.parse("[v3,v4]")


def test_non_isomorphism_rejected():
    M = build(path_graph(3), 3)
    with pytest.raises(ValidationError):
        graph_iso_to_group_iso((1, 0, 2), M, M)
    with pytest.raises(ValidationError):
        graph_iso_to_group_iso((0, 1, 2), M, build(path_graph(3), 5))


def test_complete_graph_has_no_commuting_graph():
    Gc, X = build(complete_graph(3), 3).commuting_graph(2)
    assert Gc.n == 0 and len(X) == 0


def test_commuting_graph_examples():
    M = build(complete_bipartite(2, 2), 3)
    Gc, X = M.commuting_graph(2)
    rows = [tuple(r) for r in X.tolist()]
    a, b = rows.index((1, 1, 0, 0)), rows.index((0, 0, 1, 1))
    assert Gc.has_edge(a, b)
    sq = rows.index((2, 2, 0, 0))
    assert Gc.has_edge(a, sq)
    v1, v2 = rows.index((1, 0, 0, 0)), rows.index((0, 1, 0, 0))
    assert not Gc.has_edge(v1, v2)


def test_commuting_graph_against_pairwise_check():
    for G in [path_graph(4), cycle_graph(4), empty_graph(3)]:
        M = build(G, 3)
        Gc, X = M.commuting_graph(2)
        for a, b in combinations(range(len(X)), 2):
            assert Gc.has_edge(a, b) == M.commutes(M.element(X[a]), M.element(X[b]))

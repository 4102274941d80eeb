import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupwl.cfi import build_cfi
from groupwl.cfigroups import (CfiGroupPair, GadgetTwist, a_generators, apply_gadget_twist, b1_matrix,
                               centralizer_profile_check, distinguish_cfi_groups, gadget_generator, identity_twist,
                               line_graph_path, parity_choice_bits, parity_verdict, random_tuple, sigma_for_edge,
                               sigma_is_isomorphism, subgroup_certificate, transfer_check, twist_columns,
                               twist_edge_search, twist_map, twist_pipeline, validate_twist)
from groupwl.errors import ParameterError, ValidationError
from groupwl.fpalgebra import column_space_equal
from groupwl.graphs import (Graph, complete_bipartite, complete_graph, cycle_graph, disjoint_union, petersen_graph,
                            random_regular_graph)
from groupwl.mekler import MeklerElement, build, zeroed_wedge

K4 = CfiGroupPair(complete_graph(4), 3)


def vertex_elem(pair, *xs):
    gen = [0] * pair.n
    for x in xs:
        gen[x] = 1
    return pair.free.element(gen)


def test_pair_basics():
    assert K4.n == 40
    assert K4.twisted_edge == (0, 1)
    assert K4.cfi2.twisted == {(0, 1)}
    assert K4.edges_twisted_at((0, 1)) == K4.cfi2.graph.edges
    assert K4.G1.order_exponent == K4.G2.order_exponent


def test_pair_preconditions():
    with pytest.raises(ValidationError):
        CfiGroupPair(complete_graph(5), 3)
    with pytest.raises(ValidationError):
        CfiGroupPair(disjoint_union(complete_graph(4), complete_graph(4)), 3)
    with pytest.raises(ParameterError):
        CfiGroupPair(complete_graph(4), 2)
    with pytest.raises(ValidationError):
        K4.edges_twisted_at((0, 0))


def test_twist_map_moves_link_commutators():
    av, bv, aw, bw = K4.cfi1.links[(0, 1)].vertices
    F = K4.free
    c = [0] * F.m
    c[F.col[(av, aw)]] = 1
    c[F.col[(bv, aw)]] = 2
    x = MeklerElement((0,) * F.n, tuple(c))
    (y,) = twist_map([x], (0, 1), K4)
    assert y.comm[F.col[(av, bw)]] == 1 and y.comm[F.col[(bv, bw)]] == 2
    assert sum(y.comm) == 3
    # other links are untouched
    assert twist_map([x], (2, 3), K4) == (x,)


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3), st.integers(0, 5))
def test_twist_map_is_an_involution(seed, k, idx):
    rng = np.random.default_rng(seed)
    e = K4.base.sorted_edges()[idx]
    tup = random_tuple(K4, k, rng, local=False)
    assert twist_map(twist_map(tup, e, K4), e, K4) == tup


@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 4), st.integers(0, 5))
def test_twist_commutes_with_zeroing(seed, k, idx):
    rng = np.random.default_rng(seed)
    e = K4.base.sorted_edges()[idx]
    B1 = b1_matrix(random_tuple(K4, k, rng, local=bool(seed % 2)), K4.n, 3)
    lhs = twist_columns(zeroed_wedge(B1, K4.cfi1.graph.edges), e, K4)
    rhs = np.array(twist_columns(zeroed_wedge(B1, []), e, K4).data)
    rhs[:, [K4.free.col[x] for x in K4.edges_twisted_at(e)]] = 0
    assert np.array_equal(np.asarray(lhs.data), rhs)


def test_certificate_examples():
    u, w = sorted(K4.cfi1.graph.edges)[0]
    on_edge = subgroup_certificate([vertex_elem(K4, u), vertex_elem(K4, w)], K4.cfi1.graph.edges, 3)
    assert on_edge.rank == 0 and on_edge.kernel.rows == 1
    far = next(x for x in range(K4.n) if x != u and not K4.cfi1.graph.has_edge(u, x))
    off_edge = subgroup_certificate([vertex_elem(K4, u), vertex_elem(K4, far)], K4.cfi1.graph.edges, 3)
    assert off_edge.rank == 1 and off_edge.kernel.rows == 0
    assert off_edge.to_json()["kernel"] == []
    with pytest.raises(ValidationError):
        subgroup_certificate([], K4.cfi1.graph.edges, 3)


def test_single_element_search_takes_first_edge():
    rng = np.random.default_rng(0)
    tup = random_tuple(K4, 1, rng, local=False)
    edges = K4.base.sorted_edges()
    for s in range(len(edges)):
        assert twist_edge_search(tup, K4, start=s) == edges[s]


def test_search_rejects_a_link_the_tuple_sees():
    e = (0, 1)
    av, bv, aw, bw = K4.cfi1.links[e].vertices
    tup = [vertex_elem(K4, av), vertex_elem(K4, aw)]
    edges = K4.base.sorted_edges()
    found = twist_edge_search(tup, K4, start=edges.index(e))
    assert found is not None and found != e
    B1 = b1_matrix(tup, K4.n, 3)
    assert not column_space_equal(zeroed_wedge(B1, K4.cfi1.graph.edges), zeroed_wedge(B1, K4.edges_twisted_at(e)))


def test_search_accepts_a_link_away_from_the_tuple():
    # generators inside gadget 3 never meet the link between gadgets 0 and 1
    inside = [x for x in range(K4.n) if K4.cfi1.gadget_of[x] == 3]
    tup = [vertex_elem(K4, inside[0], inside[3]), vertex_elem(K4, inside[1])]
    edges = K4.base.sorted_edges()
    assert twist_edge_search(tup, K4, start=edges.index((0, 1))) == (0, 1)


def test_gadget_generators_commute_and_are_involutions():
    gens = a_generators(K4.cfi1)
    assert len(gens) == 12
    ident = identity_twist(K4.cfi1)
    for g in gens:
        validate_twist(K4.cfi1, g)
        assert g.compose(g) == ident
        for h in gens:
            assert g.compose(h) == h.compose(g)


def test_validate_twist_rejections():
    cfi = K4.cfi1
    perm = list(range(cfi.n))
    a0, a1 = cfi.external[(0, 0, "a")], cfi.external[(1, 0, "a")]
    perm[a0], perm[a1] = a1, a0
    with pytest.raises(ValidationError):
        validate_twist(cfi, GadgetTwist(tuple(perm)))
    perm = list(range(cfi.n))
    a, b = cfi.external[(0, 0, "a")], cfi.external[(0, 0, "b")]
    perm[a], perm[b] = b, a
    # a lone swap breaks the internal adjacencies
    with pytest.raises(ValidationError):
        validate_twist(cfi, GadgetTwist(tuple(perm)))
    with pytest.raises(ValidationError):
        gadget_generator(cfi, 0, 1, 1)


def test_line_graph_paths():
    assert line_graph_path(K4.base, (0, 1), (0, 1)) == [(0, 1)]
    # opposite edges of K4 are two steps apart in the line graph
    path = line_graph_path(K4.base, (2, 3), (0, 1))
    assert len(path) == 3 and path[0] == (2, 3) and path[-1] == (0, 1)
    path = line_graph_path(petersen_graph(), (0, 1), (7, 9))
    for f, g in zip(path, path[1:]):
        assert len(set(f) & set(g)) == 1


def test_sigma_next_to_twisted_link():
    sigma, path = sigma_for_edge(K4, (0, 2))
    assert path == [(0, 2), (0, 1)]
    assert not sigma.is_identity()
    moved = {K4.cfi1.gadget_of[x] for x in range(K4.n) if sigma(x) != x}
    assert moved == {0}
    # the graph crossed at (0, 2) is carried onto the graph crossed at (0, 1)
    E = {(min(sigma(u), sigma(v)), max(sigma(u), sigma(v))) for u, v in K4.edges_twisted_at((0, 2))}
    assert E == set(K4.cfi2.graph.edges)


@pytest.mark.parametrize("base", [complete_graph(4), complete_bipartite(3, 3), petersen_graph()])
def test_sigma_is_isomorphism_everywhere(base):
    pair = CfiGroupPair(base, 3)
    assert all(sigma_is_isomorphism(pair, e) for e in base.sorted_edges())


def test_apply_gadget_twist():
    rng = np.random.default_rng(5)
    tup = random_tuple(K4, 3, rng, local=False)
    assert apply_gadget_twist(identity_twist(K4.cfi1), tup, K4) == tup
    sigma, _ = sigma_for_edge(K4, (2, 3))
    image = apply_gadget_twist(sigma, tup, K4)
    for x, y in zip(tup, image):
        assert K4.free.support(y) == {sigma(v) for v in K4.free.support(x)}
    # multiplicative on the free group
    F = K4.free
    a, b = tup[0], tup[1]
    (ab,) = apply_gadget_twist(sigma, [F.mul(a, b)], K4)
    assert ab == F.mul(image[0], image[1])


def test_transfer_check_examples():
    rng = np.random.default_rng(11)
    for t in range(12):
        tup = random_tuple(K4, 3, rng, local=t % 2 == 1)
        r = transfer_check(tup, K4, start=t)
        assert r["edge"] is not None and r["match"], r


def test_pipeline_small():
    report = twist_pipeline(K4, 3, 12, seed=4)
    assert report["found"] == report["matched"] == 12
    assert report["failures"] == []
    assert report["nontrivial_sigma"] > 0


def test_pipeline_on_a_random_base():
    pair = CfiGroupPair(random_regular_graph(3, 8, seed=2), 3)
    report = twist_pipeline(pair, 2, 9, seed=0)
    assert report["matched"] == 9


@pytest.mark.parametrize("base", [complete_graph(4), complete_bipartite(3, 3), petersen_graph()])
def test_parity_separates_the_pair(base):
    pair = CfiGroupPair(base, 3)
    r = distinguish_cfi_groups(pair)
    assert r["distinguished"]
    assert len(parity_choice_bits(pair.cfi1, limit=2000)) == 1
    assert len(parity_choice_bits(pair.cfi2, limit=2000)) == 1


def test_parity_does_not_separate_equal_sides():
    assert not parity_verdict(K4.cfi1, K4.cfi1)["distinguished"]
    even = build_cfi(K4.base, [(0, 1), (2, 3)])
    assert not parity_verdict(K4.cfi1, even)["distinguished"]


def test_centralizer_profile_on_k4():
    report = centralizer_profile_check(K4.G1, samples=400, seed=1)
    assert report["violations"] == []
    assert report["vertex_ratio_exponents"] == {"4": 40}
    assert sum(report["sample_ratio_exponents"].values()) == 400
    assert max(int(k) for k in report["sample_ratio_exponents"]) <= 3


def test_centralizer_profile_preconditions():
    with pytest.raises(ValidationError):
        centralizer_profile_check(build(cycle_graph(6), 3), 10)
    # K4 is 3-regular but its complement is edgeless
    with pytest.raises(ValidationError):
        centralizer_profile_check(build(complete_graph(4), 3), 10)
    with pytest.raises(ValidationError):
        centralizer_profile_check(build(Graph(6, complete_bipartite(3, 3).edges), 3), 10)

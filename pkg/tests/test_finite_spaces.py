import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invpers.errors import CapViolationError, PreconditionError, ResourceLimitError
from invpers.fas import build_fas, transition_image, triadic_fas, warsaw_fas
from invpers.finite_spaces import (
    FinitePoset,
    PosetMap,
    SimplicialComplex,
    SimplicialMap,
    barycentric_subdivision,
    bron_kerbosch,
    chains,
    face_poset,
    identity_poset_map,
    induced_poset_map,
    induced_simplicial_map,
    level_poset,
    order_complex,
    u_space,
    vr_complex,
)
from invpers.homology import betti_numbers
from invpers.metric import FiniteMetricSpace, sample_triadic_interval

from oracles import betti_bruteforce_f2, chains_bruteforce, random_complex

SQUARE = FiniteMetricSpace.from_points([[0, 0], [1, 0], [1, 1], [0, 1]])


def names(space, P):
    return {tuple(space.point_ids[i] for i in e) for e in P.elements}


class TestUSpace:
    def test_triadic_level2(self):
        X = sample_triadic_interval(2)
        P = u_space(X, X.everything(), 2 / 3)
        assert len(P) == 7
        assert names(X, P) == {("0",), ("1/3",), ("2/3",), ("1",),
                               ("0", "1/3"), ("1/3", "2/3"), ("2/3", "1")}

    @pytest.mark.parametrize("n", [2, 3])
    def test_triadic_census(self, n):
        fas = triadic_fas(n)
        P = level_poset(fas, n)
        m = 3 ** (2 * n - 3)
        assert len(P) == 2 * m + 1
        assert sum(len(e) == 1 for e in P.elements) == m + 1

    def test_singletons_below_min_distance(self):
        P = u_space(SQUARE, range(4), 1.0)
        assert all(len(e) == 1 for e in P.elements)

    def test_ties_are_excluded_and_counted(self):
        P = u_space(SQUARE, range(4), 2 ** 0.5)
        assert len(P) == 8 and P.boundary_ties == 2

    def test_bad_args(self):
        with pytest.raises(PreconditionError):
            u_space(SQUARE, range(4), 0.0)
        with pytest.raises(PreconditionError):
            u_space(SQUARE, [], 1.0)

    def test_size_cap(self):
        P = u_space(SQUARE, range(4), 3.0, size_cap=2)
        assert max(len(e) for e in P.elements) == 2 and len(P) == 10

    def test_resource_guard(self):
        X = FiniteMetricSpace.from_points(np.random.default_rng(0).random((14, 2)))
        with pytest.raises(ResourceLimitError):
            u_space(X, range(14), 10.0, limit=1000)

    def test_env_ceiling(self, monkeypatch):
        monkeypatch.setenv("INVPERS_MAX_SIMPLICES", "50")
        X = FiniteMetricSpace.from_points(np.random.default_rng(0).random((10, 2)))
        with pytest.raises(ResourceLimitError):
            u_space(X, range(10), 10.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 9), st.floats(0.1, 1.5))
    def test_equals_vr_simplices(self, seed, n, eps):
        X = FiniteMetricSpace.from_points(np.random.default_rng(seed).random((n, 2)))
        P = u_space(X, range(n), 2 * eps)
        K = vr_complex(X, range(n), 2 * eps)
        assert {frozenset(e) for e in P.elements} == K.as_vertex_sets()
        brute = {s for r in range(1, n + 1) for s in itertools.combinations(range(n), r)
                 if r == 1 or max(X.dist[a, b] for a, b in itertools.combinations(s, 2)) < 2 * eps - 1e-9}
        assert set(P.elements) == brute
        assert P.is_downward_closed()
        for e in P.elements:
            for f in P.elements:
                assert P.leq(e, f) == set(e).issubset(f)


class TestVR:
    def test_two_points(self):
        X = FiniteMetricSpace.from_points([[0], [1]])
        assert vr_complex(X, [0, 1], 2).counts() == [2, 1]
        assert vr_complex(X, [0, 1], 1).counts() == [2]

    def test_square(self):
        K = vr_complex(SQUARE, range(4), 1.1)
        assert K.counts() == [4, 4]
        assert betti_numbers(K) == [1, 1]


def four_point_poset():
    return FinitePoset.from_relation("abcd", [("a", "b"), ("a", "d"), ("c", "b"), ("c", "d")])


class TestOrderComplex:
    def test_single_point(self):
        K = order_complex(FinitePoset.from_relation(["x"], []))
        assert K.counts() == [1]

    def test_four_point_circle(self):
        K = order_complex(four_point_poset())
        assert K.counts() == [4, 4]
        assert betti_numbers(K) == [1, 1]
        assert K.as_vertex_sets() == {frozenset(s) for s in ["a", "b", "c", "d", "ab", "ad", "cb", "cd"]}

    def test_triadic_path(self):
        X = sample_triadic_interval(2)
        K = order_complex(u_space(X, X.everything(), 2 / 3))
        assert K.counts() == [7, 6]
        assert betti_numbers(K) == [1, 0]

    def test_cycle_in_relation(self):
        with pytest.raises(PreconditionError):
            FinitePoset.from_relation("ab", [("a", "b"), ("b", "a")])

    def test_chains_match_bruteforce(self):
        for P in (four_point_poset(), u_space(SQUARE, range(4), 3.0), level_poset(triadic_fas(2), 2)):
            got = {frozenset(P.elements[i] for i in ch) for ch in chains(P)}
            assert got == chains_bruteforce(list(P.elements), P.leq)

    def test_maximal_simplices_are_maximal_chains(self):
        P = u_space(SQUARE, range(4), 3.0)
        K = order_complex(P)
        assert K.is_downward_closed()
        S = K.simplex_set
        top = [s for s in S if not any(set(s) < set(t) for t in S)]
        for s in top:
            els = [P.elements[i] for i in s]
            assert len(els[0]) == 1 and len(els[-1]) == 4  # full flags of the tetrahedron
        assert len(top) == 24


class TestFacePoset:
    def test_edge(self):
        K = SimplicialComplex.from_simplices([("a", "b")])
        assert len(face_poset(K)) == 3
        assert barycentric_subdivision(K).counts() == [3, 2]

    def test_hollow_triangle(self):
        K = SimplicialComplex.from_simplices([("a", "b"), ("b", "c"), ("a", "c")])
        Kp = barycentric_subdivision(K)
        assert Kp.counts() == [6, 6]
        assert betti_numbers(Kp) == [1, 1]

    def test_subdivision_invariance_on_random_complexes(self):
        rng = np.random.default_rng(11)
        done = 0
        while done < 24:
            simplices = random_complex(rng, int(rng.integers(3, 9)), int(rng.integers(2, 12)), 3)
            if len(simplices) > 500:
                continue
            K = SimplicialComplex.from_simplices(simplices, close=False)
            Kp = barycentric_subdivision(K)
            b = betti_numbers(K)
            assert b == betti_numbers(Kp)[: len(b)]
            assert b == betti_bruteforce_f2(simplices)
            assert sum((-1) ** k * x for k, x in enumerate(b)) == K.euler_characteristic()
            assert K.euler_characteristic() == Kp.euler_characteristic()
            done += 1


class TestMaps:
    def test_identity(self):
        P = four_point_poset()
        f = identity_poset_map(P).check()
        g = induced_simplicial_map(f).check()
        assert all(g.image(s) == s for s in g.source.all_simplices())

    def test_non_monotone_rejected(self):
        P = four_point_poset()
        f = PosetMap(P, P, {"a": "b", "b": "a", "c": "c", "d": "d"})
        assert not f.is_order_preserving()
        with pytest.raises(PreconditionError):
            induced_simplicial_map(f)
        with pytest.raises(PreconditionError):
            f.check()

    def test_bad_simplicial_map(self):
        K = SimplicialComplex.from_simplices([("a", "b")])
        L = SimplicialComplex.from_simplices([("x",), ("y",)])
        with pytest.raises(PreconditionError):
            SimplicialMap(K, L, {"a": "x", "b": "y"}).check()

    def test_triadic_pair_image(self):
        fas = triadic_fas(3)
        f = induced_poset_map(fas, 2)
        X = fas.space
        C = tuple(sorted((X.index["13/27"], X.index["14/27"])))
        assert f(C) == (X.index["1/3"], X.index["2/3"])

    def test_triadic_path_collapse(self):
        fas = triadic_fas(3)
        f = induced_poset_map(fas, 2).check()
        g = induced_simplicial_map(f).check()
        assert len(g.source.vertices) == 55 and len(g.target.vertices) == 7
        assert {g.vertex_map[v] for v in g.source.vertices} == set(g.target.vertices)

    def test_warsaw_map_is_valid(self):
        fas = warsaw_fas(3)
        f = induced_poset_map(fas, 2).check()
        induced_simplicial_map(f).check()

    def test_stabilized_is_identity(self):
        X = FiniteMetricSpace.from_points(np.random.default_rng(2).random((7, 2)))
        fas = build_fas(X)
        s = fas.stabilized_at
        fas = build_fas(X, fas.epsilons + [fas.epsilons[-1] / 3])
        f = induced_poset_map(fas, s)
        assert all(f(e) == e for e in f.source.elements)

    def test_cap_violation(self):
        fas = warsaw_fas(3)
        with pytest.raises(CapViolationError) as exc:
            induced_poset_map(fas, 2, size_cap=1)
        assert exc.value.required_cap >= 2

    def test_images_are_transition_images(self):
        fas = warsaw_fas(3)
        f = induced_poset_map(fas, 2)
        for C in f.source.elements[::97]:
            assert f(C) == transition_image(fas, 2, C).members

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_random_monotone_maps(self, seed):
        """Images of chains under a random order-preserving map are chains."""
        rng = np.random.default_rng(seed)
        X = FiniteMetricSpace.from_points(rng.random((6, 2)))
        P = u_space(X, range(6), 0.9)
        Q = u_space(X, range(6), 2.0)
        # monotone: send each set to its union with a fixed set, when that lands in Q
        extra = {int(rng.integers(6))}
        assign = {}
        for e in P.elements:
            img = tuple(sorted(set(e) | extra))
            assign[e] = img if img in Q else tuple(sorted(Q.elements[-1]))
        f = PosetMap(P, Q, assign)
        if not f.is_order_preserving():
            return
        g = induced_simplicial_map(f).check()
        S = g.target.simplex_set
        assert all(g.image(s) in S for s in g.source.all_simplices())


def test_bron_kerbosch_triangle_plus_edge():
    adj = [{1, 2}, {0, 2}, {0, 1, 3}, {2}]
    assert sorted(bron_kerbosch(adj)) == [(0, 1, 2), (2, 3)]


def test_dump_format(tmp_path):
    K = SimplicialComplex.from_simplices([(3, 1), (1, 2)])
    path = tmp_path / "k.txt"
    with open(path, "w") as fh:
        K.dump(fh)
    assert path.read_text().splitlines() == ["1", "2", "3", "1 2", "1 3"]

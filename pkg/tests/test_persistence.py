import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invpers.errors import InternalConsistencyError, PreconditionError
from invpers.fas import build_fas, triadic_fas, warsaw_fas
from invpers.homology import LinearMapOverField
from invpers.metric import FiniteMetricSpace
from invpers.persistence import (
    Bar,
    Barcode,
    PersistenceModule,
    bottleneck_distance,
    interval_decomposition,
    inverse_barcode,
    inverse_module,
    rank_function,
    verify_barcode,
    vr_filtration_persistence,
    vr_module,
)

from oracles import bottleneck_bruteforce, vr_pairs_column_reduction


def forward(dims, mats, p=2):
    maps = [LinearMapOverField(np.array(m, dtype=np.int64).reshape(dims[i + 1], dims[i]), p)
            for i, m in enumerate(mats)]
    return PersistenceModule("forward", list(range(1, len(dims) + 1)), list(dims), maps, 0, p)


@pytest.fixture(scope="module")
def warsaw_module():
    return inverse_module(warsaw_fas(3), 1, 2, (2, 3))


class TestModules:
    def test_shape_checked(self):
        wrong = LinearMapOverField(np.zeros((1, 3), dtype=np.int64), 2)
        with pytest.raises(PreconditionError):
            PersistenceModule("forward", [1, 2], [2, 1], [wrong], 0)

    def test_bad_direction(self):
        with pytest.raises(PreconditionError):
            PersistenceModule("sideways", [1], [1], [], 0)

    def test_warsaw(self, warsaw_module):
        M = warsaw_module
        assert M.dims == [3, 17] and M.direction == "inverse"
        assert M.maps[0].matrix.shape == (3, 17) and M.maps[0].rank() == 1

    def test_triadic_h1_empty(self):
        M = inverse_module(triadic_fas(3), 1, 2, (2, 3))
        assert M.dims == [0, 0]
        assert interval_decomposition(M).bars == []

    def test_stabilized_range_identity(self):
        X = FiniteMetricSpace.from_points(np.random.default_rng(1).random((6, 2)))
        fas = build_fas(X)
        s = fas.stabilized_at
        fas = build_fas(X, fas.epsilons + [fas.epsilons[-1] / 3, fas.epsilons[-1] / 9])
        M = inverse_module(fas, 0, 2, (s, s + 2))
        assert M.dims == [6, 6, 6]
        for f in M.maps:
            assert np.array_equal(f.matrix, np.eye(6, dtype=np.int64))

    def test_range_outside(self):
        with pytest.raises(PreconditionError):
            inverse_module(triadic_fas(2), 0, 2, (1, 3))


class TestRankFunction:
    def test_identity(self):
        rf = rank_function(forward([2, 2, 2], [np.eye(2), np.eye(2)]))
        assert all(rf.rank(i, j) == 2 for i in range(1, 4) for j in range(i, 4))

    def test_zero_maps(self):
        rf = rank_function(forward([2, 3], [np.zeros((3, 2))]))
        assert rf.rank(1, 1) == 2 and rf.rank(2, 2) == 3 and rf.rank(1, 2) == 0

    def test_warsaw(self, warsaw_module):
        rf = rank_function(warsaw_module)
        assert rf.levels == [3, 2]
        assert rf.rank(1, 2) == 1 and rf.rank(1, 1) == 17 and rf.rank(2, 2) == 3

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from([2, 3]))
    def test_monotone(self, seed, p):
        rng = np.random.default_rng(seed)
        L = int(rng.integers(2, 6))
        dims = rng.integers(0, 4, size=L).tolist()
        mats = [rng.integers(0, p, size=(dims[i + 1], dims[i])) for i in range(L - 1)]
        M = forward(dims, mats, p)
        rf = rank_function(M)
        for i in range(1, L + 1):
            assert rf.rank(i, i) == dims[i - 1]
            for j in range(i, L + 1):
                for i2 in range(i, j + 1):
                    for j2 in range(i2, j + 1):
                        assert rf.rank(i, j) <= min(rf.rank(i, j2), rf.rank(i2, j))
        bc = interval_decomposition(M)
        assert verify_barcode(bc, M)
        for t in range(1, L + 1):
            assert sum(b.multiplicity for b in bc.bars if b.birth <= t <= b.death) == dims[t - 1]


class TestDecomposition:
    def test_identity_length5(self):
        bc = interval_decomposition(forward([1] * 5, [[[1]]] * 4))
        assert bc.multiset() == {(1, 5): 1}

    def test_zero_maps(self):
        bc = interval_decomposition(forward([2, 3], [np.zeros((3, 2))]))
        assert bc.multiset() == {(1, 1): 2, (2, 2): 3}

    def test_warsaw(self, warsaw_module):
        bc = interval_decomposition(warsaw_module)
        assert bc.multiset() == {(2, 3): 1, (2, 2): 2, (3, 3): 16}
        assert bc.direction == "inverse" and bc.dimension == 1

    def test_negative_multiplicity_detected(self):
        from invpers.persistence import RankFunction

        M = forward([1, 1], [[[1]]])
        bad = RankFunction(np.array([[1, 2], [0, 1]]), [1, 2])
        with pytest.raises(InternalConsistencyError):
            interval_decomposition(M, bad)

    def test_inverse_barcode_pipeline(self):
        X = FiniteMetricSpace.from_points([[0.0, 0.0]])
        bc = inverse_barcode(X, 0, max_levels=4)
        assert bc.multiset() == {(1, 1): 1}
        assert inverse_barcode(triadic_fas(3), 0, 2, (2, 3)).multiset() == {(2, 3): 1}
        assert inverse_barcode(warsaw_fas(3), 1, 2, (2, 3)).multiset()[(2, 3)] == 1

    def test_inverse_barcode_auto_schedule(self):
        X = FiniteMetricSpace.from_points(np.random.default_rng(4).random((7, 2)))
        bc = inverse_barcode(X, 0, seed=3)
        assert bc.total() >= 1
        last = max(b.death for b in bc.bars)
        assert sum(b.multiplicity for b in bc.bars if b.death == last) == 7


SQUARE = FiniteMetricSpace.from_points([[0, 0], [1, 0], [1, 1], [0, 1]])


class TestVR:
    def test_two_points(self):
        X = FiniteMetricSpace.from_points([[0], [1]])
        bc = vr_filtration_persistence(X, 0)
        assert sorted(bc.real_intervals()) == [(0.0, 1.0), (0.0, math.inf)]

    def test_square(self):
        bc = vr_filtration_persistence(SQUARE, 1)
        (lo, hi), = bc.real_intervals()
        assert lo == pytest.approx(1.0) and hi == pytest.approx(math.sqrt(2))

    def test_h0_bars_at_zero(self):
        X = FiniteMetricSpace.from_points(np.random.default_rng(0).random((7, 2)))
        bc = vr_filtration_persistence(X, 0)
        assert sum(1 for lo, _ in bc.real_intervals() if lo == 0) == 7

    def test_custom_thresholds(self):
        M = vr_module(SQUARE, 1, thresholds=[0.0, 1.0, 1.5])
        assert M.dims == [0, 1, 0]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 8), st.sampled_from([0, 1]))
    def test_matches_column_reduction(self, seed, n, k):
        rng = np.random.default_rng(seed)
        X = FiniteMetricSpace.from_points(rng.random((n, 2)))
        bc = vr_filtration_persistence(X, k)
        got = sorted(bc.real_intervals())
        want = vr_pairs_column_reduction(X.dist.tolist(), k)
        assert len(got) == len(want)
        for (a, b), (c, d) in zip(got, want):
            assert a == pytest.approx(c) and (b == d or b == pytest.approx(d))

    def test_integer_grid_ties(self):
        pts = [[i, j] for i in range(3) for j in range(2)]
        X = FiniteMetricSpace.from_points(pts)
        for k in (0, 1):
            got = sorted(vr_filtration_persistence(X, k).real_intervals())
            assert got == pytest.approx(vr_pairs_column_reduction(X.dist.tolist(), k))


def bars(*pairs):
    return [tuple(map(float, p)) for p in pairs]


class TestBottleneck:
    def test_examples(self):
        assert bottleneck_distance(bars((0, 2)), []) == 1
        assert bottleneck_distance(bars((0, 4)), bars((1, 5))) == 1
        B = bars((0, 1), (2, 5))
        assert bottleneck_distance(B, B) == 0

    def test_infinite_bars(self):
        assert bottleneck_distance(bars((0, math.inf)), bars((0.5, math.inf))) == 0.5
        assert bottleneck_distance(bars((0, math.inf)), []) == math.inf

    def test_matching_realizes_value(self):
        d, m = bottleneck_distance(bars((0, 1), (0, 3)), bars((0, 3.2)), with_matching=True)
        assert d == 0.5
        assert ((0.0, 3.0), (0.0, 3.2)) in m and ((0.0, 1.0), None) in m

    def test_barcode_mappings(self):
        b1 = Barcode("inverse", 1, 2, [Bar(2, 3, 1)], {2: 0.5, 3: 0.1})
        b2 = Barcode("inverse", 1, 2, [Bar(2, 2, 1)], {2: 0.5, 3: 0.1})
        assert b1.real_intervals() == [(0.1, 0.5)]
        assert b2.real_intervals() == [(0.5, 0.5)]
        assert bottleneck_distance(b1, b2) == pytest.approx(0.2)
        assert bottleneck_distance(b1, b2, "index") == 1.0  # [2,4) against [2,3)

    @settings(max_examples=80, deadline=None)
    @given(*[st.lists(st.tuples(st.integers(0, 6), st.integers(0, 4)), max_size=4) for _ in range(3)])
    def test_against_bruteforce_and_axioms(self, r1, r2, r3):
        P, Q, R = ([(float(a), float(a + b)) for a, b in r] for r in (r1, r2, r3))
        dpq = bottleneck_distance(P, Q)
        assert dpq == pytest.approx(bottleneck_bruteforce(P, Q))
        assert dpq == bottleneck_distance(Q, P)
        assert bottleneck_distance(P, P) == 0
        assert bottleneck_distance(P, R) <= dpq + bottleneck_distance(Q, R) + 1e-12


class TestBarcodeIO:
    def test_json_roundtrip(self, warsaw_module):
        bc = interval_decomposition(warsaw_module)
        data = json.loads(bc.to_json())
        assert set(data) >= {"direction", "dimension", "field", "bars"}
        back = Barcode.from_dict(data)
        assert back.multiset() == bc.multiset() and back.scale == bc.scale

    @pytest.mark.parametrize("bad", [
        {"direction": "inverse", "dimension": 1, "field": 2, "bars": [{"birth": 3, "death": 2}]},
        {"direction": "up", "dimension": 1, "field": 2, "bars": []},
        {"dimension": 1, "field": 2, "bars": []},
        {"direction": "inverse", "dimension": 1, "field": 2, "bars": [{"birth": 1, "death": 2, "multiplicity": 0}]},
    ])
    def test_malformed(self, bad):
        with pytest.raises(PreconditionError):
            Barcode.from_dict(bad)

    def test_svg_deterministic(self, warsaw_module):
        bc = interval_decomposition(warsaw_module)
        svg = bc.to_svg()
        assert svg == interval_decomposition(warsaw_module).to_svg()
        assert svg.count("<line") == 19 + 1  # one lane per bar plus the axis
        assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")

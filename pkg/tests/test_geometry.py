"""Distance geometry layer: distances, Cayley-Menger, embedding, congruence."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from trilat import (
    AnchorsDegenerate,
    Configuration,
    EdgeIndexing,
    NotRealizable,
    align_onto,
    are_congruent,
    are_similar_ordered,
    cayley_menger_det,
    cm_residual,
    edge_count,
    embed_simplex,
    measure_all_lengths,
    squared_distance,
    squared_distances,
)

RIGHT_345 = Configuration(2, np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]))


def test_edge_count():
    assert [edge_count(n) for n in range(2, 7)] == [1, 3, 6, 10, 15]


def test_edge_indexing_matches_grouped_order():
    idx = EdgeIndexing(5)
    assert list(idx.pairs()) == oracles.edge_order(5)
    for k, (i, j) in enumerate(oracles.edge_order(5)):
        assert idx.index_of(i, j) == k
        assert idx.index_of(j, i) == k


def test_squared_distance_345():
    assert squared_distance(RIGHT_345, 1, 2) == pytest.approx(25.0)
    assert squared_distance(RIGHT_345, 2, 2) == 0.0


def test_squared_distances_unit_right_isosceles():
    cfg = Configuration(2, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    sq = squared_distances(cfg)
    # flat order (0,1),(0,2),(1,2): the hypotenuse sits in the last slot
    assert sq == pytest.approx([1.0, 1.0, 2.0])


def test_measure_all_lengths_345():
    assert measure_all_lengths(RIGHT_345) == pytest.approx([3.0, 4.0, 5.0])
    assert measure_all_lengths(RIGHT_345) == pytest.approx(
        oracles.flat_lengths(RIGHT_345.points)
    )


def test_cayley_menger_collinear_triple_vanishes():
    # three points on a line at 0, 1, 2: squared lengths (1, 4, 1)
    assert cayley_menger_det(np.array([1.0, 4.0, 1.0]), 1) == pytest.approx(0.0)


def test_cayley_menger_all_ones_line():
    # no three points on a line are pairwise at distance 1
    val = cayley_menger_det(np.array([1.0, 1.0, 1.0]), 1)
    assert val == pytest.approx(3.0)


def test_cayley_menger_equals_288_volume_squared(rng):
    for _ in range(100):
        pts = rng.uniform(-2.0, 2.0, size=(4, 3))
        sq = [float(np.sum((pts[i] - pts[j]) ** 2)) for i, j in oracles.edge_order(4)]
        got = cayley_menger_det(np.array(sq), 2)
        want = oracles.cm_det_from_points(pts)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)
        assert got >= -1e-9


def test_cayley_menger_planar_quadruple_vanishes(rng):
    pts = rng.uniform(-1.0, 1.0, size=(4, 2))
    sq = [float(np.sum((pts[i] - pts[j]) ** 2)) for i, j in oracles.edge_order(4)]
    assert cm_residual(np.array(sq), 2) < 1e-12
    assert oracles.cm_det_from_points(pts) == 0.0


def test_cm_residual_flags_lifted_point(rng):
    pts = np.hstack([rng.uniform(-1.0, 1.0, size=(4, 2)), np.zeros((4, 1))])
    pts[3, 2] = 0.5
    sq = [float(np.sum((pts[i] - pts[j]) ** 2)) for i, j in oracles.edge_order(4)]
    assert cm_residual(np.array(sq), 2) > 1e-3


def test_embed_simplex_unit_square():
    sq = np.array([1.0, 1.0, 2.0, 2.0, 1.0, 1.0])
    cfg = embed_simplex(sq, 2)
    square = Configuration(
        2, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    )
    assert cfg.n == 4 and cfg.dim == 2
    assert are_congruent(cfg, square)


def test_embed_simplex_rejects_equilateral_line():
    with pytest.raises(NotRealizable):
        embed_simplex(np.array([1.0, 1.0, 1.0]), 1)


def test_embed_round_trip_up_to_congruence(rng):
    for d in (2, 3):
        for _ in range(25):
            pts = rng.uniform(-1.0, 1.0, size=(d + 2, d))
            cfg = Configuration(d, pts)
            sq = np.asarray(squared_distances(cfg))
            again = embed_simplex(sq, d)
            assert are_congruent(cfg, again, tol=1e-7)


def test_are_congruent_under_isometry(rng):
    pts = rng.uniform(-1.0, 1.0, size=(5, 2))
    q = oracles.random_orthogonal(rng, 2, proper=False)
    moved = pts @ q.T + np.array([0.3, -1.7])
    assert are_congruent(Configuration(2, pts), Configuration(2, moved))


def test_are_congruent_rejects_doubling(rng):
    pts = rng.uniform(-1.0, 1.0, size=(4, 2))
    assert not are_congruent(Configuration(2, pts), Configuration(2, 2.0 * pts))


def test_similar_ordered_reports_scale(rng):
    pts = rng.uniform(-1.0, 1.0, size=(5, 3))
    q = oracles.random_orthogonal(rng, 3)
    scaled = 3.0 * (pts @ q.T) + 0.25
    s = are_similar_ordered(Configuration(3, pts), Configuration(3, scaled))
    assert s == pytest.approx(3.0)


def test_similar_ordered_rejects_different_shape(rng):
    a = rng.uniform(-1.0, 1.0, size=(4, 2))
    b = rng.uniform(-1.0, 1.0, size=(4, 2))
    assert are_similar_ordered(Configuration(2, a), Configuration(2, b)) is None


def test_congruent_implies_similar_scale_one(rng):
    pts = rng.uniform(-1.0, 1.0, size=(6, 2))
    q = oracles.random_orthogonal(rng, 2)
    moved = pts @ q.T + 5.0
    s = are_similar_ordered(Configuration(2, pts), Configuration(2, moved))
    assert s == pytest.approx(1.0)


def test_align_onto_recovers_isometry(rng):
    src = rng.uniform(-1.0, 1.0, size=(6, 3))
    q = oracles.random_orthogonal(rng, 3, proper=False)
    t = rng.uniform(-2.0, 2.0, size=3)
    dst = src @ q.T + t
    moved = align_onto(src[:4], dst[:4], src[4:])
    assert moved == pytest.approx(dst[4:], abs=1e-9)


def test_align_onto_identity():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 3.0]])
    out = align_onto(pts[:3], pts[:3], pts[3:])
    assert out == pytest.approx(pts[3:])


def test_align_onto_rejects_collinear_anchors():
    anchors = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(AnchorsDegenerate):
        align_onto(anchors, anchors, np.array([[0.5, 0.5]]))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), d=st.sampled_from([2, 3]))
def test_property_cm_vanishes_on_true_distances(seed, d):
    """Squared distances of d+2 points in R^d always pass the flatness test."""
    gen = np.random.default_rng(seed)
    pts = gen.uniform(-3.0, 3.0, size=(d + 2, d))
    sq = np.asarray(squared_distances(Configuration(d, pts)))
    assert cm_residual(sq, d) < 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_property_congruence_is_isometry_invariant(seed):
    gen = np.random.default_rng(seed)
    pts = gen.uniform(-1.0, 1.0, size=(5, 2))
    q = oracles.random_orthogonal(gen, 2, proper=bool(seed % 2))
    moved = pts @ q.T + gen.uniform(-4.0, 4.0, size=2)
    assert are_congruent(Configuration(2, pts), Configuration(2, moved))
    lengths = measure_all_lengths(Configuration(2, pts))
    moved_lengths = measure_all_lengths(Configuration(2, moved))
    assert moved_lengths == pytest.approx(lengths, rel=1e-9, abs=1e-12)


def test_configuration_helpers():
    cfg = RIGHT_345
    assert cfg.n == 3
    assert cfg.diameter() == pytest.approx(5.0)
    doubled = cfg.scaled(2.0)
    assert measure_all_lengths(doubled) == pytest.approx([6.0, 8.0, 10.0])
    sub = cfg.subset([0, 2])
    assert sub.n == 2
    assert math.dist(sub.points[0], sub.points[1]) == pytest.approx(4.0)

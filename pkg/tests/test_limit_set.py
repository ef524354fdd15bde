import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PROPERTY_CASES
from rank1_limits.errors import EmptySample, LikelyIndiscrete
from rank1_limits.fixtures import fixture
from rank1_limits.groups import GroupSpec, Representation
from rank1_limits.limit_set import dedup_points, hausdorff_distance, make_sample, parabolic_fiber, sample_limit_set
from rank1_limits.moebius import BoundaryPoint, Moebius, batch_apply

NORTH = BoundaryPoint.infinity().vector
SOUTH = -NORTH


def test_cyclic_parabolic_single_point():
    rep, _ = fixture("cyclic_parabolic")
    for depth in (1, 3, 6):
        s = sample_limit_set(rep, depth)
        assert len(s) == 1 and np.allclose(s.points[0], NORTH)


def test_cyclic_loxodromic_fixed_points_both_ends():
    rep, _ = fixture("cyclic_loxodromic")
    # the sphere of radius k holds a^k and a^-k, attracting at infinity and zero
    s = sample_limit_set(rep, 3, "fixed")
    assert sorted(map(tuple, np.round(s.points, 12))) == [tuple(SOUTH), tuple(NORTH)]


def test_schottky_points_inside_caps(schottky):
    rep, caps = schottky
    s = sample_limit_set(rep, 6, "both")
    centers = np.array([c.center.vector for c in caps.values()])
    radii = np.array([c.radius for c in caps.values()])
    ang = np.arccos(np.clip(s.points @ centers.T, -1, 1))
    assert np.all((ang < radii[None, :]).any(axis=1))


def test_sample_sorted_and_deduplicated(schottky):
    rep, _ = schottky
    s = sample_limit_set(rep, 5)
    order = np.lexsort((s.points[:, 2], s.points[:, 1], s.points[:, 0]))
    assert np.array_equal(order, np.arange(len(s)))
    assert len(dedup_points(s.points)) == len(s)
    assert np.allclose(np.linalg.norm(s.points, axis=1), 1, atol=1e-12)


def test_indiscrete_rejected():
    g = GroupSpec(("a",))
    rep = Representation(g, {"a": Moebius(1, 1e-8, 0, 1)})
    with pytest.raises(LikelyIndiscrete):
        sample_limit_set(rep, 3)


def test_hausdorff_examples(schottky):
    rep, _ = schottky
    A = sample_limit_set(rep, 4)
    assert hausdorff_distance(A, A) == 0
    n = make_sample(NORTH[None], 0)
    s = make_sample(SOUTH[None], 0)
    assert abs(hausdorff_distance(n, s) - math.pi) <= 1e-12
    with pytest.raises(EmptySample):
        hausdorff_distance(n, make_sample(np.zeros((0, 3)), 0))


def test_nested_schottky_samples_decrease(schottky):
    rep, _ = schottky
    ref = sample_limit_set(rep, 10)
    d = [hausdorff_distance(sample_limit_set(rep, k), ref) for k in (4, 6, 8)]
    assert d[0] > d[1] > d[2]


def test_sampling_equivariance(schottky):
    rep, _ = schottky
    g = Moebius(1.1, 0.3 + 0.2j, -0.1j, 1)
    pts = sample_limit_set(rep, 6).points
    moved = batch_apply(np.repeat(g.to_array()[None], len(pts), axis=0), pts)
    conj = sample_limit_set(rep.conjugate(g), 6)
    assert hausdorff_distance(make_sample(moved, 6), conj) <= 1e-6


def test_parabolic_fiber_rank1():
    rep, _ = fixture("cusped_schottky")
    fib = parabolic_fiber(rep, rep.group.peripherals[0], 4)
    assert len(fib) == 1 and np.allclose(fib.points[0], NORTH)
    assert rep.group.is_peripheral(fib.codes[0]) == "P"


def test_parabolic_fiber_rank2():
    rep, _ = fixture("rank2_cusp")
    fib = parabolic_fiber(rep, rep.group.peripherals[0], 3)
    assert len(fib) == 1 and np.allclose(fib.points[0], NORTH)


def test_parabolic_fiber_loxodromic():
    rep, _ = fixture("cyclic_loxodromic")
    from rank1_limits.groups import PeripheralSpec

    per = PeripheralSpec("A", (rep.group.parse("a"),))
    fib = parabolic_fiber(rep, per, 2)
    assert sorted(map(tuple, np.round(fib.points, 12))) == [tuple(SOUTH), tuple(NORTH)]


unit = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: sum(x * x for x in v) > 0.01)
clouds = st.lists(unit, min_size=1, max_size=6).map(
    lambda vs: make_sample(np.array(vs) / np.linalg.norm(vs, axis=1)[:, None], 0)
)


@settings(max_examples=PROPERTY_CASES, derandomize=True, deadline=None)
@given(clouds, clouds, clouds)
def test_hausdorff_metric_axioms(A, B, C):
    ab = hausdorff_distance(A, B)
    assert ab == hausdorff_distance(B, A)
    assert hausdorff_distance(A, C) <= ab + hausdorff_distance(B, C) + 1e-12

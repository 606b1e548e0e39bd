import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact.errors import CapabilityError, InputError, UsageError
from artifact.field import MultiPoly, PrimeField
from artifact.geometry import (
    LazyRestriction, RandomAnswer, build_manifold, curve_through, manifold_value_at, restrict_to_manifold,
    restriction_size,
)
from oracles import poly_eval

F = PrimeField(101)


def random_poly(rng, num_vars: int, degree: int, p: int = 101) -> MultiPoly:
    terms = {}
    for e in itertools.product(range(degree + 1), repeat=num_vars):
        if sum(e) <= degree:
            terms[e] = int(rng.integers(p))
    return MultiPoly(PrimeField(p), num_vars, terms)


def random_manifold(rng, k: int, m: int):
    pts = rng.integers(0, 101, (k + 3, m))
    return build_manifold(pts[:k], pts[k], pts[k + 1], pts[k + 2], F)


# curves -------------------------------------------------------------------

def test_line_curve():
    c = curve_through([(0, 0), (1, 1)], F)
    for t in range(10):
        assert c(t) == (t, t)


def test_constant_curve():
    c = curve_through([(4, 7, 9)], F)
    assert c.degree == 0 and c(55) == (4, 7, 9)


@given(st.lists(st.tuples(st.integers(0, 100), st.integers(0, 100)), min_size=1, max_size=6))
def test_curve_hits_anchors(points):
    c = curve_through(points, F)
    assert c.degree == len(points) - 1
    for i, z in enumerate(points):
        assert c(i) == z


def test_degree_two_curve_against_lagrange():
    z = [(3, 1), (5, 9), (2, 2)]
    c = curve_through(z, F)
    for t in range(0, 101, 7):
        # explicit quadratic Lagrange interpolation on nodes 0, 1, 2
        inv2 = pow(2, 99, 101)
        l0 = (t - 1) * (t - 2) * inv2
        l1 = -t * (t - 2)
        l2 = t * (t - 1) * inv2
        want = tuple((l0 * a + l1 * b + l2 * cc) % 101 for a, b, cc in zip(*z))
        assert c(t) == want


def test_too_many_nodes():
    with pytest.raises(InputError):
        curve_through([(i,) for i in range(6)], PrimeField(5))


# manifolds ------------------------------------------------------------------

def test_manifold_locators():
    rng = np.random.default_rng(1)
    zs = rng.integers(0, 101, (4, 3))
    x1, x2, x3 = rng.integers(0, 101, (3, 3))
    g = build_manifold(zs, x1, x2, x3, F)
    assert g.locate(x1) == (1, 0, 0, 0)
    for i, z in enumerate(zs, start=1):
        assert g.locate(z) == (1, i, 0, 0)
        assert g((1, i, 0, 0)) == tuple(int(v) for v in z)
    assert g((0, 0, 1, 0)) == tuple(int(v) for v in x2)
    assert g((0, 0, 0, 1)) == tuple(int(v) for v in x3)
    for t1 in range(0, 101, 10):
        assert g((0, t1, 0, 0)) == (0, 0, 0)
    assert g.degree == 5


def test_locate_non_special_point():
    g = build_manifold([(1, 2)], (3, 4), (5, 6), (7, 8), F)
    with pytest.raises(UsageError):
        g.locate((9, 9))


def test_coinciding_anchors_use_first_tuple():
    g = build_manifold([(3, 4), (1, 1)], (3, 4), (5, 6), (1, 1), F)
    assert g.locate((3, 4)) == (1, 0, 0, 0)
    assert g.locate((1, 1)) == (1, 2, 0, 0)


def test_manifold_key_is_stable():
    rng = np.random.default_rng(2)
    a = random_manifold(rng, 3, 2)
    b = build_manifold(a.anchors, a.x1, a.x2, a.x3, F)
    assert a.key() == b.key()


# restriction ----------------------------------------------------------------

def test_linear_restriction_degree():
    rng = np.random.default_rng(3)
    Q = random_poly(rng, 2, 1)
    g = random_manifold(rng, 1, 2)
    R = restrict_to_manifold(Q, g)
    assert R.degree <= 2
    assert manifold_value_at(R, g.x1, g) == Q.evaluate(tuple(int(v) for v in g.x1))


def test_constant_restriction():
    Q = MultiPoly.constant(F, 3, 42)
    g = random_manifold(np.random.default_rng(4), 2, 3)
    R = restrict_to_manifold(Q, g)
    assert R.terms == {(0, 0, 0, 0): 42}


@pytest.mark.parametrize("seed", range(5))
def test_restriction_matches_composition(seed):
    rng = np.random.default_rng(seed)
    Q = random_poly(rng, 2, 2)
    g = random_manifold(rng, 3, 2)
    R = restrict_to_manifold(Q, g)
    assert R.degree <= 2 * g.degree
    for t in rng.integers(0, 101, (50, 4)):
        point = g(tuple(int(v) for v in t))
        assert poly_eval(R.terms, tuple(int(v) for v in t), 101) == poly_eval(Q.terms, point, 101)


def test_restriction_value_at_every_special_point():
    rng = np.random.default_rng(9)
    Q = random_poly(rng, 3, 2)
    g = random_manifold(rng, 4, 3)
    R = restrict_to_manifold(Q, g)
    for x in g.points():
        assert manifold_value_at(R, x, g) == Q.evaluate(x)
    assert manifold_value_at(MultiPoly.zero(F, 4), g.x1, g) == 0


def test_restriction_cap():
    rng = np.random.default_rng(5)
    Q = random_poly(rng, 2, 4)
    g = random_manifold(rng, 8, 2)
    need = restriction_size(4, g.degree)
    with pytest.raises(CapabilityError, match=str(need)):
        restrict_to_manifold(Q, g, cap=need - 1)


def test_restriction_dimension_mismatch():
    with pytest.raises(UsageError):
        restrict_to_manifold(MultiPoly.zero(F, 3), random_manifold(np.random.default_rng(0), 1, 2))


def test_lazy_restriction_matches_dense():
    rng = np.random.default_rng(6)
    Q = random_poly(rng, 3, 2)
    g = random_manifold(rng, 3, 3)
    dense = restrict_to_manifold(Q, g)
    lazy = LazyRestriction(Q.evaluate_many, g, dense.degree)
    T = rng.integers(0, 101, (40, 4))
    assert np.array_equal(lazy.evaluate_many(T), dense.evaluate_many(T))


def test_random_answer_independent_points():
    rng = np.random.default_rng(7)
    g = random_manifold(rng, 3, 2)
    A = RandomAnswer(101, 1234, 5)
    x, z = g.points()[0], g.points()[2]
    assert manifold_value_at(A, x, g) == A.evaluate(g.locate(x))
    assert manifold_value_at(A, z, g) == A.evaluate((1, 2, 0, 0))
    assert A.evaluate_many(np.array([(1, 0, 0, 0)]))[0] == A.evaluate((1, 0, 0, 0))


def test_distinct_answers_rarely_collide():
    rng = np.random.default_rng(8)
    D = 6
    a, b = random_poly(rng, 4, D), random_poly(rng, 4, D)
    assert a != b
    T = rng.integers(0, 101, (10_000, 4))
    rate = float((a.evaluate_many(T) == b.evaluate_many(T)).mean())
    assert rate <= 2 * D / 101

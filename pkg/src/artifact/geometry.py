"""Low-degree curves and 4-parameter manifolds in F^m, and restrictions onto them."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Protocol, Sequence

import numpy as np

from .errors import CapabilityError, InputError, UsageError
from .field import MultiPoly, PrimeField, check_numpy_modulus, vandermonde_inverse
from .rand import derive_key, hash_to_field

COEFFICIENT_CAP = 100_000


def _as_points(points: Sequence[Sequence[int]], p: int) -> np.ndarray:
    arr = np.array([[int(v) % p for v in pt] for pt in points], dtype=np.int64)
    if arr.ndim != 2:
        raise InputError("points must share a dimension")
    return arr


def horner(coeffs: np.ndarray, t: np.ndarray, p: int) -> np.ndarray:
    """Evaluate ``coeffs`` (shape ``(k+1, m)``, low degree first) at each ``t``; returns ``(len(t), m)``."""
    t = np.asarray(t, dtype=np.int64).reshape(-1, 1) % p
    acc = np.zeros((t.shape[0], coeffs.shape[1]), dtype=np.int64)
    for row in coeffs[::-1]:
        acc = (acc * t + row) % p
    return acc


@dataclass(frozen=True, eq=False)
class Curve:
    field: PrimeField
    coeffs: np.ndarray  # (k+1, m)
    anchors: np.ndarray  # (k+1, m)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def __call__(self, t: int) -> tuple[int, ...]:
        return tuple(int(v) for v in horner(self.coeffs, np.array([t]), self.field.p)[0])

    def evaluate_many(self, t: np.ndarray) -> np.ndarray:
        return horner(self.coeffs, t, self.field.p)

    def component_polys(self) -> list[list[int]]:
        return [[int(c) for c in self.coeffs[:, i]] for i in range(self.dim)]


def curve_through(points: Sequence[Sequence[int]], field: PrimeField) -> Curve:
    """Degree-k curve with ``curve(i) = z_i`` for ``i = 0..k``."""
    p = field.p
    check_numpy_modulus(p)
    Z = _as_points(points, p)
    k1 = Z.shape[0]
    if k1 == 0:
        raise InputError("need at least one point")
    if k1 > p:
        raise InputError(f"{k1} interpolation nodes do not fit in GF({p})")
    Vinv = np.array(vandermonde_inverse(tuple(range(k1)), p), dtype=np.int64)
    coeffs = (Vinv @ Z) % p
    c = Curve(field, coeffs, Z)
    if not np.array_equal(c.evaluate_many(np.arange(k1)), Z):
        raise AssertionError("curve misses an anchor")
    return c


@dataclass(frozen=True, eq=False)
class Manifold:
    """``gamma(t) = t0 * curve_{x1, z_1..z_k}(t1) + t2 x2 + t3 x3``."""

    field: PrimeField
    curve: Curve
    x2: np.ndarray
    x3: np.ndarray
    labels: tuple[str, ...]
    locator: tuple[tuple[int, int, int, int], ...]

    @property
    def degree(self) -> int:
        return self.curve.degree + 1

    @property
    def dim(self) -> int:
        return self.curve.dim

    @property
    def x1(self) -> np.ndarray:
        return self.curve.anchors[0]

    @property
    def anchors(self) -> np.ndarray:
        return self.curve.anchors[1:]

    def points(self) -> list[tuple[int, ...]]:
        pts = [tuple(int(v) for v in self.x1)]
        pts += [tuple(int(v) for v in z) for z in self.anchors]
        pts += [tuple(int(v) for v in self.x2), tuple(int(v) for v in self.x3)]
        return pts

    def evaluate_many(self, T: np.ndarray) -> np.ndarray:
        p = self.field.p
        T = np.atleast_2d(np.asarray(T, dtype=np.int64)) % p
        base = self.curve.evaluate_many(T[:, 1])
        return (T[:, [0]] * base + T[:, [2]] * self.x2 + T[:, [3]] * self.x3) % p

    def __call__(self, t: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(v) for v in self.evaluate_many(np.array([t]))[0])

    def locate(self, x: Sequence[int]) -> tuple[int, int, int, int]:
        """Canonical parameter tuple of a special point (first match in construction order)."""
        key = tuple(int(v) % self.field.p for v in x)
        for pt, t in zip(self.points(), self.locator):
            if pt == key:
                return t
        raise UsageError("point is not a special point of this manifold")

    def key(self) -> int:
        """Stable digest of the manifold's defining points."""
        return derive_key("manifold", self.curve.anchors.tobytes(), self.x2.tobytes(), self.x3.tobytes())


def build_manifold(
    zs: Sequence[Sequence[int]], x1: Sequence[int], x2: Sequence[int], x3: Sequence[int], field: PrimeField,
    labels: Sequence[str] | None = None,
) -> Manifold:
    p = field.p
    curve = curve_through([x1] + [list(z) for z in zs], field)
    k = len(zs)
    locator = [(1, 0, 0, 0)] + [(1, i, 0, 0) for i in range(1, k + 1)] + [(0, 0, 1, 0), (0, 0, 0, 1)]
    if labels is None:
        labels = [f"z{i}" for i in range(1, k + 1)]
    labels = ("x1",) + tuple(labels) + ("x2", "x3")
    man = Manifold(field, curve, _as_points([x2], p)[0], _as_points([x3], p)[0], labels, tuple(locator))
    got = man.evaluate_many(np.array(locator))
    want = np.array(man.points(), dtype=np.int64)
    if not np.array_equal(got, want):
        raise AssertionError("manifold misses an anchor")
    return man


def manifold_components(gamma: Manifold) -> list[MultiPoly]:
    """The ``m`` coordinate functions of ``gamma`` as 4-variate polynomials in ``(t0, t1, t2, t3)``."""
    F = gamma.field
    comps = []
    for i, coeffs in enumerate(gamma.curve.component_polys()):
        terms = {(1, e, 0, 0): c for e, c in enumerate(coeffs)}
        terms[(0, 0, 1, 0)] = int(gamma.x2[i])
        terms[(0, 0, 0, 1)] = int(gamma.x3[i])
        comps.append(MultiPoly(F, 4, terms))
    return comps


def restriction_size(d: int, gamma_degree: int) -> int:
    """Monomials of total degree at most ``d * gamma_degree`` in 4 variables."""
    D = d * gamma_degree
    return comb(D + 4, 4)


def restrict_to_manifold(Q: MultiPoly, gamma: Manifold, cap: int = COEFFICIENT_CAP) -> MultiPoly:
    """Dense composition ``Q ∘ gamma``; refuses when its coefficient count exceeds ``cap``."""
    if Q.num_vars != gamma.dim:
        raise UsageError("polynomial and manifold dimensions differ")
    d = max(Q.degree, 0)
    count = restriction_size(d, gamma.degree)
    if count > cap:
        raise CapabilityError(f"restriction needs {count} coefficients, cap is {cap}")
    out = Q.compose(manifold_components(gamma))
    bound = d * gamma.degree
    if out.degree > bound:
        raise AssertionError("restriction exceeds its degree bound")
    return MultiPoly(out.field, 4, out.terms, total_bound=bound)


class ManifoldAnswer(Protocol):
    """Anything the large RM prover may return: evaluable at parameter tuples, with a degree."""

    degree: int

    def evaluate(self, t: Sequence[int]) -> int: ...

    def evaluate_many(self, T: np.ndarray) -> np.ndarray: ...


class LazyRestriction:
    """``Q ∘ gamma`` evaluated on demand through a batched point evaluator for ``Q``."""

    def __init__(self, evaluator, gamma: Manifold, degree: int):
        self._eval = evaluator
        self.gamma = gamma
        self.degree = degree

    def evaluate_many(self, T: np.ndarray) -> np.ndarray:
        return np.asarray(self._eval(self.gamma.evaluate_many(T)), dtype=np.int64)

    def evaluate(self, t: Sequence[int]) -> int:
        return int(self.evaluate_many(np.array([t]))[0])


class RandomAnswer:
    """A random-oracle answer; any values at at most ``degree + 1`` collinear points are realisable."""

    def __init__(self, p: int, key, degree: int):
        self.p = p
        self.key = key
        self.degree = degree

    def evaluate(self, t: Sequence[int]) -> int:
        return hash_to_field(self.p, self.key, tuple(int(v) for v in t))

    def evaluate_many(self, T: np.ndarray) -> np.ndarray:
        return np.array([self.evaluate(t) for t in np.atleast_2d(T)], dtype=np.int64)


def manifold_value_at(answer, x: Sequence[int], gamma: Manifold) -> int:
    """``A_gamma(x)``: the answer evaluated at ``x``'s locator tuple."""
    return int(answer.evaluate(gamma.locate(x)))

"""The Reed-Muller / sumcheck decoder.

Notation (all tables live on ``H = {0..h-1}`` grids, coordinate 1 first):

* ``pi`` has ``n1 - 1 = h^m2 - 1`` cells; ``g2 = LDE(pi ∘ 1)`` and
  ``z0 = (h-1, ..., h-1)`` carries the appended 1.
* ``g3(x, y) = g2(x) g2(y)`` on ``F^m3``, ``m3 = 2 m2``.
* The V0 quadratics are indexed by ``r ∈ F`` (``p_r = sum_k r^(k-1) C_k``), so
  the bundle has ``T = m3 p + 1`` components: ``q_1 = g3`` and
  ``q_{2 + r m3 + (l-1)} = s_l^{p_r}``.
* ``g4(y, x) = sum_i q_i(x) w_i(y)`` with ``y ∈ F^t``, ``h^t >= T + 1`` and
  ``y(i)`` the little-endian ``H``-ary digits of ``i``.

``g4`` is never expanded.  It is evaluated through Lagrange vectors and
tensor contraction of the per-constraint tables ``Ĉ_k`` (the ``p̂`` of a
single constraint), which is exact and linear in ``p̂``.

Draw order from ``FieldRNG(R, p, "rm")``: product points ``x, y ∈ F^m2``,
combiner ``r``, sumcheck point ``x ∈ F^m3``, then ``x1, x2, x3 ∈ F^m4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from .circuits import Circuit, QuadraticSystem, v0_combine, v0_compile
from .codes import lde_encode, lde_point, lde_spec
from .errors import CapabilityError, InputError, MalformedAnswer, UsageError
from .field import MultiPoly, PrimeField, check_numpy_modulus, interpolate_grid, lagrange_basis_values, powers_table
from .geometry import LazyRestriction, Manifold, build_manifold, restriction_size
from .protocol import DecoderSpec, Linear, LocalForm, LocalRound, Proof, ProverOracle, bits_for, unit
from .rand import FieldRNG

CHECK_ORDER = ("consistency", "g3_unit", "product", "sumcheck_4a", "sumcheck_4b", "sumcheck_4c")


def digits(i: int, h: int, length: int) -> tuple[int, ...]:
    """Little-endian base-``h`` digits of ``i``."""
    out = []
    for _ in range(length):
        out.append(i % h)
        i //= h
    if i:
        raise InputError(f"value does not fit in {length} base-{h} digits")
    return tuple(out)


def log_ceil(x: int, h: int) -> int:
    """Smallest ``e`` with ``h^e >= x``."""
    e, v = 0, 1
    while v < x:
        v *= h
        e += 1
    return e


@dataclass(frozen=True)
class RMParams:
    p: int
    h: int
    m1: int
    m2: int
    m3: int
    t: int
    m4: int
    T: int
    d: int
    k: int
    ell: int
    n1: int

    @property
    def H(self) -> tuple[int, ...]:
        return tuple(range(self.h))

    @property
    def z0(self) -> tuple[int, ...]:
        return lde_point(self.n1, self.h, self.m2)

    @property
    def manifold_degree(self) -> int:
        return self.ell + 1 + self.k + 1

    @property
    def answer_degree(self) -> int:
        """``d' = d (k + l + 2)``."""
        return self.d * self.manifold_degree

    @property
    def component_degree(self) -> int:
        return 2 * self.m3 * self.h

    def y(self, i: int) -> tuple[int, ...]:
        if not 1 <= i <= self.T:
            raise UsageError(f"component {i} outside 1..{self.T}")
        return digits(i, self.h, self.t)

    def s_index(self, r: int, level: int) -> int:
        return 2 + r * self.m3 + (level - 1)

    @classmethod
    def for_system(cls, sys: QuadraticSystem) -> "RMParams":
        h = sys.pad_base
        if h is None:
            raise InputError("the RM decoder needs a system compiled with pad_base = h")
        p = sys.field.p
        if h >= p:
            raise InputError("H must be a proper subset of the field")
        n_pad = sys.n_padded
        m1 = log_ceil(n_pad, h)
        n1 = sys.num_vars + 1
        m2 = log_ceil(n1, h)
        if h ** m1 != n_pad or h ** m2 != n1:
            raise InputError("system is not padded to powers of h")
        m3 = 2 * m2
        T = m3 * p + 1
        t = log_ceil(T + 1, h)
        k = (h + 1) * m3 + 5
        d = h * t + 2 * h * m3
        return cls(p, h, m1, m2, m3, t, m3 + t, T, d, k, sys.ell, n1)


def constraint_tables(sys: QuadraticSystem, P: RMParams) -> np.ndarray:
    """``Ĉ_k`` on ``H^m3`` for each constraint; shape ``(K,) + (h,) * m3``."""
    h, m2 = P.h, P.m2
    z0 = P.z0
    K = sys.num_constraints
    out = np.zeros((K,) + (h,) * P.m3, dtype=np.int64)
    pts = [lde_point(i + 1, h, m2) for i in range(sys.num_vars)]
    for k, c in enumerate(sys.constraints):
        out[(k,) + z0 + z0] = c.c0
        for i, v in c.lin.items():
            out[(k,) + z0 + pts[i]] = v
        for (i, i2), v in c.quad.items():
            out[(k,) + pts[i] + pts[i2]] = (out[(k,) + pts[i] + pts[i2]] + v) % P.p
    return out


def string_table(pi: Sequence[int], P: RMParams) -> np.ndarray:
    """``pi ∘ 1`` laid out on ``H^m2``."""
    sig = np.zeros((P.h,) * P.m2, dtype=np.int64)
    vals = [int(v) % P.p for v in pi] + [1]
    if len(vals) != P.n1:
        raise InputError(f"pi must have {P.n1 - 1} cells")
    for i, v in enumerate(vals):
        sig[lde_point(i + 1, P.h, P.m2)] = v
    return sig


def _contract(table: np.ndarray, L: np.ndarray, p: int) -> np.ndarray:
    """Contract the leading grid axis of flattened tables with Lagrange rows ``L`` (N, h).

    ``table`` is ``(N, h * rest)`` or ``(N, K, h * rest)``; the result drops one grid axis.
    """
    h = L.shape[1]
    if table.ndim == 2:
        return np.einsum("nhr,nh->nr", table.reshape(table.shape[0], h, -1), L) % p
    return np.einsum("nkhr,nh->nkr", table.reshape(table.shape[0], table.shape[1], h, -1), L) % p


class G4Evaluator:
    """Batched evaluation of ``g3``, the partial sums and the bundle ``g4``.

    ``shift`` optionally perturbs the level-1 partial sums:
    ``s_1^{p_r}(x) -= (sum_k r^(k-1) e_k) * c(x_1)`` for a vector ``e`` and a
    univariate ``c``; it is the hook used by the low-degree cheater.
    """

    def __init__(self, P: RMParams, sigma: np.ndarray, tables: np.ndarray,
                 shift: tuple[np.ndarray, Callable[[np.ndarray], np.ndarray]] | None = None):
        check_numpy_modulus(P.p)
        self.P = P
        self.sigma = sigma % P.p
        self.G = np.multiply.outer(self.sigma, self.sigma) % P.p
        self.tables = tables % P.p
        self.K = tables.shape[0]
        self.V = powers_table(np.arange(P.p), max(self.K - 1, 0), P.p)  # V[r, k] = r^k
        self.shift = shift

    def g2(self, X: np.ndarray) -> np.ndarray:
        P = self.P
        X = np.atleast_2d(np.asarray(X, dtype=np.int64)) % P.p
        L = lagrange_basis_values(P.H, X, P.p)
        acc = np.broadcast_to(self.sigma.reshape(1, -1), (X.shape[0], self.sigma.size)).copy()
        for c in range(P.m2):
            acc = _contract(acc, L[:, c, :], P.p)
        return acc[:, 0]

    def partial_sums(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``g3(X)`` (N,), ``E`` (N, K, m3) with ``E[., k, l-1] = s_l^{C_k}(X)``,
        and the constraint values ``Ĉ_k(X)`` (N, K)."""
        P = self.P
        p = P.p
        X = np.atleast_2d(np.asarray(X, dtype=np.int64)) % p
        N = X.shape[0]
        L = lagrange_basis_values(P.H, X, p)
        Gc = np.broadcast_to(self.G.reshape(1, -1), (N, self.G.size)).copy()
        Cc = np.broadcast_to(self.tables.reshape(1, self.K, -1), (N, self.K, self.G.size)).copy()
        E = np.zeros((N, self.K, P.m3), dtype=np.int64)
        for level in range(1, P.m3 + 1):
            Gc = _contract(Gc, L[:, level - 1, :], p)
            Cc = _contract(Cc, L[:, level - 1, :], p)
            E[:, :, level - 1] = np.einsum("nky,ny->nk", Cc, Gc) % p
        return Gc[:, 0], E, Cc[:, :, 0]

    def components(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``g3(X)`` and ``S[., r, l-1] = s_l^{p_r}(X)`` for every ``r ∈ F``."""
        p = self.P.p
        g3, E, _ = self.partial_sums(X)
        S = np.einsum("rk,nkl->nrl", self.V, E) % p
        if self.shift is not None:
            e, c = self.shift
            pr = (self.V @ (np.asarray(e, dtype=np.int64) % p)) % p  # p_r(sigma) per r
            cx = np.asarray(c(np.atleast_2d(X)[:, 0]), dtype=np.int64) % p
            S[:, :, 0] = (S[:, :, 0] - np.outer(cx, pr)) % p
        return g3, S

    def component(self, i: int, X: np.ndarray) -> np.ndarray:
        P = self.P
        g3, S = self.components(X)
        if i == 1:
            return g3
        if 2 <= i <= P.T:
            r, l0 = divmod(i - 2, P.m3)
            return S[:, r, l0]
        return np.zeros(g3.shape, dtype=np.int64)

    def weights(self, Y: np.ndarray) -> np.ndarray:
        """``W[., i] = w_i(Y)`` for ``i = 0..h^t - 1``."""
        P = self.P
        L = lagrange_basis_values(P.H, Y, P.p)  # (N, t, h)
        W = L[:, 0, :]
        for c in range(1, P.t):
            W = (L[:, c, :, None] * W[:, None, :]).reshape(W.shape[0], -1) % P.p
        return W

    def __call__(self, points: np.ndarray) -> np.ndarray:
        P = self.P
        p = P.p
        Z = np.atleast_2d(np.asarray(points, dtype=np.int64)) % p
        if Z.shape[1] != P.m4:
            raise UsageError(f"g4 takes {P.m4} coordinates")
        W = self.weights(Z[:, : P.t])
        g3, S = self.components(Z[:, P.t:])
        Ws = W[:, 2: 2 + p * P.m3].reshape(-1, p, P.m3)
        return (W[:, 1] * g3 + np.einsum("nrl,nrl->n", Ws % p, S) % p) % p


def phat_value(tables: np.ndarray, weights: np.ndarray, X: np.ndarray, P: RMParams) -> np.ndarray:
    """``p̂(X)`` for ``p̂ = sum_k weights[k] Ĉ_k``."""
    L = lagrange_basis_values(P.H, np.atleast_2d(X), P.p)
    N = L.shape[0]
    K = tables.shape[0]
    Cc = np.broadcast_to(tables.reshape(1, K, -1), (N, K, tables[0].size)).copy()
    for c in range(P.m3):
        Cc = _contract(Cc, L[:, c, :], P.p)
    return (Cc[:, :, 0] @ (np.asarray(weights, dtype=np.int64) % P.p)) % P.p


# ---------------------------------------------------------------------------
# verification plan


@dataclass(frozen=True)
class Probe:
    label: str
    component: int
    x: tuple[int, ...]  # point in F^m3


@dataclass(frozen=True, eq=False)
class VerificationPlan:
    r: int
    weights: np.ndarray  # r^(k-1) per constraint
    product_points: tuple[tuple[int, ...], tuple[int, ...]]
    sumcheck_point: tuple[int, ...]
    phat_x: int
    probes: tuple[Probe, ...]

    def __len__(self) -> int:
        return len(self.probes)


def rm_verification_plan(P: RMParams, tables: np.ndarray, rng: FieldRNG) -> VerificationPlan:
    """Draw the product points, the combiner and the sumcheck point; list all probes."""
    p, m2, m3 = P.p, P.m2, P.m3
    xp = tuple(int(v) for v in rng.elements(m2))
    yp = tuple(int(v) for v in rng.elements(m2))
    r = rng.element()
    weights = powers_table(np.array([r]), max(tables.shape[0] - 1, 0), p)[0]
    x = tuple(int(v) for v in rng.elements(m3))
    z0 = P.z0
    probes = [
        Probe("g3_unit", 1, z0 + z0),
        Probe("product_zx", 1, z0 + xp),
        Probe("product_zy", 1, z0 + yp),
        Probe("product_xy", 1, xp + yp),
        Probe("4a_s", P.s_index(r, m3), x),
        Probe("4a_g", 1, x),
    ]
    for i in range(2, m3 + 1):
        pad = (0,) * (m3 - i + 1)
        probes.append(Probe(f"4b_{i}_prev", P.s_index(r, i - 1), x[: i - 1] + pad))
        for hv in P.H:
            probes.append(Probe(f"4b_{i}_h{hv}", P.s_index(r, i), x[: i - 1] + (hv,) + (0,) * (m3 - i)))
    for hv in P.H:
        probes.append(Probe(f"4c_h{hv}", P.s_index(r, 1), (hv,) + (0,) * (m3 - 1)))
    assert len(probes) == P.k
    phat = int(phat_value(tables, weights, np.array([x]), P)[0])
    return VerificationPlan(r, weights, (xp, yp), x, phat, tuple(probes))


def plan_forms(plan: VerificationPlan, P: RMParams, offset: int) -> list[tuple[str, LocalForm]]:
    """The plan's relations as forms over view entries ``offset + probe index``."""
    idx = {pr.label: offset + i for i, pr in enumerate(plan.probes)}
    p = P.p
    forms: list[tuple[str, LocalForm]] = [
        ("g3_unit", LocalForm(unit(idx["g3_unit"], 1, const=p - 1))),
        ("product", LocalForm(unit(idx["product_xy"]), ((unit(idx["product_zx"], p - 1), unit(idx["product_zy"])),))),
        ("sumcheck_4a", LocalForm(Linear(((idx["4a_s"], 1), (idx["4a_g"], (-plan.phat_x) % p))))),
    ]
    for i in range(2, P.m3 + 1):
        terms = ((idx[f"4b_{i}_prev"], 1),) + tuple((idx[f"4b_{i}_h{hv}"], p - 1) for hv in P.H)
        forms.append(("sumcheck_4b", LocalForm(Linear(terms))))
    forms.append(("sumcheck_4c", LocalForm(Linear(tuple((idx[f"4c_h{hv}"], 1) for hv in P.H)))))
    return forms


# ---------------------------------------------------------------------------
# decoder


@dataclass(frozen=True)
class RMFamily:
    ell: int
    h: int = 2
    name: str = "rm"

    @property
    def l(self) -> int:
        return self.ell + 1

    def __call__(self, phi: Circuit, functions: Sequence[Circuit], field: PrimeField) -> "RMDecoder":
        if len(functions) != self.ell:
            raise InputError(f"family decodes {self.ell} functions, got {len(functions)}")
        return RMDecoder.from_circuits(phi, functions, field, self.h)


class RMProver:
    """Provers answering according to a ``g4`` evaluator."""

    def __init__(self, ev: G4Evaluator):
        self.ev = ev

    def B(self, x) -> int:
        return int(self.ev(np.asarray(x)[None, :])[0])

    def A(self, gamma: Manifold) -> LazyRestriction:
        return LazyRestriction(self.ev, gamma, self.ev.P.d * gamma.degree)

    def proof(self) -> Proof:
        return Proof(ProverOracle("A", self.A), (ProverOracle("B", self.B),))


class RMDecoder(DecoderSpec):
    name = "rm"

    def __init__(self, sys: QuadraticSystem):
        self.sys = sys
        self.field = sys.field
        self.P = RMParams.for_system(sys)
        P = self.P
        if P.k + P.ell + 2 > P.p:
            raise CapabilityError(f"{P.k + P.ell + 2} curve nodes do not fit in GF({P.p})")
        self.tables = constraint_tables(sys, P)
        self.ell = sys.ell
        self.k = 2
        self.l = self.ell + 1
        self.encoding = lde_spec(self.field, sys.n, P.h, P.m1)
        self.input_size = sys.n
        self.answer_size = 1 + (self.ell + 1) + P.k
        self.dense_answer_size = restriction_size(P.d, P.manifold_degree)
        self.draws = 2 * P.m2 + 1 + P.m3 + 3 * P.m4
        self.randomness_bits = bits_for(P.p ** self.draws)
        self.delta = float(P.p) ** -0.1

    @classmethod
    def from_circuits(cls, phi: Circuit, functions: Sequence[Circuit], field: PrimeField, h: int = 2) -> "RMDecoder":
        return cls(v0_compile(phi, functions, field, pad_base=h))

    def sample_randomness(self, rng: np.random.Generator) -> int:
        return int(rng.integers(0, 1 << 63))

    def point(self, component: int, x: Sequence[int]) -> tuple[int, ...]:
        """``(y(component), x)`` in ``F^m4``."""
        return self.P.y(component) + tuple(int(v) for v in x)

    def output_points(self, j: Sequence[int]) -> list[tuple[int, ...]]:
        """``o_1..o_l`` (function outputs) then ``o_{l+1}`` (the LDE index)."""
        P = self.P
        z0 = P.z0
        b0 = self.sys.segments["b"][0]
        outs = [self.point(1, z0 + lde_point(b0 + i + 1, P.h, P.m2)) for i in range(self.ell)]
        jj = tuple(int(v) % P.p for v in j) + (0,) * (P.m2 - P.m1)
        outs.append(self.point(1, z0 + jj))
        return outs

    def plan(self, R: Hashable) -> VerificationPlan:
        return rm_verification_plan(self.P, self.tables, FieldRNG(R, self.P.p, domain="rm"))

    def local(self, R: Hashable, j: Sequence[int]) -> LocalRound:
        P = self.P
        p = P.p
        if len(j) != P.m1:
            raise InputError(f"index must have {P.m1} coordinates")
        rng = FieldRNG(R, p, domain="rm")
        plan = rm_verification_plan(P, self.tables, rng)
        xs = [rng.elements(P.m4) for _ in range(3)]
        outs = self.output_points(j)
        probes = [self.point(pr.component, pr.x) for pr in plan.probes]
        labels = [f"o{i + 1}" for i in range(len(outs))] + [pr.label for pr in plan.probes]
        gamma = build_manifold(outs + probes, xs[0], xs[1], xs[2], self.field, labels)

        view_size = len(self.view_tuples(gamma))
        off = 1 + len(outs)
        checks = tuple(plan_forms(plan, P, off))
        output_forms = (LocalForm(unit(len(outs))),) + tuple(LocalForm(unit(1 + i)) for i in range(self.ell))
        return LocalRound(
            field=self.field,
            a_query=gamma,
            proj_queries=(np.asarray(xs[0], dtype=np.int64),),
            view_size=view_size,
            viewer=lambda answer: self.answer_view(gamma, answer),
            checks=checks,
            projection_forms=(LocalForm(unit(0)),),
            projection_names=("consistency",),
            output_forms=output_forms,
            order=CHECK_ORDER,
            info={"plan": plan, "gamma": gamma, "x1": xs[0], "outputs": outs, "probes": probes},
        )

    def view_tuples(self, gamma: Manifold) -> np.ndarray:
        """Locator tuples of ``x1``, the outputs and the probes; coinciding points share the first one."""
        count = 1 + len(gamma.anchors)
        seen: dict[tuple[int, ...], tuple[int, int, int, int]] = {}
        tuples = [seen.setdefault(pt, loc) for pt, loc in zip(gamma.points()[:count], gamma.locator)]
        return np.array(tuples, dtype=np.int64)

    def answer_view(self, gamma, answer) -> list[int]:
        deg = getattr(answer, "degree", None)
        if deg is None or not hasattr(answer, "evaluate_many"):
            raise MalformedAnswer("answer is not a 4-variate polynomial")
        if deg > self.P.answer_degree:
            raise MalformedAnswer(f"answer degree {deg} exceeds {self.P.answer_degree}")
        return [int(v) for v in answer.evaluate_many(self.view_tuples(gamma))]

    # provers --------------------------------------------------------------
    def evaluator(self, pi: Sequence[int], shift=None) -> G4Evaluator:
        return G4Evaluator(self.P, string_table(pi, self.P), self.tables, shift)

    def pi_proof(self, pi: Sequence[int], shift=None) -> Proof:
        return RMProver(self.evaluator(pi, shift)).proof()

    def honest_proof(self, a: Sequence[int]) -> Proof:
        return self.pi_proof(self.sys.assignment(a))

    def expected_outputs(self, a: Sequence[int], j: Sequence[int]) -> tuple[int, ...]:
        P = self.P
        g1 = lde_encode(self.field, a, P.H, P.m1)
        b = tuple(f.evaluate(a, self.field)[0] for f in self.sys.functions)
        return (g1.evaluate(j),) + b

    def envelope(self, trials: int) -> float:
        """``2 (m3 d / p + T / p) + 3 sigma``, with ``T`` the V0 constraint count."""
        P = self.P
        return 2 * (P.m3 * P.d / P.p + self.sys.num_constraints / P.p) + 3 * math.sqrt(0.25 / trials)

    def params(self) -> dict:
        out = super().params()
        P = self.P
        out.update({
            "h": P.h, "m1": P.m1, "m2": P.m2, "m3": P.m3, "m4": P.m4, "t": P.t,
            "bundle_size": P.T, "d": P.d, "probes": P.k, "answer_degree": P.answer_degree,
            "dense_answer_size": self.dense_answer_size, "constraints": self.sys.num_constraints,
            "desk_scale_ok": P.p >= 50 * P.h * P.m3,
        })
        return out


# ---------------------------------------------------------------------------
# materialised polynomials (test path, tiny parameters only)


def embed(f: MultiPoly, num_vars: int, offset: int) -> MultiPoly:
    """View ``f`` as a polynomial in variables ``offset..offset + f.num_vars - 1`` of ``num_vars``."""
    terms = {}
    for e, c in f.terms.items():
        full = [0] * num_vars
        full[offset: offset + len(e)] = e
        terms[tuple(full)] = c
    return MultiPoly(f.field, num_vars, terms)


def indicator_poly(i: int, h: int, t: int, field: PrimeField) -> MultiPoly:
    """``w_i``: 1 at ``y(i)``, 0 elsewhere on ``H^t``."""
    target = digits(i, h, t)
    return interpolate_grid(lambda y: int(y == target), range(h), t, field)


def bundle(components: Sequence[MultiPoly], h: int, t: int) -> MultiPoly:
    """``g4(y, x) = sum_i q_i(x) w_i(y)`` with ``q_1 = components[0]``."""
    if not components:
        raise InputError("nothing to bundle")
    field = components[0].field
    m = components[0].num_vars
    if h ** t < len(components) + 1:
        raise InputError("index block too small for the bundle")
    total = MultiPoly.zero(field, t + m)
    for i, q in enumerate(components, start=1):
        total = total + embed(indicator_poly(i, h, t, field), t + m, 0) * embed(q, t + m, t)
    return total


def rm_unbundle(B: MultiPoly, h: int, t: int, count: int) -> list[MultiPoly]:
    """Recover ``q_i(x) = B(y(i), x)`` for ``i = 1..count``."""
    m = B.num_vars - t
    if m < 0 or h ** t < count + 1:
        raise UsageError("bundle index block does not fit")
    out = []
    for i in range(1, count + 1):
        y = digits(i, h, t)
        fixed = B.substitute(dict(enumerate(y)))
        terms = {e[t:]: c for e, c in fixed.terms.items()}
        out.append(MultiPoly(B.field, m, terms))
    return out


def materialize(dec: RMDecoder, pi: Sequence[int], cap_terms: int = 200_000) -> dict:
    """Expand ``g1, g2, g3``, every ``p̂_r``, ``s_l^{p_r}`` and ``g4`` as MultiPolys."""
    P, F = dec.P, dec.field
    if P.T * (2 * P.h - 1) ** P.m3 * P.h ** P.t > cap_terms:
        raise CapabilityError("parameters too large to materialise g4")
    sig = string_table(pi, P)
    g1 = interpolate_grid(lambda x: int(sig[x + (0,) * (P.m2 - P.m1)]), P.H, P.m1, F)
    g2 = interpolate_grid(lambda x: int(sig[x]), P.H, P.m2, F)
    G = np.multiply.outer(sig, sig) % P.p
    g3 = interpolate_grid(lambda x: int(G[x]), P.H, P.m3, F)
    comps = [g3]
    phats = []
    for r in range(P.p):
        w = powers_table(np.array([r]), max(dec.tables.shape[0] - 1, 0), P.p)[0]
        tab = np.tensordot(w, dec.tables, axes=(0, 0)) % P.p
        phat = interpolate_grid(lambda x: int(tab[x]), P.H, P.m3, F)
        phats.append(phat)
        s = [None] * (P.m3 + 1)
        s[P.m3] = phat * g3
        for i in range(P.m3, 1, -1):
            acc = MultiPoly.zero(F, P.m3)
            for hv in P.H:
                fix = {i - 1: hv}
                fix.update({c: 0 for c in range(i, P.m3)})
                acc = acc + s[i].substitute(fix)
            s[i - 1] = acc
        comps.extend(s[1:])
    g4 = bundle(comps, P.h, P.t)
    return {"g1": g1, "g2": g2, "g3": g3, "phat": phats, "components": comps, "g4": g4}

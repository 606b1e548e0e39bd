"""Cheating provers for the soundness experiments.

Each strategy is a named :class:`Adversary` that builds a :class:`Proof` for
a given decoder.  ``statistic`` says which event counts as a soundness
error: ``accept`` (any acceptance; used when the input is not a witness or
the tables carry no witness at all) or ``accept_wrong`` (acceptance with an
output that differs from the honest one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable, Hashable, Sequence

import numpy as np

from .circuits import find_non_witness, find_witness
from .composition import ComposedDecoder, view_kernel
from .errors import InputError, UsageError
from .geometry import Manifold, RandomAnswer
from .hadamard_dpcp import QHDecoder, SubspaceQuery
from .protocol import DecoderSpec, Proof, ProverOracle
from .rand import derive_key, hash_to_field, hash_to_unit
from .rm_dpcp import RMDecoder


def query_key(q) -> Hashable:
    """A hashable digest of any query used by the decoders."""
    if isinstance(q, SubspaceQuery):
        return ("S", q.key)
    if isinstance(q, Manifold):
        return ("M", q.key())
    if isinstance(q, np.ndarray):
        return ("v", derive_key(q))
    if isinstance(q, tuple):
        return tuple(query_key(x) for x in q)
    return q


def random_prover(name: str, p: int, seed: Hashable) -> ProverOracle:
    return ProverOracle(name, lambda q: hash_to_field(p, seed, name, query_key(q)))


def random_large_answer(dec: DecoderSpec, query, seed: Hashable):
    """A random answer of the right shape for ``dec``'s large prover."""
    p = dec.field.p
    if isinstance(dec, QHDecoder):
        key = query_key(query)
        return tuple(hash_to_field(p, seed, "A", key, i) for i in range(dec.answer_size))
    if isinstance(dec, RMDecoder):
        return RandomAnswer(p, derive_key(seed, "A", query_key(query)), dec.P.answer_degree)
    if isinstance(dec, ComposedDecoder):
        R_out, j_out, w = query
        _, inner = dec.inner_at(R_out, j_out)
        return random_large_answer(inner, w, (seed, query_key((R_out, j_out))))
    raise UsageError(f"no random answer model for {type(dec).__name__}")


def random_proof(dec: DecoderSpec, seed: Hashable) -> Proof:
    p = dec.field.p
    A = ProverOracle("A", lambda q: random_large_answer(dec, q, seed))
    names = [f"B{i + 1}" for i in range(dec.k - 1)]
    return Proof(A, tuple(random_prover(n, p, seed) for n in names))


def trace_proof(dec: DecoderSpec, a: Sequence[int]) -> Proof:
    """Honest encoding of a (possibly unsatisfying) input ``a`` with its gate trace."""
    if isinstance(dec, QHDecoder):
        return dec.pi_proof(dec.sys.trace(a))
    if isinstance(dec, RMDecoder):
        return dec.pi_proof(dec.sys.trace(a))
    if isinstance(dec, ComposedDecoder):
        outer = trace_proof(dec.outer, a)

        @lru_cache(maxsize=None)
        def inner_proof(R_out, j_out):
            lo, inner = dec.inner_at(R_out, j_out)
            return trace_proof(inner, lo.view(outer.A(lo.a_query)))

        return dec.assemble(outer, inner_proof)
    raise UsageError(f"no trace encoding for {type(dec).__name__}")


def _witness(dec: DecoderSpec, phi) -> tuple[int, ...]:
    a = find_witness(phi, dec.field)
    if a is None:
        raise InputError("circuit is unsatisfiable; honest-based adversaries need a witness")
    return a


def _non_witness(dec: DecoderSpec, phi) -> tuple[int, ...]:
    a = find_non_witness(phi, dec.field)
    if a is None:
        raise InputError("circuit accepts every Boolean input; no invalid witness exists")
    return a


@dataclass
class Adversary:
    name: str = "adversary"
    statistic: str = "accept"
    params: dict = dc_field(default_factory=dict)

    def compatible(self, dec: DecoderSpec) -> bool:
        return True

    def check(self, dec: DecoderSpec) -> None:
        if not self.compatible(dec):
            raise UsageError(f"adversary {self.name!r} does not apply to decoder {dec.name!r}")

    def build(self, dec: DecoderSpec, phi, seed: Hashable) -> tuple[Proof, tuple[int, ...] | None]:
        """``(proof, reference input)``; outputs are compared against the reference when given."""
        raise NotImplementedError


class RandomTables(Adversary):
    def __init__(self):
        super().__init__("random-tables", "accept")

    def build(self, dec, phi, seed):
        return random_proof(dec, (seed, "random-tables")), None


class InvalidWitness(Adversary):
    """Honest encoding of an input rejected by the circuit."""

    def __init__(self):
        super().__init__("invalid-witness", "accept")

    def build(self, dec, phi, seed):
        a = _non_witness(dec, phi)
        return trace_proof(dec, a), a


class NonMultiplicativeB(Adversary):
    """Linear ``B`` whose table is the honest ``sigma`` with one product entry moved."""

    def __init__(self, entry: tuple[int, int] | None = None):
        super().__init__("non-multiplicative-linear-B", "accept", {"entry": entry})

    def compatible(self, dec):
        return isinstance(dec, QHDecoder)

    def build(self, dec, phi, seed):
        from .codes import qh_string

        a = _witness(dec, phi)
        m, p = dec.m, dec.field.p
        sigma = np.array(qh_string(dec.field, dec.sys.assignment(a)), dtype=np.int64)
        i, k = self.params["entry"] or (0, m - 1)
        sigma[m + i * m + k] = (sigma[m + i * m + k] + 1) % p
        return dec.string_proof(sigma), a


class CorruptedHonest(Adversary):
    """Honest proof whose projection provers answer ``B(x) + 1`` on a ``rho``-fraction of queries."""

    def __init__(self, rho: float = 0.1):
        if not 0.0 <= rho <= 1.0:
            raise UsageError("rho must lie in [0, 1]")
        super().__init__("corrupted-honest", "accept_wrong", {"rho": rho})

    def build(self, dec, phi, seed):
        a = _witness(dec, phi)
        honest = dec.honest_proof(a)
        rho, p = self.params["rho"], dec.field.p

        def flip(P: ProverOracle) -> ProverOracle:
            def answer(q):
                v = int(P(q))
                if hash_to_unit(seed, "flip", P.name, query_key(q)) < rho:
                    v = (v + 1) % p
                return v
            return ProverOracle(P.name, answer)

        projections = list(honest.projections)
        targets = range(dec.inner_ref.k - 1) if isinstance(dec, ComposedDecoder) else range(len(projections))
        for i in targets:
            projections[i] = flip(projections[i])
        return Proof(honest.A, tuple(projections)), a


class LowDegreeWrongG(Adversary):
    """Low-degree ``g4`` for an invalid trace whose first partial sums are shifted to sum to zero.

    The shift is ``e * c(x1)`` with ``e`` the constraint values and ``c`` a
    degree-``2 h m3`` polynomial vanishing on ``roots ⊂ F \\ H`` with
    ``sum_H c = 1``; the cheat survives only when a probe lands on a root or
    the level-1 check collides.
    """

    def __init__(self):
        super().__init__("low-degree-wrong-g", "accept")

    def compatible(self, dec):
        return isinstance(dec, RMDecoder)

    @staticmethod
    def shift_for(dec: RMDecoder, pi: Sequence[int], seed: Hashable):
        P = dec.P
        p = P.p
        ev = dec.evaluator(pi)
        X = np.zeros((P.h, P.m3), dtype=np.int64)
        X[:, 0] = P.H
        _, E, _ = ev.partial_sums(X)
        e = E[:, :, 0].sum(axis=0) % p  # level-1 sums over H: the values C_k(sigma)
        outside = np.array([x for x in range(p) if x not in set(P.H)], dtype=np.int64)
        count = min(2 * P.m3 * P.h, outside.size - 1)
        rng = np.random.Generator(np.random.Philox(key=derive_key("roots", seed)))
        roots = np.sort(rng.choice(outside, size=count, replace=False))

        def raw(x):
            x = np.asarray(x, dtype=np.int64) % p
            acc = np.ones(x.shape, dtype=np.int64)
            for r in roots:
                acc = acc * ((x - r) % p) % p
            return acc

        total = int(raw(np.array(P.H)).sum()) % p
        if total == 0:
            raise UsageError("root set sums to zero on H; pick another seed")
        kappa = pow(total, p - 2, p)
        return e, (lambda x: kappa * raw(x) % p), roots

    def build(self, dec, phi, seed):
        a = _non_witness(dec, phi)
        pi = dec.sys.trace(a)
        e, c, roots = self.shift_for(dec, pi, seed)
        self.params = {"roots": [int(r) for r in roots]}
        return dec.pi_proof(pi, shift=(e, c)), a


class InconsistentInnerC(Adversary):
    """Inner provers honest for ``y + kappa`` instead of the outer view ``y``.

    ``kappa`` keeps every inner check and projection satisfied, so only the
    consistency test against the honest ``C*`` can catch the cheat.
    """

    def __init__(self):
        super().__init__("inconsistent-inner-C", "accept")

    def compatible(self, dec):
        return isinstance(dec, ComposedDecoder)

    def build(self, dec, phi, seed):
        a = _witness(dec, phi)
        outer = dec.outer.honest_proof(a)
        p = dec.field.p

        @lru_cache(maxsize=None)
        def inner_proof(R_out, j_out):
            lo, inner = dec.inner_at(R_out, j_out)
            y = np.array(lo.view(outer.A(lo.a_query)), dtype=np.int64)
            y2 = (y + view_kernel(lo)) % p
            return inner.honest_proof([int(v) for v in y2])

        return dec.assemble(outer, inner_proof), a


class RandomCStar(Adversary):
    """Honest composed proof with ``C*`` replaced by a random table."""

    def __init__(self):
        super().__init__("random-C-star", "accept_wrong")

    def compatible(self, dec):
        return isinstance(dec, ComposedDecoder)

    def build(self, dec, phi, seed):
        a = _witness(dec, phi)
        outer = dec.outer.honest_proof(a)
        honest = dec.honest_proof(a, outer_proof=outer)
        c_star = random_prover("C*", dec.field.p, (seed, "random-C-star"))
        k_in = dec.inner_ref.k
        projections = honest.projections[: k_in - 1] + (c_star,) + honest.projections[k_in:]
        return Proof(honest.A, projections), a


ADVERSARIES: dict[str, Callable[..., Adversary]] = {
    "random-tables": RandomTables,
    "invalid-witness": InvalidWitness,
    "non-multiplicative-linear-B": NonMultiplicativeB,
    "corrupted-honest": CorruptedHonest,
    "low-degree-wrong-g": LowDegreeWrongG,
    "inconsistent-inner-C": InconsistentInnerC,
    "random-C-star": RandomCStar,
}


def make_adversary(name: str, **params) -> Adversary:
    try:
        factory = ADVERSARIES[name]
    except KeyError:
        raise UsageError(f"unknown adversary {name!r}; choose from {sorted(ADVERSARIES)}") from None
    return factory(**params)


def soundness_bound(dec: DecoderSpec) -> tuple[float, str]:
    """The envelope a soundness run is compared with, before the ``3 sigma`` margin."""
    p = dec.field.p
    if isinstance(dec, QHDecoder):
        return 4 / p, "4/p"
    if isinstance(dec, RMDecoder):
        P = dec.P
        T = dec.sys.num_constraints
        return 2 * (P.m3 * P.d / p + T / p), f"2*(m3*d/p + T/p) with m3={P.m3}, d={P.d}, T={T}, p={p}"
    if isinstance(dec, ComposedDecoder):
        return dec.delta, "delta_out + delta_in + eta_in"
    return dec.delta, "delta"


def sigma_margin(trials: int) -> float:
    return 3 * math.sqrt(0.25 / trials)

"""The PCP-decoder interface shared by the concrete and composed decoders.

A decoder run on ``(R, j)`` yields a :class:`LocalRound`: the queries, and
the predicate, projection and output functions over the large prover's
answer.  Those functions are kept as :class:`LocalForm` objects (a linear
part plus products of linear parts), so each round can both evaluate them
and emit them as arithmetic circuits for an inner decoder.

Output convention: ``outputs[0]`` is the decoded code symbol ``E(x)_j`` and
``outputs[1:]`` are ``F_1(x), ..., F_l(x)``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from .circuits import Circuit, CircuitBuilder
from .codes import CodeSpec
from .errors import MalformedAnswer
from .field import PrimeField


@dataclass(frozen=True)
class Linear:
    """``const + sum c * v[i]``; the index set is structural and may carry zero coefficients."""

    terms: tuple[tuple[int, int], ...]
    const: int = 0

    def value(self, v: Sequence[int], p: int) -> int:
        acc = self.const
        for i, c in self.terms:
            acc += c * int(v[i])
        return acc % p

    def emit(self, b: CircuitBuilder) -> int:
        return b.linear([(c, i) for i, c in self.terms], self.const)


def linear(coeffs: Sequence[int] | np.ndarray, p: int, const: int = 0, offset: int = 0) -> Linear:
    """Dense linear form over ``len(coeffs)`` consecutive view entries starting at ``offset``."""
    return Linear(tuple((offset + i, int(c) % p) for i, c in enumerate(coeffs)), const % p)


def unit(i: int, c: int = 1, const: int = 0) -> Linear:
    return Linear(((i, c),), const)


@dataclass(frozen=True)
class LocalForm:
    """``linear(v) + sum_k left_k(v) * right_k(v)``; a check passes when this is 0."""

    linear: Linear
    products: tuple[tuple[Linear, Linear], ...] = ()

    def value(self, v: Sequence[int], p: int) -> int:
        acc = self.linear.value(v, p)
        for left, right in self.products:
            acc += left.value(v, p) * right.value(v, p)
        return acc % p

    def emit(self, b: CircuitBuilder) -> int:
        acc = self.linear.emit(b)
        for left, right in self.products:
            acc = b.add(acc, b.mul(left.emit(b), right.emit(b)))
        return acc

    @property
    def degree(self) -> int:
        return 2 if self.products else 1


def as_form(lin: Linear) -> LocalForm:
    return LocalForm(lin)


@dataclass(frozen=True)
class LocalCircuits:
    """``(phi, g, f)`` as arithmetic circuits over the view; ``phi`` uses the all-outputs-zero convention."""

    phi: Circuit
    g: tuple[Circuit, ...]
    f: tuple[Circuit, ...]

    @property
    def input_size(self) -> int:
        return self.phi.n

    @property
    def size(self) -> int:
        return self.phi.size + sum(c.size for c in self.g) + sum(c.size for c in self.f)


def form_circuit(forms: Sequence[LocalForm], n: int, p: int) -> Circuit:
    b = CircuitBuilder(n, p, rigid=True)
    outs = [f.emit(b) for f in forms]
    return b.build(outs, accept_value=0)


@dataclass(frozen=True)
class ProverOracle:
    """A prover: an immutable function from queries to answers."""

    name: str
    fn: Callable[[Any], Any] = dc_field(repr=False)

    def __call__(self, query):
        return self.fn(query)


@dataclass(frozen=True)
class Proof:
    A: ProverOracle
    projections: tuple[ProverOracle, ...]

    @property
    def provers(self) -> tuple[ProverOracle, ...]:
        return (self.A,) + self.projections


@dataclass(frozen=True, eq=False)
class LocalRound:
    """One decoder round ``(q, phi, g, f)`` for fixed ``(R, j)``."""

    field: PrimeField
    a_query: Any
    proj_queries: tuple[Any, ...]
    view_size: int
    viewer: Callable[[Any], Sequence[int]] = dc_field(repr=False)
    checks: tuple[tuple[str, LocalForm], ...]
    projection_forms: tuple[LocalForm, ...]
    projection_names: tuple[str, ...]
    output_forms: tuple[LocalForm, ...]
    order: tuple[str, ...] = ()
    info: dict = dc_field(default_factory=dict, repr=False)

    def view(self, answer) -> list[int]:
        v = [int(x) % self.field.p for x in self.viewer(answer)]
        if len(v) != self.view_size:
            raise MalformedAnswer(f"view has {len(v)} entries, expected {self.view_size}")
        return v

    def predicate(self, view: Sequence[int]) -> list[tuple[str, bool]]:
        p = self.field.p
        return [(name, f.value(view, p) == 0) for name, f in self.checks]

    def projections(self, view: Sequence[int]) -> list[int]:
        p = self.field.p
        return [f.value(view, p) for f in self.projection_forms]

    def outputs(self, view: Sequence[int]) -> list[int]:
        p = self.field.p
        return [f.value(view, p) for f in self.output_forms]

    @cached_property
    def circuits(self) -> LocalCircuits:
        p, s = self.field.p, self.view_size
        phi = form_circuit([f for _, f in self.checks], s, p)
        g = tuple(form_circuit([f], s, p) for f in self.projection_forms)
        f = tuple(form_circuit([f], s, p) for f in self.output_forms)
        return LocalCircuits(phi, g, f)


@dataclass(frozen=True)
class DecoderRound:
    queries: tuple[tuple[str, Any], ...]
    checks: tuple[tuple[str, bool], ...]
    projection_values: tuple[int, ...]
    outputs: tuple[int, ...] | None
    view: tuple[int, ...] | None = None

    @property
    def accepted(self) -> bool:
        return self.outputs is not None

    @property
    def first_failure(self) -> str | None:
        for name, ok in self.checks:
            if not ok:
                return name
        return None


def execute(local: LocalRound, proof: Proof) -> DecoderRound:
    """Query the provers, run every check and decode on success."""
    p = local.field.p
    queries = [(proof.A.name, local.a_query)]
    queries += [(P.name, q) for P, q in zip(proof.projections, local.proj_queries)]
    if len(proof.projections) != len(local.proj_queries):
        raise MalformedAnswer("proof has the wrong number of projection provers")
    try:
        view = local.view(proof.A(local.a_query))
    except MalformedAnswer:
        return DecoderRound(tuple(queries), (("format", False),), (), None)
    betas = [int(P(q)) % p for P, q in zip(proof.projections, local.proj_queries)]
    checks = local.predicate(view)
    gvals = local.projections(view)
    checks += [(name, g == b) for name, g, b in zip(local.projection_names, gvals, betas)]
    if local.order:
        rank = {name: i for i, name in enumerate(local.order)}
        checks.sort(key=lambda c: rank.get(c[0], len(rank)))
    ok = all(c[1] for c in checks)
    outputs = tuple(local.outputs(view)) if ok else None
    return DecoderRound(tuple(queries), tuple(checks), tuple(gvals), outputs, tuple(view))


def bits_for(count: int) -> int:
    """Whole bits needed to index ``count`` equally likely values: ``ceil(log2 count)``."""
    return (int(count) - 1).bit_length()


class DecoderSpec(ABC):
    """A ``k``-prover ``l``-answer projection PCP decoder for one instance ``(Phi, F)``."""

    name: str = "decoder"
    field: PrimeField
    k: int
    l: int
    encoding: CodeSpec
    answer_size: int
    randomness_bits: int
    delta: float
    input_size: int

    @property
    def eta(self) -> float:
        return self.encoding.eta

    @property
    def block_length(self) -> int:
        return self.encoding.block_length

    @abstractmethod
    def sample_randomness(self, rng: np.random.Generator) -> Hashable: ...

    def reference_randomness(self) -> Hashable:
        """A fixed random string; rounds at it fix the shape of every round's circuits."""
        return 0

    @cached_property
    def sample_local(self) -> LocalRound:
        return self.local(self.reference_randomness(), (0,) * self.encoding.dim)

    @abstractmethod
    def answer_view(self, query, answer) -> list[int]:
        """The entries of the large prover's ``answer`` to ``query`` that the round functions read."""

    def sample_index(self, rng: np.random.Generator) -> tuple[int, ...]:
        return tuple(int(v) for v in rng.integers(0, self.field.p, size=self.encoding.dim))

    @abstractmethod
    def local(self, R: Hashable, j: Sequence[int]) -> LocalRound: ...

    def run(self, proof: Proof, R: Hashable, j: Sequence[int]) -> DecoderRound:
        return execute(self.local(R, j), proof)

    @abstractmethod
    def honest_proof(self, x: Sequence[int]) -> Proof: ...

    @abstractmethod
    def expected_outputs(self, x: Sequence[int], j: Sequence[int]) -> tuple[int, ...]: ...

    def params(self) -> dict:
        return {
            "decoder": self.name,
            "p": self.field.p,
            "provers": self.k,
            "answers": self.l,
            "answer_size": self.answer_size,
            "randomness_bits": self.randomness_bits,
            "block_length_bits": bits_for(self.block_length),
            "delta": self.delta,
            "eta": self.eta,
        }

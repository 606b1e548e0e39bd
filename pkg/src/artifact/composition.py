"""The composition ``D_out ⊛ D_in`` of two PCP decoders.

The inner decoder is supplied as a *family*: a callable building a decoder
for any ``(phi, functions, field)``.  Per outer round ``(R_out, j_out)`` the
family is instantiated on the outer round circuits ``(phi_out, g_out ∘ f_out)``.
Round circuits are built rigidly, so every such instance has the same
parameters, which :class:`ComposedDecoder` checks on each round.

Composed answer indexing: ``outputs[0]`` is the outer code symbol and
``outputs[1:]`` the outer function values, exactly as for the outer decoder.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .circuits import Circuit
from .errors import CompositionError, ProtocolError
from .field import PrimeField, nullspace_mod
from .protocol import DecoderRound, DecoderSpec, LocalRound, Proof, ProverOracle, bits_for

CHECK_ORDER = ("inner_predicate", "inner_projection", "consistency", "outer_projection")

InnerFamily = Callable[[Circuit, Sequence[Circuit], PrimeField], DecoderSpec]


@dataclass(frozen=True)
class Accounting:
    provers: int
    answers: int
    answer_size: int
    randomness_bits: int


def composition_accounting(
    k_out: int, l_out: int, r_out: int, k_in: int, l_in: int, r_in: int, s_in: int, t_in: int,
) -> Accounting:
    """Parameters of the composed decoder; ``t_in`` is the inner block length."""
    if l_in != k_out + l_out:
        raise CompositionError(f"l_in = k_out + l_out fails: {l_in} != {k_out} + {l_out}")
    return Accounting(k_out + k_in, l_out, s_in, r_out + r_in + bits_for(t_in))


def _signature(dec: DecoderSpec) -> tuple:
    return (dec.k, dec.l, dec.answer_size, dec.randomness_bits, dec.block_length, dec.encoding.dim)


class ComposedDecoder(DecoderSpec):
    """``outer ⊛ inner``; ``inner`` is a decoder family with a fixed answer count ``l``."""

    def __init__(self, outer: DecoderSpec, inner: InnerFamily, cache_size: int = 4096):
        self.outer = outer
        self.family = inner
        self.field = outer.field
        l_in = getattr(inner, "l", None)
        if l_in is not None and l_in != outer.k + outer.l:
            raise CompositionError(f"l_in = k_out + l_out fails: {l_in} != {outer.k} + {outer.l}")
        shape = outer.sample_local.circuits
        ref = inner(shape.phi, shape.g + shape.f, self.field)
        s_out, n_in, N_in = outer.answer_size, ref.input_size, shape.size
        if not s_out <= n_in:
            raise CompositionError(f"s_out <= n_in fails: {s_out} > {n_in}")
        if not n_in <= N_in:
            raise CompositionError(f"n_in <= N_in fails: {n_in} > {N_in}")
        acc = composition_accounting(
            outer.k, outer.l, outer.randomness_bits, ref.k, ref.l, ref.randomness_bits, ref.answer_size,
            ref.block_length,
        )
        self.inner_ref = ref
        self.accounting = acc
        self.name = f"{getattr(outer, 'name', 'outer')}*{getattr(ref, 'name', 'inner')}"
        self.k = acc.provers
        self.l = acc.answers
        self.answer_size = acc.answer_size
        self.randomness_bits = acc.randomness_bits
        self.encoding = outer.encoding
        self.input_size = outer.input_size
        self.delta = outer.delta + ref.delta + ref.eta
        self._inner = lru_cache(maxsize=cache_size)(self._build_inner)

    # inner instances ------------------------------------------------------
    def outer_local(self, R_out: Hashable, j_out: Sequence[int]) -> LocalRound:
        return self.outer.local(R_out, j_out)

    def _build_inner(self, R_out: Hashable, j_out: tuple[int, ...]) -> tuple[LocalRound, DecoderSpec]:
        lo = self.outer.local(R_out, j_out)
        c = lo.circuits
        inner = self.family(c.phi, c.g + c.f, self.field)
        if _signature(inner) != _signature(self.inner_ref):
            raise ProtocolError("inner decoder parameters vary across outer rounds")
        return lo, inner

    def inner_at(self, R_out: Hashable, j_out: Sequence[int]) -> tuple[LocalRound, DecoderSpec]:
        """Outer round and the inner decoder built on its circuits (memoized)."""
        return self._inner(R_out, tuple(int(v) for v in j_out))

    # randomness ---------------------------------------------------------------
    def sample_randomness(self, rng: np.random.Generator) -> tuple:
        R_out = self.outer.sample_randomness(rng)
        R_in = self.inner_ref.sample_randomness(rng)
        j_in = self.inner_ref.sample_index(rng)
        return (R_out, R_in, j_in)

    def reference_randomness(self) -> tuple:
        return (self.outer.reference_randomness(), self.inner_ref.reference_randomness(),
                (0,) * self.inner_ref.encoding.dim)

    def sample_index(self, rng: np.random.Generator) -> tuple[int, ...]:
        return self.outer.sample_index(rng)

    # round ----------------------------------------------------------------------
    def local(self, R: Hashable, j: Sequence[int]) -> LocalRound:
        R_out, R_in, j_in = R
        j_out = tuple(int(v) for v in j)
        lo, inner = self.inner_at(R_out, j_out)
        li = inner.local(R_in, j_in)
        k_out = self.outer.k
        proj_out = li.output_forms[1:k_out]
        outs = li.output_forms[k_out:k_out + self.outer.l]
        prefix = (R_out, j_out)
        proj_queries = tuple(prefix + (q,) for q in li.proj_queries)
        proj_queries += ((lo.a_query, tuple(int(v) for v in j_in)),)
        proj_queries += lo.proj_queries
        names = ("inner_projection",) * len(li.projection_forms) + ("consistency",)
        names += ("outer_projection",) * len(proj_out)
        inner_view = li.viewer
        return LocalRound(
            field=self.field,
            a_query=prefix + (li.a_query,),
            proj_queries=proj_queries,
            view_size=li.view_size,
            viewer=inner_view,
            checks=tuple(("inner_predicate", f) for _, f in li.checks),
            projection_forms=li.projection_forms + (li.output_forms[0],) + proj_out,
            projection_names=names,
            output_forms=outs,
            order=CHECK_ORDER,
            info={"outer": lo, "inner": li, "inner_decoder": inner, "j_in": j_in},
        )

    def answer_view(self, query, answer) -> list[int]:
        R_out, j_out, w = query
        _, inner = self.inner_at(R_out, j_out)
        return inner.answer_view(w, answer)

    # proofs ---------------------------------------------------------------------
    def outer_view(self, query, answer) -> list[int]:
        return self.outer.answer_view(query, answer)

    def consistency_oracle(self, C: Callable) -> ProverOracle:
        """Honest ``C*(u, j_in) = E_in(view of C(u))_{j_in}``."""
        code = self.inner_ref.encoding

        def answer(q):
            u, j_in = q
            return code.encode_at(self.outer_view(u, C(u)), j_in)

        return ProverOracle("C*", answer)

    def assemble(self, outer_proof: Proof, inner_proof: Callable[[Hashable, tuple], Proof],
                 c_star: ProverOracle | None = None) -> Proof:
        """Composed proof from an outer proof and per-``(R_out, j_out)`` inner proofs."""
        k_in = self.inner_ref.k

        def A(q):
            R_out, j_out, w = q
            return inner_proof(R_out, j_out).A(w)

        def B(i):
            def answer(q):
                R_out, j_out, z = q
                return inner_proof(R_out, j_out).projections[i](z)
            return ProverOracle(f"B{i + 1}", answer)

        C_star = c_star if c_star is not None else self.consistency_oracle(outer_proof.A)
        D = tuple(ProverOracle(f"D{i + 1}", P.fn) for i, P in enumerate(outer_proof.projections))
        return Proof(ProverOracle("A", A), tuple(B(i) for i in range(k_in - 1)) + (C_star,) + D)

    def honest_proof(self, x: Sequence[int], outer_proof: Proof | None = None) -> Proof:
        outer_proof = outer_proof if outer_proof is not None else self.outer.honest_proof(x)
        C = outer_proof.A

        @lru_cache(maxsize=None)
        def inner_proof(R_out, j_out):
            lo, inner = self.inner_at(R_out, j_out)
            return inner.honest_proof(lo.view(C(lo.a_query)))

        return self.assemble(outer_proof, inner_proof)

    def expected_outputs(self, x: Sequence[int], j: Sequence[int]) -> tuple[int, ...]:
        return self.outer.expected_outputs(x, j)

    def params(self) -> dict:
        out = super().params()
        out.update({
            "outer": self.outer.params(),
            "inner": self.inner_ref.params(),
            "delta_out": self.outer.delta,
            "delta_in": self.inner_ref.delta,
            "eta_in": self.inner_ref.eta,
        })
        return out


def compose(outer: DecoderSpec, inner: InnerFamily, **kw) -> ComposedDecoder:
    """``outer ⊛ inner``; raises :class:`CompositionError` naming the failed precondition."""
    return ComposedDecoder(outer, inner, **kw)


def budget(decoders: Iterable[DecoderSpec]) -> float:
    """``delta_0 + sum (delta_i + eta_i)`` for a chain ``D_0 ⊛ D_1 ⊛ ...``."""
    ds = list(decoders)
    return ds[0].delta + sum(d.delta + d.eta for d in ds[1:])


def consistency_check_stats(rounds: Iterable[DecoderRound]) -> dict[str, int]:
    """First failing check per round, counted; accepted rounds count as ``accepted``."""
    c = Counter({name: 0 for name in CHECK_ORDER + ("format",)})
    c["accepted"] = 0
    for rd in rounds:
        c[rd.first_failure or "accepted"] += 1
    return dict(c)


def view_kernel(lo: LocalRound, prefer: int | None = 0) -> np.ndarray:
    """A nonzero ``kappa`` leaving every linear piece of ``lo``'s checks and projections unchanged.

    With ``prefer`` set, a ``kappa`` that moves ``outputs[prefer]`` is chosen when one exists.
    """
    p, s = lo.field.p, lo.view_size
    rows = []

    def add(lin):
        r = np.zeros(s, dtype=np.int64)
        for i, c in lin.terms:
            r[i] = (r[i] + c) % p
        rows.append(r)

    for form in [f for _, f in lo.checks] + list(lo.projection_forms):
        add(form.linear)
        for left, right in form.products:
            add(left)
            add(right)
    if any(f.products for f in lo.output_forms):
        raise ProtocolError("output forms must be linear")
    ker = nullspace_mod(np.vstack(rows), p)
    if ker.shape[0] == 0:
        raise ProtocolError("checks pin the whole view")
    if prefer is not None:
        out = np.zeros(s, dtype=np.int64)
        for i, c in lo.output_forms[prefer].linear.terms:
            out[i] = c
        for kappa in ker:
            if int(kappa @ out) % p:
                return kappa
    return ker[0]

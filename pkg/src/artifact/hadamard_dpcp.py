"""The 2-prover decoder built on the quadratic-Hadamard encoding of the V0 proof.

Layout.  ``pi = a ∘ b ∘ s`` has length ``m`` and ``B`` is expected to be
the Hadamard encoding of ``sigma = pi ∘ (pi ⊗ pi)`` in ``F^{m2}``, ``m2 = m + m^2``.
The 0-based position of ``pi_i pi_k`` inside ``sigma`` is ``m + i*m + k``.

Draw order from ``FieldRNG(R, p, "qh")``: ``beta`` (m), ``gamma`` (m), the
V0 combiner ``r`` (1), then ``x1, x2, x3`` (``m2`` each, redrawn on span
degeneracy).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .circuits import Circuit, QuadraticForm, QuadraticSystem, v0_combine, v0_compile
from .codes import qh_encode, qh_spec, qh_string
from .errors import InputError, MalformedAnswer, ProtocolError
from .field import PrimeField, check_numpy_modulus, matvec_mod, rref
from .protocol import DecoderSpec, LocalForm, LocalRound, Proof, ProverOracle, bits_for, linear
from .rand import FieldRNG, derive_key

MAX_RESAMPLES = 16
CHECK_ORDER = ("consistency", "quadratic", "multiplication")


class SubspaceQuery:
    """The canonical (RREF) basis of ``S``, sent to ``A``."""

    __slots__ = ("basis", "_key")

    def __init__(self, basis: np.ndarray):
        self.basis = basis
        self._key = None

    @property
    def key(self) -> int:
        if self._key is None:
            self._key = derive_key("subspace", self.basis)
        return self._key

    def __len__(self) -> int:
        return self.basis.shape[0]


def canonical_basis(vectors: np.ndarray, p: int, dim: int) -> tuple[np.ndarray, list[int]]:
    """RREF basis of ``span(vectors)``, extended by the unit vectors of the
    smallest free columns until it has ``dim`` rows."""
    rows, pivots = rref(vectors, p)
    if len(pivots) < dim:
        free = [c for c in range(vectors.shape[1]) if c not in set(pivots)][: dim - len(pivots)]
        extra = np.zeros((len(free), vectors.shape[1]), dtype=np.int64)
        extra[np.arange(len(free)), free] = 1
        rows, pivots = rref(np.vstack([rows, extra]), p)
    return rows, pivots


def quadratic_point(form: QuadraticForm, m: int, p: int) -> np.ndarray:
    """``z`` with ``<z, sigma> = form(pi) - c0`` for ``sigma = pi ∘ (pi ⊗ pi)``."""
    z = np.zeros(m + m * m, dtype=np.int64)
    for i, c in form.lin.items():
        z[i] = (z[i] + c) % p
    for (i, k), c in form.quad.items():
        z[m + i * m + k] = (z[m + i * m + k] + c) % p
    return z


def output_point(j: Sequence[int], n: int, m: int, p: int) -> np.ndarray:
    """``o_{l+1}``: embeds an index of ``QH_a`` into ``F^{m2}``."""
    o = np.zeros(m + m * m, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64) % p
    o[:n] = j[:n]
    for i in range(n):
        o[m + i * m: m + i * m + n] = j[n + i * n: n + (i + 1) * n]
    return o


@dataclass(frozen=True)
class QHFamily:
    """Builds a QH decoder for any ``(Phi, F)`` with exactly ``ell`` functions."""

    ell: int
    name: str = "qh"

    @property
    def l(self) -> int:
        return self.ell + 1

    def __call__(self, phi: Circuit, functions: Sequence[Circuit], field: PrimeField) -> "QHDecoder":
        if len(functions) != self.ell:
            raise InputError(f"family decodes {self.ell} functions, got {len(functions)}")
        return QHDecoder.from_circuits(phi, functions, field)


class QHDecoder(DecoderSpec):
    name = "qh"

    def __init__(self, sys: QuadraticSystem):
        if sys.pad_base is not None:
            raise InputError("the QH decoder expects an unpadded system")
        check_numpy_modulus(sys.field.p)
        self.sys = sys
        self.field = sys.field
        self.m = sys.num_vars
        self.m2 = self.m + self.m * self.m
        self.n = sys.n
        self.ell = sys.ell
        self.k = 2
        self.l = self.ell + 1
        self.answer_size = self.ell + 8
        if self.m2 < self.answer_size:
            raise ProtocolError(f"m2 = {self.m2} is below the subspace dimension {self.answer_size}")
        self.encoding = qh_spec(self.field, self.n)
        self.input_size = self.n
        self.draws = 2 * self.m + 1 + 3 * self.m2
        self.randomness_bits = bits_for(self.field.p ** self.draws)
        self.delta = float(self.field.p) ** -0.1

    @classmethod
    def from_circuits(cls, phi: Circuit, functions: Sequence[Circuit], field: PrimeField) -> "QHDecoder":
        return cls(v0_compile(phi, functions, field))

    # randomness ------------------------------------------------------------
    def sample_randomness(self, rng: np.random.Generator) -> int:
        return int(rng.integers(0, 1 << 63))

    def local(self, R: Hashable, j: Sequence[int]) -> LocalRound:
        p, m, m2, n, ell = self.field.p, self.m, self.m2, self.n, self.ell
        if len(j) != self.encoding.dim:
            raise InputError(f"index must have {self.encoding.dim} coordinates")
        rng = FieldRNG(R, p, domain="qh")
        beta = rng.elements(m)
        gamma = rng.elements(m)
        r = rng.element()
        form = v0_combine(self.sys, r)

        u1 = np.zeros(m2, dtype=np.int64)
        u1[:m] = beta
        u2 = np.zeros(m2, dtype=np.int64)
        u2[:m] = gamma
        u3 = np.zeros(m2, dtype=np.int64)
        u3[m:] = np.outer(beta, gamma).reshape(-1) % p
        z = quadratic_point(form, m, p)
        b0 = self.sys.segments["b"][0]
        outs = []
        for i in range(ell):
            o = np.zeros(m2, dtype=np.int64)
            o[b0 + i] = 1
            outs.append(o)
        outs.append(output_point(j, n, m, p))
        special = np.vstack([u1, u2, u3, z] + outs)
        dim = self.answer_size
        special_rank = len(rref(special, p)[1])

        for _ in range(MAX_RESAMPLES):
            xs = np.vstack([rng.elements(m2) for _ in range(3)])
            gens = np.vstack([xs, special])
            rank = len(rref(gens, p)[1])
            if rank - special_rank == 3:
                break
        else:
            raise ProtocolError(f"x1, x2, x3 stayed dependent after {MAX_RESAMPLES} draws")
        basis, pivots = canonical_basis(gens, p, dim)
        coords = gens[:, pivots]  # t-coordinates of every generator
        t_x1 = coords[0]
        t_u1, t_u2, t_u3, t_z = coords[3], coords[4], coords[5], coords[6]
        t_outs = coords[7:]

        checks = (
            ("quadratic", LocalForm(linear(t_z, p, const=form.c0))),
            ("multiplication", LocalForm(linear(-t_u3, p), ((linear(t_u1, p), linear(t_u2, p)),))),
        )
        output_forms = (LocalForm(linear(t_outs[-1], p)),) + tuple(LocalForm(linear(t, p)) for t in t_outs[:-1])

        query = SubspaceQuery(basis)
        info = {"x1": xs[0], "gens": gens, "basis": basis, "pivots": pivots, "coords": coords, "alpha0": form.c0, "r": r}
        return LocalRound(
            field=self.field,
            a_query=query,
            proj_queries=(xs[0],),
            view_size=dim,
            viewer=lambda answer: self.answer_view(query, answer),
            checks=checks,
            projection_forms=(LocalForm(linear(t_x1, p)),),
            projection_names=("consistency",),
            output_forms=output_forms,
            order=CHECK_ORDER,
            info=info,
        )

    def answer_view(self, query, answer) -> list[int]:
        try:
            vals = [int(v) for v in answer]
        except (TypeError, ValueError) as exc:
            raise MalformedAnswer(str(exc)) from exc
        if len(vals) != self.answer_size:
            raise MalformedAnswer(f"answer has {len(vals)} entries, expected {self.answer_size}")
        return vals

    # provers -----------------------------------------------------------------
    def string_proof(self, sigma: Sequence[int]) -> Proof:
        """``(A, B)`` with ``B = <., sigma>`` and ``A`` answering ``B`` on each basis vector."""
        p = self.field.p
        sig = np.asarray(sigma, dtype=np.int64) % p
        if sig.shape != (self.m2,):
            raise InputError(f"sigma must have {self.m2} entries")
        B = ProverOracle("B", lambda x: int(matvec_mod(np.asarray(x)[None, :], sig, p)[0]))
        A = ProverOracle("A", lambda q: tuple(int(v) for v in matvec_mod(q.basis, sig, p)))
        return Proof(A, (B,))

    def pi_proof(self, pi: Sequence[int]) -> Proof:
        return self.string_proof(qh_string(self.field, pi))

    def honest_proof(self, a: Sequence[int]) -> Proof:
        return self.pi_proof(self.sys.assignment(a))

    def expected_outputs(self, a: Sequence[int], j: Sequence[int]) -> tuple[int, ...]:
        b = tuple(f.evaluate(a, self.field)[0] for f in self.sys.functions)
        return (qh_encode(self.field, a)(j),) + b

    def params(self) -> dict:
        out = super().params()
        out.update({"m": self.m, "m2": self.m2, "ell": self.ell, "constraints": self.sys.num_constraints})
        return out

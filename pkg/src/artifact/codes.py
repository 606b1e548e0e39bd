"""Hadamard, quadratic-Hadamard and low-degree-extension codes with local decoding.

Code indices are tuples in ``F^dim``: ``dim = n`` for Hadamard, ``n + n^2`` for
QH and ``m`` for LDE.  Dense words enumerate indices in
``itertools.product(range(p), repeat=dim)`` order.  The brute-force list
decoder below is an oracle for tiny codes only.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import CapabilityError, InputError, UsageError
from .field import MultiPoly, PrimeField, interpolate_grid

KINDS = ("hadamard", "quadratic_hadamard", "lde")

# messages x indices visited by the brute-force decoder
BRUTE_FORCE_CAP = 2_000_000


def agreement_param(mu: float | Fraction) -> tuple[float, float]:
    """Return ``(tau, eta)`` with ``tau = (4 mu)^(1/3)`` and ``eta = 2 tau``."""
    mu = float(mu)
    if not 0.0 <= mu <= 1.0:
        raise InputError(f"relative agreement must lie in [0, 1], got {mu}")
    tau = (4.0 * mu) ** (1.0 / 3.0)
    return tau, 2.0 * tau


@dataclass(frozen=True)
class CodeSpec:
    kind: str
    field: PrimeField
    n: int
    H: tuple[int, ...] = ()
    m: int = 0
    mu: Fraction = dc_field(default=Fraction(0))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown code kind {self.kind!r}")
        if self.kind == "lde":
            h = len(self.H)
            if h < 1 or h >= self.field.p + 1:
                raise InputError("LDE needs 1 <= |H| <= p")
            if h ** self.m < self.n:
                raise InputError(f"h^m = {h ** self.m} < n = {self.n}")

    @property
    def h(self) -> int:
        return len(self.H)

    @property
    def dim(self) -> int:
        if self.kind == "hadamard":
            return self.n
        if self.kind == "quadratic_hadamard":
            return self.n + self.n * self.n
        return self.m

    @property
    def block_length(self) -> int:
        return self.field.p ** self.dim

    @property
    def eta(self) -> float:
        return agreement_param(self.mu)[1]

    @property
    def tau(self) -> float:
        return agreement_param(self.mu)[0]

    # enumeration ----------------------------------------------------------
    def indices(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(range(self.field.p), repeat=self.dim)

    def messages(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(range(self.field.p), repeat=self.n)

    def index_of(self, alpha: Sequence[int]) -> int:
        """Position of ``alpha`` in :meth:`indices` order."""
        pos = 0
        for a in alpha:
            pos = pos * self.field.p + int(a)
        return pos

    def encoder(self, x: Sequence[int]) -> Callable[[tuple[int, ...]], int]:
        if self.kind == "hadamard":
            return hadamard_encode(self.field, x).oracle
        if self.kind == "quadratic_hadamard":
            return qh_encode(self.field, x).oracle
        poly = lde_encode(self.field, x, self.H, self.m)
        return poly.evaluate

    def encode_dense(self, x: Sequence[int]) -> tuple[int, ...]:
        enc = self.encoder(x)
        return tuple(enc(j) for j in self.indices())

    def encode_at(self, x: Sequence[int], j: Sequence[int]) -> int:
        return self.encoder(x)(tuple(j))


def hadamard_spec(field: PrimeField, n: int) -> CodeSpec:
    return CodeSpec("hadamard", field, n, mu=Fraction(1, field.p) if n else Fraction(0))


def qh_spec(field: PrimeField, n: int) -> CodeSpec:
    return CodeSpec("quadratic_hadamard", field, n, mu=Fraction(1, field.p) if n else Fraction(0))


def lde_spec(field: PrimeField, n: int, h: int, m: int) -> CodeSpec:
    # The declared agreement uses per-variable degree h; the stored interpolant has degree h-1.
    mu = min(Fraction(h * m, field.p), Fraction(1))
    return CodeSpec("lde", field, n, H=tuple(range(h)), m=m, mu=mu)


@dataclass(frozen=True)
class Word:
    """A word over a code's index set, either an oracle or a dense table."""

    code: CodeSpec
    oracle: Callable[[tuple[int, ...]], int]
    dense: tuple[int, ...] | None = None

    def __call__(self, j: Sequence[int]) -> int:
        return self.oracle(tuple(int(v) for v in j))

    @classmethod
    def from_dense(cls, code: CodeSpec, values: Sequence[int]) -> "Word":
        p = code.field.p
        vals = tuple(int(v) % p for v in values)
        if len(vals) != code.block_length:
            raise InputError(f"dense word needs {code.block_length} entries, got {len(vals)}")
        return cls(code, lambda j: vals[code.index_of(j)], vals)

    def table(self) -> tuple[int, ...]:
        if self.dense is not None:
            return self.dense
        return tuple(self.oracle(j) for j in self.code.indices())


def hadamard_encode(field: PrimeField, a: Sequence[int]) -> Word:
    p = field.p
    a = np.array([int(v) % p for v in a], dtype=object)
    code = hadamard_spec(field, len(a))

    def oracle(alpha: tuple[int, ...]) -> int:
        if len(alpha) != len(a):
            raise UsageError("index dimension mismatch")
        return int(sum(int(x) * int(y) for x, y in zip(alpha, a)) % p)

    return Word(code, oracle)


def qh_string(field: PrimeField, a: Sequence[int]) -> list[int]:
    """``a ∘ (a ⊗ a)``: position ``i*n + j`` (1-based i, j) holds ``a_i a_j``."""
    p = field.p
    a = [int(v) % p for v in a]
    return a + [(x * y) % p for x in a for y in a]


def qh_encode(field: PrimeField, a: Sequence[int]) -> Word:
    p = field.p
    s = qh_string(field, a)
    code = qh_spec(field, len(a))

    def oracle(delta: tuple[int, ...]) -> int:
        if len(delta) != len(s):
            raise UsageError("index dimension mismatch")
        return sum(int(x) * y for x, y in zip(delta, s)) % p

    return Word(code, oracle)


def lde_point(index: int, h: int, m: int) -> tuple[int, ...]:
    """Grid point ``x`` with ``x~ = x_1 + x_2 h + ... + 1 = index`` (1-based)."""
    k = index - 1
    if not 0 <= k < h ** m:
        raise InputError(f"index {index} outside 1..{h ** m}")
    digits = []
    for _ in range(m):
        digits.append(k % h)
        k //= h
    return tuple(digits)


def lde_index(x: Sequence[int], h: int) -> int:
    """Inverse of :func:`lde_point`."""
    return 1 + sum(int(v) * h ** c for c, v in enumerate(x))


def lde_encode(field: PrimeField, a: Sequence[int], H: Sequence[int], m: int) -> MultiPoly:
    h = len(H)
    if h ** m < len(a):
        raise InputError(f"h^m = {h ** m} < n = {len(a)}")
    if h > field.p:
        raise InputError("H larger than the field")
    a = [int(v) % field.p for v in a]
    n = len(a)

    def value(point: tuple[int, ...]) -> int:
        idx = lde_index([H.index(v) for v in point], h)
        return a[idx - 1] if idx <= n else 0

    return interpolate_grid(value, H, m, field)


# ---------------------------------------------------------------------------
# brute-force decoding


@lru_cache(maxsize=32)
def _dense_codebook(code: CodeSpec) -> tuple[list[tuple[int, ...]], np.ndarray]:
    count = code.field.p ** code.n
    if count * code.block_length > BRUTE_FORCE_CAP:
        raise CapabilityError(
            f"brute force over {count} messages x {code.block_length} indices exceeds {BRUTE_FORCE_CAP}"
        )
    msgs = list(code.messages())
    book = np.array([code.encode_dense(x) for x in msgs], dtype=np.int64)
    book.setflags(write=False)
    return msgs, book


def admissible_list(w: Word, tau: float | Fraction) -> list[tuple[int, ...]]:
    """All messages whose codeword agrees with ``w`` on at least a ``tau`` fraction."""
    msgs, book = _dense_codebook(w.code)
    table = np.array(w.table(), dtype=np.int64)
    agree = (book == table).sum(axis=1)
    N = w.code.block_length
    tau = Fraction(tau).limit_denominator(10**9) if not isinstance(tau, Fraction) else tau
    out = [x for x, a in zip(msgs, agree) if Fraction(int(a), N) >= tau]
    mu = w.code.mu
    if tau > 0 and tau * tau >= 4 * mu:
        assert len(out) <= 2 / tau, "list-size bound violated"
    return out


def local_decode(w: Word, j: Sequence[int], tau: float | Fraction) -> tuple[int, ...] | None:
    """Unique admissible message consistent with ``w`` at ``j``; ``None`` plays the role of ⊥."""
    j = tuple(int(v) for v in j)
    wj = w(j)
    hits = [x for x in admissible_list(w, tau) if w.code.encode_at(x, j) == wj]
    return hits[0] if len(hits) == 1 else None


def local_decode_all(w: Word, tau: float | Fraction) -> list[tuple[int, ...] | None]:
    """Decoding function ``W`` on every index, computed in one pass."""
    code = w.code
    table = np.array(w.table(), dtype=np.int64)
    msgs, book = _dense_codebook(code)
    adm = set(admissible_list(w, tau))
    idx = [i for i, x in enumerate(msgs) if x in adm]
    out: list[tuple[int, ...] | None] = []
    for pos in range(code.block_length):
        hits = [i for i in idx if book[i, pos] == table[pos]]
        out.append(msgs[hits[0]] if len(hits) == 1 else None)
    return out


def ambiguous_measure(w: Word, y: Sequence[int], tau: float | Fraction) -> Fraction:
    """Exact measure of ``{j : E(y)_j = w_j and W(j) != y}``."""
    code = w.code
    y = tuple(int(v) % code.field.p for v in y)
    v = code.encode_dense(y)
    table = w.table()
    W = local_decode_all(w, tau)
    bad = sum(1 for pos in range(code.block_length) if v[pos] == table[pos] and W[pos] != y)
    return Fraction(bad, code.block_length)


def measured_agreement(code: CodeSpec) -> Fraction:
    """Exact maximum agreement fraction between two distinct codewords."""
    msgs, book = _dense_codebook(code)
    best = 0
    for i in range(len(msgs)):
        for k in range(i + 1, len(msgs)):
            if (book[i] != book[k]).any():
                best = max(best, int((book[i] == book[k]).sum()))
    return Fraction(best, code.block_length)

"""Prime-field arithmetic and sparse multivariate polynomials.

Elements are stored as plain ints in ``[0, p)`` throughout the package; the
:class:`FieldElement` wrapper exists for callers who want operator syntax and
field-mismatch checking.  Vectorised helpers work on ``numpy.int64`` arrays
and are only valid while ``p**2`` times the reduction length fits in 63 bits,
which holds for every desk-scale modulus (``p < 2**24``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, InputError, UsageError

Exponent = tuple[int, ...]

# numpy kernels keep intermediate products in int64
NUMPY_MODULUS_LIMIT = 1 << 24


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class PrimeField:
    """GF(p) for a prime ``p``; instances compare equal iff moduli agree."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        if not isinstance(p, int) or not is_prime(p):
            raise InputError(f"modulus {p!r} is not prime")
        self.p = p

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("GF", self.p))

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def __len__(self) -> int:
        return self.p

    # int-level arithmetic -------------------------------------------------
    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise DomainError(f"0 has no inverse in GF({self.p})")
        return pow(a, self.p - 2, self.p)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a % self.p, e, self.p)

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    def elements(self) -> range:
        return range(self.p)

    @property
    def bits(self) -> float:
        return float(np.log2(self.p))


class FieldElement:
    """An element of a specific :class:`PrimeField`."""

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        self.field = field
        self.value = int(value) % field.p

    def _coerce(self, other: object) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise UsageError(f"mixed fields: {self.field} and {other.field}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.p
        raise UsageError(f"cannot combine FieldElement with {type(other).__name__}")

    def _wrap(self, v: int) -> "FieldElement":
        return FieldElement(v, self.field)

    def __add__(self, other):
        return self._wrap(self.value + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.value - self._coerce(other))

    def __rsub__(self, other):
        return self._wrap(self._coerce(other) - self.value)

    def __mul__(self, other):
        return self._wrap(self.value * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.value)

    def inverse(self) -> "FieldElement":
        return self._wrap(self.field.inv(self.value))

    def __truediv__(self, other):
        return self * self._wrap(self._coerce(other)).inverse()

    def __rtruediv__(self, other):
        return self._wrap(self._coerce(other)) * self.inverse()

    def __pow__(self, e: int):
        return self._wrap(self.field.pow(self.value, e))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.field.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field.p, self.value))

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.p})"


# ---------------------------------------------------------------------------
# modular linear algebra on numpy arrays


def check_numpy_modulus(p: int) -> None:
    if p >= NUMPY_MODULUS_LIMIT:
        raise UsageError(f"vectorised kernels need p < 2^24, got {p}")


def rref(matrix: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``matrix`` over GF(p).

    Returns the nonzero rows and their pivot columns.
    """
    M = np.array(matrix, dtype=np.int64) % p
    rows, cols = M.shape
    pivots: list[int] = []
    r = 0
    c = 0
    while r < rows and c < cols:
        live = np.flatnonzero(M[r:, c:].any(axis=0))
        if live.size == 0:
            break
        c += int(live[0])
        pr = r + int(np.flatnonzero(M[r:, c])[0])
        if pr != r:
            M[[r, pr]] = M[[pr, r]]
        M[r] = (M[r] * pow(int(M[r, c]), p - 2, p)) % p
        factors = M[:, c].copy()
        factors[r] = 0
        if factors.any():
            M = (M - np.outer(factors, M[r])) % p
        pivots.append(c)
        r += 1
        c += 1
    return M[:r], pivots


def nullspace_mod(M: np.ndarray, p: int) -> np.ndarray:
    """Basis (rows) of ``{v : M v = 0}`` over GF(p), one vector per free column."""
    M = np.atleast_2d(np.asarray(M, dtype=np.int64)) % p
    cols = M.shape[1]
    rows, pivots = rref(M, p) if M.size else (np.zeros((0, cols), dtype=np.int64), [])
    free = [c for c in range(cols) if c not in set(pivots)]
    out = np.zeros((len(free), cols), dtype=np.int64)
    for k, f in enumerate(free):
        out[k, f] = 1
        for r, pc in enumerate(pivots):
            out[k, pc] = (-rows[r, f]) % p
    return out


def matvec_mod(M: np.ndarray, v: np.ndarray, p: int) -> np.ndarray:
    """``M @ v mod p`` for reduced int64 operands, chunked so partial sums cannot overflow."""
    M = np.asarray(M, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    chunk = max(1, ((1 << 62) // max((p - 1) ** 2, 1)))
    n = v.shape[0]
    if n <= chunk:
        return (M @ v) % p
    acc = np.zeros(M.shape[:-1], dtype=np.int64)
    for s in range(0, n, chunk):
        acc = (acc + (M[..., s:s + chunk] @ v[s:s + chunk]) % p) % p
    return acc


def solve_mod(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], p: int) -> list[list[int]]:
    """Solve ``A X = B`` over GF(p) for square invertible ``A`` using Python ints."""
    n = len(A)
    k = len(B[0]) if B else 0
    M = [[a % p for a in A[i]] + [b % p for b in B[i]] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            raise DomainError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        iv = pow(M[col][col], p - 2, p)
        M[col] = [(v * iv) % p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [(a - f * b) % p for a, b in zip(M[r], M[col])]
    return [row[n:n + k] for row in M]


@lru_cache(maxsize=256)
def vandermonde_inverse(nodes: tuple[int, ...], p: int) -> tuple[tuple[int, ...], ...]:
    """Inverse of ``V[a][e] = nodes[a]**e``; row ``e`` maps values to the ``x**e`` coefficient."""
    n = len(nodes)
    if len(set(x % p for x in nodes)) != n:
        raise InputError("interpolation nodes must be distinct in the field")
    V = [[pow(x, e, p) for e in range(n)] for x in nodes]
    eye = [[int(i == j) for j in range(n)] for i in range(n)]
    return tuple(tuple(row) for row in solve_mod(V, eye, p))


def lagrange_basis_values(H: Sequence[int], x: np.ndarray, p: int) -> np.ndarray:
    """``L[..., a] = L_{H[a]}(x)`` for the Lagrange basis on ``H``; ``x`` any int array."""
    x = np.asarray(x, dtype=np.int64) % p
    out = np.empty(x.shape + (len(H),), dtype=np.int64)
    for a, ha in enumerate(H):
        num = np.ones_like(x)
        den = 1
        for hb in H:
            if hb == ha:
                continue
            num = (num * ((x - hb) % p)) % p
            den = (den * (ha - hb)) % p
        out[..., a] = (num * pow(den, p - 2, p)) % p
    return out


def powers_table(x: np.ndarray, max_exp: int, p: int) -> np.ndarray:
    """``T[..., e] = x**e mod p`` for ``e = 0..max_exp``."""
    x = np.asarray(x, dtype=np.int64) % p
    T = np.empty(x.shape + (max_exp + 1,), dtype=np.int64)
    T[..., 0] = 1
    for e in range(1, max_exp + 1):
        T[..., e] = (T[..., e - 1] * x) % p
    return T


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class MultiPoly:
    """Sparse polynomial over GF(p) in ``num_vars`` variables.

    ``terms`` maps exponent tuples to nonzero coefficients in ``[0, p)``.
    Optional ``var_bound`` / ``total_bound`` declare degree ceilings that every
    stored exponent must respect; they are checked on construction.
    """

    field: PrimeField
    num_vars: int
    terms: Mapping[Exponent, int]
    var_bound: int | None = None
    total_bound: int | None = None

    def __post_init__(self):
        p = self.field.p
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(v) for v in e)
            if len(e) != self.num_vars:
                raise UsageError(f"exponent {e} has wrong length for {self.num_vars} variables")
            c = int(c) % p
            if c:
                clean[e] = c
        object.__setattr__(self, "terms", clean)
        if self.var_bound is not None and clean and self.individual_degree > self.var_bound:
            raise InputError(f"individual degree {self.individual_degree} exceeds bound {self.var_bound}")
        if self.total_bound is not None and clean and self.degree > self.total_bound:
            raise InputError(f"total degree {self.degree} exceeds bound {self.total_bound}")

    # constructors --------------------------------------------------------
    @classmethod
    def zero(cls, field: PrimeField, num_vars: int) -> "MultiPoly":
        return cls(field, num_vars, {})

    @classmethod
    def constant(cls, field: PrimeField, num_vars: int, c: int) -> "MultiPoly":
        return cls(field, num_vars, {(0,) * num_vars: c})

    @classmethod
    def variable(cls, field: PrimeField, num_vars: int, i: int) -> "MultiPoly":
        e = [0] * num_vars
        e[i] = 1
        return cls(field, num_vars, {tuple(e): 1})

    @classmethod
    def from_univariate(cls, field: PrimeField, num_vars: int, var: int, coeffs: Sequence[int]) -> "MultiPoly":
        terms = {}
        for k, c in enumerate(coeffs):
            e = [0] * num_vars
            e[var] = k
            terms[tuple(e)] = c
        return cls(field, num_vars, terms)

    # properties ----------------------------------------------------------
    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        return max((sum(e) for e in self.terms), default=-1)

    @property
    def individual_degree(self) -> int:
        if not self.terms:
            return -1
        return max((max(e) if e else 0) for e in self.terms)

    def degree_in(self, var: int) -> int:
        return max((e[var] for e in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    # arithmetic ----------------------------------------------------------
    def _check(self, other: "MultiPoly") -> None:
        if not isinstance(other, MultiPoly):
            raise UsageError("expected a MultiPoly")
        if other.field != self.field:
            raise UsageError(f"mixed fields: {self.field} and {other.field}")
        if other.num_vars != self.num_vars:
            raise UsageError("variable count mismatch")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.field, self.num_vars, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.field, self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def scale(self, c: int) -> "MultiPoly":
        return MultiPoly(self.field, self.num_vars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, np.integer, FieldElement)):
            return self.scale(int(other))
        self._check(other)
        p = self.field.p
        out: dict[Exponent, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = (out.get(e, 0) + c1 * c2) % p
        return MultiPoly(self.field, self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        result = MultiPoly.constant(self.field, self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.field == other.field and self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.field.p, self.num_vars, frozenset(self.terms.items())))

    # evaluation ----------------------------------------------------------
    def evaluate(self, x: Sequence[int]) -> int:
        if len(x) != self.num_vars:
            raise UsageError(f"point has {len(x)} coordinates, polynomial has {self.num_vars} variables")
        p = self.field.p
        x = [int(v) % p for v in x]
        total = 0
        for e, c in self.terms.items():
            term = c
            for xi, ei in zip(x, e):
                if ei:
                    term = term * pow(xi, ei, p) % p
            total += term
        return total % p

    __call__ = evaluate

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate at each row of ``X`` (shape ``(N, num_vars)``)."""
        return PolyBatch([self]).evaluate(X)[:, 0]

    def substitute(self, assignment: Mapping[int, int]) -> "MultiPoly":
        """Fix some variables to constants; the variable count is unchanged."""
        p = self.field.p
        out: dict[Exponent, int] = {}
        for e, c in self.terms.items():
            e2 = list(e)
            for var, val in assignment.items():
                if e2[var]:
                    c = c * pow(int(val) % p, e2[var], p) % p
                    e2[var] = 0
            k = tuple(e2)
            out[k] = (out.get(k, 0) + c) % p
        return MultiPoly(self.field, self.num_vars, out)

    def compose(self, subs: Sequence["MultiPoly"]) -> "MultiPoly":
        """``self(subs[0], ..., subs[m-1])`` where each ``subs[i]`` shares a variable set."""
        if len(subs) != self.num_vars:
            raise UsageError("need one substitution per variable")
        if not subs:
            return self
        k = subs[0].num_vars
        one = MultiPoly.constant(self.field, k, 1)
        cache: dict[tuple[int, int], MultiPoly] = {}

        def power(i: int, e: int) -> MultiPoly:
            if e == 0:
                return one
            if (i, e) not in cache:
                cache[(i, e)] = power(i, e - 1) * subs[i]
            return cache[(i, e)]

        acc: dict[Exponent, int] = {}
        p = self.field.p
        for e, c in self.terms.items():
            term = MultiPoly.constant(self.field, k, c)
            for i, ei in enumerate(e):
                if ei:
                    term = term * power(i, ei)
            for te, tc in term.terms.items():
                acc[te] = (acc.get(te, 0) + tc) % p
        return MultiPoly(self.field, k, acc)

    def __repr__(self) -> str:
        if not self.terms:
            return f"MultiPoly(0 over {self.field})"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"x{i + 1}^{k}" if k > 1 else f"x{i + 1}" for i, k in enumerate(e) if k)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return "MultiPoly(" + " + ".join(parts) + f" over {self.field})"


class PolyBatch:
    """Several polynomials in the same variables compiled for vectorised evaluation."""

    def __init__(self, polys: Sequence[MultiPoly]):
        if not polys:
            raise UsageError("empty batch")
        self.field = polys[0].field
        self.num_vars = polys[0].num_vars
        check_numpy_modulus(self.field.p)
        exps, coefs, groups = [], [], []
        for g, f in enumerate(polys):
            if f.field != self.field or f.num_vars != self.num_vars:
                raise UsageError("batch polynomials must share field and variables")
            for e, c in f.terms.items():
                exps.append(e)
                coefs.append(c)
                groups.append(g)
        self.count = len(polys)
        self.exps = np.array(exps, dtype=np.int64).reshape(-1, self.num_vars)
        self.coefs = np.array(coefs, dtype=np.int64)
        self.groups = np.array(groups, dtype=np.int64)
        self.max_exp = int(self.exps.max()) if self.exps.size else 0
        # terms are emitted group by group, so each group is a contiguous run
        self._present = np.unique(self.groups)
        self._starts = np.searchsorted(self.groups, self._present)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        p = self.field.p
        X = np.atleast_2d(np.asarray(X, dtype=np.int64)) % p
        if X.shape[1] != self.num_vars:
            raise UsageError("dimension mismatch")
        if not self.coefs.size:
            return np.zeros((X.shape[0], self.count), dtype=np.int64)
        T = powers_table(X, self.max_exp, p)  # (N, m, E)
        vals = np.ones((X.shape[0], len(self.coefs)), dtype=np.int64)
        for v in range(self.num_vars):
            vals = (vals * T[:, v, :][:, self.exps[:, v]]) % p
        vals = (vals * self.coefs) % p
        out = np.zeros((X.shape[0], self.count), dtype=np.int64)
        out[:, self._present] = np.add.reduceat(vals, self._starts, axis=1) % p
        return out


def interpolate_grid(
    values: Mapping[tuple[int, ...], int] | Callable[[tuple[int, ...]], int],
    H: Sequence[int],
    m: int,
    field: PrimeField,
) -> MultiPoly:
    """Unique polynomial of individual degree < |H| that matches ``values`` on ``H^m``."""
    H = [int(h) % field.p for h in H]
    if not H:
        raise InputError("H must be nonempty")
    h = len(H)
    p = field.p
    table = np.zeros((h,) * m, dtype=object)
    for idx in itertools.product(range(h), repeat=m):
        point = tuple(H[i] for i in idx)
        if callable(values):
            v = values(point)
        else:
            if point not in values:
                raise InputError(f"grid point {point} missing from table")
            v = values[point]
        table[idx] = int(v) % p
    Vinv = np.array(vandermonde_inverse(tuple(H), p), dtype=object)
    coef = table
    for axis in range(m):
        coef = np.moveaxis(np.tensordot(Vinv, coef, axes=([1], [axis])), 0, axis) % p
    terms = {}
    for idx in itertools.product(range(h), repeat=m):
        c = int(coef[idx]) if m else int(coef)
        if c:
            terms[idx] = c
    if m == 0:
        terms = {(): int(table) % p} if int(table) % p else {}
    return MultiPoly(field, m, terms, var_bound=h - 1)


def eval_poly(f: MultiPoly, x: Sequence[int]) -> int:
    """Evaluate ``f`` at ``x``."""
    return f.evaluate(x)


def grid_points(H: Sequence[int], m: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(H, repeat=m)

"""Circuits, arithmetization and the quadratic initial verifier V0.

Wire numbering: wires ``0..n-1`` are inputs and wire ``n + g`` is the output
of gate ``g``.  An arithmetic circuit is *satisfied* by ``x`` when every
output wire equals ``accept_value``: 1 for arithmetized Boolean circuits, 0
for the zero-convention predicates the decoders generate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import InputError, UsageError
from .field import MultiPoly, PrimeField
from .rand import FieldRNG

BOOLEAN_OPS = frozenset({"AND", "NOT"})
ARITH_OPS = frozenset({"ADD", "MUL", "SCALE", "CONST", "SUB_FROM_ONE"})
ARITY = {"AND": 2, "NOT": 1, "ADD": 2, "MUL": 2, "SCALE": 1, "CONST": 0, "SUB_FROM_ONE": 1}


@dataclass(frozen=True)
class Gate:
    op: str
    args: tuple[int, ...]
    const: int | None = None


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]
    flavor: str = "arithmetic"
    accept_value: int = 1

    def __post_init__(self):
        if self.flavor not in ("boolean", "arithmetic"):
            raise InputError(f"unknown flavor {self.flavor!r}")
        allowed = BOOLEAN_OPS if self.flavor == "boolean" else ARITH_OPS
        for g, gate in enumerate(self.gates):
            if gate.op not in allowed:
                raise InputError(f"gate {g + 1}: op {gate.op} not allowed in a {self.flavor} circuit")
            if len(gate.args) != ARITY[gate.op]:
                raise InputError(f"gate {g + 1}: {gate.op} takes {ARITY[gate.op]} arguments")
            if gate.op in ("SCALE", "CONST") and gate.const is None:
                raise InputError(f"gate {g + 1}: {gate.op} needs a constant")
            for a in gate.args:
                if not 0 <= a < self.n + g:
                    raise InputError(f"gate {g + 1}: reference {a} is not an earlier wire")
        for w in self.outputs:
            if not 0 <= w < self.n + len(self.gates):
                raise InputError(f"output wire {w} out of range")

    @property
    def size(self) -> int:
        return len(self.gates)

    @property
    def num_wires(self) -> int:
        return self.n + len(self.gates)

    def trace(self, x: Sequence[int], field: PrimeField | None = None) -> list[int]:
        """Values on every wire; Boolean circuits ignore ``field``."""
        if len(x) != self.n:
            raise InputError(f"circuit expects {self.n} inputs, got {len(x)}")
        if self.flavor == "boolean":
            vals = [int(bool(v)) for v in x]
            for gate in self.gates:
                if gate.op == "AND":
                    vals.append(vals[gate.args[0]] & vals[gate.args[1]])
                else:
                    vals.append(1 - vals[gate.args[0]])
            return vals
        if field is None:
            raise UsageError("arithmetic evaluation needs a field")
        p = field.p
        vals = [int(v) % p for v in x]
        for gate in self.gates:
            a = [vals[i] for i in gate.args]
            if gate.op == "ADD":
                v = a[0] + a[1]
            elif gate.op == "MUL":
                v = a[0] * a[1]
            elif gate.op == "SCALE":
                v = gate.const * a[0]
            elif gate.op == "CONST":
                v = gate.const
            else:
                v = 1 - a[0]
            vals.append(v % p)
        return vals

    def evaluate(self, x: Sequence[int], field: PrimeField | None = None) -> tuple[int, ...]:
        vals = self.trace(x, field)
        return tuple(vals[w] for w in self.outputs)

    def satisfied(self, x: Sequence[int], field: PrimeField | None = None) -> bool:
        target = self.accept_value if field is None else self.accept_value % field.p
        return all(v == target for v in self.evaluate(x, field))

    def pruned(self) -> "Circuit":
        """Drop gates that no output depends on."""
        live = set()
        stack = [w for w in self.outputs if w >= self.n]
        while stack:
            w = stack.pop()
            if w in live:
                continue
            live.add(w)
            stack.extend(a for a in self.gates[w - self.n].args if a >= self.n)
        keep = sorted(live)
        remap = {i: i for i in range(self.n)}
        gates = []
        for w in keep:
            g = self.gates[w - self.n]
            remap[w] = self.n + len(gates)
            gates.append(Gate(g.op, tuple(remap[a] for a in g.args), g.const))
        return Circuit(self.n, tuple(gates), tuple(remap[w] for w in self.outputs), self.flavor, self.accept_value)

    def with_outputs(self, outputs: Sequence[int], accept_value: int | None = None) -> "Circuit":
        av = self.accept_value if accept_value is None else accept_value
        return Circuit(self.n, self.gates, tuple(outputs), self.flavor, av).pruned()


def arithmetize(c: Circuit, field: PrimeField) -> Circuit:
    """AND becomes MUL and NOT becomes 1 - x; satisfaction stays "output = 1"."""
    if c.flavor != "boolean":
        raise InputError("arithmetize expects a boolean circuit")
    gates = []
    for gate in c.gates:
        if gate.op == "AND":
            gates.append(Gate("MUL", gate.args))
        elif gate.op == "NOT":
            gates.append(Gate("SUB_FROM_ONE", gate.args))
        else:
            raise InputError(f"non-boolean gate {gate.op} in boolean circuit")
    return Circuit(c.n, tuple(gates), c.outputs, "arithmetic", 1)


def to_zero_convention(c: Circuit) -> Circuit:
    """Append ``1 - out`` per output so satisfaction reads "every output is 0"."""
    if c.flavor != "arithmetic":
        raise InputError("convert to arithmetic first")
    if c.accept_value == 0:
        return c
    if c.accept_value != 1:
        raise InputError("only the 1-convention can be adapted")
    gates = list(c.gates)
    outs = []
    for w in c.outputs:
        gates.append(Gate("SUB_FROM_ONE", (w,)))
        outs.append(c.n + len(gates) - 1)
    return Circuit(c.n, tuple(gates), tuple(outs), "arithmetic", 0)


class CircuitBuilder:
    """Incremental construction of fan-in-2 arithmetic circuits.

    A ``rigid`` builder never shortcuts on coefficient values, so the gate
    count depends only on the call sequence.  Decoders use this to give their
    local circuits a data-independent size.
    """

    def __init__(self, n: int, p: int, rigid: bool = False):
        self.n = n
        self.p = p
        self.rigid = rigid
        self.gates: list[Gate] = []
        self._consts: dict[int, int] = {}

    def _push(self, gate: Gate) -> int:
        self.gates.append(gate)
        return self.n + len(self.gates) - 1

    def input(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise InputError(f"input {i} out of range")
        return i

    def const(self, c: int) -> int:
        c %= self.p
        if self.rigid:
            return self._push(Gate("CONST", (), c))
        if c not in self._consts:
            self._consts[c] = self._push(Gate("CONST", (), c))
        return self._consts[c]

    def add(self, a: int, b: int) -> int:
        return self._push(Gate("ADD", (a, b)))

    def mul(self, a: int, b: int) -> int:
        return self._push(Gate("MUL", (a, b)))

    def scale(self, c: int, a: int) -> int:
        c %= self.p
        if c == 1 and not self.rigid:
            return a
        return self._push(Gate("SCALE", (a,), c))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.scale(-1, b))

    def linear(self, coeffs: Sequence[tuple[int, int]], constant: int = 0) -> int:
        """``constant + sum c * wire`` over ``(c, wire)`` pairs with zero terms skipped."""
        acc = None
        for c, w in coeffs:
            if c % self.p == 0 and not self.rigid:
                continue
            t = self.scale(c, w)
            acc = t if acc is None else self.add(acc, t)
        if constant % self.p or acc is None or self.rigid:
            k = self.const(constant)
            acc = k if acc is None else self.add(acc, k)
        return acc

    def build(self, outputs: Sequence[int], accept_value: int = 0, prune: bool | None = None) -> Circuit:
        c = Circuit(self.n, tuple(self.gates), tuple(outputs), "arithmetic", accept_value)
        if prune is None:
            prune = not self.rigid
        return c.pruned() if prune else c


# ---------------------------------------------------------------------------
# text format

_LINE = re.compile(r"^g(\d+)\s*=\s*([A-Z_]+)((?:\s+\S+)*)\s*$")


def parse_circuit(text: str) -> tuple[Circuit, list[Circuit]]:
    """Parse the line format documented in ``docs/circuit_format.md``.

    Returns the predicate circuit and the function circuits (one per
    ``function`` line), all sharing the same gate list before pruning.
    """
    n = None
    gates: list[Gate] = []
    names: dict[str, int] = {}
    outputs: list[int] = []
    functions: list[int] = []
    ops_seen = set()

    def ref(tok: str, lineno: int) -> int:
        if tok in names:
            return names[tok]
        raise InputError(f"line {lineno}: unknown reference {tok!r}")

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()
        if head[0] == "inputs":
            if n is not None or len(head) != 2:
                raise InputError(f"line {lineno}: bad inputs declaration")
            n = int(head[1])
            names.update({f"x{i + 1}": i for i in range(n)})
            continue
        if n is None:
            raise InputError(f"line {lineno}: 'inputs <n>' must come first")
        if head[0] in ("output", "function"):
            if len(head) < 2:
                raise InputError(f"line {lineno}: {head[0]} needs a reference")
            target = outputs if head[0] == "output" else functions
            target.extend(ref(t, lineno) for t in head[1:])
            continue
        m = _LINE.match(line)
        if not m:
            raise InputError(f"line {lineno}: cannot parse {raw!r}")
        k, op, rest = int(m.group(1)), m.group(2), m.group(3).split()
        if k != len(gates) + 1:
            raise InputError(f"line {lineno}: expected g{len(gates) + 1}, got g{k}")
        if op not in ARITY:
            raise InputError(f"line {lineno}: unknown op {op}")
        const = None
        if op in ("CONST", "SCALE"):
            if not rest:
                raise InputError(f"line {lineno}: {op} needs a constant")
            const = int(rest[0])
            rest = rest[1:]
        if len(rest) != ARITY[op]:
            raise InputError(f"line {lineno}: {op} takes {ARITY[op]} arguments")
        gates.append(Gate(op, tuple(ref(t, lineno) for t in rest), const))
        names[f"g{k}"] = n + k - 1
        ops_seen.add(op)
    if n is None:
        raise InputError("missing 'inputs <n>' line")
    if not outputs:
        raise InputError("missing 'output' line")
    flavor = "boolean" if ops_seen <= BOOLEAN_OPS else "arithmetic"
    if flavor == "arithmetic" and ops_seen & BOOLEAN_OPS:
        raise InputError("mixing AND/NOT with arithmetic ops is not supported")
    base = Circuit(n, tuple(gates), tuple(outputs), flavor)
    funcs = [Circuit(n, tuple(gates), (w,), flavor).pruned() for w in functions]
    return base.pruned(), funcs


def format_circuit(c: Circuit, functions: Sequence[Circuit] = ()) -> str:
    if functions:
        raise UsageError("formatting of function circuits is not supported")

    def name(w: int) -> str:
        return f"x{w + 1}" if w < c.n else f"g{w - c.n + 1}"

    lines = [f"inputs {c.n}"]
    for g, gate in enumerate(c.gates):
        parts = [f"g{g + 1} = {gate.op}"]
        if gate.const is not None:
            parts.append(str(gate.const))
        parts.extend(name(a) for a in gate.args)
        lines.append(" ".join(parts))
    lines.append("output " + " ".join(name(w) for w in c.outputs))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# quadratic forms and V0


@dataclass(frozen=True)
class QuadraticForm:
    """``c0 + sum lin[i] t_i + sum quad[(i, k)] t_i t_k`` with ``i <= k``."""

    c0: int
    lin: dict[int, int]
    quad: dict[tuple[int, int], int]

    def evaluate(self, pi: Sequence[int], p: int) -> int:
        v = self.c0
        for i, c in self.lin.items():
            v += c * int(pi[i])
        for (i, k), c in self.quad.items():
            v += c * int(pi[i]) * int(pi[k])
        return v % p

    def to_multipoly(self, field: PrimeField, num_vars: int) -> MultiPoly:
        terms: dict[tuple[int, ...], int] = {}

        def put(e, c):
            terms[e] = terms.get(e, 0) + c

        put((0,) * num_vars, self.c0)
        for i, c in self.lin.items():
            e = [0] * num_vars
            e[i] = 1
            put(tuple(e), c)
        for (i, k), c in self.quad.items():
            e = [0] * num_vars
            e[i] += 1
            e[k] += 1
            put(tuple(e), c)
        return MultiPoly(field, num_vars, terms)

    @property
    def degree(self) -> int:
        if self.quad:
            return 2
        if self.lin:
            return 1
        return 0 if self.c0 else -1


def _form(p: int, c0: int = 0, lin: Iterable[tuple[int, int]] = (), quad: Iterable[tuple[int, int, int]] = ()) -> QuadraticForm:
    L: dict[int, int] = {}
    for i, c in lin:
        L[i] = (L.get(i, 0) + c) % p
    Q: dict[tuple[int, int], int] = {}
    for i, k, c in quad:
        key = (min(i, k), max(i, k))
        Q[key] = (Q.get(key, 0) + c) % p
    return QuadraticForm(c0 % p, {i: c for i, c in L.items() if c}, {k: c for k, c in Q.items() if c})


def combine_forms(forms: Sequence[QuadraticForm], weights: Sequence[int], p: int) -> QuadraticForm:
    c0 = 0
    L: dict[int, int] = {}
    Q: dict[tuple[int, int], int] = {}
    for f, w in zip(forms, weights):
        w = int(w)
        if not w:
            continue
        c0 += w * f.c0
        for i, c in f.lin.items():
            L[i] = (L.get(i, 0) + w * c) % p
        for k, c in f.quad.items():
            Q[k] = (Q.get(k, 0) + w * c) % p
    return QuadraticForm(c0 % p, {i: c for i, c in L.items() if c}, {k: c for k, c in Q.items() if c})


@dataclass(frozen=True)
class QuadraticSystem:
    """Constraints over ``pi = a' ∘ b ∘ s ∘ pad`` (0-based positions)."""

    field: PrimeField
    num_vars: int
    constraints: tuple[QuadraticForm, ...]
    labels: tuple[str, ...]
    segments: dict[str, tuple[int, int]]
    n: int
    ell: int
    phi: Circuit
    functions: tuple[Circuit, ...]
    pad_base: int | None = None
    combine_seed_space: str = "r uniform in F; p = sum_k r^(k-1) C_k"
    _gate_slots: tuple[tuple[int, int], ...] = dc_field(default=(), repr=False)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def gate_count(self) -> int:
        return self.phi.size + sum(f.size for f in self.functions)

    @property
    def n_padded(self) -> int:
        a0, a1 = self.segments["a"]
        return a1 - a0

    def trace(self, a: Sequence[int]) -> list[int]:
        """``pi`` with ``b = F(a)`` and the honest gate trace, satisfied or not."""
        p = self.field.p
        if len(a) != self.n:
            raise InputError(f"expected {self.n} inputs, got {len(a)}")
        pi = [0] * self.num_vars
        for i, v in enumerate(a):
            pi[i] = int(v) % p
        circuits = (self.phi,) + self.functions
        b0 = self.segments["b"][0]
        for ci, c in enumerate(circuits):
            vals = c.trace(a, self.field)
            off = self._gate_slots[ci][0]
            for g in range(c.size):
                pi[off + g] = vals[c.n + g]
            if ci > 0:
                pi[b0 + ci - 1] = vals[c.outputs[0]]
        return pi

    def assignment(self, a: Sequence[int]) -> list[int]:
        """Honest ``pi`` for a satisfying ``a``; raises for unsatisfying inputs."""
        if not self.phi.satisfied(a, self.field):
            raise InputError("assignment does not satisfy the predicate")
        return self.trace(a)

    def values(self, pi: Sequence[int]) -> list[int]:
        p = self.field.p
        return [c.evaluate(pi, p) for c in self.constraints]

    def satisfied_by(self, pi: Sequence[int]) -> bool:
        return not any(self.values(pi))


def v0_compile(phi: Circuit, functions: Sequence[Circuit], field: PrimeField, pad_base: int | None = None) -> QuadraticSystem:
    """Compile ``(phi, F_1..F_l)`` into one quadratic constraint per gate plus pins.

    With ``pad_base = h`` the input block is zero-padded to an ``h``-power and
    ``pi`` is padded so ``|pi| + 1`` is an ``h``-power; padded cells are pinned to 0.
    """
    if phi.flavor != "arithmetic" or any(f.flavor != "arithmetic" for f in functions):
        raise InputError("v0_compile expects arithmetic circuits")
    n = phi.n
    for f in functions:
        if f.n != n:
            raise InputError(f"function arity {f.n} differs from predicate arity {n}")
        if len(f.outputs) != 1:
            raise InputError("each function circuit must have exactly one output")
    p = field.p
    ell = len(functions)
    if pad_base is not None:
        if pad_base < 2:
            raise InputError("padding base must be at least 2")
        n_pad = pad_base
        while n_pad < n:
            n_pad *= pad_base
    else:
        n_pad = n
    circuits = (phi,) + tuple(functions)
    b0 = n_pad
    s0 = b0 + ell
    slots = []
    off = s0
    for c in circuits:
        slots.append((off, off + c.size))
        off += c.size
    used = off
    total = used
    if pad_base is not None:
        n1 = pad_base
        while n1 < used + 1:
            n1 *= pad_base
        total = n1 - 1

    cons: list[QuadraticForm] = []
    labels: list[str] = []
    for ci, c in enumerate(circuits):
        base = slots[ci][0]

        def var(w: int) -> int:
            return w if w < c.n else base + (w - c.n)

        for g, gate in enumerate(c.gates):
            s = base + g
            a = [var(w) for w in gate.args]
            if gate.op == "ADD":
                f = _form(p, 0, [(s, 1), (a[0], -1), (a[1], -1)])
            elif gate.op == "MUL":
                f = _form(p, 0, [(s, 1)], [(a[0], a[1], -1)])
            elif gate.op == "SCALE":
                f = _form(p, 0, [(s, 1), (a[0], -gate.const)])
            elif gate.op == "CONST":
                f = _form(p, -gate.const, [(s, 1)])
            else:  # SUB_FROM_ONE
                f = _form(p, -1, [(s, 1), (a[0], 1)])
            cons.append(f)
            labels.append(f"gate:{ci}:{g + 1}")
    phi_var = lambda w: w if w < n else slots[0][0] + (w - n)  # noqa: E731
    for w in phi.outputs:
        cons.append(_form(p, -phi.accept_value, [(phi_var(w), 1)]))
        labels.append("output")
    for i, f in enumerate(functions):
        w = f.outputs[0]
        src = w if w < n else slots[i + 1][0] + (w - n)
        cons.append(_form(p, 0, [(b0 + i, 1), (src, -1)]))
        labels.append(f"b:{i + 1}")
    for k in list(range(n, n_pad)) + list(range(used, total)):
        cons.append(_form(p, 0, [(k, 1)]))
        labels.append(f"pad:{k}")
    segments = {"a": (0, n_pad), "b": (b0, s0), "s": (s0, used), "pad": (used, total)}
    return QuadraticSystem(
        field, total, tuple(cons), tuple(labels), segments, n, ell, phi, tuple(functions), pad_base,
        _gate_slots=tuple(slots),
    )


def v0_combine(sys: QuadraticSystem, r: int) -> QuadraticForm:
    """``sum_k r^(k-1) C_k``: the Reed-Solomon combination at ``r``."""
    p = sys.field.p
    weights = [pow(int(r), k, p) for k in range(sys.num_constraints)]
    return combine_forms(sys.constraints, weights, p)


def v0_sample(sys: QuadraticSystem, seed: Hashable) -> QuadraticForm:
    """Draw ``r`` from ``seed`` and return the combined quadratic."""
    r = FieldRNG(seed, sys.field.p, domain="v0").element()
    return v0_combine(sys, r)


def v0_failure_count(sys: QuadraticSystem, pi: Sequence[int]) -> int:
    """Number of ``r`` in F with ``p_r(pi) = 0`` (exhaustive)."""
    p = sys.field.p
    e = sys.values(pi)
    rs = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.int64)
    pw = np.ones(p, dtype=np.int64)
    for ek in e:
        acc = (acc + ek * pw) % p
        pw = (pw * rs) % p
    return int((acc == 0).sum())


def v0_witness(phi: Circuit, functions: Sequence[Circuit], a: Sequence[int], field: PrimeField):
    """``(b, s)`` for satisfying ``a``, else ``None`` (⊥)."""
    if not phi.satisfied(a, field):
        return None
    b = tuple(f.evaluate(a, field)[0] for f in functions)
    s: list[int] = []
    for c in (phi,) + tuple(functions):
        s.extend(c.trace(a, field)[c.n:])
    return b, tuple(s)


def find_witness(phi: Circuit, field: PrimeField | None = None, max_inputs: int = 20) -> tuple[int, ...] | None:
    """Exhaustive search over ``{0,1}^n`` in lexicographic order."""
    if phi.n > max_inputs:
        raise InputError(f"exhaustive search limited to {max_inputs} inputs")
    for k in range(2 ** phi.n):
        x = tuple((k >> (phi.n - 1 - i)) & 1 for i in range(phi.n))
        if phi.satisfied(x, field):
            return x
    return None


def find_non_witness(phi: Circuit, field: PrimeField | None = None, max_inputs: int = 20) -> tuple[int, ...] | None:
    if phi.n > max_inputs:
        raise InputError(f"exhaustive search limited to {max_inputs} inputs")
    for k in range(2 ** phi.n):
        x = tuple((k >> (phi.n - 1 - i)) & 1 for i in range(phi.n))
        if not phi.satisfied(x, field):
            return x
    return None

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact.circuits import (
    Circuit, CircuitBuilder, Gate, arithmetize, find_non_witness, find_witness, format_circuit, parse_circuit,
    to_zero_convention, v0_combine, v0_compile, v0_failure_count, v0_sample, v0_witness,
)
from artifact.errors import InputError, UsageError
from artifact.field import PrimeField
from artifact.library import BUILTIN, load_circuit

F101 = PrimeField(101)


@st.composite
def boolean_circuits(draw, max_inputs=6, max_gates=8):
    n = draw(st.integers(1, max_inputs))
    gates = []
    for g in range(draw(st.integers(1, max_gates))):
        wires = n + g
        if draw(st.booleans()):
            gates.append(Gate("AND", (draw(st.integers(0, wires - 1)), draw(st.integers(0, wires - 1)))))
        else:
            gates.append(Gate("NOT", (draw(st.integers(0, wires - 1)),)))
    return Circuit(n, tuple(gates), (n + len(gates) - 1,), "boolean")


def truth(c: Circuit, x) -> int:
    """Direct recursive Boolean evaluation, independent of ``Circuit.trace``."""
    def wire(w):
        if w < c.n:
            return x[w]
        g = c.gates[w - c.n]
        if g.op == "AND":
            return wire(g.args[0]) and wire(g.args[1])
        return 1 - wire(g.args[0])
    return int(wire(c.outputs[0]))


def and_system():
    phi, funcs = load_circuit("and", F101)
    return v0_compile(phi, funcs, F101)


# circuits and arithmetization ---------------------------------------------

def test_arithmetize_gates():
    not_c = arithmetize(Circuit(1, (Gate("NOT", (0,)),), (1,), "boolean"), F101)
    assert not_c.gates[0].op == "SUB_FROM_ONE" and not_c.evaluate((0,), F101) == (1,)
    and_c = arithmetize(Circuit(2, (Gate("AND", (0, 1)),), (2,), "boolean"), F101)
    assert and_c.gates[0].op == "MUL" and and_c.evaluate((1, 1), F101) == (1,)


def test_arithmetize_rejects_arithmetic_input():
    with pytest.raises(InputError):
        arithmetize(Circuit(1, (Gate("CONST", (), 3),), (1,)), F101)


def test_boolean_flavor_rejects_arithmetic_ops():
    with pytest.raises(InputError):
        Circuit(2, (Gate("MUL", (0, 1)),), (2,), "boolean")


def test_forward_reference_rejected():
    with pytest.raises(InputError):
        Circuit(2, (Gate("AND", (0, 2)),), (2,), "boolean")


@given(boolean_circuits())
def test_arithmetize_matches_boolean_evaluation(c):
    a = arithmetize(c, F101)
    for x in itertools.product((0, 1), repeat=c.n):
        assert a.evaluate(x, F101)[0] == truth(c, x) == c.evaluate(x)[0]


def test_arithmetize_ten_inputs_exhaustive():
    rng = np.random.default_rng(0)
    gates = []
    for g in range(30):
        w = 10 + g
        if rng.random() < 0.6:
            gates.append(Gate("AND", (int(rng.integers(w)), int(rng.integers(w)))))
        else:
            gates.append(Gate("NOT", (int(rng.integers(w)),)))
    c = Circuit(10, tuple(gates), (39,), "boolean")
    a = arithmetize(c, F101)
    for x in itertools.product((0, 1), repeat=10):
        assert a.evaluate(x, F101)[0] == truth(c, x)


def test_zero_convention_adapter():
    phi, _ = load_circuit("and", F101)
    z = to_zero_convention(phi)
    assert z.accept_value == 0
    for x in itertools.product((0, 1), repeat=2):
        assert z.satisfied(x, F101) == phi.satisfied(x, F101)


def test_pruning_drops_dead_gates():
    c = Circuit(2, (Gate("AND", (0, 1)), Gate("NOT", (0,))), (3,), "boolean").pruned()
    assert c.size == 1 and c.gates[0] == Gate("NOT", (0,))


def test_rigid_builder_size_is_data_independent():
    sizes = set()
    for coeffs in [(0, 0), (1, 0), (3, 5)]:
        b = CircuitBuilder(2, 101, rigid=True)
        out = b.linear([(coeffs[0], 0), (coeffs[1], 1)], constant=coeffs[0])
        sizes.add(b.build([out]).size)
    assert len(sizes) == 1
    loose = CircuitBuilder(2, 101)
    assert loose.build([loose.linear([(1, 0), (0, 1)])]).size == 0


# text format --------------------------------------------------------------

@pytest.mark.parametrize("name", BUILTIN)
def test_builtin_circuits_parse(name):
    phi, funcs = load_circuit(name, F101)
    assert phi.flavor == "arithmetic"
    assert find_witness(phi, F101) is not None


def test_five_gate_circuit_semantics():
    phi, funcs = load_circuit("five_fn", F101)
    assert phi.size == 5 and len(funcs) == 2
    for x in itertools.product((0, 1), repeat=4):
        expected = int(x[0] and x[1] and not ((1 - x[2]) and x[3]))
        assert phi.evaluate(x, F101) == (expected,)
        assert funcs[0].evaluate(x, F101) == (1 - x[2],) and funcs[1].evaluate(x, F101) == (x[3],)


@given(boolean_circuits())
def test_format_parse_roundtrip(c):
    c = c.pruned()
    back, funcs = parse_circuit(format_circuit(c))
    assert back == c and funcs == []


def test_arithmetic_format_roundtrip():
    c = Circuit(2, (Gate("CONST", (), 7), Gate("SCALE", (0,), 3), Gate("ADD", (3, 1)), Gate("MUL", (4, 2))), (5,))
    back, _ = parse_circuit(format_circuit(c))
    assert back == c


@pytest.mark.parametrize("text, fragment", [
    ("g1 = AND x1 x2\noutput g1", "must come first"),
    ("inputs 2\ng2 = AND x1 x2\noutput g2", "expected g1"),
    ("inputs 2\ng1 = AND x1 x3\noutput g1", "unknown reference"),
    ("inputs 2\ng1 = XOR x1 x2\noutput g1", "unknown op"),
    ("inputs 2\ng1 = AND x1\noutput g1", "takes 2"),
    ("inputs 2\ng1 = AND x1 x2", "missing 'output'"),
    ("inputs 2\ng1 = AND x1 x2\ng2 = ADD g1 x1\noutput g2", "mixing"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(InputError, match=fragment):
        parse_circuit(text)


def test_format_functions_unsupported():
    phi, funcs = load_circuit("five_fn", F101)
    with pytest.raises(UsageError):
        format_circuit(phi, funcs)


def test_missing_circuit_file(tmp_path):
    with pytest.raises(InputError):
        load_circuit(str(tmp_path / "nope.circ"), F101)


# V0 -----------------------------------------------------------------------------

def test_and_system_constraints():
    sys = and_system()
    assert sys.num_constraints == 2 and sys.labels == ("gate:0:1", "output")
    # s_g - x1 x2 and s_g - 1 with pi = (x1, x2, s_g)
    assert sys.constraints[0].lin == {2: 1} and sys.constraints[0].quad == {(0, 1): 100}
    assert sys.constraints[1].c0 == 100 and sys.constraints[1].lin == {2: 1}
    assert sys.values([1, 1, 1]) == [0, 0]
    assert sys.values(sys.trace((1, 0))) == [0, 100]


def test_v0_witness_examples():
    phi, funcs = load_circuit("and", F101)
    assert v0_witness(phi, funcs, (1, 1), F101) == ((), (1,))
    assert v0_witness(phi, funcs, (0, 1), F101) is None
    assert v0_witness(phi, funcs, (1, 1), F101) == v0_witness(phi, funcs, (1, 1), F101)


def test_assignment_rejects_non_witness():
    with pytest.raises(InputError):
        and_system().assignment((1, 0))


def test_arity_mismatch():
    phi, _ = load_circuit("and", F101)
    f = Circuit(3, (), (0,))
    with pytest.raises(InputError):
        v0_compile(phi, [f], F101)


@given(boolean_circuits())
def test_constraint_count_is_gates_plus_one_plus_ell(phi):
    phi = arithmetize(phi.pruned(), F101)
    funcs = [Circuit(phi.n, (Gate("SUB_FROM_ONE", (0,)),), (phi.n,)), Circuit(phi.n, (), (0,))]
    for ell in range(3):
        sys = v0_compile(phi, funcs[:ell], F101)
        assert sys.num_constraints == sys.gate_count + 1 + ell


def test_honest_combination_vanishes_for_every_r():
    sys = and_system()
    pi = sys.assignment((1, 1))
    assert v0_failure_count(sys, pi) == 101
    assert all(v0_combine(sys, r).evaluate(pi, 101) == 0 for r in range(101))
    assert v0_sample(sys, 7).evaluate(pi, 101) == 0


def test_violated_pin_caught_except_at_zero():
    sys = and_system()
    pi = sys.trace((1, 0))
    zeros = [r for r in range(101) if v0_combine(sys, r).evaluate(pi, 101) == 0]
    assert zeros == [0]
    assert v0_failure_count(sys, pi) == 1


def test_single_constraint_system_never_fooled():
    phi = Circuit(1, (), (0,))
    sys = v0_compile(phi, [], F101)
    assert sys.num_constraints == 1
    assert v0_failure_count(sys, [0]) == 0


@given(st.lists(st.integers(0, 100), min_size=12, max_size=12))
def test_v0_error_at_most_T_minus_one_over_F(pi):
    phi, funcs = load_circuit("five_fn", F101)
    sys = v0_compile(phi, funcs, F101)
    pi = pi[: sys.num_vars] + [0] * (sys.num_vars - len(pi))
    count = sum(1 for r in range(101) if v0_combine(sys, r).evaluate(pi, 101) == 0)
    assert count == v0_failure_count(sys, pi)
    if not sys.satisfied_by(pi):
        assert count <= sys.num_constraints - 1


def test_padding_to_powers_of_h():
    phi, funcs = load_circuit("five_fn", F101)
    sys = v0_compile(phi, funcs, F101, pad_base=2)
    assert sys.n_padded == 4 and (sys.num_vars + 1) & sys.num_vars == 0
    a = find_witness(phi, F101)
    pi = sys.assignment(a)
    assert sys.satisfied_by(pi)
    lo, hi = sys.segments["pad"]
    for k in range(lo, hi):
        bad = list(pi)
        bad[k] = 1
        assert not sys.satisfied_by(bad)


def test_padding_three_inputs_base_two():
    c = arithmetize(Circuit(3, (Gate("AND", (0, 1)), Gate("AND", (3, 2))), (4,), "boolean"), F101)
    sys = v0_compile(c, [], F101, pad_base=2)
    assert sys.segments["a"] == (0, 4)
    pi = sys.assignment((1, 1, 1))
    assert pi[3] == 0 and sys.satisfied_by(pi)


def test_witness_search():
    phi, _ = load_circuit("and", F101)
    assert find_witness(phi, F101) == (1, 1)
    assert find_non_witness(phi, F101) == (0, 0)
    with pytest.raises(InputError):
        find_witness(Circuit(21, (), (0,)), F101)

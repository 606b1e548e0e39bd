import itertools

import numpy as np
import pytest

from artifact.circuits import find_non_witness, find_witness
from artifact.codes import lde_encode
from artifact.errors import CapabilityError, InputError, UsageError
from artifact.field import MultiPoly, PrimeField
from artifact.geometry import RandomAnswer
from artifact.library import load_circuit
from artifact.protocol import Proof, ProverOracle
from artifact.rm_dpcp import (
    RMDecoder, RMFamily, bundle, digits, indicator_poly, materialize, phat_value, rm_unbundle,
)
from oracles import poly_eval

F401 = PrimeField(401)


def decoder(name="and", field=F401):
    phi, funcs = load_circuit(name, field)
    return RMDecoder.from_circuits(phi, funcs, field)


def rounds(dec, count, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield dec.sample_randomness(rng), dec.sample_index(rng)


def grid(P):
    return np.array(list(itertools.product(P.H, repeat=P.m3)), dtype=np.int64)


def honest(name="and", field=F401):
    dec = decoder(name, field)
    a = find_witness(dec.sys.phi, field)
    pi = dec.sys.assignment(a)
    return dec, a, pi, dec.evaluator(pi)


# parameters and plan ----------------------------------------------------------

def test_and_parameters():
    P = decoder().P
    assert (P.h, P.m1, P.m2, P.m3) == (2, 1, 2, 4)
    assert P.T == 4 * 401 + 1
    assert 2 ** P.t >= P.T + 1 > 2 ** (P.t - 1)
    assert P.d == P.h * P.t + 2 * P.h * P.m3
    assert P.z0 == (1, 1)


def test_probe_count_formula():
    dec = decoder()
    plan = dec.plan(11)
    assert len(plan) == (2 + 1) * 4 + 5 == 17
    assert dec.answer_size == 1 + 1 + 17
    assert dec.local(11, (3,)).view_size == dec.answer_size


def test_plan_is_deterministic():
    dec = decoder()
    a, b = dec.plan(123), dec.plan(123)
    assert a.probes == b.probes and a.r == b.r and a.phat_x == b.phat_x
    assert dec.plan(124).probes != a.probes


def test_honest_plan_relations_hold():
    dec, a, pi, ev = honest("five_fn")
    for R, j in rounds(dec, 20):
        lo = dec.local(R, j)
        view = lo.view(dec.pi_proof(pi).A(lo.a_query))
        assert all(ok for _, ok in lo.predicate(view))


def test_field_too_small_for_curve():
    with pytest.raises(CapabilityError):
        decoder(field=PrimeField(5))


def test_desk_scale_flag():
    assert decoder().params()["desk_scale_ok"]
    assert not decoder(field=PrimeField(101)).params()["desk_scale_ok"]


# honest construction identities -----------------------------------------------

@pytest.mark.parametrize("name", ["and", "five_fn"])
def test_sum_of_phat_g3_vanishes(name):
    dec, a, pi, ev = honest(name)
    P = dec.P
    X = grid(P)
    g3, _, _ = ev.partial_sums(X)
    for r in np.random.default_rng(0).choice(P.p, 100, replace=False):
        w = [pow(int(r), k, P.p) for k in range(dec.tables.shape[0])]
        assert int((phat_value(dec.tables, w, X, P) * g3).sum() % P.p) == 0


def test_two_ldes_coincide():
    dec, a, pi, ev = honest("five_fn")
    P = dec.P
    g1 = lde_encode(dec.field, pi[: dec.sys.n_padded], P.H, P.m1)
    rng = np.random.default_rng(1)
    X = rng.integers(0, P.p, (100, P.m1))
    padded = np.hstack([X, np.zeros((100, P.m2 - P.m1), dtype=np.int64)])
    assert list(ev.g2(padded)) == [g1.evaluate(tuple(x)) for x in X]


def test_embedding_chain():
    dec, a, pi, ev = honest("five_fn")
    P = dec.P
    rng = np.random.default_rng(2)
    X3 = rng.integers(0, P.p, (100, P.m3))
    y1 = np.tile(np.array(P.y(1)), (100, 1))
    assert np.array_equal(ev(np.hstack([y1, X3])), ev.partial_sums(X3)[0])
    X2 = rng.integers(0, P.p, (100, P.m2))
    with_z0 = np.hstack([X2, np.tile(np.array(P.z0), (100, 1))])
    assert np.array_equal(ev.partial_sums(with_z0)[0], ev.g2(X2))
    assert int(ev.g2(np.array([P.z0]))[0]) == 1


def test_partial_sums_telescope():
    dec, a, pi, ev = honest("five_fn")
    P = dec.P
    p = P.p
    X = grid(P)
    g3 = ev.partial_sums(X)[0]
    first = np.array([(hv,) + (0,) * (P.m3 - 1) for hv in P.H])
    _, S1 = ev.components(first)
    for r in range(0, p, 17):
        w = [pow(r, k, p) for k in range(dec.tables.shape[0])]
        total = int((phat_value(dec.tables, w, X, P) * g3).sum() % p)
        assert int(S1[:, r, 0].sum() % p) == total
    rng = np.random.default_rng(3)
    x = rng.integers(0, p, P.m3)
    for i in range(2, P.m3 + 1):
        prev = np.concatenate([x[: i - 1], np.zeros(P.m3 - i + 1, dtype=np.int64)])
        nxt = np.array([np.concatenate([x[: i - 1], [hv], np.zeros(P.m3 - i, dtype=np.int64)]) for hv in P.H])
        _, Sp = ev.components(prev[None, :])
        _, Sn = ev.components(nxt)
        assert np.array_equal(Sp[0, :, i - 2], Sn[:, :, i - 1].sum(axis=0) % p)


def test_top_partial_sum_is_phat_times_g3():
    dec, a, pi, ev = honest()
    P = dec.P
    X = np.random.default_rng(4).integers(0, P.p, (30, P.m3))
    g3, S = ev.components(X)
    for r in (0, 1, 200):
        w = [pow(r, k, P.p) for k in range(dec.tables.shape[0])]
        assert np.array_equal(S[:, r, P.m3 - 1], phat_value(dec.tables, w, X, P) * g3 % P.p)


# materialised polynomials at GF(19) --------------------------------------------

@pytest.fixture(scope="module")
def small():
    F = PrimeField(19)
    dec, a, pi, ev = honest("and", F)
    return dec, pi, ev, materialize(dec, pi, cap_terms=10**7)


def test_materialized_degree_ledger(small):
    dec, pi, ev, M = small
    P = dec.P
    assert M["g1"].individual_degree <= P.h - 1
    assert M["g2"].evaluate(P.z0) == 1
    for s in M["components"]:
        assert s.degree <= 2 * P.m3 * P.h
    assert M["g4"].degree <= P.d
    lo = dec.local(5, (2,))
    A = dec.pi_proof(pi).A(lo.a_query)
    assert A.degree == P.d * lo.a_query.degree == P.answer_degree


def test_materialized_matches_evaluator(small):
    dec, pi, ev, M = small
    P = dec.P
    rng = np.random.default_rng(5)
    Z = rng.integers(0, P.p, (40, P.m4))
    assert [poly_eval(M["g4"].terms, tuple(z), P.p) for z in Z] == list(ev(Z))
    X = rng.integers(0, P.p, (10, P.m3))
    for i in (1, 2, 3, P.s_index(7, 4), P.T):
        comp = M["components"][i - 1]
        assert [comp.evaluate(tuple(x)) for x in X] == list(ev.component(i, X))


def test_materialized_unbundle(small):
    dec, pi, ev, M = small
    P = dec.P
    parts = rm_unbundle(M["g4"], P.h, P.t, 3)
    rng = np.random.default_rng(6)
    for x in rng.integers(0, P.p, (20, P.m3)):
        x = tuple(x)
        assert [q.evaluate(x) for q in parts] == [c.evaluate(x) for c in M["components"][:3]]


def test_materialize_cap():
    dec, a, pi, ev = honest()
    with pytest.raises(CapabilityError):
        materialize(dec, pi)


# bundling -----------------------------------------------------------------------

def random_poly(rng, F, m, deg):
    return MultiPoly(F, m, {e: int(rng.integers(F.p)) for e in itertools.product(range(deg + 1), repeat=m)})


def test_bundle_roundtrip():
    F = PrimeField(31)
    rng = np.random.default_rng(7)
    qs = [random_poly(rng, F, 2, 2) for _ in range(5)]
    B = bundle(qs, 2, 3)
    back = rm_unbundle(B, 2, 3, 5)
    for x in rng.integers(0, 31, (100, 2)):
        x = tuple(x)
        assert [q.evaluate(x) for q in back] == [q.evaluate(x) for q in qs]
        for i, q in enumerate(qs, start=1):
            assert B.evaluate(digits(i, 2, 3) + x) == q.evaluate(x)


def test_single_component_bundle():
    F = PrimeField(31)
    q = random_poly(np.random.default_rng(8), F, 2, 1)
    B = bundle([q], 2, 1)
    assert rm_unbundle(B, 2, 1, 1)[0] == q


def test_indicators():
    F = PrimeField(31)
    for i in range(8):
        w = indicator_poly(i, 2, 3, F)
        for j in range(8):
            assert w.evaluate(digits(j, 2, 3)) == int(i == j)


def test_unbundle_block_too_small():
    B = bundle([MultiPoly.zero(PrimeField(31), 1)], 2, 1)
    with pytest.raises(UsageError):
        rm_unbundle(B, 2, 1, 2)
    with pytest.raises(InputError):
        bundle([MultiPoly.zero(PrimeField(31), 1)] * 2, 2, 1)


# protocol -------------------------------------------------------------------

@pytest.mark.parametrize("name", ["and", "or", "five"])
def test_completeness(name):
    dec, a, pi, ev = honest(name)
    proof = dec.honest_proof(a)
    for R, j in rounds(dec, 100, seed=9):
        rd = dec.run(proof, R, j)
        assert rd.accepted and rd.outputs == dec.expected_outputs(a, j)


def test_function_outputs_decoded():
    dec, a, pi, ev = honest("five_fn")
    proof = dec.honest_proof(a)
    for R, j in rounds(dec, 20, seed=10):
        rd = dec.run(proof, R, j)
        assert rd.outputs[1:] == tuple(f.evaluate(a, dec.field)[0] for f in dec.sys.functions)
        g1 = lde_encode(dec.field, a, (0, 1), dec.P.m1)
        assert rd.outputs[0] == g1.evaluate(j)


def test_mismatched_B_rejected_by_consistency():
    dec, a, pi, ev = honest()
    proof = dec.honest_proof(a)
    B = proof.projections[0]
    off = ProverOracle("B", lambda x: (B(x) + 1) % 401)
    for R, j in rounds(dec, 30, seed=11):
        assert dec.run(Proof(proof.A, (off,)), R, j).first_failure == "consistency"


def test_malformed_answers():
    dec, a, pi, ev = honest()
    B = dec.honest_proof(a).projections
    too_high = Proof(ProverOracle("A", lambda g: RandomAnswer(401, 1, dec.P.answer_degree + 1)), B)
    table = Proof(ProverOracle("A", lambda g: (1, 2, 3)), B)
    for proof in (too_high, table):
        assert dec.run(proof, 1, (0,)).first_failure == "format"


def test_honest_proof_requires_witness():
    dec = decoder()
    with pytest.raises(InputError):
        dec.honest_proof(find_non_witness(dec.sys.phi, dec.field))


def test_family_and_index_checks():
    phi, funcs = load_circuit("five_fn", F401)
    assert RMFamily(2).l == 3 and RMFamily(2)(phi, funcs, F401).l == 3
    with pytest.raises(InputError):
        RMFamily(0)(phi, funcs, F401)
    with pytest.raises(InputError):
        decoder().local(0, (1, 2))


def test_materialized_sum_to_zero_every_r(small):
    dec, pi, ev, M = small
    P = dec.P
    pts = list(itertools.product(P.H, repeat=P.m3))
    for phat in M["phat"]:
        assert sum(phat.evaluate(x) * M["g3"].evaluate(x) for x in pts) % P.p == 0

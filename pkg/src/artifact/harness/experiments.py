"""Completeness and soundness runs over sampled ``(R, j)``.

Trials are split into batches; batch ``b`` draws from
``default_rng([seed, b])``, so the seed space is partitioned and any batch
can be recomputed alone.  Rounds run sequentially in one process.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import asdict, dataclass, field as dc_field
from typing import Hashable, Sequence

import numpy as np

from ..adversaries import make_adversary, soundness_bound
from ..circuits import find_witness
from ..composition import CHECK_ORDER as COMPOSED_ORDER, ComposedDecoder
from ..errors import InputError, UsageError
from ..field import PrimeField
from ..hadamard_dpcp import QHDecoder, QHFamily
from ..library import load_circuit
from ..protocol import DecoderRound, DecoderSpec, Proof, bits_for
from ..rm_dpcp import RMDecoder, RMFamily
from .stats import Envelope, sigma, wilson_interval

DPCPS = ("qh", "rm", "composed")


@dataclass
class ExperimentConfig:
    circuit: str = "and"
    p: int = 101
    dpcp: str = "qh"
    recipe: str | None = None
    h: int = 2
    trials: int = 1000
    seed: int = 0
    adversary: str | None = None
    rho: float = 0.1
    rounds: int = 1
    batch_size: int = 100
    timing: bool = False

    def validate(self) -> None:
        if self.trials < 1:
            raise UsageError("trial count must be at least 1")
        if self.batch_size < 1:
            raise UsageError("batch size must be at least 1")
        if self.rounds < 1:
            raise UsageError("repetition count must be at least 1")
        if self.dpcp not in DPCPS:
            raise UsageError(f"dpcp must be one of {DPCPS}")
        if self.recipe is not None and self.dpcp != "composed":
            raise UsageError("a recipe needs --dpcp composed")
        PrimeField(self.p)
        recipe_tokens(self)

    def describe(self) -> dict:
        out = asdict(self)
        out.pop("timing")
        return out


def recipe_tokens(cfg: ExperimentConfig) -> list[str]:
    if cfg.dpcp != "composed":
        return [cfg.dpcp]
    tokens = [t.strip() for t in (cfg.recipe or "qh*qh").split("*")]
    if len(tokens) < 2 or any(t not in ("qh", "rm") for t in tokens):
        raise UsageError(f"recipe {cfg.recipe!r} must look like 'qh*qh' or 'rm*qh*qh'")
    return tokens


def build_decoder(cfg: ExperimentConfig):
    """``(decoder, phi, functions)`` for the configured circuit and recipe."""
    cfg.validate()
    field = PrimeField(cfg.p)
    phi, fns = load_circuit(cfg.circuit, field)
    tokens = recipe_tokens(cfg)
    base = {"qh": QHDecoder, "rm": RMDecoder}[tokens[0]]
    dec: DecoderSpec = (RMDecoder.from_circuits(phi, fns, field, h=cfg.h) if base is RMDecoder
                        else QHDecoder.from_circuits(phi, fns, field))
    for tok in tokens[1:]:
        ell = dec.k + dec.l - 1
        family = QHFamily(ell) if tok == "qh" else RMFamily(ell, h=cfg.h)
        dec = ComposedDecoder(dec, family)
    if cfg.rounds > 1:
        dec = repeat_sequential(dec, cfg.rounds)
    return dec, phi, fns


# ---------------------------------------------------------------------------
# repetition


class RepeatedDecoder:
    """``k`` independent rounds on one proof; accepts iff every round accepts."""

    def __init__(self, base: DecoderSpec, k: int):
        if k < 1:
            raise UsageError("k must be at least 1")
        self.base = base
        self.rounds = k
        self.name = f"{base.name}^{k}"
        self.field = base.field
        self.randomness_bits = k * base.randomness_bits

    def __getattr__(self, item):
        return getattr(self.base, item)

    def sample_randomness(self, rng: np.random.Generator) -> tuple:
        return tuple(self.base.sample_randomness(rng) for _ in range(self.rounds))

    def run(self, proof: Proof, R: Sequence[Hashable], j: Sequence[int]) -> DecoderRound:
        rounds = [self.base.run(proof, r, j) for r in R]
        checks = tuple(c for rd in rounds for c in rd.checks)
        ok = all(rd.accepted for rd in rounds)
        return DecoderRound(rounds[0].queries, checks, rounds[0].projection_values,
                            rounds[0].outputs if ok else None, rounds[0].view)

    def params(self) -> dict:
        out = self.base.params()
        out.update({"decoder": self.name, "rounds": self.rounds, "randomness_bits": self.randomness_bits})
        return out


def repeat_sequential(decoder: DecoderSpec, k: int):
    """Naive sequential repetition; ``k = 1`` returns ``decoder`` itself."""
    if k < 1:
        raise UsageError("k must be at least 1")
    return decoder if k == 1 else RepeatedDecoder(decoder, k)


def base_decoder(dec) -> DecoderSpec:
    return dec.base if isinstance(dec, RepeatedDecoder) else dec


# ---------------------------------------------------------------------------
# trials


@dataclass
class Tally:
    trials: int = 0
    accepted: int = 0
    statistic: int = 0
    correct: int = 0
    failures: Counter = dc_field(default_factory=Counter)
    batches: list = dc_field(default_factory=list)


def run_trials(dec, proof: Proof, cfg: ExperimentConfig, reference: Sequence[int] | None,
               statistic: str) -> Tally:
    tally = Tally()
    done = 0
    b = 0
    while done < cfg.trials:
        n = min(cfg.batch_size, cfg.trials - done)
        rng = np.random.default_rng([cfg.seed, b])
        acc = stat = corr = 0
        for _ in range(n):
            R = dec.sample_randomness(rng)
            j = dec.sample_index(rng)
            rd = dec.run(proof, R, j)
            tally.failures[rd.first_failure or "accepted"] += 1
            good = None
            if rd.accepted:
                acc += 1
                if reference is not None:
                    good = tuple(rd.outputs) == tuple(dec.expected_outputs(reference, j))
                    corr += bool(good)
            if statistic == "accept" and rd.accepted:
                stat += 1
            elif statistic == "accept_wrong" and rd.accepted and good is False:
                stat += 1
            elif statistic == "reject_or_wrong" and not (rd.accepted and good):
                stat += 1
        tally.batches.append({"batch": b, "first_trial": done, "trials": n, "accepted": acc,
                              "statistic_count": stat, "correct": corr})
        tally.trials += n
        tally.accepted += acc
        tally.statistic += stat
        tally.correct += corr
        done += n
        b += 1
    return tally


def _check_names(dec) -> list[str]:
    d = base_decoder(dec)
    if isinstance(d, ComposedDecoder):
        names = list(COMPOSED_ORDER)
    else:
        names = list(d.sample_local.order)
        # every check name a round can report, in protocol order
        names += [n for n, _ in d.sample_local.checks if n not in names]
    return names + ["format", "accepted"]


def _failures(dec, tally: Tally) -> dict:
    names = _check_names(dec)
    names += sorted(k for k in tally.failures if k not in names)
    return {k: tally.failures.get(k, 0) for k in names}


def accounting_block(dec) -> dict:
    d = base_decoder(dec)
    out = {"provers": d.k, "answers": d.l, "answer_size": d.answer_size, "randomness_bits": d.randomness_bits}
    if isinstance(d, ComposedDecoder):
        o, i = d.outer, d.inner_ref
        log_t = bits_for(i.block_length)
        out.update({
            "k_out": o.k, "k_in": i.k, "l_out": o.l, "l_in": i.l, "s_out": o.answer_size, "s_in": i.answer_size,
            "r_out": o.randomness_bits, "r_in": i.randomness_bits, "log2_t_in": log_t,
            "identities_hold": (d.k == o.k + i.k and d.l == o.l and d.answer_size == i.answer_size
                                and d.randomness_bits == o.randomness_bits + i.randomness_bits + log_t
                                and i.l == o.k + o.l),
        })
    return out


def _rate(count: int, trials: int) -> float:
    return count / trials


def _report(kind: str, cfg: ExperimentConfig, dec, tally: Tally, envelope: dict, passed: bool,
            statistic: str, adversary: dict | None, elapsed: float) -> dict:
    n = tally.trials
    lo, hi = wilson_interval(tally.accepted, n)
    slo, shi = wilson_interval(tally.statistic, n)
    report = {
        "kind": kind,
        "config": cfg.describe(),
        "decoder": dec.params(),
        "adversary": adversary,
        "trials": n,
        "accepted": tally.accepted,
        "acceptance_rate": _rate(tally.accepted, n),
        "acceptance_wilson95": [lo, hi],
        "statistic": statistic,
        "statistic_count": tally.statistic,
        "statistic_rate": _rate(tally.statistic, n),
        "statistic_wilson95": [slo, shi],
        "correct_on_accepted": (tally.correct / tally.accepted) if tally.accepted else None,
        "failures": _failures(dec, tally),
        "envelope": envelope,
        "passed": bool(passed),
        "accounting": accounting_block(dec),
        "randomness_bits_per_trial": dec.randomness_bits,
        "randomness_bits_total": dec.randomness_bits * n,
        "batches": tally.batches,
    }
    if cfg.timing:
        report["wall_clock_s"] = elapsed
    return report


def _witness(phi, field) -> tuple[int, ...]:
    try:
        a = find_witness(phi, field)
    except InputError as exc:
        raise InputError(f"no witness supplied and {exc}") from exc
    if a is None:
        raise InputError("circuit is unsatisfiable; completeness needs a witness")
    return a


def run_completeness(cfg: ExperimentConfig, witness: Sequence[int] | None = None) -> dict:
    """Honest proof against the decoder; passes iff every round accepts with correct outputs."""
    dec, phi, _ = build_decoder(cfg)
    a = tuple(witness) if witness is not None else _witness(phi, dec.field)
    t0 = time.perf_counter()
    proof = dec.honest_proof(a)
    tally = run_trials(dec, proof, cfg, a, "reject_or_wrong")
    elapsed = time.perf_counter() - t0
    passed = tally.accepted == tally.trials and tally.correct == tally.trials
    envelope = {"kind": "exact", "label": "acceptance = 1 and output correctness = 1",
                "bound": 0.0, "sigma": 0.0, "threshold": 0.0}
    return _report("completeness", cfg, dec, tally, envelope, passed, "reject_or_wrong", None, elapsed)


def run_soundness(cfg: ExperimentConfig) -> dict:
    """Adversarial Monte-Carlo against the decoder's envelope (``bound + 3 sigma``)."""
    if not cfg.adversary:
        raise UsageError("soundness needs --adversary")
    dec, phi, _ = build_decoder(cfg)
    params = {"rho": cfg.rho} if cfg.adversary == "corrupted-honest" else {}
    adv = make_adversary(cfg.adversary, **params)
    adv.check(base_decoder(dec))
    t0 = time.perf_counter()
    proof, ref = adv.build(base_decoder(dec), phi, cfg.seed)
    tally = run_trials(dec, proof, cfg, ref, adv.statistic)
    elapsed = time.perf_counter() - t0
    bound, label = soundness_bound(base_decoder(dec))
    if cfg.rounds > 1:
        bound, label = min(bound, 1.0) ** cfg.rounds, f"({label})^{cfg.rounds}"
    env = Envelope(bound, label, tally.trials)
    rate = _rate(tally.statistic, tally.trials)
    envelope = {"kind": "upper", "label": label, "bound": bound, "sigma": sigma(tally.trials),
                "threshold": env.threshold}
    adversary = {"name": adv.name, "statistic": adv.statistic,
                 "params": {k: v for k, v in adv.params.items() if k != "roots"}}
    return _report("soundness", cfg, dec, tally, envelope, env.passes(rate), adv.statistic, adversary, elapsed)


def run_cascade(L: float, eps: float, lg_field: float | None = None, c: float = 1.0, stages: str = "I,II,III",
                digits: int = 15) -> dict:
    from .cascade import cascade_params

    cas = cascade_params(L, eps, lg_field=lg_field, c=c, stages=stages)
    body = cas.to_dict(digits)
    # _accumulate enforces the chain identities; reaching here means they held
    return {"kind": "cascade", **body, "passed": True}

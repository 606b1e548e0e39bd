import csv
import io
import json
import os
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from artifact.errors import InputError, ReportError, UsageError
from artifact.harness import cli
from artifact.harness.cascade import cascade_params, i_star
from artifact.harness.experiments import (
    ExperimentConfig, build_decoder, repeat_sequential, run_cascade, run_completeness, run_soundness,
)
from artifact.harness.report import BATCH_COLUMNS, CASCADE_COLUMNS, emit_report, load_report, render, to_json
from artifact.harness.stats import Envelope, sigma, wilson_interval

GOLDEN = os.path.join(os.path.dirname(__file__), "fixtures", "cascade_golden.json")


# statistics -----------------------------------------------------------------------

def test_wilson_coverage():
    rng = np.random.default_rng(0)
    q, n = 0.3, 200
    covered = 0
    for _ in range(100):
        k = int((rng.random(n) < q).sum())
        lo, hi = wilson_interval(k, n)
        covered += lo <= q <= hi
    assert covered >= 90


def test_wilson_edges():
    lo, hi = wilson_interval(0, 50)
    assert lo == 0.0 and 0 < hi < 0.1
    with pytest.raises(UsageError):
        wilson_interval(0, 0)


def test_envelope():
    env = Envelope(0.04, "4/p", 10_000)
    assert env.threshold == pytest.approx(0.04 + 3 * sigma(10_000))
    assert env.passes(0.05) and not env.passes(0.06)


# config -----------------------------------------------------------------------------

@pytest.mark.parametrize("kw", [{"trials": 0}, {"p": 100}, {"dpcp": "xyz"}, {"recipe": "qh*qh"},
                                {"dpcp": "composed", "recipe": "qh*zz"}])
def test_config_validation(kw):
    with pytest.raises((InputError, UsageError)):
        build_decoder(ExperimentConfig(**kw))


# cascade ---------------------------------------------------------------------------

def i_star_oracle(eps: Fraction) -> int:
    i = 0
    while not (1 - eps - i * eps / 10 < 9 * eps / 80):
        i += 1
    return i


@pytest.mark.parametrize("eps", ["0.25", "0.3", "0.2", "0.1", "0.5"])
def test_i_star_matches_exact_search(eps):
    assert i_star(float(eps)) == i_star_oracle(Fraction(eps))


def test_i_star_quarter():
    assert i_star(0.25) == 29


def test_m0_example():
    cas = cascade_params(2 ** 20, 0.25)
    assert cas.summary["m0"] == 320
    assert cas.rows[0].lg_h == pytest.approx(0.1 * (2 ** 20) ** 0.75)


def test_cascade_matches_golden():
    golden = json.load(open(GOLDEN))
    for case in golden:
        cas = cascade_params(case["L"], float(case["eps"]), lg_field=case["lg_field"])
        assert cas.i_star == case["i_star"]
        assert cas.summary["provers_I"] == case["provers_I"]
        for key in ("m0", "m_I", "delta_I_display", "delta_I", "randomness_I"):
            want = mp.mpf(case[key])
            assert abs(cas.summary[key] - want) <= mp.mpf("1e-6") * abs(want), key
        for row in cas.rows:
            if row.stage == "I":
                assert abs(row.m - mp.mpf(case["m_I"])) <= mp.mpf("1e-6") * row.m


def test_cascade_answer_chain():
    cas = cascade_params(2 ** 20, 0.25)
    rows = cas.rows
    for prev, row in zip(rows, rows[1:]):
        assert row.answers == prev.provers_cum + prev.answers_cum
        assert row.provers_cum == prev.provers_cum + row.provers
        assert row.answers_cum == rows[0].answers
        assert row.delta_cum == prev.delta_cum + row.delta + row.eta
        assert row.randomness_cum == prev.randomness_cum + row.randomness + row.block_bits
    stage1 = [r for r in rows if r.stage == "I"]
    for a, b in zip(stage1, stage1[1:]):
        assert b.answers + 1 == (a.answers + 1) + 2
    assert [r.stage for r in rows[-2:]] == ["II", "III"]


def test_cascade_delta_display():
    cas = cascade_params(2 ** 20, 0.25, lg_field=6)
    d = mp.power(2, -0.6) + mp.power(2, -1)
    assert cas.summary["delta_I_display"] == pytest.approx(float(30 * d))
    # the displayed total counts one more eta than the rows accumulate
    assert cas.summary["delta_I_display"] - cas.summary["delta_I"] == pytest.approx(0.5)


@pytest.mark.parametrize("kw", [{"L": 1, "eps": 0.25}, {"L": 100, "eps": 0}, {"L": 100, "eps": 1.2},
                                {"L": 100, "eps": 0.25, "stages": "I,IV"}, {"L": 100, "eps": 0.25, "lg_field": -1}])
def test_cascade_input_errors(kw):
    with pytest.raises(InputError):
        cascade_params(**kw)


def test_cascade_stage_selection():
    only = cascade_params(2 ** 16, 0.3, stages="I")
    assert {r.stage for r in only.rows} == {"0", "I"}


# repetition ------------------------------------------------------------------------

def test_repeat_identity():
    dec, _, _ = build_decoder(ExperimentConfig())
    assert repeat_sequential(dec, 1) is dec
    with pytest.raises(UsageError):
        repeat_sequential(dec, 0)


def test_repeat_honest():
    rep = run_completeness(ExperimentConfig(rounds=3, trials=100))
    assert rep["passed"] and rep["acceptance_rate"] == 1.0
    assert rep["decoder"]["rounds"] == 3
    assert rep["randomness_bits_per_trial"] == 3 * build_decoder(ExperimentConfig())[0].randomness_bits


def test_repeat_squares_acceptance():
    base = dict(trials=2000, adversary="corrupted-honest", rho=0.3)
    q = run_soundness(ExperimentConfig(**base))["acceptance_rate"]
    q2 = run_soundness(ExperimentConfig(rounds=2, seed=1, **base))["acceptance_rate"]
    assert abs(q2 - q * q) <= 3 * sigma(2000) + 3 * sigma(2000) * 2 * q


# reports ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def report():
    return run_completeness(ExperimentConfig(trials=250, batch_size=100))


def test_report_fields(report):
    assert report["passed"] and report["acceptance_rate"] == 1.0 and report["correct_on_accepted"] == 1.0
    assert [b["trials"] for b in report["batches"]] == [100, 100, 50]
    assert report["failures"]["accepted"] == 250
    assert "wall_clock_s" not in report
    assert run_completeness(ExperimentConfig(trials=5, timing=True))["wall_clock_s"] >= 0


def test_report_determinism(tmp_path, report):
    again = run_completeness(ExperimentConfig(trials=250, batch_size=100))
    assert to_json(report) == to_json(again)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    emit_report(report, "json", a)
    emit_report(again, "json", b)
    assert a.read_bytes() == b.read_bytes()


def test_json_roundtrip(tmp_path, report):
    path = tmp_path / "r.json"
    emit_report(report, "json", path)
    back = load_report(path)
    assert back["acceptance_rate"] == report["acceptance_rate"]
    assert back["acceptance_wilson95"] == list(report["acceptance_wilson95"])
    assert back["randomness_bits_total"] == report["randomness_bits_total"]
    assert back["decoder"] == report["decoder"]


def test_csv_header(report):
    rows = list(csv.reader(io.StringIO(render(report, "csv"))))
    assert tuple(rows[0]) == BATCH_COLUMNS
    assert len(rows) == 1 + len(report["batches"])
    cas = run_cascade(2 ** 20, 0.25)
    assert tuple(next(csv.reader(io.StringIO(render(cas, "csv"))))) == CASCADE_COLUMNS


def test_report_errors(tmp_path, report):
    with pytest.raises(ReportError):
        emit_report(report, "json", tmp_path / "missing" / "r.json")
    with pytest.raises(ReportError):
        load_report(tmp_path / "nope.json")
    with pytest.raises(UsageError):
        render(report, "xml")


def test_soundness_report_has_envelope():
    rep = run_soundness(ExperimentConfig(circuit="and", p=401, dpcp="rm", trials=50, adversary="low-degree-wrong-g"))
    assert "m3=4" in rep["envelope"]["label"] and "T=2" in rep["envelope"]["label"]
    assert rep["envelope"]["threshold"] == pytest.approx(rep["envelope"]["bound"] + 3 * sigma(50))


def test_composed_accounting_block():
    rep = run_completeness(ExperimentConfig(dpcp="composed", recipe="qh*qh", trials=5))
    acc = rep["accounting"]
    assert acc["identities_hold"] and acc["provers"] == acc["k_out"] + acc["k_in"]


# CLI --------------------------------------------------------------------------------

def test_cli_completeness(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert cli.main(["completeness", "--trials", "30", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"]
    assert capsys.readouterr().out.startswith("PASS completeness qh")


def test_cli_stdout_report(capsys):
    assert cli.main(["cascade", "--L", "65536", "--eps", "0.3", "--format", "csv"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith(",".join(CASCADE_COLUMNS))
    assert captured.err.startswith("PASS cascade: i*=23")


def test_cli_usage_error(capsys):
    code = cli.main(["soundness", "--adversary", "low-degree-wrong-g", "--trials", "5"])
    assert code == 2 and "does not apply" in capsys.readouterr().err


def test_cli_failing_envelope(monkeypatch, capsys):
    real = cli.run_completeness

    def failing(cfg):
        rep = real(cfg)
        rep["passed"] = False
        return rep

    monkeypatch.setattr(cli, "run_completeness", failing)
    assert cli.main(["completeness", "--trials", "5"]) == 1
    assert "FAIL" in capsys.readouterr().err


def test_cli_repeat_and_soundness(capsys):
    assert cli.main(["repeat", "--rounds", "2", "--trials", "20"]) == 0
    assert cli.main(["soundness", "--adversary", "invalid-witness", "--trials", "50"]) == 0
    assert cli.main(["completeness", "--circuit", "/no/such.circ", "--trials", "5"]) == 2


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])

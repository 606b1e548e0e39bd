"""The three-stage parameter cascade, evaluated on ``L = lg N`` as a real number.

Stage 0 is the outer RM decoder with ``h_0 = |F|^0.1``; Stage I composes
``i*`` RM decoders of shrinking ``h_i``; Stage II adds an ``h = 2`` RM
decoder and Stage III the QH decoder.  Cumulative columns follow the
composition accounting: provers add, answers stay those of the outermost
decoder, randomness adds ``R_i + lg(block length)`` and the soundness budget
adds ``delta_i + eta_i``.

All quantities are ``mpmath`` numbers since ``|F|^-0.1`` underflows doubles.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field as dc_field

import mpmath as mp

from ..errors import InputError

mp.mp.dps = 40


def i_star(eps: float) -> int:
    """Smallest ``i`` with ``1 - eps - i * eps/10 < 9 eps / 80``."""
    eps = mp.mpf(eps)
    e1 = eps / 10
    i = 0
    while not (1 - eps - i * e1 < 9 * eps / 80):
        i += 1
    return i


@dataclass
class CascadeRow:
    stage: str
    i: int
    code: str
    lg_h: mp.mpf | None
    m: mp.mpf
    lg_n: mp.mpf
    randomness: mp.mpf
    block_bits: mp.mpf
    lg_answer_size: mp.mpf
    provers: int
    answers: int
    delta: mp.mpf
    eta: mp.mpf
    fits: bool  # previous answer size fits this stage's instance size
    randomness_cum: mp.mpf = mp.mpf(0)
    delta_cum: mp.mpf = mp.mpf(0)
    provers_cum: int = 0
    answers_cum: int = 0
    lg_answer_size_cum: mp.mpf = mp.mpf(0)
    stated: dict = dc_field(default_factory=dict)

    def to_dict(self, digits: int = 15) -> dict:
        return _fmt(asdict(self), digits)


@dataclass
class Cascade:
    L: mp.mpf
    eps: mp.mpf
    c: mp.mpf
    lg_field: mp.mpf
    i_star: int
    rows: list[CascadeRow]
    summary: dict

    def to_dict(self, digits: int = 15) -> dict:
        return _fmt({
            "L": self.L, "eps": self.eps, "c": self.c, "lg_field": self.lg_field, "i_star": self.i_star,
            "summary": self.summary, "rows": [r.to_dict(digits) for r in self.rows],
        }, digits)


def _fmt(v, digits: int):
    """mpf values become decimal strings with ``digits`` significant figures."""
    if isinstance(v, mp.mpf):
        return mp.nstr(v, digits)
    if isinstance(v, dict):
        return {k: _fmt(x, digits) for k, x in v.items()}
    if isinstance(v, list):
        return [_fmt(x, digits) for x in v]
    return v


def _lg_rm_answer(m, lg_h):
    """``lg(2 (m h)^2)``."""
    return 1 + 2 * mp.log(m, 2) + 2 * lg_h


def _accumulate(prev: CascadeRow | None, row: CascadeRow) -> CascadeRow:
    if prev is None:
        row.randomness_cum = row.randomness
        row.delta_cum = row.delta
        row.provers_cum = row.provers
        row.answers_cum = row.answers
    else:
        if row.answers != prev.provers_cum + prev.answers_cum:
            raise AssertionError(f"stage {row.stage}.{row.i}: answer count breaks l_in = k_out + l_out")
        row.randomness_cum = prev.randomness_cum + row.randomness + row.block_bits
        row.delta_cum = prev.delta_cum + row.delta + row.eta
        row.provers_cum = prev.provers_cum + row.provers
        row.answers_cum = prev.answers_cum
    row.lg_answer_size_cum = row.lg_answer_size
    return row


def cascade_params(L: float, eps: float, lg_field: float | None = None, c: float = 1.0,
                   stages: str = "I,II,III") -> Cascade:
    """Every Stage 0/I/II/III quantity for ``lg N = L``; ``c`` is the randomness constant."""
    L, eps, c = mp.mpf(L), mp.mpf(eps), mp.mpf(c)
    if not L > 1:
        raise InputError("L = lg N must exceed 1")
    if not 0 < eps < 1:
        raise InputError("eps must lie in (0, 1)")
    lgF = L ** (1 - eps) if lg_field is None else mp.mpf(lg_field)
    if not lgF > 0:
        raise InputError("field bits must be positive")
    wanted = {s.strip() for s in stages.split(",") if s.strip()}
    if not wanted <= {"I", "II", "III"}:
        raise InputError(f"unknown stages {sorted(wanted - {'I', 'II', 'III'})}")
    e1 = eps / 10
    istar = i_star(eps)
    d_rm = mp.power(2, -mp.mpf("0.1") * lgF)
    eta_lde = mp.power(2, -lgF / 6)
    rows: list[CascadeRow] = []

    lg_h0 = mp.mpf("0.1") * lgF
    m0 = L / lg_h0
    row = CascadeRow("0", 0, "LDE", lg_h0, m0, L, c * m0 * lgF, m0 * lgF, _lg_rm_answer(m0, lg_h0),
                     2, 1, d_rm, mp.mpf(0), True)
    rows.append(_accumulate(None, row))

    if "I" in wanted:
        for i in range(1, istar + 1):
            lg_h = L ** (1 - eps - i * e1)
            lg_n = 3 * L ** (1 - eps - (i - 1) * e1)
            m = lg_n / lg_h
            row = CascadeRow("I", i, "LDE", lg_h, m, lg_n, c * m * lgF, m * lgF, _lg_rm_answer(m, lg_h),
                             2, 2 * i + 1, d_rm, eta_lde, bool(rows[-1].lg_answer_size <= lg_n),
                             stated={"lg_answer_size_bound": 3 * lg_h})
            rows.append(_accumulate(rows[-1], row))
    summary = {
        "m0": m0,
        "m_I": 3 * L ** e1,
        "randomness_I": rows[-1].randomness_cum,
        "randomness_I_bound": 11 * c * L,
        "delta_I": rows[-1].delta_cum,
        "delta_I_display": (istar + 1) * (d_rm + eta_lde),
        "provers_I": rows[-1].provers_cum,
        "provers_I_stated": 2 * istar,
    }

    if "II" in wanted:
        prev = rows[-1]
        lg_n = 3 * L ** (9 * eps / 80)
        m = lg_n  # h = 2
        ell = prev.provers_cum + prev.answers_cum - 1
        row = CascadeRow("II", istar + 1, "LDE", mp.mpf(1), m, lg_n, c * m * lgF, m * lgF, _lg_rm_answer(m, 1),
                         2, ell + 1, d_rm, eta_lde, bool(prev.lg_answer_size <= lg_n),
                         stated={"ell": 2 * istar})
        rows.append(_accumulate(prev, row))
    if "III" in wanted and "II" in wanted:
        prev = rows[-1]
        n = mp.power(2, prev.lg_answer_size)
        ell = prev.provers_cum + prev.answers_cum - 1
        row = CascadeRow("III", istar + 2, "QH", None, n, mp.log(n, 2), c * n * n * lgF, (n + n * n) * lgF,
                         mp.log(ell + 8, 2), 2, ell + 1, d_rm, mp.power(2, -lgF / 2), True,
                         stated={"ell": 2 * (istar + 1)})
        rows.append(_accumulate(prev, row))
    summary["delta_final"] = rows[-1].delta_cum
    summary["lg_delta_final"] = mp.log(rows[-1].delta_cum, 2)
    summary["delta_final_bound"] = mp.power(2, -mp.mpf("0.05") * lgF)
    return Cascade(L, eps, c, lgF, istar, rows, summary)

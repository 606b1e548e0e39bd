"""Binomial estimates and the pre-registered ``bound + 3 sigma`` envelope."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import binomtest

from ..errors import UsageError


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials < 1:
        raise UsageError("trial count must be at least 1")
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def sigma(trials: int) -> float:
    """Worst-case Bernoulli standard error ``sqrt(0.25 / n)``."""
    return math.sqrt(0.25 / trials)


@dataclass(frozen=True)
class Envelope:
    bound: float
    label: str
    trials: int

    @property
    def threshold(self) -> float:
        return self.bound + 3 * sigma(self.trials)

    def passes(self, estimate: float) -> bool:
        return estimate <= self.threshold

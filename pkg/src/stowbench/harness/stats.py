"""Welch's t-test and final-KPI aggregation.

The two-sided p-value comes from the Student-t distribution evaluated through
the regularized incomplete beta function (continued-fraction expansion in
double precision), so the harness needs no statistics dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

SIGNIFICANCE_LEVEL = 0.05

_MAX_CF_ITERATIONS = 300
_CF_EPS = 3e-16
_CF_TINY = 1e-300


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITERATIONS + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ConfigError("incomplete beta requires positive shape parameters")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, dof: float) -> float:
    """P(|T_dof| >= |t|)."""
    if dof <= 0:
        raise ConfigError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    x = dof / (dof + t * t)
    return regularized_incomplete_beta(dof / 2.0, 0.5, x)


def welch_t_test(sample_a, sample_b) -> tuple[float, float, float]:
    """Welch's unequal-variance t-test; returns (t, dof, two-sided p)."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ConfigError("welch_t_test needs at least two observations per side")
    va = a.var(ddof=1) / len(a)
    vb = b.var(ddof=1) / len(b)
    se2 = va + vb
    diff = a.mean() - b.mean()
    if se2 == 0.0:
        # Degenerate zero-variance case: identical samples give (0, ., 1).
        dof = float(len(a) + len(b) - 2)
        if diff == 0.0:
            return 0.0, dof, 1.0
        return math.copysign(math.inf, diff), dof, 0.0
    t = float(diff / math.sqrt(se2))
    dof = float(se2 ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1)))
    return t, dof, student_t_two_sided_p(t, dof)


@dataclass(frozen=True)
class MetricsRow:
    scenario: str
    algo: str
    variant: str
    reps: int
    mean_shifters: float
    std_shifters: float
    mean_optime: float
    std_optime: float


def _sample_std(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1))


def aggregate(records) -> list[MetricsRow]:
    """Mean and sample (n-1) standard deviation of final KPIs per experiment cell."""
    from .scenarios import scenario_label

    groups: dict[tuple[str, str, str], list] = {}
    for record in records:
        key = (scenario_label(record.scenario), record.algo, record.variant)
        groups.setdefault(key, []).append(record)
    rows = []
    for (scenario, algo, variant) in sorted(groups):
        cell = groups[(scenario, algo, variant)]
        shifters = np.asarray([r.final_shifters for r in cell], dtype=np.float64)
        optimes = np.asarray([r.final_optime for r in cell], dtype=np.float64)
        rows.append(MetricsRow(
            scenario=scenario, algo=algo, variant=variant, reps=len(cell),
            mean_shifters=float(shifters.mean()), std_shifters=_sample_std(shifters),
            mean_optime=float(optimes.mean()), std_optime=_sample_std(optimes),
        ))
    return rows

"""Output analysis: batch means, confidence intervals, sim-vs-theory verdicts."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sps

from .core import AnalyticResult, Policy, SystemParams
from .exceptions import EmptySweep, InsufficientSamples, MismatchedInputs

# acceptance band: |sim - analytic| <= max(Z_BAND * se, REL_BAND * analytic)
Z_BAND = 3.0
REL_BAND = 0.005


def batch_means(samples: Sequence[float], n_batches: int = 32) -> Tuple[float, float]:
    """Grand mean and standard error from contiguous equal-size batches.

    The tail that does not fill a whole batch is dropped.

    >>> batch_means([2, 4, 6, 8], 2)
    (5.0, 2.0)
    """
    if n_batches < 2:
        raise InsufficientSamples(f"need at least 2 batches, got {n_batches}")
    x = np.asarray(samples, dtype=float)
    size = x.size // n_batches
    if size < 1:
        raise InsufficientSamples(f"{x.size} samples cannot fill {n_batches} batches")
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(n_batches))


def t_interval(mean: float, se: float, dof: int, level: float = 0.95) -> Tuple[float, float]:
    half = float(sps.t.ppf(0.5 + level / 2.0, dof)) * se
    return mean - half, mean + half


def binomial_se(fraction: float, n: int) -> float:
    return math.sqrt(fraction * (1.0 - fraction) / n)


def within_band(observed: float, expected: float, se: float) -> bool:
    return abs(observed - expected) <= max(Z_BAND * se, REL_BAND * abs(expected))


def z_score(observed: float, expected: float, se: float) -> float:
    diff = observed - expected
    if se > 0:
        return diff / se
    if diff == 0:
        return 0.0
    return math.copysign(math.inf, diff)


@dataclass(frozen=True)
class ComparisonRow:
    policy: Policy
    lam: float
    mu: float
    p: float
    rho: float
    analytic_paoi: Optional[float]
    sim_mean: float
    sim_se: float
    n_peaks: int
    z_score: Optional[float]
    verdict: str  # "pass", "fail", or "" for simulation-only rows

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def sort_key(self):
        return (self.policy.order, self.p, self.lam, self.mu)


def compare(analytic: AnalyticResult, sim, params: SystemParams, policy: Policy) -> ComparisonRow:
    """Score one simulated cell against its closed form.

    ``sim`` is a :class:`~peakage.sim.SimResult` for the same cell.
    """
    if analytic.policy is not policy or sim.policy is not policy or sim.params != params:
        raise MismatchedInputs(
            f"cannot compare {analytic.policy}/{sim.policy} results for {policy} at {params}")
    return _row(policy, params, analytic.paoi, sim.paoi_mean, sim.paoi_se, sim.n_peaks)


def compare_values(policy: Policy, params: SystemParams, analytic_paoi: float,
                   sim_mean: float, sim_se: float, n_peaks: int = 0) -> ComparisonRow:
    return _row(policy, params, analytic_paoi, sim_mean, sim_se, n_peaks)


def sim_only_row(policy: Policy, params: SystemParams, sim) -> ComparisonRow:
    return ComparisonRow(policy, params.lam, params.mu, params.p, params.rho,
                         None, sim.paoi_mean, sim.paoi_se, sim.n_peaks, None, "")


def _row(policy, params, analytic_paoi, sim_mean, sim_se, n_peaks) -> ComparisonRow:
    ok = within_band(sim_mean, analytic_paoi, sim_se)
    return ComparisonRow(
        policy, params.lam, params.mu, params.p, params.rho,
        analytic_paoi, sim_mean, sim_se, n_peaks,
        z_score(sim_mean, analytic_paoi, sim_se),
        "pass" if ok else "fail",
    )


@dataclass(frozen=True)
class SweepSummary:
    passed: int
    failed: int
    max_abs_z: float
    worst: ComparisonRow

    @property
    def ok(self) -> bool:
        return self.failed == 0


def aggregate_sweep(rows: Sequence[ComparisonRow]) -> SweepSummary:
    """Count verdicts and find the cell with the largest |z|.

    Simulation-only rows (empty verdict) are ignored.
    """
    scored = [r for r in rows if r.verdict]
    if not scored:
        raise EmptySweep("no scored rows to aggregate")
    passed = sum(r.passed for r in scored)
    worst = max(scored, key=lambda r: abs(r.z_score))
    return SweepSummary(passed, len(scored) - passed, abs(worst.z_score), worst)

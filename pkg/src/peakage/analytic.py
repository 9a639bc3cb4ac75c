"""Closed-form peak age of information for the lossy M/M/1 update queue.

Every ``paoi_*`` evaluator takes a :class:`~peakage.core.SystemParams` and
returns an :class:`~peakage.core.AnalyticResult` carrying the PAoI and the
intermediate quantities the derivation goes through, so the simulator can
check them one at a time.

The per-policy evaluators only reject parameters for which the formula itself
breaks down.  The stability guard (rho < 1 for FCFS and both LCFS forms) is
applied by :func:`paoi`, which is what callers normally use.
"""
from __future__ import annotations

import math
from typing import Callable, Dict, NamedTuple

from .core import AnalyticResult, Policy, SystemParams, validate_params
from .exceptions import InternalDomainError, NoAnalyticForm, UnstableUtilization

# |1 - p| below this uses the closed p = 1 branch of the non-preemptive root
P_ONE_TOL = 1e-12


class QuadraticRoot(NamedTuple):
    value: float
    residual: float


class LcfsPreIntermediates(NamedTuple):
    s_tilde: float
    t_tilde: float
    prob_informative: float
    mean_service_informative: float


class LcfsNonIntermediates(NamedTuple):
    s_tilde: float
    t_tilde: float
    tau: float


class LcfsNonTerms(NamedTuple):
    """The three summands of the non-preemptive LCFS PAoI."""

    waiting: float
    backlog: float
    tail: float


class RetxIntermediates(NamedTuple):
    p_tilde: float
    t_tilde: float
    s_tilde: float


def _positive_root(a: float, b: float, c: float) -> float:
    """Positive root of ``a x^2 + b x - c = 0`` with a >= 0, c > 0.

    Picks whichever of the two algebraically equal forms does not subtract
    nearly equal numbers.
    """
    disc = math.sqrt(b * b + 4.0 * a * c)
    if b >= 0.0:
        return 2.0 * c / (b + disc)
    return (disc - b) / (2.0 * a)


def lcfs_pre_root(params: SystemParams) -> QuadraticRoot:
    """Probability that some packet is delivered during a preemptive service period.

    Root of ``lam x^2 + (mu - lam) x - mu p = 0`` in (0, 1].
    """
    lam, mu, p = params.lam, params.mu, params.p
    if p == 1.0:
        x = 1.0
    else:
        # the exact root is at most 1; clip the last-ulp overshoot near p = 1
        x = min(_positive_root(lam, mu - lam, mu * p), 1.0)
    residual = abs(lam * x * x + (mu - lam) * x - mu * p)
    return QuadraticRoot(x, residual)


def lcfs_pre_intermediates(params: SystemParams) -> LcfsPreIntermediates:
    lam, mu, p = params.lam, params.mu, params.p
    pt = lcfs_pre_root(params).value
    spread = mu - lam + 2.0 * lam * pt
    s_tilde = 1.0 / spread
    t_tilde = (pt + mu / spread * (pt - p)) / (pt * (mu - lam + lam * pt))
    prob_inf = mu * p / (mu + lam * pt)
    return LcfsPreIntermediates(s_tilde, t_tilde, prob_inf, 1.0 / spread)


def lcfs_non_root(params: SystemParams) -> QuadraticRoot:
    """Probability that a later arrival is delivered within a non-preemptive busy stretch.

    Root of ``lam (1-p) x^2 + (mu - lam + 2 lam p) x - lam p = 0``; at p = 1 the
    quadratic degenerates and the root is ``lam / (lam + mu)``.
    """
    lam, mu, p = params.lam, params.mu, params.p
    a, b, c = lam * (1.0 - p), mu - lam + 2.0 * lam * p, lam * p
    if abs(1.0 - p) < P_ONE_TOL:
        x = lam / (lam + mu)
    else:
        x = min(_positive_root(a, b, c), 1.0)
    return QuadraticRoot(x, abs(a * x * x + b * x - c))


def _lcfs_non_spread(params: SystemParams, pt: float) -> float:
    lam, mu, p = params.lam, params.mu, params.p
    return lam + mu - 2.0 * lam * (1.0 - p) * (1.0 - pt)


def lcfs_non_intermediates(params: SystemParams) -> LcfsNonIntermediates:
    lam, mu, p = params.lam, params.mu, params.p
    pt = lcfs_non_root(params).value
    spread = _lcfs_non_spread(params, pt)
    s_tilde = 1.0 / spread
    pt_tt = (lam * p + 2.0 * lam * p * p
             + (lam - 2.0 * lam * p * p - mu + mu * p) * pt) / (mu * p * spread)
    tau = ((lam + mu) * p + (lam + mu) * p * p
           + (lam + (mu - lam) * p * p - mu) * pt) / (mu * p * spread)
    return LcfsNonIntermediates(s_tilde, pt_tt / pt, tau)


def lcfs_non_terms(params: SystemParams) -> LcfsNonTerms:
    lam, mu, p = params.lam, params.mu, params.p
    pt = lcfs_non_root(params).value
    tau = lcfs_non_intermediates(params).tau
    spread = _lcfs_non_spread(params, pt)
    head = mu - lam * pt
    drain = mu - lam * (1.0 - pt)
    if drain <= 0.0 or head <= 0.0:
        raise InternalDomainError(
            f"non-preemptive LCFS form undefined at lam={lam:g}, mu={mu:g}, p={p:g}")
    waiting = lam * (1.0 - pt) / (head * spread)
    backlog = (mu * (mu - lam) * (mu + lam + lam * p + lam * lam * tau)
               / (lam * head * drain * (lam + mu * p - lam * (1.0 - p) * (1.0 - pt))))
    tail = lam * lam * (1.0 - pt) ** 2 * (1.0 + lam * tau) / (mu * head * drain)
    return LcfsNonTerms(waiting, backlog, tail)


def retx_pre_intermediates(params: SystemParams) -> RetxIntermediates:
    lam, mu, p = params.lam, params.mu, params.p
    return RetxIntermediates(p * mu / (lam + p * mu), 1.0 / (lam + p * mu), 1.0 / (p * mu))


def retx_non_intermediates(params: SystemParams) -> RetxIntermediates:
    lam, mu, p = params.lam, params.mu, params.p
    # same as p (lam + mu) / (lam + p mu), written so rounding cannot exceed 1
    p_tilde = 1.0 - lam * (1.0 - p) / (lam + p * mu)
    t_tilde = 1.0 / mu + (1.0 - p) * mu / ((lam + mu) * (lam + p * mu))
    return RetxIntermediates(p_tilde, t_tilde, 1.0 / (p * mu))


def paoi_fcfs(params: SystemParams) -> AnalyticResult:
    lam, mu, p = params.lam, params.mu, params.p
    if lam >= mu:
        raise UnstableUtilization(f"FCFS PAoI is infinite for rho = {params.rho:g} >= 1")
    return AnalyticResult(
        Policy.FCFS,
        paoi=1.0 / (p * lam) + 1.0 / (mu - lam),
        prob_informative=p,
        mean_service_informative=1.0 / mu,
        mean_wait_informative=lam / (mu * (mu - lam)),
    )


def paoi_lcfs_preemptive(params: SystemParams) -> AnalyticResult:
    lam, mu, p = params.lam, params.mu, params.p
    root = lcfs_pre_root(params)
    pt = root.value
    inter = lcfs_pre_intermediates(params)
    value = ((mu * (mu - lam) + 3.0 * lam * mu * p + lam * (lam + mu) * pt)
             / (lam * mu * p * (mu - lam + 2.0 * lam * pt)))
    return AnalyticResult(
        Policy.LCFS_PREEMPTIVE,
        paoi=value,
        p_tilde=pt,
        t_tilde=inter.t_tilde,
        s_tilde=inter.s_tilde,
        prob_informative=inter.prob_informative,
        mean_service_informative=inter.mean_service_informative,
        mean_wait_informative=0.0,
    )


def paoi_lcfs_nonpreemptive(params: SystemParams) -> AnalyticResult:
    pt = lcfs_non_root(params).value
    inter = lcfs_non_intermediates(params)
    terms = lcfs_non_terms(params)
    return AnalyticResult(
        Policy.LCFS_NON_PREEMPTIVE,
        paoi=terms.waiting + terms.backlog + terms.tail,
        p_tilde=pt,
        t_tilde=inter.t_tilde,
        s_tilde=inter.s_tilde,
        tau=inter.tau,
        mean_wait_informative=terms.waiting,
    )


def paoi_retx_preemptive(params: SystemParams) -> AnalyticResult:
    lam, mu, p = params.lam, params.mu, params.p
    inter = retx_pre_intermediates(params)
    return AnalyticResult(
        Policy.RETX_PREEMPTIVE,
        paoi=1.0 / (lam + p * mu) + 1.0 / lam + 1.0 / (p * mu),
        p_tilde=inter.p_tilde,
        t_tilde=inter.t_tilde,
        s_tilde=inter.s_tilde,
        # every packet starts service on arrival, so p_tilde is also P(n in Psi)
        prob_informative=inter.p_tilde,
        mean_service_informative=inter.t_tilde,
        mean_wait_informative=0.0,
    )


def paoi_retx_nonpreemptive(params: SystemParams) -> AnalyticResult:
    lam, mu, p = params.lam, params.mu, params.p
    inter = retx_non_intermediates(params)
    return AnalyticResult(
        Policy.RETX_NON_PREEMPTIVE,
        paoi=1.0 / mu + 1.0 / (lam + p * mu) + 1.0 / lam + 1.0 / (p * mu),
        p_tilde=inter.p_tilde,
        t_tilde=inter.t_tilde,
        s_tilde=inter.s_tilde,
        mean_service_informative=inter.t_tilde,
        mean_wait_informative=1.0 / (lam + mu),
    )


EVALUATORS: Dict[Policy, Callable[[SystemParams], AnalyticResult]] = {
    Policy.FCFS: paoi_fcfs,
    Policy.LCFS_PREEMPTIVE: paoi_lcfs_preemptive,
    Policy.LCFS_NON_PREEMPTIVE: paoi_lcfs_nonpreemptive,
    Policy.RETX_PREEMPTIVE: paoi_retx_preemptive,
    Policy.RETX_NON_PREEMPTIVE: paoi_retx_nonpreemptive,
}


def paoi(policy: Policy, params: SystemParams,
         allow_unstable_lcfs_pre: bool = False) -> AnalyticResult:
    """Guarded dispatch to the closed form for ``policy``.

    >>> paoi(Policy.FCFS, SystemParams(0.5, 1.0, 0.5)).paoi
    6.0
    """
    if not policy.has_analytic_form:
        raise NoAnalyticForm(f"{policy} is simulation-only")
    validate_params(params, policy, allow_unstable_lcfs_pre)
    return EVALUATORS[policy](params)

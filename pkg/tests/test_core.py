import math

import pytest

from peakage.core import (
    ANALYTIC_POLICIES,
    AnalyticResult,
    DomainGuard,
    Policy,
    SystemParams,
    validate_params,
)
from peakage.exceptions import (
    InternalDomainError,
    NonPositiveRate,
    ProbabilityOutOfRange,
    UnstableUtilization,
)


def test_validate_accepts_stable_fcfs():
    params = SystemParams(0.5, 1.0, 0.5)
    assert validate_params(params, Policy.FCFS) is params


def test_validate_rejects_unstable_fcfs():
    with pytest.raises(UnstableUtilization):
        validate_params(SystemParams(1.2, 1.0, 0.5), Policy.FCFS)


def test_zero_probability_rejected():
    with pytest.raises(ProbabilityOutOfRange):
        validate_params(SystemParams(0.5, 1.0, 0.0), Policy.RETX_PREEMPTIVE)


@pytest.mark.parametrize("lam,mu", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (math.inf, 1.0),
                                    (math.nan, 1.0)])
def test_nonpositive_rates(lam, mu):
    with pytest.raises(NonPositiveRate):
        SystemParams(lam, mu, 0.5)


@pytest.mark.parametrize("p", [-0.1, 1.0000001, math.nan])
def test_probability_range(p):
    with pytest.raises(ProbabilityOutOfRange):
        SystemParams(0.5, 1.0, p)


def test_rho_is_exact_ratio():
    params = SystemParams(0.3, 0.7, 1.0)
    assert params.rho == 0.3 / 0.7


@pytest.mark.parametrize("policy,stable", [
    (Policy.FCFS, True),
    (Policy.LCFS_NON_PREEMPTIVE, True),
    (Policy.LCFS_PREEMPTIVE, True),
    (Policy.RETX_PREEMPTIVE, False),
    (Policy.RETX_NON_PREEMPTIVE, False),
    (Policy.PACKET_MGMT_SIM_ONLY, False),
])
def test_domain_guard_flags(policy, stable):
    assert DomainGuard.for_policy(policy).requires_stable is stable


def test_lcfs_pre_override():
    params = SystemParams(1.5, 1.0, 0.5)
    with pytest.raises(UnstableUtilization):
        validate_params(params, Policy.LCFS_PREEMPTIVE)
    assert validate_params(params, Policy.LCFS_PREEMPTIVE, allow_unstable_lcfs_pre=True) is params
    # the override is specific to preemptive LCFS
    with pytest.raises(UnstableUtilization):
        validate_params(params, Policy.FCFS, allow_unstable_lcfs_pre=True)


def test_retransmission_needs_no_stability():
    validate_params(SystemParams(5.0, 1.0, 0.5), Policy.RETX_NON_PREEMPTIVE)


def test_policy_parse_and_order():
    assert Policy.parse("LCFS-pre") is Policy.LCFS_PREEMPTIVE
    assert Policy.parse("retx_non_preemptive") is Policy.RETX_NON_PREEMPTIVE
    assert [p.order for p in Policy] == list(range(6))
    assert Policy.PACKET_MGMT_SIM_ONLY not in ANALYTIC_POLICIES
    with pytest.raises(ValueError):
        Policy.parse("srpt")


def test_analytic_result_rejects_out_of_range():
    with pytest.raises(InternalDomainError):
        AnalyticResult(Policy.FCFS, paoi=-1.0)
    with pytest.raises(InternalDomainError):
        AnalyticResult(Policy.FCFS, paoi=1.0, p_tilde=1.5)
    AnalyticResult(Policy.FCFS, paoi=1.0, p_tilde=1.0, mean_wait_informative=0.0)

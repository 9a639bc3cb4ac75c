"""Domain types shared by the analytic evaluators, the simulator and the CLI."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields
from typing import Optional

from .exceptions import (
    InternalDomainError,
    NonPositiveRate,
    ProbabilityOutOfRange,
    UnstableUtilization,
)


class Policy(enum.Enum):
    """Scheduling discipline of the status-update queue.

    Declaration order is the report sort order.
    """

    FCFS = "fcfs"
    LCFS_PREEMPTIVE = "lcfs-pre"
    LCFS_NON_PREEMPTIVE = "lcfs-non"
    RETX_PREEMPTIVE = "retx-pre"
    RETX_NON_PREEMPTIVE = "retx-non"
    PACKET_MGMT_SIM_ONLY = "pm-sim"

    @property
    def has_analytic_form(self) -> bool:
        return self is not Policy.PACKET_MGMT_SIM_ONLY

    @property
    def order(self) -> int:
        return list(Policy).index(self)

    @classmethod
    def parse(cls, text: str) -> "Policy":
        key = text.strip().lower().replace("_", "-")
        for member in cls:
            if key in (member.value, member.name.lower().replace("_", "-")):
                return member
        raise ValueError(f"unknown policy {text!r}; choose from {[m.value for m in cls]}")

    def __str__(self) -> str:
        return self.value


ANALYTIC_POLICIES = tuple(p for p in Policy if p.has_analytic_form)


@dataclass(frozen=True)
class SystemParams:
    """Arrival rate ``lam``, service rate ``mu`` and delivery probability ``p``."""

    lam: float
    mu: float
    p: float

    def __post_init__(self):
        for name in ("lam", "mu"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise NonPositiveRate(f"{name} must be a positive finite rate, got {value!r}")
        if not (0.0 < self.p <= 1.0):
            raise ProbabilityOutOfRange(f"delivery probability must lie in (0, 1], got {self.p!r}")

    @property
    def rho(self) -> float:
        return self.lam / self.mu


@dataclass(frozen=True)
class DomainGuard:
    policy: Policy
    requires_stable: bool

    @classmethod
    def for_policy(cls, policy: Policy, allow_unstable_lcfs_pre: bool = False) -> "DomainGuard":
        if policy in (Policy.FCFS, Policy.LCFS_NON_PREEMPTIVE):
            stable = True
        elif policy is Policy.LCFS_PREEMPTIVE:
            stable = not allow_unstable_lcfs_pre
        else:
            # retransmission slots and the two-slot packet manager never build a backlog
            stable = False
        return cls(policy, stable)


def validate_params(params: SystemParams, policy: Policy,
                    allow_unstable_lcfs_pre: bool = False) -> SystemParams:
    """Return ``params`` unchanged if they are admissible for ``policy``.

    Raises NonPositiveRate, ProbabilityOutOfRange or UnstableUtilization.
    """
    # re-run the field checks: params may have been built with object.__new__/replace tricks
    SystemParams.__post_init__(params)
    guard = DomainGuard.for_policy(policy, allow_unstable_lcfs_pre)
    if guard.requires_stable and not params.rho < 1.0:
        raise UnstableUtilization(
            f"{policy} requires rho < 1, got rho = {params.rho:g} "
            f"(lam={params.lam:g}, mu={params.mu:g})"
        )
    return params


@dataclass(frozen=True)
class AnalyticResult:
    """Closed-form PAoI plus whichever intermediate quantities the policy defines."""

    policy: Policy
    paoi: float
    p_tilde: Optional[float] = None
    t_tilde: Optional[float] = None
    s_tilde: Optional[float] = None
    tau: Optional[float] = None
    prob_informative: Optional[float] = None
    mean_service_informative: Optional[float] = None
    mean_wait_informative: Optional[float] = None

    _PROBABILITIES = ("p_tilde", "prob_informative")

    def __post_init__(self):
        for f in fields(self):
            if f.name == "policy":
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name in self._PROBABILITIES:
                ok = 0.0 < value <= 1.0
            elif f.name == "mean_wait_informative":
                ok = math.isfinite(value) and value >= 0.0
            else:
                ok = math.isfinite(value) and value > 0.0
            if not ok:
                raise InternalDomainError(f"{self.policy}: {f.name}={value!r} out of range")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

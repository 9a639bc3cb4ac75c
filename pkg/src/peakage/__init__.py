"""Exact peak age of information for a lossy M/M/1 status-update queue.

Closed forms for FCFS, preemptive and non-preemptive LCFS and the two
retransmission policies, plus a discrete-event simulator to check them.
"""
from .analytic import paoi
from .core import ANALYTIC_POLICIES, AnalyticResult, DomainGuard, Policy, SystemParams, validate_params
from .sim import PeakTracker, SimConfig, SimResult, simulate, trace
from .stats import ComparisonRow, aggregate_sweep, batch_means, compare

__all__ = [
    "ANALYTIC_POLICIES",
    "AnalyticResult",
    "ComparisonRow",
    "DomainGuard",
    "PeakTracker",
    "Policy",
    "SimConfig",
    "SimResult",
    "SystemParams",
    "aggregate_sweep",
    "batch_means",
    "compare",
    "paoi",
    "simulate",
    "trace",
    "validate_params",
]

__version__ = "0.1.0"

"""Grid evaluation: closed forms, simulation runs and sim-vs-theory reports.

These are the library halves of the ``analytic``, ``sweep``/``validate`` and
``plotdata`` subcommands; :mod:`peakage.cli` only parses arguments and
routes output.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .analytic import paoi as analytic_paoi
from .core import ANALYTIC_POLICIES, AnalyticResult, Policy, SystemParams, validate_params
from .exceptions import ParameterError, PeakAgeError
from .rng import stream_key
from .sim import EventLogWriter, SimConfig, SimResult, simulate
from .stats import ComparisonRow, compare_values, sim_only_row

log = logging.getLogger(__name__)

DEFAULT_RHOS = tuple(round(0.05 * k, 2) for k in range(1, 20))
DEFAULT_PS = (0.1, 0.5, 1.0)

SWEEP_COLUMNS = ("policy", "lambda", "mu", "p", "rho", "analytic_paoi", "sim_mean",
                 "sim_se", "n_peaks", "z_score", "verdict")
PLOT_COLUMNS = ("policy", "rho", "p", "analytic_paoi", "sim_mean", "sim_se")
ANALYTIC_COLUMNS = ("policy", "lambda", "mu", "p", "rho", "paoi", "p_tilde", "t_tilde",
                    "s_tilde", "tau", "prob_informative", "mean_service_informative",
                    "mean_wait_informative")


@dataclass(frozen=True)
class SweepSpec:
    lambdas: Tuple[float, ...] = ()
    mu: float = 1.0
    ps: Tuple[float, ...] = DEFAULT_PS
    policies: Tuple[Policy, ...] = ANALYTIC_POLICIES
    peaks: int = 200_000
    batches: int = 32
    warmup: Optional[int] = None
    seed: int = 42
    max_events: int = 10 ** 9
    allow_unstable_lcfs_pre: bool = False
    analytic_only: bool = False
    event_log: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        if not self.lambdas:
            object.__setattr__(self, "lambdas", tuple(r * self.mu for r in DEFAULT_RHOS))
        if not self.ps or not self.policies:
            raise ParameterError("sweep grids must be nonempty")
        if self.jobs < 1:
            raise ParameterError("jobs must be >= 1")
        # surface bad rates/probabilities before any work starts
        for lam in self.lambdas:
            for p in self.ps:
                SystemParams(lam, self.mu, p)
        if not self.analytic_only:
            try:
                self.sim_config(0)
            except ValueError as exc:
                raise ParameterError(str(exc)) from None

    def sim_config(self, stream: int) -> SimConfig:
        return SimConfig(target_peaks=self.peaks, warmup_peaks=self.warmup,
                         n_batches=self.batches, seed=self.seed, stream=stream,
                         max_events=self.max_events,
                         allow_unstable_lcfs_pre=self.allow_unstable_lcfs_pre)


@dataclass(frozen=True)
class Cell:
    policy: Policy
    params: SystemParams

    @property
    def stream(self) -> int:
        return stream_key(self.policy.value, repr(self.params.lam),
                          repr(self.params.mu), repr(self.params.p))

    @property
    def label(self) -> str:
        pr = self.params
        return f"{self.policy.value}_lam{pr.lam:g}_mu{pr.mu:g}_p{pr.p:g}"


def cells(spec: SweepSpec, *, include_sim_only: bool = True) -> List[Cell]:
    """Admissible cells sorted by (policy, p, lambda); guard violations are skipped."""
    out = []
    for policy in sorted(set(spec.policies), key=lambda pol: pol.order):
        if not include_sim_only and not policy.has_analytic_form:
            continue
        for p in sorted(set(spec.ps)):
            for lam in sorted(set(spec.lambdas)):
                params = SystemParams(lam, spec.mu, p)
                try:
                    validate_params(params, policy, spec.allow_unstable_lcfs_pre)
                except ParameterError as exc:
                    log.warning("skipping %s lam=%g mu=%g p=%g: %s",
                                policy, lam, spec.mu, p, exc)
                    continue
                out.append(Cell(policy, params))
    return out


def cmd_analytic(spec: SweepSpec) -> List[Dict[str, object]]:
    rows = []
    for cell in cells(spec, include_sim_only=False):
        res = analytic_paoi(cell.policy, cell.params, spec.allow_unstable_lcfs_pre)
        row = {"policy": cell.policy.value, "lambda": cell.params.lam, "mu": cell.params.mu,
               "p": cell.params.p, "rho": cell.params.rho}
        for key, value in res.as_dict().items():
            if key != "policy":
                row[key] = value
        rows.append(row)
    return rows


def _simulate_cell(args) -> SimResult:
    cell, spec = args
    config = spec.sim_config(cell.stream)
    if spec.event_log:
        os.makedirs(spec.event_log, exist_ok=True)
        with EventLogWriter(os.path.join(spec.event_log, cell.label + ".csv")) as writer:
            return simulate(cell.params, cell.policy, config, on_event=writer)
    return simulate(cell.params, cell.policy, config)


def _guarded_cell(job):
    try:
        return _simulate_cell(job)
    except PeakAgeError as exc:
        return exc


def _simulate_all(spec: SweepSpec, todo: Sequence[Cell]) -> List[object]:
    """SimResult per cell, or the exception that cell raised."""
    jobs = [(cell, spec) for cell in todo]
    if spec.jobs == 1 or len(jobs) < 2:
        return [_guarded_cell(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
        return list(pool.map(_guarded_cell, jobs))


@dataclass
class SweepOutcome:
    rows: List[ComparisonRow]
    errors: List[Tuple[Cell, Exception]] = field(default_factory=list)

    @property
    def failed(self) -> List[ComparisonRow]:
        return [r for r in self.rows if r.verdict == "fail"]

    @property
    def exit_code(self) -> int:
        return 1 if (self.errors or self.failed) else 0


AnalyticFn = Callable[[Policy, SystemParams, bool], AnalyticResult]


def cmd_sweep(spec: SweepSpec, analytic_fn: AnalyticFn = analytic_paoi) -> SweepOutcome:
    """Simulate every admissible cell and score it against its closed form.

    ``analytic_fn`` is the hook used to check that a wrong formula is caught.
    """
    todo = cells(spec)
    results = _simulate_all(spec, todo)
    outcome = SweepOutcome(rows=[])
    for cell, res in zip(todo, results):
        if isinstance(res, Exception):
            log.error("cell %s failed: %s", cell.label, res)
            outcome.errors.append((cell, res))
            continue
        if not cell.policy.has_analytic_form:
            outcome.rows.append(sim_only_row(cell.policy, cell.params, res))
            continue
        theory = analytic_fn(cell.policy, cell.params, spec.allow_unstable_lcfs_pre)
        outcome.rows.append(compare_values(cell.policy, cell.params, theory.paoi,
                                           res.paoi_mean, res.paoi_se, res.n_peaks))
    outcome.rows.sort(key=lambda r: r.sort_key)
    return outcome


def cmd_plotdata(spec: SweepSpec) -> List[Dict[str, object]]:
    """Tidy rows (policy, rho, p, analytic_paoi[, sim_mean, sim_se]) for plotting."""
    if spec.analytic_only:
        return [{"policy": r["policy"], "rho": r["rho"], "p": r["p"],
                 "analytic_paoi": r["paoi"]} for r in cmd_analytic(spec)]
    outcome = cmd_sweep(spec)
    return [{"policy": r.policy.value, "rho": r.rho, "p": r.p,
             "analytic_paoi": r.analytic_paoi, "sim_mean": r.sim_mean, "sim_se": r.sim_se}
            for r in outcome.rows]


def comparison_dicts(rows: Iterable[ComparisonRow]) -> List[Dict[str, object]]:
    return [{"policy": r.policy.value, "lambda": r.lam, "mu": r.mu, "p": r.p, "rho": r.rho,
             "analytic_paoi": r.analytic_paoi, "sim_mean": r.sim_mean, "sim_se": r.sim_se,
             "n_peaks": r.n_peaks, "z_score": r.z_score, "verdict": r.verdict}
            for r in rows]


# -- serialization ---------------------------------------------------------

def format_number(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def to_csv(rows: Sequence[Dict[str, object]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row.get(col)) for col in columns])
    return buf.getvalue()


def to_json(rows: Sequence[Dict[str, object]], columns: Sequence[str]) -> str:
    def clean(v):
        if isinstance(v, float) and v != v:
            return None
        if isinstance(v, float) and v in (float("inf"), float("-inf")):
            return str(v)
        return v
    return json.dumps([{c: clean(row.get(c)) for c in columns} for row in rows], indent=2) + "\n"


def parse_csv_rows(text: str) -> List[Dict[str, object]]:
    """Inverse of :func:`to_csv` for numeric reports: floats come back bit-exact."""
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for raw in reader:
        row: Dict[str, object] = {}
        for key, value in raw.items():
            if key in ("policy", "verdict"):
                row[key] = value
            elif value == "":
                row[key] = None
            elif key == "n_peaks":
                row[key] = int(value)
            else:
                row[key] = float(value)
        out.append(row)
    return out


def with_overrides(spec: SweepSpec, **changes) -> SweepSpec:
    return replace(spec, **{k: v for k, v in changes.items() if v is not None})

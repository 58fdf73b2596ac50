"""Meso-scale schedules and the full time-marching driver.

A schedule distributes the k gap-tooth timesteps of one macro step into
groups, each (except possibly the last) followed by a forward-Euler
extrapolation span:

* UPD      - one group, one span:            k GTTs, extrapolate dt - k*tau.
* type I   - l groups, l spans:              GTTs then extrapolation, repeated.
* type II  - l groups, l-1 spans:            the last group ends the macro step.

Spans always add up to dt - k*tau, so one executed macro step covers
exactly dt of simulated time.  Each extrapolation costs one extra
(off-the-books) GTT for the derivative estimate, giving k+l executed GTTs
per macro step for type I, k+l-1 for type II and k+1 for UPD.
"""

from __future__ import annotations

import enum
import time as _time
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (ArityMismatch, BudgetMismatch, ConfigError, InvalidSplit,
                     NegativeSpan)
from .grid import CoarseField, MacroConfig
from .gtt import estimate_time_derivative, gtt_step
from .micro import MicroProblem

DIVERGENCE_THRESHOLD = 1e6


class ScheduleKind(enum.Enum):
    UPD = "upd"
    GPD_I = "gpd1"
    GPD_II = "gpd2"


@dataclass(frozen=True)
class GttSchedule:
    """Validated distribution of GTT groups and extrapolation spans.

    groups holds (k_i, t_i) pairs; for type II the final group's span is
    None.  k_total = sum of k_i.
    """

    kind: ScheduleKind
    groups: Tuple[Tuple[int, Optional[float]], ...]
    k_total: int

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_extrapolations(self) -> int:
        return sum(1 for _, t in self.groups if t is not None)

    @property
    def gtts_per_macro_step(self) -> int:
        return self.k_total + self.n_extrapolations

    @property
    def k_list(self) -> Tuple[int, ...]:
        return tuple(k for k, _ in self.groups)

    @property
    def t_list(self) -> Tuple[float, ...]:
        return tuple(t for _, t in self.groups if t is not None)

    def fingerprint(self) -> str:
        ks = ",".join(str(k) for k in self.k_list)
        ts = ",".join(format(t, ".17g") for t in self.t_list)
        return f"{self.kind.value}|k={{{ks}}}|t={{{ts}}}"


def _check_relaxation(schedule: GttSchedule, cfg: MacroConfig) -> None:
    hint = cfg.relaxation_time_hint
    if hint is None:
        return
    shortest = min(k for k in schedule.k_list) * cfg.tau
    if hint >= shortest:
        warnings.warn(
            f"relaxation time hint {hint:g} is not small against the "
            f"shortest group footprint {shortest:g}; the micro state may "
            "not reach quasi-equilibrium between extrapolations",
            stacklevel=3,
        )


def _validate_schedule(schedule: GttSchedule, cfg: MacroConfig) -> GttSchedule:
    if schedule.k_total != sum(schedule.k_list):
        raise ConfigError("k_total must equal the sum of group counts")
    if any(k < 1 for k in schedule.k_list):
        raise ConfigError("every group needs at least one GTT")
    budget = cfg.delta_t - schedule.k_total * cfg.tau
    if budget <= 0:
        raise InvalidSplit(
            f"k*tau = {schedule.k_total * cfg.tau:g} does not leave room for "
            f"extrapolation inside delta_t = {cfg.delta_t:g}"
        )
    spans = schedule.t_list
    if any(t < 0 for t in spans):
        raise NegativeSpan("extrapolation spans must be >= 0")
    expected = schedule.n_groups if schedule.kind is not ScheduleKind.GPD_II \
        else schedule.n_groups - 1
    if schedule.n_extrapolations != expected:
        raise ArityMismatch(
            f"{schedule.kind.value} with {schedule.n_groups} groups needs "
            f"{expected} spans, got {schedule.n_extrapolations}"
        )
    if abs(sum(spans) - budget) > 1e-12 * cfg.delta_t:
        raise BudgetMismatch(
            f"spans sum to {sum(spans):.17g}, budget is {budget:.17g}"
        )
    if schedule.kind is ScheduleKind.UPD and schedule.n_groups != 1:
        raise ConfigError("UPD is the single-group schedule")
    _check_relaxation(schedule, cfg)
    return schedule


def make_uniform_schedule(kind: ScheduleKind, k: int, l: int,
                          cfg: MacroConfig) -> GttSchedule:
    """Uniform split of k GTTs into l groups with equal extrapolation spans.

    When l does not divide k the deficit is trimmed from the last group
    (k=24, l=5 gives {5,5,5,5,4}).  Type II distributes the budget over
    l-1 spans and runs its last group flush against the macro step's end.
    """
    if l < 1 or k < 1:
        raise InvalidSplit("need k >= 1 and l >= 1")
    if l > k:
        raise InvalidSplit(f"cannot split {k} GTTs into {l} groups")
    if kind is ScheduleKind.UPD and l != 1:
        raise InvalidSplit("UPD has exactly one group")
    budget = cfg.delta_t - k * cfg.tau
    if budget <= 0:
        raise InvalidSplit("k*tau >= delta_t leaves no extrapolation budget")
    base = -(-k // l)  # ceil: earlier groups carry the larger share
    counts = []
    remaining = k
    for i in range(l):
        take = min(base, remaining - (l - 1 - i))
        counts.append(take)
        remaining -= take
    n_spans = l if kind is not ScheduleKind.GPD_II else l - 1
    if n_spans == 0:
        raise InvalidSplit("type II needs at least two groups")
    span = budget / n_spans
    groups: List[Tuple[int, Optional[float]]] = [(c, span) for c in counts]
    if kind is ScheduleKind.GPD_II:
        groups[-1] = (groups[-1][0], None)
    sched = GttSchedule(kind=kind, groups=tuple(groups), k_total=k)
    return _validate_schedule(sched, cfg)


def make_custom_schedule(kind: ScheduleKind, k_list: Sequence[int],
                         t_fractions: Sequence[float],
                         cfg: MacroConfig) -> GttSchedule:
    """Schedule with explicit group sizes and span fractions of the budget.

    t_fractions must sum to 1 (within 1e-9) and its length must match the
    kind's arity: one fraction per group for UPD/type I, one per group
    except the last for type II.
    """
    k_list = [int(k) for k in k_list]
    fracs = [float(f) for f in t_fractions]
    n_spans = len(k_list) if kind is not ScheduleKind.GPD_II else len(k_list) - 1
    if len(fracs) != n_spans:
        raise ArityMismatch(
            f"{kind.value} with {len(k_list)} groups needs {n_spans} span "
            f"fractions, got {len(fracs)}"
        )
    if any(f < 0 for f in fracs):
        raise NegativeSpan("span fractions must be >= 0")
    if abs(sum(fracs) - 1.0) > 1e-9:
        raise BudgetMismatch(f"span fractions sum to {sum(fracs):.12g}, not 1")
    k = sum(k_list)
    budget = cfg.delta_t - k * cfg.tau
    if budget <= 0:
        raise InvalidSplit("k*tau >= delta_t leaves no extrapolation budget")
    groups: List[Tuple[int, Optional[float]]] = [
        (k_list[i], fracs[i] * budget if i < n_spans else None)
        for i in range(len(k_list))
    ]
    sched = GttSchedule(kind=kind, groups=tuple(groups), k_total=k)
    return _validate_schedule(sched, cfg)


def extrapolate(field: CoarseField, derivative: np.ndarray,
                span: float) -> CoarseField:
    """Forward-Euler step U_j += span * F_j on the interior, boundaries re-pinned."""
    if span < 0:
        raise NegativeSpan(f"span must be >= 0, got {span:g}")
    derivative = np.asarray(derivative, dtype=float)
    if derivative.shape != field.values.shape:
        raise ConfigError(
            f"derivative shape {derivative.shape} does not match the field"
        )
    out = field.values + span * derivative
    out[0], out[-1] = field.values[0], field.values[-1]
    diverged = field.diverged or not bool(np.all(np.isfinite(out)))
    return field.with_values(out, time=field.time + span, diverged=diverged)


@dataclass
class RunReport:
    """Everything one time-marching run produced.

    snapshots are the coarse fields at macro-step boundaries (Nt+1 of them,
    including the initial field).  Error metrics are filled in when a
    reference was supplied: max_percent_error normalizes by the global max
    of the reference over the whole run (the default convention);
    max_percent_error_per_time normalizes each instant by the reference's
    max over the domain at that instant.
    """

    schedule: GttSchedule
    snapshots: List[CoarseField] = field(default_factory=list)
    diverged: bool = False
    first_divergence_time: Optional[float] = None
    max_percent_error: Optional[float] = None
    max_percent_error_per_time: Optional[float] = None
    error_times: Optional[np.ndarray] = None
    error_profile: Optional[np.ndarray] = None
    gtt_count: int = 0
    extrapolation_count: int = 0
    wall_time: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def values(self) -> np.ndarray:
        return np.array([s.values for s in self.snapshots])


def _blank_diverged(u: np.ndarray) -> np.ndarray:
    out = u.copy()
    out[1:-1] = np.nan
    return out


def run(initial: CoarseField, schedule: GttSchedule, prob: MicroProblem,
        cfg: MacroConfig,
        reference: Optional[Callable[[np.ndarray, float], np.ndarray]] = None,
        workers: int = 1) -> RunReport:
    """March n_macro_steps macro steps of the given schedule.

    Per group: k_i GTTs, then (unless it is the terminal type-II group) one
    derivative-estimation GTT and a forward-Euler extrapolation over t_i.
    Divergence (any non-finite value or |U| > DIVERGENCE_THRESHOLD) flags
    the report at the first offending instant; the interior is then NaN and
    the remaining steps are fast-forwarded (their GTT/extrapolation counts
    still accrue), so the report always reaches final time.
    """
    _validate_schedule(schedule, cfg)
    report = RunReport(schedule=schedule)
    field_now = initial
    report.snapshots.append(field_now)
    start = _time.perf_counter()

    def register(f: CoarseField) -> CoarseField:
        """Blank the interior to NaN and stamp the report at first divergence."""
        if not f.diverged:
            interior = f.values[1:-1]
            blown = not np.all(np.isfinite(interior)) or \
                np.any(np.abs(interior[np.isfinite(interior)]) > DIVERGENCE_THRESHOLD)
            if not blown:
                return f
        if report.first_divergence_time is None:
            report.diverged = True
            report.first_divergence_time = f.time
        return f.with_values(_blank_diverged(f.values), diverged=True)

    for _ in range(cfg.n_macro_steps):
        for k_i, span in schedule.groups:
            for _ in range(k_i):
                field_now = register(gtt_step(field_now, prob, cfg,
                                              workers=workers))
                report.gtt_count += 1
            if span is not None:
                deriv = estimate_time_derivative(field_now, prob, cfg,
                                                 workers=workers)
                report.gtt_count += 1
                field_now = register(extrapolate(field_now, deriv, span))
                report.extrapolation_count += 1
        report.snapshots.append(field_now)

    report.wall_time = _time.perf_counter() - start
    if reference is not None:
        _attach_errors(report, cfg, reference)
    return report


def _attach_errors(report: RunReport, cfg: MacroConfig,
                   reference: Callable[[np.ndarray, float], np.ndarray]) -> None:
    """Error metrics vs the reference at macro-step boundaries.

    The headline max_percent_error uses the global-max normalization; the
    per-time variant normalizes each instant by the reference's own max
    over the domain at that instant.  Diverged (NaN) instants are excluded,
    so a diverged run reports the error accumulated while it was finite.
    """
    from .reference import error_profile, max_percent_error

    times = report.times
    values = report.values
    report.error_times = times
    report.error_profile = error_profile(times, values, reference, cfg)
    report.max_percent_error = max_percent_error(
        times, values, reference, cfg, normalization="global")
    report.max_percent_error_per_time = max_percent_error(
        times, values, reference, cfg, normalization="per-time")

"""Command-line surface: run experiments from a plain-text document.

The document is INI-style with four section kinds::

    [config]            every MacroConfig field, plus:
                        reference = analytic | oracle | none
                        initial_condition = point-samples | box-averages
    [schedule.NAME]     kind = upd | gpd1 | gpd2 with either a uniform
                        split (k = ..., l = ...) or an explicit one
                        (k_list = ..., optional t_fractions = ...)
    [sweep]             nt = ... (list), schedules = ... (optional subset)
    [output]            report / errors / fields paths, plus the snapshot
                        times and probe positions used by `fields`

Verbs: run | table | fields | validate.  Exit codes: 0 ok, 1 document or
validation error, 2 at least one run diverged (output is still written).

Sweeps vary Nt at fixed final time (final_time = delta_t * n_macro_steps of
the base config), matching how the benchmark tables scan the macro step.
Reports and field/error CSVs carry no timing data and reproduce
byte-identically; wall-clock numbers go to the table verb and a separate
timing file.  Floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, SpecDocumentError
from .grid import CoarseField, MacroConfig, macro_nodes, validate_config
from .micro import MicroProblem
from .reference import analytic_solution, benchmark_initial, oracle_as_reference
from .schedule import (GttSchedule, RunReport, ScheduleKind,
                       make_custom_schedule, make_uniform_schedule, run)

MICRO_SCALES = {
    "paper": {"micro_dx": 4.4444e-5, "micro_dt": 9.5238e-10},
    "coarse": {"micro_dx": 2e-4, "micro_dt": 1.6e-8},
}

_FLOAT_KEYS = {
    "domain_lo", "domain_hi", "delta_x", "delta_t", "patch_width", "tau",
    "micro_dx", "micro_dt", "relaxation_time_hint",
}
_INT_KEYS = {"n_macro", "n_macro_steps", "poly_degree", "macro_pde_order"}
_STR_KEYS = {"slope_basis"}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class ScheduleSpec:
    """Declarative schedule description, materialized per config."""

    name: str
    kind: ScheduleKind
    k: Optional[int] = None
    l: Optional[int] = None
    k_list: Optional[Tuple[int, ...]] = None
    t_fractions: Optional[Tuple[float, ...]] = None

    def materialize(self, cfg: MacroConfig) -> GttSchedule:
        if self.k_list is not None:
            if self.t_fractions is not None:
                return make_custom_schedule(self.kind, self.k_list,
                                            self.t_fractions, cfg)
            n_spans = len(self.k_list) if self.kind is not ScheduleKind.GPD_II \
                else len(self.k_list) - 1
            fracs = [1.0 / n_spans] * n_spans
            return make_custom_schedule(self.kind, self.k_list, fracs, cfg)
        return make_uniform_schedule(self.kind, self.k or 0, self.l or 1, cfg)

    def label(self) -> str:
        if self.k_list is not None:
            return "{" + ";".join(str(k) for k in self.k_list) + "}"
        if (self.l or 1) == 1:
            return f"{{{self.k}}}"
        return f"k={self.k};l={self.l}"


@dataclass
class ExperimentSpec:
    """Parsed experiment document."""

    config: MacroConfig
    schedules: List[ScheduleSpec]
    reference: str = "analytic"
    initial_condition: str = "point-samples"
    sweep_nt: Optional[List[int]] = None
    sweep_schedules: Optional[List[str]] = None
    out_report: str = "report.csv"
    out_errors: str = "errors.csv"
    out_fields: str = "fields.csv"
    fields_times: List[float] = field(default_factory=list)
    fields_probes: List[float] = field(default_factory=list)


def parse_spec(path: Path, micro_scale: Optional[str] = None) -> ExperimentSpec:
    """Parse and fully validate an experiment document."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise SpecDocumentError(f"{path}: {exc}") from exc
    if not read:
        raise SpecDocumentError(f"cannot read spec document {path}")
    if "config" not in parser:
        raise SpecDocumentError(f"{path}: missing [config] section")

    kwargs: Dict[str, object] = {}
    reference = "analytic"
    initial_condition = "point-samples"
    for key, raw in parser["config"].items():
        if key in _FLOAT_KEYS:
            kwargs[key] = float(raw)
        elif key in _INT_KEYS:
            kwargs[key] = int(raw)
        elif key in _STR_KEYS:
            kwargs[key] = raw.strip()
        elif key == "reference":
            reference = raw.strip().lower()
        elif key == "initial_condition":
            initial_condition = raw.strip().lower()
        else:
            raise SpecDocumentError(f"[config]: unknown key {key!r}")
    if micro_scale is not None:
        kwargs.update(MICRO_SCALES[micro_scale])
    if reference not in ("analytic", "oracle", "none"):
        raise SpecDocumentError(
            f"[config]: reference must be analytic|oracle|none, got {reference!r}")
    if initial_condition not in ("point-samples", "box-averages"):
        raise SpecDocumentError(
            "[config]: initial_condition must be point-samples|box-averages")
    try:
        cfg = validate_config(MacroConfig(**kwargs))
    except (ConfigError, TypeError) as exc:
        raise SpecDocumentError(f"[config]: {exc}") from exc

    schedules: List[ScheduleSpec] = []
    for section in parser.sections():
        if not section.startswith("schedule."):
            continue
        name = section[len("schedule."):]
        body = parser[section]
        kind_raw = body.get("kind", "").strip().lower()
        try:
            kind = ScheduleKind(kind_raw)
        except ValueError:
            raise SpecDocumentError(
                f"[{section}]: kind must be upd|gpd1|gpd2, got {kind_raw!r}")
        spec = ScheduleSpec(name=name, kind=kind)
        if "k_list" in body:
            spec.k_list = tuple(int(v) for v in body["k_list"].split())
            if "t_fractions" in body:
                spec.t_fractions = tuple(float(v)
                                         for v in body["t_fractions"].split())
        elif "k" in body:
            spec.k = int(body["k"])
            spec.l = int(body.get("l", "1"))
        else:
            raise SpecDocumentError(
                f"[{section}]: needs either k (+ optional l) or k_list")
        schedules.append(spec)
    if not schedules:
        raise SpecDocumentError(f"{path}: no [schedule.NAME] sections")

    spec = ExperimentSpec(config=cfg, schedules=schedules,
                          reference=reference,
                          initial_condition=initial_condition)

    if "sweep" in parser:
        body = parser["sweep"]
        if "nt" in body:
            spec.sweep_nt = [int(v) for v in body["nt"].split()]
        if "schedules" in body:
            names = body["schedules"].split()
            known = {s.name for s in schedules}
            for n in names:
                if n not in known:
                    raise SpecDocumentError(f"[sweep]: unknown schedule {n!r}")
            spec.sweep_schedules = names

    if "output" in parser:
        body = parser["output"]
        spec.out_report = body.get("report", spec.out_report)
        spec.out_errors = body.get("errors", spec.out_errors)
        spec.out_fields = body.get("fields", spec.out_fields)
        if "times" in body:
            spec.fields_times = [float(v) for v in body["times"].split()]
        if "probes" in body:
            spec.fields_probes = [float(v) for v in body["probes"].split()]

    # every schedule must validate against the base config before any run
    for s in spec.schedules:
        try:
            s.materialize(cfg)
        except ConfigError as exc:
            raise SpecDocumentError(f"[schedule.{s.name}]: {exc}") from exc
    # and against every swept config
    for swept_cfg, _ in iter_sweep(spec):
        for s in _sweep_schedule_specs(spec):
            try:
                s.materialize(swept_cfg)
            except ConfigError as exc:
                raise SpecDocumentError(
                    f"[schedule.{s.name}] at nt={swept_cfg.n_macro_steps}: "
                    f"{exc}") from exc
    return spec


def _sweep_schedule_specs(spec: ExperimentSpec) -> List[ScheduleSpec]:
    if spec.sweep_schedules is None:
        return spec.schedules
    by_name = {s.name: s for s in spec.schedules}
    return [by_name[n] for n in spec.sweep_schedules]


def iter_sweep(spec: ExperimentSpec):
    """(config, nt) pairs of the sweep: Nt varies at fixed final time."""
    if not spec.sweep_nt:
        return
    final_time = spec.config.final_time
    for nt in spec.sweep_nt:
        delta_t = final_time / nt
        cfg = validate_config(MacroConfig(
            **{**_config_kwargs(spec.config),
               "delta_t": delta_t, "n_macro_steps": nt}))
        yield cfg, nt


def _config_kwargs(cfg: MacroConfig) -> Dict[str, object]:
    return {
        "domain_lo": cfg.domain_lo, "domain_hi": cfg.domain_hi,
        "delta_x": cfg.delta_x, "n_macro": cfg.n_macro,
        "delta_t": cfg.delta_t, "n_macro_steps": cfg.n_macro_steps,
        "patch_width": cfg.patch_width, "tau": cfg.tau,
        "micro_dx": cfg.micro_dx, "micro_dt": cfg.micro_dt,
        "poly_degree": cfg.poly_degree,
        "macro_pde_order": cfg.macro_pde_order,
        "relaxation_time_hint": cfg.relaxation_time_hint,
        "slope_basis": cfg.slope_basis,
    }


def initial_field(spec: ExperimentSpec, cfg: MacroConfig) -> CoarseField:
    """Benchmark initial data on the macro nodes, boundaries pinned to zero."""
    x = macro_nodes(cfg)
    if spec.initial_condition == "box-averages":
        h = cfg.patch_width
        values = benchmark_initial(x) * (2.0 / (math.pi * h)) \
            * math.sin(math.pi * h / 2.0)
    else:
        values = benchmark_initial(x)
    values = np.asarray(values, dtype=float)
    values[0], values[-1] = 0.0, 0.0
    return CoarseField(time=0.0, values=values)


def reference_callback(spec: ExperimentSpec, cfg: MacroConfig,
                       ) -> Optional[Callable[[np.ndarray, float], np.ndarray]]:
    if spec.reference == "analytic":
        return analytic_solution
    if spec.reference == "oracle":
        return oracle_as_reference(cfg, MicroProblem(), cfg.final_time)
    return None


def _header_lines(spec: ExperimentSpec, cfg: MacroConfig,
                  seed: Optional[int]) -> List[str]:
    lines = ["# patchdyn report"]
    for key, val in sorted(_config_kwargs(cfg).items()):
        lines.append(f"# config.{key} = "
                     f"{_fmt(val) if isinstance(val, float) else val}")
    lines.append(f"# config.m_intervals = {cfg.m_intervals}")
    lines.append(f"# config.steps_per_tau = {cfg.steps_per_tau}")
    lines.append(f"# reference = {spec.reference}")
    lines.append(f"# initial_condition = {spec.initial_condition}")
    lines.append("# error normalization: max-%-error = 100 * max_{j,n} "
                 "|U - ref| / max_{x,t} |ref| over interior nodes at "
                 "macro-step boundaries; per-time variant divides each "
                 "instant by max_x |ref(., t)| instead")
    if seed is not None:
        lines.append(f"# seed = {seed} (reserved; the benchmark is deterministic)")
    return lines


_REPORT_COLUMNS = [
    "name", "kind", "k_list", "t_list", "nt", "delta_t", "k_total",
    "groups", "gtt_count", "extrapolation_count", "span_per_extrapolation",
    "max_pct_error", "max_pct_error_per_time", "diverged",
    "first_divergence_time",
]


def _span_summary(schedule: GttSchedule) -> str:
    spans = schedule.t_list
    if not spans:
        return ""
    if max(spans) - min(spans) <= 1e-15 * max(spans):
        return _fmt(spans[0])
    return ";".join(_fmt(t) for t in spans)


def _report_row(name: str, nt: int, cfg: MacroConfig, schedule: GttSchedule,
                report: RunReport) -> List[str]:
    def blank_if_none(v):  # noqa: ANN001
        return "" if v is None else (_fmt(v) if isinstance(v, float) else str(v))

    # semicolon-joined inside braces: the fields stay single CSV columns
    return [
        name, schedule.kind.value,
        "{" + ";".join(str(k) for k in schedule.k_list) + "}",
        "{" + ";".join(_fmt(t) for t in schedule.t_list) + "}",
        str(nt), _fmt(cfg.delta_t), str(schedule.k_total),
        str(schedule.n_groups), str(report.gtt_count),
        str(report.extrapolation_count), _span_summary(schedule),
        blank_if_none(report.max_percent_error),
        blank_if_none(report.max_percent_error_per_time),
        str(report.diverged).lower(),
        blank_if_none(report.first_divergence_time),
    ]


def _write_lines(path: Path, lines: Sequence[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _execute(spec: ExperimentSpec, cfg: MacroConfig, sched_spec: ScheduleSpec,
             jobs: int) -> Tuple[GttSchedule, RunReport]:
    schedule = sched_spec.materialize(cfg)
    ref = reference_callback(spec, cfg)
    report = run(initial_field(spec, cfg), schedule, MicroProblem(), cfg,
                 reference=ref, workers=jobs)
    return schedule, report


def cmd_run(spec: ExperimentSpec, out_dir: Path, jobs: int,
            seed: Optional[int]) -> int:
    """Execute every schedule at the base config; write report + error CSVs."""
    cfg = spec.config
    rows: List[List[str]] = []
    error_lines = ["name,time,max_abs_error"]
    timing_lines = ["name,wall_time_seconds"]
    any_diverged = False
    for sched_spec in spec.schedules:
        schedule, report = _execute(spec, cfg, sched_spec, jobs)
        rows.append(_report_row(sched_spec.name, cfg.n_macro_steps, cfg,
                                schedule, report))
        timing_lines.append(f"{sched_spec.name},{report.wall_time:.6f}")
        any_diverged = any_diverged or report.diverged
        if report.error_profile is not None:
            for t, e in zip(report.error_times, report.error_profile):
                error_lines.append(f"{sched_spec.name},{_fmt(t)},{_fmt(e)}")
    lines = _header_lines(spec, cfg, seed)
    lines.append(",".join(_REPORT_COLUMNS))
    lines.extend(",".join(row) for row in rows)
    _write_lines(out_dir / spec.out_report, lines)
    _write_lines(out_dir / spec.out_errors, error_lines)
    _write_lines(out_dir / (spec.out_report + ".timing"), timing_lines)
    return 2 if any_diverged else 0


_TABLE_COLUMNS = [
    "distribution", "kind", "nt", "gtt_count", "extrapolation_count",
    "span_per_extrapolation", "max_pct_error", "max_pct_error_per_time",
    "wall_time", "diverged",
]


def cmd_table(spec: ExperimentSpec, out_dir: Path, jobs: int,
              seed: Optional[int]) -> int:
    """Cross the sweep's Nt values with its schedules; emit CSV + aligned text."""
    if not spec.sweep_nt:
        print("error: [sweep] section with an nt list is required", file=sys.stderr)
        return 1
    rows: List[List[str]] = []
    any_diverged = False
    for cfg, nt in iter_sweep(spec):
        for sched_spec in _sweep_schedule_specs(spec):
            schedule, report = _execute(spec, cfg, sched_spec, jobs)
            any_diverged = any_diverged or report.diverged
            rows.append([
                sched_spec.label(), schedule.kind.value, str(nt),
                str(report.gtt_count), str(report.extrapolation_count),
                _span_summary(schedule),
                "" if report.max_percent_error is None
                else f"{report.max_percent_error:.4f}",
                "" if report.max_percent_error_per_time is None
                else f"{report.max_percent_error_per_time:.4f}",
                f"{report.wall_time:.3f}",
                str(report.diverged).lower(),
            ])
    lines = _header_lines(spec, spec.config, seed)
    lines.append(",".join(_TABLE_COLUMNS))
    lines.extend(",".join(r) for r in rows)
    _write_lines(out_dir / spec.out_report, lines)

    widths = [max(len(_TABLE_COLUMNS[i]), max((len(r[i]) for r in rows),
                                              default=0))
              for i in range(len(_TABLE_COLUMNS))]
    print("  ".join(c.ljust(w) for c, w in zip(_TABLE_COLUMNS, widths)))
    for r in rows:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    return 2 if any_diverged else 0


def cmd_fields(spec: ExperimentSpec, out_dir: Path, jobs: int,
               seed: Optional[int]) -> int:
    """Write x-vs-U column data at requested times, plus probe time series."""
    cfg = spec.config
    if not spec.fields_times and not spec.fields_probes:
        print("error: [output] needs times and/or probes for the fields verb",
              file=sys.stderr)
        return 1
    for t in spec.fields_times:
        if t > cfg.final_time * (1 + 1e-12):
            print(f"error: requested time {t:g} is beyond final time "
                  f"{cfg.final_time:g}", file=sys.stderr)
            return 1
    x = macro_nodes(cfg)
    probe_idx = []
    for p in spec.fields_probes:
        j = int(round((p - cfg.domain_lo) / cfg.delta_x))
        if not (0 <= j <= cfg.n_macro) or abs(x[j] - p) > 1e-9:
            print(f"error: probe {p:g} is not a macro node", file=sys.stderr)
            return 1
        probe_idx.append(j)

    lines = _header_lines(spec, cfg, seed)
    lines.append("slice,name,requested,actual,coord,value")
    any_diverged = False

    def emit_slices(name: str, times: np.ndarray, values: np.ndarray) -> None:
        for t_req in spec.fields_times:
            n = int(np.argmin(np.abs(times - t_req)))
            for j in range(cfg.n_macro + 1):
                lines.append(f"time,{name},{_fmt(t_req)},{_fmt(times[n])},"
                             f"{_fmt(x[j])},{_fmt(values[n, j])}")
        for p, j in zip(spec.fields_probes, probe_idx):
            for n in range(len(times)):
                lines.append(f"probe,{name},{_fmt(p)},{_fmt(x[j])},"
                             f"{_fmt(times[n])},{_fmt(values[n, j])}")

    for sched_spec in spec.schedules:
        _, report = _execute(spec, cfg, sched_spec, jobs)
        any_diverged = any_diverged or report.diverged
        emit_slices(sched_spec.name, report.times, report.values)

    times = np.arange(cfg.n_macro_steps + 1) * cfg.delta_t
    analytic = np.array([analytic_solution(x, t) for t in times])
    emit_slices("analytic", times, analytic)

    _write_lines(out_dir / spec.out_fields, lines)
    return 2 if any_diverged else 0


def cmd_validate(spec: ExperimentSpec) -> int:
    cfg = spec.config
    print(f"config ok: N={cfg.n_macro} macro intervals, "
          f"M={cfg.m_intervals} micro intervals per tooth, "
          f"{cfg.steps_per_tau} micro steps per tau, "
          f"final time {_fmt(cfg.final_time)}")
    for s in spec.schedules:
        sched = s.materialize(cfg)
        print(f"schedule {s.name}: {sched.fingerprint()} "
              f"({sched.gtts_per_macro_step} GTTs per macro step)")
    for swept_cfg, nt in iter_sweep(spec):
        print(f"sweep nt={nt}: delta_t={_fmt(swept_cfg.delta_t)} ok")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="patchdyn",
        description="gap-tooth patch dynamics experiment driver")
    parser.add_argument("verb", choices=["run", "table", "fields", "validate"])
    parser.add_argument("--spec", required=True, type=Path,
                        help="experiment document path")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory")
    parser.add_argument("--micro-scale", choices=["paper", "coarse"],
                        help="override the document's micro grid")
    parser.add_argument("--jobs", type=int, default=1,
                        help="patch-evolution worker threads")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; the benchmark is deterministic")
    args = parser.parse_args(argv)

    try:
        spec = parse_spec(args.spec, micro_scale=args.micro_scale)
    except (SpecDocumentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.verb == "validate":
            return cmd_validate(spec)
        if args.verb == "run":
            return cmd_run(spec, args.out, args.jobs, args.seed)
        if args.verb == "table":
            return cmd_table(spec, args.out, args.jobs, args.seed)
        return cmd_fields(spec, args.out, args.jobs, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

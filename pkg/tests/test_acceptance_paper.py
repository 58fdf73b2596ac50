"""Paper-scale acceptance: benchmark-table reproduction on the fine micro grid.

Every run here uses micro_dx = 4.4444e-5 and micro_dt = 9.5238e-10 (snapped
to 450 intervals per tooth and 10500 steps per gap-tooth timestep) with
final time 1, so delta_t = 1/Nt.  Each configuration costs 5-15 minutes;
enable with PATCHDYN_PAPER_SCALE=1.

Each table item is checked under the default (global-max) error
normalization and the per-time alternate; the joint gate test requires all
three table items to hold under at least one common normalization.
Measured values under both normalizations are always printed so a failing
run still documents what the implementation produces.
"""

import os

import pytest

from patchdyn import (BENCHMARK, CoarseField, MacroConfig, ScheduleKind,
                      analytic_solution, benchmark_initial, macro_nodes,
                      make_uniform_schedule, run, validate_config)

pytestmark = [
    pytest.mark.paper_scale,
    pytest.mark.skipif(os.environ.get("PATCHDYN_PAPER_SCALE") != "1",
                       reason="paper-scale suite is opt-in: set "
                              "PATCHDYN_PAPER_SCALE=1"),
]

WORKERS = int(os.environ.get("PATCHDYN_WORKERS", "1"))


def paper_cfg(nt: int) -> MacroConfig:
    return validate_config(MacroConfig(
        delta_t=1.0 / nt, n_macro_steps=nt,
        micro_dx=4.4444e-5, micro_dt=9.5238e-10))


def sin_start(cfg):
    return CoarseField(0.0, benchmark_initial(macro_nodes(cfg)))


def execute(nt: int, kind: ScheduleKind, l: int):
    cfg = paper_cfg(nt)
    schedule = make_uniform_schedule(kind, 24, l, cfg)
    return run(sin_start(cfg), schedule, BENCHMARK, cfg,
               reference=analytic_solution, workers=WORKERS)


@pytest.fixture(scope="module")
def table_runs():
    """Every configuration items 10-12 quote, keyed by (nt, kind, l)."""
    wanted = [
        (600, ScheduleKind.UPD, 1),
        (600, ScheduleKind.GPD_I, 3),
        (600, ScheduleKind.GPD_I, 12),
        (600, ScheduleKind.GPD_I, 24),
        (1000, ScheduleKind.UPD, 1),
        (100, ScheduleKind.GPD_I, 24),
        (100, ScheduleKind.GPD_II, 24),
    ]
    out = {}
    for nt, kind, l in wanted:
        out[(nt, kind, l)] = execute(nt, kind, l)
    return out


# (key, expected, absolute tolerance)
ITEM10 = [
    ((600, ScheduleKind.UPD, 1), 4.3755, 0.05),
    ((600, ScheduleKind.GPD_I, 3), 1.2304, 0.05),
    ((600, ScheduleKind.GPD_I, 12), 0.0339, 0.02),
    ((600, ScheduleKind.GPD_I, 24), 0.1664, 0.05),
]
ITEM11 = [
    ((1000, ScheduleKind.UPD, 1), 1.8995, 0.05),
    ((100, ScheduleKind.GPD_I, 24), 1.1855, 0.05),
]
ITEM12 = [
    ((100, ScheduleKind.GPD_II, 24), 1.2528, 0.05),
]


def measured(report):
    return {"global": report.max_percent_error,
            "per-time": report.max_percent_error_per_time}


def check_item(name, rows, table_runs):
    lines = []
    ok_by_norm = {"global": True, "per-time": True}
    for key, expected, tol in rows:
        vals = measured(table_runs[key])
        lines.append(f"{key}: expected {expected} +- {tol}, "
                     f"global {vals['global']:.4f}, "
                     f"per-time {vals['per-time']:.4f}, "
                     f"diverged={table_runs[key].diverged}")
        for norm in ok_by_norm:
            ok_by_norm[norm] &= abs(vals[norm] - expected) <= tol
    ok = ok_by_norm["global"] or ok_by_norm["per-time"]
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'}")
    for line in lines:
        print(f"[acceptance]   {line}")
    return ok, ok_by_norm


def test_item_10_error_targets_at_nt600(table_runs):
    ok, _ = check_item("item 10 (benchmark error targets at Nt=600)", ITEM10, table_runs)
    assert ok, "no normalization reproduces the quoted Nt=600 error targets"


def test_item_11_error_targets_upd1000_and_split100(table_runs):
    ok, _ = check_item("item 11 (benchmark error targets, UPD Nt=1000 and split Nt=100)", ITEM11, table_runs)
    assert ok, "no normalization reproduces the quoted UPD/split error targets"


def test_item_12_error_target_type2_split100(table_runs):
    ok, _ = check_item("item 12 (benchmark error target, type-II split Nt=100)", ITEM12, table_runs)
    assert ok, "no normalization reproduces the quoted type-II error target"


def test_items_10_to_12_joint_normalization_gate(table_runs):
    per_norm = {"global": True, "per-time": True}
    for name, rows in (("item 10", ITEM10), ("item 11", ITEM11),
                       ("item 12", ITEM12)):
        _, ok_by_norm = check_item(f"gate recheck {name}", rows, table_runs)
        for norm in per_norm:
            per_norm[norm] &= ok_by_norm[norm]
    ok = per_norm["global"] or per_norm["per-time"]
    print(f"[acceptance] items 10-12 joint gate: {'PASS' if ok else 'FAIL'} "
          f"(global: {per_norm['global']}, per-time: {per_norm['per-time']})")
    assert ok, "no single normalization passes items 10-12 together"


def test_runtime_substitute_property(table_runs):
    # table-row runtime ratios are hardware-bound; the durable claim is the
    # work count and its wall-clock consequence
    upd800 = execute(800, ScheduleKind.UPD, 1)
    gpd100 = table_runs[(100, ScheduleKind.GPD_I, 24)]
    counts_ok = upd800.gtt_count == 20000 and gpd100.gtt_count == 4800
    faster = gpd100.wall_time < upd800.wall_time
    print(f"[acceptance] runtime substitute: "
          f"{'PASS' if counts_ok and faster else 'FAIL'} "
          f"(UPD Nt=800: {upd800.gtt_count} GTTs in {upd800.wall_time:.1f}s; "
          f"type-I {{1,...,1}} Nt=100: {gpd100.gtt_count} GTTs in "
          f"{gpd100.wall_time:.1f}s)")
    assert counts_ok, "executed GTT counts must be 20000 and 4800 exactly"
    assert faster, "the split schedule must finish sooner than single-burst"

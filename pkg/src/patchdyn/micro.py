"""Explicit FTCS evolution of the closed micro PDE inside teeth.

The benchmark micro law is the linear reaction-diffusion equation
u_t = D u_xx + r u with D = r = 1.  Patches carry Neumann conditions: the
boundary slopes are held fixed for the whole call and enforced through
ghost nodes, so the centered difference across each patch edge equals the
prescribed slope (second order, matching the interior stencil).

The stepping kernels are JIT-compiled; rows of the padded state array are
fully independent, which makes the serial and the parallel kernel produce
bit-identical results regardless of worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange, set_num_threads
from numba import config as _numba_config

from .errors import ConfigError
from .grid import MacroConfig, PatchState


@dataclass(frozen=True)
class MicroProblem:
    """Coefficients of the micro law u_t = diffusivity*u_xx + reaction*u."""

    diffusivity: float = 1.0
    reaction_coefficient: float = 1.0

    def __post_init__(self) -> None:
        if self.diffusivity <= 0:
            raise ConfigError("diffusivity must be positive")


BENCHMARK = MicroProblem(diffusivity=1.0, reaction_coefficient=1.0)


def ghost_value(boundary_sample: float, adjacent_sample: float, slope: float,
                side: str, micro_dx: float) -> float:
    """Ghost-node value that makes the centered difference across the patch
    edge equal ``slope``.

    ``boundary_sample`` is unused by the formula (the centered difference
    skips the edge node) but documents the stencil site.
    """
    if side == "left":
        return adjacent_sample - 2.0 * micro_dx * slope
    if side == "right":
        return adjacent_sample + 2.0 * micro_dx * slope
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


@njit(cache=True)
def _ftcs_rows(state, scratch, slope_left, slope_right, lam, rdt, two_dx, nsteps):
    # state: (P, M+3) padded rows; columns 0 and -1 are ghost slots.
    # Each row is stepped independently; result lands back in `state`.
    n_rows, width = state.shape
    for p in range(n_rows):
        a = state[p]
        b = scratch[p]
        for _ in range(nsteps):
            a[0] = a[2] - two_dx * slope_left[p]
            a[width - 1] = a[width - 3] + two_dx * slope_right[p]
            for i in range(1, width - 1):
                b[i] = a[i] + lam * (a[i + 1] - 2.0 * a[i] + a[i - 1]) + rdt * a[i]
            a, b = b, a
        if nsteps % 2 == 1:
            for i in range(width):
                state[p, i] = a[i]


@njit(cache=True, parallel=True)
def _ftcs_rows_parallel(state, scratch, slope_left, slope_right, lam, rdt,
                        two_dx, nsteps):
    # Same arithmetic as _ftcs_rows with the row loop fanned out to threads.
    n_rows, width = state.shape
    for p in prange(n_rows):
        a = state[p]
        b = scratch[p]
        for _ in range(nsteps):
            a[0] = a[2] - two_dx * slope_left[p]
            a[width - 1] = a[width - 3] + two_dx * slope_right[p]
            for i in range(1, width - 1):
                b[i] = a[i] + lam * (a[i + 1] - 2.0 * a[i] + a[i - 1]) + rdt * a[i]
            a, b = b, a
        if nsteps % 2 == 1:
            for i in range(width):
                state[p, i] = a[i]


def _resolve_steps(duration: float, micro_dt: float) -> int:
    steps = int(round(duration / micro_dt))
    if steps < 0 or abs(steps * micro_dt - duration) > 1e-9 * max(duration, micro_dt):
        raise ConfigError(
            f"duration {duration:g} is not a near-integer multiple of "
            f"micro_dt {micro_dt:g}"
        )
    return steps


def evolve_values(values: np.ndarray, slope_left: np.ndarray,
                  slope_right: np.ndarray, prob: MicroProblem,
                  cfg: MacroConfig, nsteps: int, workers: int = 1) -> np.ndarray:
    """Advance a batch of patch sample rows by ``nsteps`` micro steps.

    values: (P, M+1) samples; returns a new array of that shape.  Non-finite
    inputs propagate as NaN/Inf without raising.
    """
    if not cfg.validated:
        raise ConfigError("config must pass validate_config first")
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n_rows = values.shape[0]
    state = np.empty((n_rows, values.shape[1] + 2), dtype=float)
    state[:, 1:-1] = values
    state[:, 0] = 0.0
    state[:, -1] = 0.0
    scratch = np.empty_like(state)
    lam = prob.diffusivity * cfg.micro_dt / (cfg.micro_dx * cfg.micro_dx)
    rdt = prob.reaction_coefficient * cfg.micro_dt
    sl = np.ascontiguousarray(np.asarray(slope_left, dtype=float).ravel())
    sr = np.ascontiguousarray(np.asarray(slope_right, dtype=float).ravel())
    if nsteps > 0:
        if workers > 1:
            set_num_threads(min(workers, _numba_config.NUMBA_NUM_THREADS))
            _ftcs_rows_parallel(state, scratch, sl, sr, lam, rdt,
                                2.0 * cfg.micro_dx, nsteps)
        else:
            _ftcs_rows(state, scratch, sl, sr, lam, rdt,
                       2.0 * cfg.micro_dx, nsteps)
    return state[:, 1:-1].copy()


def evolve_patch(patch: PatchState, prob: MicroProblem, cfg: MacroConfig,
                 duration: float) -> PatchState:
    """Evolve one tooth for ``duration`` under its frozen Neumann slopes.

    Interior update: u_i += dt*(D*(u_{i+1} - 2 u_i + u_{i-1})/dx^2 + r*u_i);
    edge nodes use the ghost values of :func:`ghost_value`.  A state that
    turns non-finite is returned as-is (divergence is a flag downstream,
    never an abort).
    """
    nsteps = _resolve_steps(duration, cfg.micro_dt)
    out = evolve_values(patch.micro_values[None, :],
                        np.array([patch.slope_left]),
                        np.array([patch.slope_right]),
                        prob, cfg, nsteps)
    return PatchState(
        center_index=patch.center_index,
        micro_values=out[0],
        slope_left=patch.slope_left,
        slope_right=patch.slope_right,
        time=patch.time + duration,
    )

"""Ground truths for the benchmark: closed form, brute-force oracle, metrics.

The benchmark problem is u_t = u_xx + u on (0,1) with u(x,0) = sin(pi*x)
and homogeneous Dirichlet boundaries; its solution is
sin(pi*x) * exp((1 - pi^2) t).  The oracle solves the same problem by FTCS
over the entire domain on a fine grid, completely independent of the patch
machinery, and box-averages onto the macro nodes so patch-scheme output can
be compared like for like.
"""

from __future__ import annotations

import math
from typing import Callable, List, Sequence

import numpy as np

from .errors import ConfigError, StabilityViolation
from .grid import CoarseField, MacroConfig, macro_nodes
from .micro import MicroProblem

DECAY_RATE = 1.0 - math.pi ** 2


def analytic_solution(x, t: float):
    """sin(pi*x) * exp((1 - pi^2) t); accepts scalars or arrays."""
    return np.sin(np.pi * np.asarray(x, dtype=float)) * math.exp(DECAY_RATE * t)


def benchmark_initial(x):
    return np.sin(np.pi * np.asarray(x, dtype=float))


def full_domain_oracle(cfg: MacroConfig, prob: MicroProblem, final_time: float,
                       fine_dx: float = 1e-3,
                       initial: Callable[[np.ndarray], np.ndarray] = benchmark_initial,
                       ) -> List[CoarseField]:
    """Brute-force FTCS solve of the micro PDE over the whole domain.

    Returns coarse fields at every macro-step boundary up to final_time,
    each obtained by Simpson box-averaging the fine solution over the tooth
    around every interior macro node (boundaries carry the Dirichlet data).
    The fine timestep is final_time/steps with steps chosen so it meets the
    stability bound and lands exactly on the macro-step boundaries.
    """
    if not cfg.validated:
        raise ConfigError("config must pass validate_config first")
    length = cfg.domain_hi - cfg.domain_lo
    n_fine = int(round(length / fine_dx))
    if abs(n_fine * fine_dx - length) > 1e-9 * length or n_fine < 2:
        raise ConfigError(f"fine_dx {fine_dx:g} does not tile the domain")
    fine_dx = length / n_fine
    # teeth must land on the fine grid with an even interval count
    m_fine = int(round(cfg.patch_width / fine_dx))
    if abs(m_fine * fine_dx - cfg.patch_width) > 1e-9 * cfg.patch_width:
        raise ConfigError(
            f"fine_dx {fine_dx:g} does not tile the tooth width "
            f"{cfg.patch_width:g}")
    if m_fine % 2 != 0:
        raise ConfigError("tooth must span an even number of fine intervals")
    node_stride = cfg.delta_x / fine_dx
    if abs(node_stride - round(node_stride)) > 1e-9:
        raise ConfigError("fine grid must pass through the macro nodes")
    node_stride = int(round(node_stride))

    bound = fine_dx * fine_dx / (2.0 * prob.diffusivity)
    n_steps_per_macro = max(1, math.ceil(cfg.delta_t / bound))
    fine_dt = cfg.delta_t / n_steps_per_macro
    if fine_dt > bound * (1.0 + 1e-12):
        raise StabilityViolation("could not fit a stable fine timestep")

    n_out = int(round(final_time / cfg.delta_t))
    if abs(n_out * cfg.delta_t - final_time) > 1e-9 * max(final_time, cfg.delta_t):
        raise ConfigError("final_time must sit on the macro-step lattice")

    x_fine = cfg.domain_lo + fine_dx * np.arange(n_fine + 1)
    x_fine[-1] = cfg.domain_hi
    u = np.asarray(initial(x_fine), dtype=float).copy()
    u[0], u[-1] = 0.0, 0.0

    w = np.ones(m_fine + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w /= 3.0 * m_fine

    def restrict_fine(u_now: np.ndarray, t_now: float) -> CoarseField:
        vals = np.zeros(cfg.n_macro + 1)
        for j in range(1, cfg.n_macro):
            c = j * node_stride
            vals[j] = w @ u_now[c - m_fine // 2: c + m_fine // 2 + 1]
        return CoarseField(time=t_now, values=vals)

    lam = prob.diffusivity * fine_dt / (fine_dx * fine_dx)
    rdt = prob.reaction_coefficient * fine_dt
    out = [restrict_fine(u, 0.0)]
    nxt = np.empty_like(u)
    for n in range(1, n_out + 1):
        for _ in range(n_steps_per_macro):
            nxt[1:-1] = u[1:-1] + lam * (u[2:] - 2.0 * u[1:-1] + u[:-2]) \
                + rdt * u[1:-1]
            nxt[0], nxt[-1] = 0.0, 0.0
            u, nxt = nxt, u
        out.append(restrict_fine(u, n * cfg.delta_t))
    return out


def max_percent_error(times: Sequence[float], values: np.ndarray,
                      reference: Callable[[np.ndarray, float], np.ndarray],
                      cfg: MacroConfig, normalization: str = "global",
                      ) -> float:
    """Maximum percentage error of a snapshot series against a reference.

    values: (n_times, N+1) coarse fields at the given times.  With
    normalization="global" (the reporting default) the max absolute error
    over all interior nodes and times is scaled by the global max of
    |reference|; "per-time" scales each instant by the reference's max over
    the domain at that instant.  Non-finite (diverged) entries are ignored.
    """
    values = np.asarray(values, dtype=float)
    x = macro_nodes(cfg)
    ref = np.array([np.asarray(reference(x, t), dtype=float) for t in times])
    err = np.abs(values - ref)[:, 1:-1]
    profile = np.max(err, axis=1)
    finite = np.isfinite(profile)
    if not np.any(finite):
        return float("nan")
    if normalization == "global":
        norm = np.max(np.abs(ref))
        worst = np.max(profile[finite])
        return float(100.0 * (worst / norm if norm > 0 else worst))
    if normalization == "per-time":
        norm_t = np.max(np.abs(ref[:, 1:-1]), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = np.where(norm_t > 0, profile / norm_t, profile)
        return float(100.0 * np.max(scaled[finite]))
    raise ConfigError("normalization must be 'global' or 'per-time'")


def error_profile(times: Sequence[float], values: np.ndarray,
                  reference: Callable[[np.ndarray, float], np.ndarray],
                  cfg: MacroConfig) -> np.ndarray:
    """Per-instant max absolute interior error against the reference."""
    values = np.asarray(values, dtype=float)
    x = macro_nodes(cfg)
    ref = np.array([np.asarray(reference(x, t), dtype=float) for t in times])
    return np.max(np.abs(values - ref)[:, 1:-1], axis=1)


def oracle_as_reference(cfg: MacroConfig, prob: MicroProblem, final_time: float,
                        fine_dx: float = 1e-3,
                        ) -> Callable[[np.ndarray, float], np.ndarray]:
    """Wrap the brute-force oracle as a (x, t) -> values reference callback.

    The oracle is evaluated once up front on the macro-step lattice; lookups
    snap to the nearest stored instant.
    """
    series = full_domain_oracle(cfg, prob, final_time, fine_dx=fine_dx)
    times = np.array([f.time for f in series])
    table = np.array([f.values for f in series])

    def ref(x: np.ndarray, t: float) -> np.ndarray:
        idx = int(np.argmin(np.abs(times - t)))
        return table[idx]

    return ref

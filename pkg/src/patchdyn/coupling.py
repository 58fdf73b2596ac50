"""Macro <-> micro bridge: boundary slopes, lifting and restriction.

The macroscopic field is assumed to assimilate, around each tooth, a
polynomial of even degree eta whose *box averages* over the eta+1 teeth of
the stencil reproduce the coarse values.  Its derivative at the tooth edges
supplies the Neumann slopes.  Lifting builds micro initial data from the
coarse value and central-difference derivative estimates, with the constant
term corrected so the lifted patch's box average equals the coarse value
exactly.  Restriction is the composite Simpson 1/3 box average.

Everything here is a pure function of (field, config); the per-config
weight matrices are cached on the validated config object.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from .errors import ConfigError, SingularSystem
from .grid import CoarseField, MacroConfig, PatchState, macro_nodes, patch_offsets


@dataclass(frozen=True)
class LagrangeStencil:
    """Neighbor window used to build the slope polynomial around node j."""

    center_index: int
    offsets: Tuple[int, ...]
    node_positions: Tuple[float, ...]


def stencil_for(cfg: MacroConfig, j: int) -> LagrangeStencil:
    """Symmetric eta+1 window around j, degree-reduced at the domain edges.

    For eta = 2 every interior node has the symmetric window {j-1, j, j+1}
    (nodes 1 and N-1 read the pinned boundary values).  For larger eta a
    node too close to the boundary keeps a symmetric window by dropping to
    the largest even degree that fits; one-sided windows destabilize the
    long-extrapolation schedules.
    """
    eta = cfg.poly_degree
    if cfg.n_macro < 2:
        raise ConfigError("slope stencils need at least 2 macro intervals")
    half = min(eta // 2, j, cfg.n_macro - j)
    offsets = tuple(range(-half, half + 1))
    x = macro_nodes(cfg)
    return LagrangeStencil(
        center_index=j,
        offsets=offsets,
        node_positions=tuple(x[j + o] for o in offsets),
    )


def _basis_matrix(offsets: np.ndarray, rho: float, basis: str) -> np.ndarray:
    """Map polynomial coefficients (monomials in z = (x-x_j)/dx) to data.

    box-average basis: row i holds the box average of z^k over the tooth
    centered at offset c_i with half-width rho; point-value basis: c_i^k.
    """
    n = len(offsets)
    powers = np.arange(n)
    if basis == "point-value":
        return np.power.outer(offsets.astype(float), powers)
    upper = np.power.outer(offsets + rho, powers + 1)
    lower = np.power.outer(offsets - rho, powers + 1)
    return (upper - lower) / (2.0 * rho * (powers + 1.0))


def _slope_rows(cfg: MacroConfig, offsets: Tuple[int, ...]) -> np.ndarray:
    """Weights w such that (s_minus, s_plus) = w @ U[stencil]."""
    eta = len(offsets) - 1
    rho = cfg.patch_width / (2.0 * cfg.delta_x)
    offs = np.array(offsets, dtype=float)
    basis = _basis_matrix(offs, rho, cfg.slope_basis)
    powers = np.arange(eta + 1)
    deriv = np.zeros((2, eta + 1))
    for row, z_edge in enumerate((-rho, rho)):
        deriv[row, 1:] = powers[1:] * np.power(z_edge, powers[1:] - 1)
    deriv /= cfg.delta_x
    try:
        return np.linalg.solve(basis.T, deriv.T).T
    except np.linalg.LinAlgError as exc:  # pragma: no cover - uniform grid
        raise SingularSystem(str(exc)) from exc


class _Operators:
    """Per-config dense operators for the batched bridge."""

    def __init__(self, cfg: MacroConfig):
        if not cfg.validated:
            raise ConfigError("config must pass validate_config first")
        n = cfg.n_macro
        self.xi = patch_offsets(cfg)

        # slope matrices: interior row j-1 gives s_j from the full field
        self.slope_minus = np.zeros((n - 1, n + 1))
        self.slope_plus = np.zeros((n - 1, n + 1))
        for j in range(1, n):
            st = stencil_for(cfg, j)
            w = _slope_rows(cfg, st.offsets)
            cols = [j + o for o in st.offsets]
            self.slope_minus[j - 1, cols] = w[0]
            self.slope_plus[j - 1, cols] = w[1]

        # central-difference derivative rows for lifting (d <= 2)
        dx = cfg.delta_x
        self.d1 = np.zeros((n - 1, n + 1))
        self.d2 = np.zeros((n - 1, n + 1))
        for j in range(1, n):
            self.d1[j - 1, j - 1] = -1.0 / (2.0 * dx)
            self.d1[j - 1, j + 1] = 1.0 / (2.0 * dx)
            self.d2[j - 1, j - 1] = 1.0 / (dx * dx)
            self.d2[j - 1, j] = -2.0 / (dx * dx)
            self.d2[j - 1, j + 1] = 1.0 / (dx * dx)

        # composite Simpson box-average weights over the M+1 samples
        m = cfg.m_intervals
        w = np.ones(m + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        self.simpson = w / (3.0 * m)


@lru_cache(maxsize=8)
def _operators(cfg: MacroConfig) -> _Operators:
    return _Operators(cfg)


def boundary_slopes(field: CoarseField, j: int, cfg: MacroConfig) -> Tuple[float, float]:
    """Neumann slopes (s_minus, s_plus) of the tooth at node j.

    The degree-eta polynomial matching the stencil's box averages (or point
    values, per cfg.slope_basis) is differentiated at x_j -+ h/2.
    """
    if not 1 <= j <= cfg.n_macro - 1:
        raise ConfigError(f"j must be an interior node index, got {j}")
    ops = _operators(cfg)
    u = field.values
    return float(ops.slope_minus[j - 1] @ u), float(ops.slope_plus[j - 1] @ u)


def slopes_all(field: CoarseField, cfg: MacroConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Boundary slopes for every interior node at once."""
    ops = _operators(cfg)
    return ops.slope_minus @ field.values, ops.slope_plus @ field.values


def lift_all(field: CoarseField, cfg: MacroConfig) -> np.ndarray:
    """Micro initial samples for all interior teeth, shape (N-1, M+1).

    u_j(x) = D0 + D1 (x - x_j) + D2 (x - x_j)^2 / 2 with D1, D2 central
    differences and D0 = U_j - (h^2/24) D2, so the patch box average equals
    U_j (for macro_pde_order 1 the quadratic term is absent and D0 = U_j).
    """
    ops = _operators(cfg)
    u = field.values
    uj = u[1:-1]
    d1 = ops.d1 @ u
    if cfg.macro_pde_order == 1:
        return uj[:, None] + d1[:, None] * ops.xi[None, :]
    d2 = ops.d2 @ u
    d0 = uj - (cfg.patch_width ** 2 / 24.0) * d2
    return (d0[:, None] + d1[:, None] * ops.xi[None, :]
            + 0.5 * d2[:, None] * ops.xi[None, :] ** 2)


def lift(field: CoarseField, j: int, cfg: MacroConfig) -> PatchState:
    """Lift the coarse field into the tooth at node j."""
    if not 1 <= j <= cfg.n_macro - 1:
        raise ConfigError(f"j must be an interior node index, got {j}")
    samples = lift_all(field, cfg)[j - 1]
    s_minus, s_plus = boundary_slopes(field, j, cfg)
    return PatchState(
        center_index=j,
        micro_values=samples,
        slope_left=s_minus,
        slope_right=s_plus,
        time=field.time,
    )


def restrict_values(samples: np.ndarray, cfg: MacroConfig) -> np.ndarray:
    """Simpson box averages of one or more sample rows."""
    ops = _operators(cfg)
    return np.atleast_2d(samples) @ ops.simpson


def restrict(patch: PatchState, cfg: MacroConfig) -> float:
    """Box average of a tooth via composite Simpson's 1/3 rule."""
    if len(patch.micro_values) != (cfg.m_intervals or 0) + 1:
        raise ConfigError("patch sample count does not match the config")
    return float(restrict_values(patch.micro_values, cfg)[0])

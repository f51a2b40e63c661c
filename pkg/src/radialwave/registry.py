"""Shared family of test fields used by the estimate checks.

Every builder returns an even-in-r scalar field sampled on the requested grid,
so the axis stencils in the derivative layer are exact.  The traveling
families symmetrize a pulse with its reflection through r = 0; the reflected
copy is analytically tiny on r >= 0 but keeps the even parity honest.
"""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, SpaceTimeField


def _gauss(s, width):
    return np.exp(-np.square(s / width))


def traveling_sym(grid: GridSpec, width: float = 1.5, offset: float = 3.0) -> SpaceTimeField:
    """Outgoing pulse riding at r = t + offset, symmetrized in r."""
    def f(t, r):
        return _gauss(r - t - offset, width) + _gauss(-r - t - offset, width)
    return SpaceTimeField.from_function(grid, f, parity="even")


def standing_bump(grid: GridSpec, omega: float = 1.0, width: float = 2.0) -> SpaceTimeField:
    """Oscillating bump pinned near the axis."""
    def f(t, r):
        return np.cos(omega * t) * _gauss(r, width)
    return SpaceTimeField.from_function(grid, f, parity="even")


def expanding_bump(grid: GridSpec, width: float = 2.0) -> SpaceTimeField:
    """Slowly decaying bump whose support center tracks t/2; exercises the
    interior dyadic pieces without hugging the cone."""
    def f(t, r):
        return (1.0 + t) ** -0.75 * (_gauss(r - t / 2, width) + _gauss(-r - t / 2, width))
    return SpaceTimeField.from_function(grid, f, parity="even")


def cone_hugger(grid: GridSpec, width: float = 1.0) -> SpaceTimeField:
    """Pulse riding just inside the cone at t - r = 3/2; puts O(1) mass in the
    near-cone dyadic pieces that the outgoing families miss."""
    def f(t, r):
        return _gauss(r - t + 1.5, width) + _gauss(-r - t + 1.5, width)
    return SpaceTimeField.from_function(grid, f, parity="even")


def free_wave(grid: GridSpec, eps: float = 0.5) -> SpaceTimeField:
    """Numerical homogeneous-wave solution from the standard calibrated data,
    sampled on the requested unit-ratio grid (the evolution itself runs at half
    the time step and records every second level)."""
    from .solver import InitialData, SolveConfig, bump, calibrate, solve, zero_profile

    if abs(grid.cfl - 1.0) > 1e-12:
        raise ValueError("free_wave requires a grid with dt = dr")
    solver_grid = GridSpec(dr=grid.dr, cfl=0.5, r_max=grid.r_max, t_max=grid.t_max)
    data = InitialData(bump, zero_profile, bump, zero_profile)
    data = calibrate(data, solver_grid, N=2, eps=eps)
    hist = solve(data, SolveConfig(grid=solver_grid, mode="homogeneous"))
    return hist.u()


ANALYTIC_FAMILIES = {
    "traveling_sym": traveling_sym,
    "standing_bump": standing_bump,
    "expanding_bump": expanding_bump,
    "cone_hugger": cone_hugger,
}

# (family, region kind, dyadic scale) combinations for the slab at tau = 8
# where the family carries O(1) mass, so pointwise-over-mass ratios are not
# differencing noise
KS_COMBOS = [
    ("standing_bump", "R", 1),
    ("expanding_bump", "R", 2),
    ("cone_hugger", "U", 1),
    ("cone_hugger", "U", 2),
]

ALL_FAMILIES = dict(ANALYTIC_FAMILIES, free_wave=free_wave)


def build(family_id: str, grid: GridSpec, **kwargs) -> SpaceTimeField:
    try:
        maker = ALL_FAMILIES[family_id]
    except KeyError:
        raise KeyError(
            f"unknown family {family_id!r}; known: {sorted(ALL_FAMILIES)}") from None
    return maker(grid, **kwargs)

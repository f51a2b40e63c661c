"""Method-of-lines evolution of the radially reduced coupled wave system.

The system is evolved in conjugate variables W = r*u, where the radial
d'Alembertian becomes the 1-D wave operator:

    dt^2 W_u - dr^2 W_u = r * [ (dt+dr)u dt v - dr u (dt+dr)v ],
    dt^2 W_v - dr^2 W_v = r * [ dt u dt v ],            u = W_u / r.

Time stepping is classical RK4 on the first-order system (W, dt W); r = 0 is
handled by odd reflection; the outer boundary is never reached by the support
cone.  The same integrator with frozen interpolated sources provides the
linear solves for the fixed-point driver, and a d'Alembert closed form serves
as the homogeneous oracle.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .grid import GridSpec, SpaceTimeField, null_form

FOUR_PI = 4.0 * np.pi
_BLOW_CAP = 1e8


class BlowUpSuspected(RuntimeError):
    """Raised when the state stops being finite (expected for large data)."""

    def __init__(self, t: float, message: str = ""):
        super().__init__(message or f"solution no longer finite at t = {t:.6g}")
        self.t = t
        self.k = None  # set by the iteration driver when applicable


class CflError(ValueError):
    pass


def bump(r):
    """C-infinity bump exp(1 - 1/(1 - (r/2)^2)) for r < 2, zero outside; peak 1."""
    r = np.asarray(r, dtype=float)
    s2 = np.square(r / 2.0)
    out = np.zeros_like(r)
    inside = s2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
    return out


def poly_bump(r):
    """(1 - (r/2)^2)^8 for r < 2, zero outside: C^7 across the support edge,
    with much tamer derivatives than ``bump`` (useful for convergence studies)."""
    r = np.asarray(r, dtype=float)
    s2 = np.minimum(np.square(r / 2.0), 1.0)
    return np.power(1.0 - s2, 8)


def zero_profile(r):
    return np.zeros_like(np.asarray(r, dtype=float))


@dataclass
class InitialData:
    """Radial profiles scaled by a single calibrated amplitude.

    The profiles are unit shapes supported in r <= support_radius (<= 2); the
    stored ``amplitude`` multiplies all of them and is normally produced by
    ``calibrate`` so the discrete data-size sum at order N equals epsilon.
    """

    u0: Callable = bump
    u1: Callable = zero_profile
    v0: Callable = bump
    v1: Callable = zero_profile
    amplitude: float = 1.0
    support_radius: float = 2.0

    def __post_init__(self):
        if self.support_radius > 2.0 + 1e-12:
            raise ValueError("data must be supported in r <= 2")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")


def _radial_deriv(vals: np.ndarray, dr: float, parity: str) -> np.ndarray:
    out = np.empty_like(vals)
    out[1:-1] = (vals[2:] - vals[:-2]) / (2 * dr)
    out[0] = vals[1] / dr if parity == "odd" else 0.0
    out[-1] = (3 * vals[-1] - 4 * vals[-2] + vals[-3]) / (2 * dr)
    return out


def _radial_l2(vals: np.ndarray, r: np.ndarray, dr: float) -> float:
    w = np.full(r.size, dr)
    w[0] = w[-1] = dr / 2
    return float(np.sqrt(FOUR_PI * np.sum(np.square(vals) * np.square(r) * w)))


def smallness_sum(data: InitialData, grid: GridSpec, N: int) -> float:
    """Discrete radial stand-in for the data-size hypothesis at order N:
    radial-derivative L2 sums of orders <= N+1 on positions, <= N on velocities."""
    r = grid.r
    total = 0.0
    for fn, max_order in ((data.u0, N + 1), (data.v0, N + 1), (data.u1, N), (data.v1, N)):
        vals = data.amplitude * np.asarray(fn(r), dtype=float)
        parity = "even"
        for order in range(max_order + 1):
            if order > 0:
                vals = _radial_deriv(vals, grid.dr, parity)
                parity = "odd" if parity == "even" else "even"
            total += _radial_l2(vals, r, grid.dr)
    return total


def calibrate(data: InitialData, grid: GridSpec, N: int, eps: float) -> InitialData:
    """Rescale the amplitude so the discrete data-size sum equals eps exactly."""
    if eps == 0:
        return InitialData(data.u0, data.u1, data.v0, data.v1, 0.0, data.support_radius)
    unit = InitialData(data.u0, data.u1, data.v0, data.v1, 1.0, data.support_radius)
    s = smallness_sum(unit, grid, N)
    return InitialData(data.u0, data.u1, data.v0, data.v1, eps / s, data.support_radius)


@dataclass
class SolveConfig:
    grid: GridSpec
    mode: str = "semilinear"  # semilinear | linear_forced | homogeneous
    forcing: tuple[SpaceTimeField, SpaceTimeField] | None = None
    record_stride: int | None = None  # default: largest stride with stride*cfl <= 1
    store_history: bool = True
    check_support: bool = True

    def __post_init__(self):
        if self.mode not in ("semilinear", "linear_forced", "homogeneous"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if (self.forcing is not None) != (self.mode == "linear_forced"):
            raise ValueError("forcing must be supplied iff mode is linear_forced")
        if self.record_stride is None:
            self.record_stride = max(1, int(np.floor(1.0 / self.grid.cfl + 1e-9)))
        nsteps = self.grid.nt - 1
        if nsteps % self.record_stride != 0:
            raise ValueError(
                f"record stride {self.record_stride} does not divide {nsteps} steps")

    @property
    def history_grid(self) -> GridSpec:
        g = self.grid
        return GridSpec(dr=g.dr, cfl=g.cfl * self.record_stride, r_max=g.r_max, t_max=g.t_max)


@dataclass
class SolutionHistory:
    """Space-time record of the conjugate state plus per-step diagnostics."""

    W_u: SpaceTimeField
    dtW_u: SpaceTimeField
    W_v: SpaceTimeField
    dtW_v: SpaceTimeField
    config: SolveConfig
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def grid(self) -> GridSpec:
        return self.W_u.grid

    def u(self) -> SpaceTimeField:
        from .grid import conjugate_to_scalar
        return conjugate_to_scalar(self.W_u)

    def v(self) -> SpaceTimeField:
        from .grid import conjugate_to_scalar
        return conjugate_to_scalar(self.W_v)

    def save(self, outdir: str) -> None:
        os.makedirs(outdir, exist_ok=True)
        for name in ("W_u", "dtW_u", "W_v", "dtW_v"):
            getattr(self, name).to_binary(os.path.join(outdir, f"{name}.bin"))
        manifest = {
            "grid": {"dr": self.grid.dr, "cfl": self.grid.cfl,
                     "r_max": self.grid.r_max, "t_max": self.grid.t_max},
            "mode": self.config.mode,
            "diagnostics": {k: list(map(float, v)) for k, v in self.diagnostics.items()},
        }
        with open(os.path.join(outdir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, sort_keys=True)

    @classmethod
    def load(cls, outdir: str) -> "SolutionHistory":
        fields = {name: SpaceTimeField.from_binary(os.path.join(outdir, f"{name}.bin"))
                  for name in ("W_u", "dtW_u", "W_v", "dtW_v")}
        with open(os.path.join(outdir, "manifest.json")) as fh:
            manifest = json.load(fh)
        grid = fields["W_u"].grid
        cfg = SolveConfig(grid=grid, mode="homogeneous" if manifest["mode"] == "homogeneous"
                          else manifest["mode"] if manifest["mode"] != "linear_forced"
                          else "semilinear", record_stride=1)
        diags = {k: np.asarray(v) for k, v in manifest["diagnostics"].items()}
        return cls(fields["W_u"], fields["dtW_u"], fields["W_v"], fields["dtW_v"], cfg, diags)


def _quotient(vals: np.ndarray, r: np.ndarray) -> np.ndarray:
    q = np.empty_like(vals)
    q[1:] = vals[1:] / r[1:]
    q[0] = 3 * q[1] - 3 * q[2] + q[3]
    return q


def _d2r_odd(vals: np.ndarray, dr: float) -> np.ndarray:
    out = np.empty_like(vals)
    out[1:-1] = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / (dr * dr)
    out[0] = -2 * vals[0] / (dr * dr)  # odd ghost; vanishes with W(0) = 0
    out[-1] = (2 * vals[-1] - 5 * vals[-2] + 4 * vals[-3] - vals[-4]) / (dr * dr)
    return out


def nonlinearity(dtu, dru, dtv, drv, which: str, form: str = "null"):
    """Quadratic source for one equation from first-derivative frames.

    which = 'u-eq': dtu*dtv - dru*drv, evaluated in the cone-adapted grouping
    by default (identical pointwise, better cancellation near t = r);
    which = 'v-eq': dtu*dtv.
    """
    if which == "v-eq":
        return dtu * dtv
    if which != "u-eq":
        raise ValueError(f"unknown equation tag {which!r}")
    if form == "null":
        return null_form(dtu, dru, dtv, drv)
    if form == "raw":
        return dtu * dtv - dru * drv
    raise ValueError(f"unknown form {form!r}")


class _ForcingInterp:
    """Linear-in-t interpolation of a stored forcing field at RK stage times."""

    def __init__(self, f: SpaceTimeField):
        self.values = f.values
        self.dt = f.grid.dt
        self.t_max = f.grid.t_max

    def at(self, t: float) -> np.ndarray:
        x = min(max(t / self.dt, 0.0), self.values.shape[0] - 1.0)
        n = min(int(x), self.values.shape[0] - 2)
        w = x - n
        return (1.0 - w) * self.values[n] + w * self.values[n + 1]


def solve(data: InitialData, config: SolveConfig) -> SolutionHistory:
    """Evolve the system and record the conjugate state every record_stride steps."""
    grid = config.grid
    if grid.cfl > 0.9 + 1e-12:
        raise CflError(f"evolution requires cfl <= 0.9, got {grid.cfl}")
    r, dr, dt = grid.r, grid.dr, grid.dt
    nsteps = grid.nt - 1
    semilinear = config.mode == "semilinear"
    forced = config.mode == "linear_forced"
    if forced:
        fu = _ForcingInterp(config.forcing[0])
        fv = _ForcingInterp(config.forcing[1])

    amp = data.amplitude
    Wu = r * amp * np.asarray(data.u0(r), dtype=float)
    Pu = r * amp * np.asarray(data.u1(r), dtype=float)
    Wv = r * amp * np.asarray(data.v0(r), dtype=float)
    Pv = r * amp * np.asarray(data.v1(r), dtype=float)
    state = np.stack([Wu, Pu, Wv, Pv])

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        Wu, Pu, Wv, Pv = y
        out = np.empty_like(y)
        out[0] = Pu
        out[2] = Pv
        out[1] = _d2r_odd(Wu, dr)
        out[3] = _d2r_odd(Wv, dr)
        if semilinear:
            u = _quotient(Wu, r)
            v = _quotient(Wv, r)
            dtu = _quotient(Pu, r)
            dtv = _quotient(Pv, r)
            dru = _quotient(_radial_deriv(Wu, dr, "odd") - u, r)
            drv = _quotient(_radial_deriv(Wv, dr, "odd") - v, r)
            out[1] += r * nonlinearity(dtu, dru, dtv, drv, "u-eq")
            out[3] += r * nonlinearity(dtu, dru, dtv, drv, "v-eq")
        elif forced:
            out[1] += r * fu.at(t)
            out[3] += r * fv.at(t)
        return out

    stride = config.record_stride
    hist_grid = config.history_grid
    if config.store_history:
        frames = np.zeros((4, hist_grid.nt, grid.nr))
        frames[:, 0] = state
    diag_t = np.zeros(nsteps + 1)
    diag_energy_u = np.zeros(nsteps + 1)
    diag_energy_v = np.zeros(nsteps + 1)
    diag_sup_u = np.zeros(nsteps + 1)
    diag_sup_v = np.zeros(nsteps + 1)
    diag_support = np.zeros(nsteps + 1)

    scale = max(np.max(np.abs(state)), 1e-300)

    def record_diag(n, t, y):
        Wu, Pu, Wv, Pv = y
        diag_t[n] = t
        diag_energy_u[n] = _energy(Pu, Wu, dr)
        diag_energy_v[n] = _energy(Pv, Wv, dr)
        diag_sup_u[n] = np.max(np.abs(_quotient(Wu, r)))
        diag_sup_v[n] = np.max(np.abs(_quotient(Wv, r)))
        # support measured against the initial scale, so a decaying solution
        # does not see an ever-tightening effective threshold
        diag_support[n] = _support_radius(y, r, 1e-6 * scale)

    record_diag(0, 0.0, state)

    for n in range(nsteps):
        t = n * dt
        k1 = rhs(t, state)
        k2 = rhs(t + dt / 2, state + (dt / 2) * k1)
        k3 = rhs(t + dt / 2, state + (dt / 2) * k2)
        k4 = rhs(t + dt, state + dt * k3)
        state = state + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        tn = (n + 1) * dt
        m = np.max(np.abs(state))
        if not np.isfinite(m) or m > _BLOW_CAP * scale:
            raise BlowUpSuspected(tn)
        record_diag(n + 1, tn, state)
        if config.store_history and (n + 1) % stride == 0:
            frames[:, (n + 1) // stride] = state
        if config.check_support and config.mode != "linear_forced":
            # the centered stencil sheds a dispersive precursor ahead of the
            # true front; at the 1e-6 level its width grows like ~0.3 units
            # per doubling of t (measured), so the finite-speed check allows
            # a logarithmic-in-t margin on top of a 32-cell base
            margin = 0.5 * np.log2(2.0 + tn) + 32 * dr
            if diag_support[n + 1] > tn + data.support_radius + margin:
                raise RuntimeError(
                    f"finite-speed violation: support radius {diag_support[n + 1]:.4g} "
                    f"at t = {tn:.4g}")

    diagnostics = {
        "t": diag_t, "energy_u": diag_energy_u, "energy_v": diag_energy_v,
        "sup_u": diag_sup_u, "sup_v": diag_sup_v, "support_radius": diag_support,
    }
    if not config.store_history:
        z = SpaceTimeField.zeros(hist_grid, "odd")
        return SolutionHistory(z, z, z, z, config, diagnostics)
    return SolutionHistory(
        SpaceTimeField(hist_grid, frames[0], "odd"),
        SpaceTimeField(hist_grid, frames[1], "odd"),
        SpaceTimeField(hist_grid, frames[2], "odd"),
        SpaceTimeField(hist_grid, frames[3], "odd"),
        config, diagnostics,
    )


def _energy(P: np.ndarray, W: np.ndarray, dr: float) -> float:
    drW = _radial_deriv(W, dr, "odd")
    w = np.full(W.size, dr)
    w[0] = w[-1] = dr / 2
    return float(np.sum((np.square(P) + np.square(drW)) * w))


def _support_radius(y: np.ndarray, r: np.ndarray, tol: float | None = None) -> float:
    if tol is None:
        tol = 1e-6 * max(float(np.max(np.abs(y))), 1e-300)
    cols = np.max(np.abs(y), axis=0)
    idx = np.nonzero(cols > tol)[0]
    return float(r[idx[-1]]) if idx.size else 0.0


def solve_linear_forced(data: InitialData, forcing_u: SpaceTimeField,
                        forcing_v: SpaceTimeField, config: SolveConfig) -> SolutionHistory:
    """Linear wave solves with prescribed sources (the fixed-point step)."""
    cfg = SolveConfig(grid=config.grid, mode="linear_forced",
                      forcing=(forcing_u, forcing_v),
                      record_stride=config.record_stride,
                      store_history=config.store_history,
                      check_support=False)
    return solve(data, cfg)


# ----------------------------------------------------------------------
# d'Alembert oracle for the free radial wave equation
# ----------------------------------------------------------------------

def odd_extension(profile: Callable, amplitude: float = 1.0) -> Callable:
    """phi(s) = s * amplitude * profile(|s|): odd extension of r * u0(r)."""
    def phi(s):
        s = np.asarray(s, dtype=float)
        return s * amplitude * np.asarray(profile(np.abs(s)), dtype=float)
    return phi


def exact_dalembert(profile: Callable, t: float, r: np.ndarray,
                    amplitude: float = 1.0) -> np.ndarray:
    """Conjugate solution W(t, r) = (phi(r+t) + phi(r-t)) / 2 for data (u0, 0)."""
    phi = odd_extension(profile, amplitude)
    return 0.5 * (phi(r + t) + phi(r - t))


def exact_dalembert_dt(profile: Callable, t: float, r: np.ndarray,
                       amplitude: float = 1.0, h: float = 1e-6) -> np.ndarray:
    """dt W for the closed form, via a fine central difference of phi."""
    phi = odd_extension(profile, amplitude)
    return 0.5 * ((phi(r + t + h) - phi(r + t - h)) - (phi(r - t + h) - phi(r - t - h))) / (2 * h)


def dalembert_history(data: InitialData, grid: GridSpec) -> SolutionHistory:
    """Closed-form homogeneous history for data (u0, 0), (v0, 0); oracle only."""
    tvals = grid.t
    Wu = np.stack([exact_dalembert(data.u0, t, grid.r, data.amplitude) for t in tvals])
    Wv = np.stack([exact_dalembert(data.v0, t, grid.r, data.amplitude) for t in tvals])
    Pu = np.stack([exact_dalembert_dt(data.u0, t, grid.r, data.amplitude) for t in tvals])
    Pv = np.stack([exact_dalembert_dt(data.v0, t, grid.r, data.amplitude) for t in tvals])
    cfg = SolveConfig(grid=grid, mode="homogeneous", check_support=False)
    return SolutionHistory(
        SpaceTimeField(grid, Wu, "odd"), SpaceTimeField(grid, Pu, "odd"),
        SpaceTimeField(grid, Wv, "odd"), SpaceTimeField(grid, Pv, "odd"), cfg,
    )


def config_hash(obj) -> str:
    """Stable short hash of a JSON-serializable configuration."""
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]

"""Discrete space-time fields on a uniform (t, r) grid and the vector-field calculus.

Everything downstream (regions, norms, the solver, the estimate harness) shares
the grid geometry defined here.  All derivative operators are second-order:
centered in the interior, one-sided at the temporal and outer-radial boundaries,
and parity-extended across r = 0.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

# Composable derivative tags, in the deterministic enumeration order used by
# z_words: dt < dr < S.
DT = "dt"
DR = "dr"
SCALING = "S"
GOOD = "good"  # dt + dr, tangent to the light cone
BAD = "bad"    # dt - dr

Z_TAGS = (DT, DR, SCALING)
ALL_TAGS = (DT, DR, GOOD, BAD, SCALING)

MAX_WORD_LEN = 3  # N-fold differencing beyond this sits under the noise floor

_MIN_POINTS = 5


class GridTooSmallError(ValueError):
    pass


class ParityError(ValueError):
    pass


def _is_integer(x: float, tol: float = 1e-9) -> bool:
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


@dataclass(frozen=True)
class GridSpec:
    """Uniform (t, r) grid: r = j*dr for j = 0..J, t = n*dt for n = 0..Nt-1.

    Invariants: dt = cfl*dr with 0 < cfl <= 1, r_max >= t_max + 4 (so data
    supported in r <= 2 never reaches the outer boundary), and both extents
    are whole numbers of cells.
    """

    dr: float
    cfl: float
    r_max: float
    t_max: float

    def __post_init__(self):
        if self.dr <= 0:
            raise ValueError("dr must be positive")
        if not (0 < self.cfl <= 1 + 1e-12):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.r_max < self.t_max + 4 - 1e-12:
            raise ValueError(
                f"r_max ({self.r_max}) must be >= t_max + 4 ({self.t_max + 4}) "
                "so the support cone never touches the outer boundary"
            )
        if not _is_integer(self.r_max / self.dr):
            raise ValueError("r_max must be an integer multiple of dr")
        if not _is_integer(self.t_max / self.dt):
            raise ValueError("t_max must be an integer multiple of dt")

    @property
    def dt(self) -> float:
        return self.cfl * self.dr

    @property
    def nr(self) -> int:
        return round(self.r_max / self.dr) + 1

    @property
    def nt(self) -> int:
        return round(self.t_max / self.dt) + 1

    @property
    def r(self) -> np.ndarray:
        return np.arange(self.nr) * self.dr

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.nt) * self.dt

    def shape(self) -> tuple[int, int]:
        return (self.nt, self.nr)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """(t, r) broadcastable meshes, t varying along axis 0."""
        return self.t[:, None], self.r[None, :]


# parity of the result of one derivative, given the input parity
_PARITY_MAP = {
    DT: {"odd": "odd", "even": "even", None: None},
    DR: {"odd": "even", "even": "odd", None: None},
    SCALING: {"odd": "odd", "even": "even", None: None},
    GOOD: {"odd": None, "even": None, None: None},
    BAD: {"odd": None, "even": None, None: None},
}


@dataclass
class SpaceTimeField:
    """Scalar samples on a GridSpec, indexed (time level, radial index).

    ``parity`` records the behavior of the sampled function under r -> -r and
    drives the ghost-point extension at r = 0.  Odd fields vanish on the axis.
    """

    grid: GridSpec
    values: np.ndarray
    parity: str | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape():
            raise ValueError(
                f"value shape {self.values.shape} does not match grid {self.grid.shape()}"
            )
        if self.parity not in ("odd", "even", None):
            raise ValueError(f"bad parity {self.parity!r}")
        if self.parity == "odd":
            axis = self.values[:, 0]
            if np.any(np.abs(axis) > 1e-10 * max(1.0, float(np.max(np.abs(self.values))))):
                raise ParityError("odd field must vanish at r = 0")

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable, parity: str | None = None) -> "SpaceTimeField":
        t, r = grid.meshes()
        vals = np.broadcast_to(fn(t, r), grid.shape()).astype(np.float64).copy()
        return cls(grid, vals, parity)

    @classmethod
    def zeros(cls, grid: GridSpec, parity: str | None = None) -> "SpaceTimeField":
        return cls(grid, np.zeros(grid.shape()), parity)

    def like(self, values: np.ndarray, parity: str | None = None) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, values, parity)

    def copy(self) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.values.copy(), self.parity)

    # ------------------------------------------------------------------
    # serialization: flat binary (header + row-major doubles) and CSV
    # ------------------------------------------------------------------
    _MAGIC = b"RWFLD001"

    def to_binary(self, path) -> None:
        nt, nr = self.values.shape
        header = struct.pack(
            "<8sddqqb", self._MAGIC, self.grid.dr, self.grid.dt, nr - 1, nt,
            {"odd": 1, "even": 2, None: 0}[self.parity],
        )
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(self.values.astype("<f8").tobytes(order="C"))

    @classmethod
    def from_binary(cls, path) -> "SpaceTimeField":
        with open(path, "rb") as fh:
            size = struct.calcsize("<8sddqqb")
            raw = fh.read(size)
            if len(raw) < size or raw[:8] != cls._MAGIC:
                raise ValueError(f"{path}: not a field file")
            _, dr, dt, J, nt, par = struct.unpack("<8sddqqb", raw)
            data = np.frombuffer(fh.read(), dtype="<f8").reshape(nt, J + 1)
        grid = GridSpec(dr=dr, cfl=dt / dr, r_max=J * dr, t_max=(nt - 1) * dt)
        parity = {1: "odd", 2: "even", 0: None}[par]
        return cls(grid, data.copy(), parity)

    def to_csv(self, path) -> None:
        t, r = self.grid.t, self.grid.r
        with open(path, "w") as fh:
            fh.write("t,r,value\n")
            for n, tn in enumerate(t):
                for j, rj in enumerate(r):
                    fh.write(f"{tn:.17g},{rj:.17g},{self.values[n, j]:.17g}\n")


def _require_size(grid: GridSpec):
    if grid.nt < _MIN_POINTS or grid.nr < _MIN_POINTS:
        raise GridTooSmallError(
            f"need at least {_MIN_POINTS} points per axis, got {grid.shape()}"
        )


def _diff_t(values: np.ndarray, dt: float) -> np.ndarray:
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2 * dt)
    out[0] = (-3 * values[0] + 4 * values[1] - values[2]) / (2 * dt)
    out[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * dt)
    return out


def _diff_r(values: np.ndarray, dr: float, parity: str | None) -> np.ndarray:
    out = np.empty_like(values)
    out[:, 1:-1] = (values[:, 2:] - values[:, :-2]) / (2 * dr)
    if parity == "odd":
        out[:, 0] = values[:, 1] / dr  # ghost: f(-dr) = -f(dr)
    elif parity == "even":
        out[:, 0] = 0.0
    else:
        out[:, 0] = (-3 * values[:, 0] + 4 * values[:, 1] - values[:, 2]) / (2 * dr)
    out[:, -1] = (3 * values[:, -1] - 4 * values[:, -2] + values[:, -3]) / (2 * dr)
    return out


def _diff2(values: np.ndarray, h: float, axis: int, parity: str | None = None) -> np.ndarray:
    v = values if axis == 0 else values.T
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / (h * h)
    if axis == 1 and parity == "odd":
        out[0] = -2 * v[0] / (h * h)  # ghost f(-h) = -f(h); vanishes with f(0)=0
    elif axis == 1 and parity == "even":
        out[0] = 2 * (v[1] - v[0]) / (h * h)
    else:
        out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / (h * h)
    out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / (h * h)
    return out if axis == 0 else out.T


def derivative(f: SpaceTimeField, d: str) -> SpaceTimeField:
    """Apply one derivative direction: dt, dr, good (dt+dr), bad (dt-dr), or S.

    S = t*dt + r*dr pointwise.  At r = 0 the radial stencil uses the parity
    ghost extension when the parity is known and a one-sided stencil otherwise.
    """
    if d not in ALL_TAGS:
        raise ValueError(f"unknown derivative tag {d!r}")
    _require_size(f.grid)
    par = _PARITY_MAP[d][f.parity]
    if d == DT:
        vals = _diff_t(f.values, f.grid.dt)
    elif d == DR:
        vals = _diff_r(f.values, f.grid.dr, f.parity)
    elif d == GOOD:
        vals = _diff_t(f.values, f.grid.dt) + _diff_r(f.values, f.grid.dr, f.parity)
    elif d == BAD:
        vals = _diff_t(f.values, f.grid.dt) - _diff_r(f.values, f.grid.dr, f.parity)
    else:  # S
        t, r = f.grid.meshes()
        vals = t * _diff_t(f.values, f.grid.dt) + r * _diff_r(f.values, f.grid.dr, f.parity)
    return SpaceTimeField(f.grid, vals, par)


def z_words(max_len: int) -> list[tuple[str, ...]]:
    """All Z words of length <= max_len over {dt, dr, S}, sorted by (length, lex)."""
    if max_len > MAX_WORD_LEN:
        raise ValueError(
            f"word length {max_len} exceeds the supported maximum {MAX_WORD_LEN}; "
            "repeated differencing beyond that is dominated by stencil noise"
        )
    order = {tag: i for i, tag in enumerate(Z_TAGS)}
    words: list[tuple[str, ...]] = [()]
    for length in range(1, max_len + 1):
        layer = [tuple(w) for w in _product_sorted(Z_TAGS, length, order)]
        words.extend(layer)
    return words


def _product_sorted(tags: Sequence[str], length: int, order) -> Iterable[list[str]]:
    if length == 0:
        yield []
        return
    for tag in tags:
        for rest in _product_sorted(tags, length - 1, order):
            yield [tag] + rest


def apply_word(f: SpaceTimeField, word: Sequence[str]) -> SpaceTimeField:
    """Apply a composition of derivative directions, innermost (rightmost) first."""
    out = f
    for tag in reversed(word):
        out = derivative(out, tag)
    return out


def apply_z_multi(f: SpaceTimeField, max_len: int) -> list[tuple[tuple[str, ...], SpaceTimeField]]:
    """All Z^mu f for |mu| <= max_len over the radial vector fields {dt, dr, S}.

    Deterministic ordering (length, then lexicographic with dt < dr < S) so
    downstream reports are byte-for-byte reproducible.  Computed incrementally:
    each word of length L extends a stored word of length L-1.
    """
    if max_len > MAX_WORD_LEN:
        raise ValueError(f"N = {max_len} exceeds the supported maximum {MAX_WORD_LEN}")
    results: dict[tuple[str, ...], SpaceTimeField] = {(): f}
    for word in z_words(max_len)[1:]:
        base = results[word[1:]]
        results[word] = derivative(base, word[0])
    return [(w, results[w]) for w in z_words(max_len)]


def box_conjugate(W: SpaceTimeField) -> SpaceTimeField:
    """(dt^2 - dr^2) of a conjugate field W = r*u.

    For radial u, Box u = r^{-1} (dt^2 - dr^2)(r u); the caller divides by r
    (via quotient_by_r) where the scalar d'Alembertian is needed.
    """
    if W.parity != "odd":
        raise ParityError("box_conjugate expects the odd conjugate field W = r*u")
    _require_size(W.grid)
    vals = _diff2(W.values, W.grid.dt, axis=0) - _diff2(W.values, W.grid.dr, axis=1, parity="odd")
    return SpaceTimeField(W.grid, vals, "odd")


def quotient_by_r(f: SpaceTimeField) -> SpaceTimeField:
    """f / r with the axis value recovered by 3-point extrapolation from j = 1, 2, 3."""
    r = f.grid.r
    vals = np.empty_like(f.values)
    vals[:, 1:] = f.values[:, 1:] / r[1:]
    vals[:, 0] = 3 * vals[:, 1] - 3 * vals[:, 2] + vals[:, 3]
    # an even numerator generally leaves a 1/r singularity at the axis, so the
    # extrapolated surrogate there cannot honestly be tagged odd
    par = "even" if f.parity == "odd" else None
    return SpaceTimeField(f.grid, vals, par)


def conjugate_to_scalar(W: SpaceTimeField) -> SpaceTimeField:
    """u = W / r for an odd conjugate field (L'Hopital value on the axis)."""
    if W.parity != "odd":
        raise ParityError("conjugate fields must be odd")
    return quotient_by_r(W)


def dalembertian(u: SpaceTimeField) -> SpaceTimeField:
    """Radial scalar d'Alembertian Box u = r^{-1}(dt^2 - dr^2)(r u)."""
    if u.parity != "even":
        raise ParityError("dalembertian expects an even scalar field")
    r = u.grid.r[None, :]
    W = SpaceTimeField(u.grid, r * u.values, "odd")
    return quotient_by_r(box_conjugate(W))


def null_form(dtu: np.ndarray, dru: np.ndarray, dtv: np.ndarray, drv: np.ndarray) -> np.ndarray:
    """Cone-adapted grouping (dt+dr)u * dt v - dr u * (dt+dr)v of dtu*dtv - dru*drv.

    On radial data the angular contribution vanishes identically, so this equals
    the raw product combination exactly (to rounding), with better cancellation
    near t = r.
    """
    return (dtu + dru) * dtv - dru * (dtv + drv)


def raw_form(dtu: np.ndarray, dru: np.ndarray, dtv: np.ndarray, drv: np.ndarray) -> np.ndarray:
    return dtu * dtv - dru * drv

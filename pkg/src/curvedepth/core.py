"""Grids, curves and curve samples on a shared one-dimensional domain.

Numerical substrate for everything else in the package: trapezoid
quadrature weights, L2/sup distances between discretized curves,
Lebesgue fractions of grid masks, and the CSV curve format shared with
the command-line tools.

All container types are immutable after construction (arrays are marked
read-only) and all operations are pure, so values can be shared freely
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "InputError",
    "ParameterError",
    "Grid",
    "Curve",
    "FunctionalSample",
    "l2_distance",
    "sup_distance",
    "lebesgue_fraction",
    "l2_norm_rows",
    "sup_norm_rows",
    "read_curves_csv",
    "write_curves_csv",
]

#: Relative tolerance for "weights sum to the right total" style checks.
WEIGHT_RTOL = 1e-12


class InputError(ValueError):
    """Malformed data: bad files, mismatched grids, wrong shapes, non-finite values."""


class ParameterError(ValueError):
    """Structurally valid data combined with out-of-range or unsupported parameters."""


def trapezoid_weights(points: np.ndarray) -> np.ndarray:
    """Trapezoid-rule quadrature weights for an increasing abscissa vector.

    Exact for piecewise-linear integrands, which is also the
    interpolation model used for sparse-curve reconstruction.
    """
    w = np.empty_like(points)
    w[0] = (points[1] - points[0]) / 2.0
    w[-1] = (points[-1] - points[-2]) / 2.0
    if len(points) > 2:
        w[1:-1] = (points[2:] - points[:-2]) / 2.0
    return w


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Ordered abscissae v_1 < ... < v_m with positive quadrature weights.

    Parameters
    ----------
    points : array_like, shape (m,)
        Strictly increasing evaluation points, m >= 2.
    weights : array_like, shape (m,), optional
        Quadrature weights for Lebesgue measure on [v_1, v_m].  Default:
        trapezoid weights.  Must be strictly positive and sum to
        v_m - v_1 within 1e-12 relative.
    """

    points: np.ndarray
    weights: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise InputError(f"grid needs >= 2 points in one dimension, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InputError("grid points must be finite")
        if not np.all(np.diff(pts) > 0):
            raise InputError("grid points must be strictly increasing")
        if self.weights is None:
            w = trapezoid_weights(pts)
            if not np.all(w > 0):  # underflow from denormal point spacing
                raise InputError("grid spacing too small for positive weights")
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != pts.shape:
                raise InputError(f"weights shape {w.shape} != points shape {pts.shape}")
            if not np.all(np.isfinite(w)) or not np.all(w > 0):
                raise InputError("quadrature weights must be finite and strictly positive")
            total = pts[-1] - pts[0]
            if abs(w.sum() - total) > WEIGHT_RTOL * max(total, 1.0):
                raise InputError(
                    f"weights sum {w.sum()!r} != domain length {total!r}"
                )
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "weights", _readonly(w))

    @property
    def m(self) -> int:
        return self.points.size

    @property
    def length(self) -> float:
        """Lebesgue measure of the domain, v_m - v_1."""
        return float(self.points[-1] - self.points[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self) -> int:
        return hash((self.points.tobytes(), self.weights.tobytes()))

    def __repr__(self) -> str:
        return f"Grid(m={self.m}, domain=[{self.points[0]:g}, {self.points[-1]:g}])"


def uniform_grid(a: float = 0.0, b: float = 1.0, m: int = 101) -> Grid:
    """Uniform grid of m points on [a, b] with trapezoid weights."""
    if not b > a:
        raise ParameterError(f"need b > a, got [{a}, {b}]")
    return Grid(np.linspace(a, b, m))


@dataclass(frozen=True, eq=False)
class Curve:
    """One discretized curve: values[i] = x(v_i) on a fixed grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size != self.grid.m:
            raise InputError(
                f"curve has {vals.size} values for a grid of size {self.grid.m}"
            )
        if not np.all(np.isfinite(vals)):
            raise InputError("curve values must be finite")
        object.__setattr__(self, "values", _readonly(vals))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Curve):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.values.tobytes(), self.grid))

    def __repr__(self) -> str:
        return f"Curve(m={self.values.size})"


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """n curves on a common grid, with optional per-curve probability weights.

    The rows of ``values`` are the curves.  Weights default to the
    uniform 1/n distribution; they must be nonnegative and sum to 1
    within 1e-12.  Nonuniform weights represent general finitely
    supported distributions on curve space (used by the hand-built
    counterexample distributions).
    """

    values: np.ndarray
    grid: Grid
    weights: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] != self.grid.m:
            raise InputError(
                f"sample values shape {vals.shape} incompatible with grid of size {self.grid.m}"
            )
        if not np.all(np.isfinite(vals)):
            raise InputError("sample values must be finite")
        n = vals.shape[0]
        if self.weights is None:
            w = np.full(n, 1.0 / n)
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (n,):
                raise InputError(f"sample weights shape {w.shape} != ({n},)")
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise InputError("sample weights must be finite and nonnegative")
            if abs(w.sum() - 1.0) > WEIGHT_RTOL:
                raise InputError(f"sample weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "weights", _readonly(w))

    @classmethod
    def from_curves(
        cls, curves: Sequence[Curve], weights: Sequence[float] | None = None
    ) -> "FunctionalSample":
        if len(curves) == 0:
            raise InputError("need at least one curve")
        grid = curves[0].grid
        for c in curves[1:]:
            if c.grid != grid:
                raise InputError("all curves in a sample must share the grid")
        return cls(np.stack([c.values for c in curves]), grid, weights)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self.n, rtol=0, atol=1e-12))

    def curve(self, i: int) -> Curve:
        return Curve(self.values[i], self.grid)

    def __iter__(self) -> Iterator[Curve]:
        return (self.curve(i) for i in range(self.n))

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"FunctionalSample(n={self.n}, m={self.grid.m})"


def _check_shared_grid(x: Curve, y: Curve) -> None:
    if x.grid is not y.grid and x.grid != y.grid:
        raise InputError("curves live on different grids")


def l2_distance(x: Curve, y: Curve) -> float:
    """L2(lambda) distance between two curves on the same grid.

    sqrt( sum_i w_i (x(v_i) - y(v_i))^2 ) with the grid's quadrature
    weights; symmetric, and zero iff the curves agree at every grid point.
    """
    _check_shared_grid(x, y)
    d = x.values - y.values
    return float(np.sqrt(max(float(d * d @ x.grid.weights), 0.0)))


def sup_distance(x: Curve, y: Curve) -> float:
    """Supremum distance max_i |x(v_i) - y(v_i)| on the shared grid."""
    _check_shared_grid(x, y)
    return float(np.max(np.abs(x.values - y.values)))


def lebesgue_fraction(mask: np.ndarray, grid: Grid) -> float:
    """Fraction of the domain's Lebesgue measure carried by masked grid points.

    Returns sum of quadrature weights where ``mask`` is true, divided by
    the domain length.  Monotone under mask inclusion.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (grid.m,):
        raise InputError(f"mask shape {mask.shape} != ({grid.m},)")
    return float(grid.weights[mask].sum() / grid.length)


# Array-level workhorses used by the depth implementations; rows are curves.


def l2_norm_rows(rows: np.ndarray, grid: Grid) -> np.ndarray:
    """L2 norms of each row, with the grid's quadrature weights."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return np.sqrt(np.maximum((rows * rows) @ grid.weights, 0.0))


def sup_norm_rows(rows: np.ndarray) -> np.ndarray:
    """Sup norms of each row."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return np.max(np.abs(rows), axis=1)


# ---------------------------------------------------------------------------
# CSV curve format (shared with the CLI): row 1 = grid points, each following
# row = one curve's values.  UTF-8, comma separator, '.' decimal point.  NaN
# cells are legal only in the sparse-observation files consumed by the
# reconstruction tools, where they mean "unobserved here".
# ---------------------------------------------------------------------------

_FMT = "%.17g"  # round-trips every float64 exactly


def write_curves_csv(path: str | Path, grid: Grid, values: np.ndarray) -> None:
    """Write curves to CSV: first row grid points, then one row per curve."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[1] != grid.m:
        raise InputError(f"values shape {values.shape} != (n, {grid.m})")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_FMT % p for p in grid.points) + "\n")
        for row in values:
            fh.write(",".join(_FMT % v for v in row) + "\n")


def read_curves_csv(
    path: str | Path, allow_nan: bool = False
) -> tuple[Grid, np.ndarray]:
    """Read the CSV curve format back into (grid, values) with rows as curves.

    With ``allow_nan=False`` (the default) any NaN cell is rejected;
    sparse-observation files are read with ``allow_nan=True``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: unparseable cell ({exc})") from exc
    if len(rows) < 2:
        raise InputError(f"{path}: need a grid row plus at least one curve row")
    m = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != m:
            raise InputError(
                f"{path}: row {lineno} has {len(row)} cells, expected {m}"
            )
    grid_pts = np.array(rows[0], dtype=float)
    if np.isnan(grid_pts).any():
        raise InputError(f"{path}: grid row may not contain NaN")
    values = np.array(rows[1:], dtype=float)
    if not allow_nan and np.isnan(values).any():
        raise InputError(
            f"{path}: NaN cells are only allowed in sparse-observation files"
        )
    return Grid(grid_pts), values

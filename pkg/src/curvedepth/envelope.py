"""Pointwise support envelopes, hull membership, and shrink maps.

The envelope of a set of curves is the pair of pointwise lower/upper
bounds (L, U).  The associated "hull" is the one-parameter family
alpha * L + (1 - alpha) * U with a single global alpha in [0, 1]; the
low-variability region L_delta is the set of grid points where the
envelope width U - L is at most delta.  Shrink maps multiply a curve by
a factor alpha(v) strictly inside (0, 1) on that region and exactly 1
elsewhere — the transformation family the flatness audits quantify over.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .core import Curve, FunctionalSample, Grid, InputError, ParameterError
from .distributions import AtomicDistribution

__all__ = [
    "Envelope",
    "ShrinkMap",
    "envelope_of",
    "hull_contains",
    "find_L_delta",
    "apply_shrink",
    "make_shrink",
    "save_envelope_csv",
    "load_envelope_csv",
]

#: Pointwise tolerance for hull membership tests.
HULL_TOL = 1e-9


@dataclass(frozen=True)
class Envelope:
    """Pointwise lower/upper bounds of a curve set, tagged with provenance.

    ``support_note`` records whether the envelope is exact ("atoms": the
    full support of a finitely supported distribution) or an observed
    approximation ("sample": the smallest full-measure support set is
    unidentifiable from finite data, so the drawn curves stand in).
    """

    lower: Curve
    upper: Curve
    support_note: str = "sample"

    def __post_init__(self) -> None:
        if self.lower.grid != self.upper.grid:
            raise InputError("envelope bounds live on different grids")
        if np.any(self.lower.values > self.upper.values):
            raise InputError("envelope lower bound exceeds upper bound somewhere")
        if self.support_note not in ("sample", "atoms"):
            raise InputError(
                f"support_note must be 'sample' or 'atoms', got {self.support_note!r}"
            )

    @property
    def grid(self) -> Grid:
        return self.lower.grid

    def width(self) -> np.ndarray:
        return self.upper.values - self.lower.values


def envelope_of(source: Union[FunctionalSample, AtomicDistribution]) -> Envelope:
    """Pointwise min/max envelope of a sample or an atomic distribution."""
    if isinstance(source, AtomicDistribution):
        values, grid, note = source.values, source.grid, "atoms"
    elif isinstance(source, FunctionalSample):
        values, grid, note = source.values, source.grid, "sample"
    else:
        raise InputError(f"cannot take the envelope of {type(source).__name__}")
    return Envelope(
        Curve(values.min(axis=0), grid),
        Curve(values.max(axis=0), grid),
        support_note=note,
    )


def hull_contains(x: Curve, env: Envelope, tol: float = HULL_TOL) -> bool:
    """Whether x = alpha * L + (1 - alpha) * U for a single alpha in [0, 1].

    Feasibility is decided exactly: each non-degenerate grid point
    admits an interval of alphas reproducing x(v) within ``tol``; the
    curve is in the hull iff those intervals and [0, 1] intersect.
    Degenerate points (L(v) = U(v)) require x(v) = L(v) within tol.
    """
    if x.grid != env.grid:
        raise InputError("query curve and envelope live on different grids")
    L = env.lower.values
    U = env.upper.values
    w = U - L
    nd = w > 0
    if np.any(np.abs(x.values[~nd] - L[~nd]) > tol):
        return False
    if not np.any(nd):
        return True
    # x = U - alpha * w  =>  alpha = (U - x) / w, within tol / w slack
    gap = U[nd] - x.values[nd]
    lo = float(np.max((gap - tol) / w[nd]))
    hi = float(np.min((gap + tol) / w[nd]))
    return max(lo, 0.0) <= min(hi, 1.0)


def find_L_delta(env: Envelope, delta: float) -> np.ndarray:
    """Grid mask of the low-variability region {v : U(v) - L(v) <= delta}.

    delta must lie in [min width, max width): below the minimum the
    region is empty, at or above the maximum it is everything, and both
    extremes defeat the purpose of a proper sub-region.  A constant-width
    envelope admits no valid delta at all.
    """
    w = env.width()
    w_min, w_max = float(w.min()), float(w.max())
    if not (np.isfinite(delta) and w_min <= delta < w_max):
        raise ParameterError(
            f"delta must lie in [{w_min:g}, {w_max:g}) for this envelope, got {delta}"
        )
    return w <= delta


@dataclass(frozen=True)
class ShrinkMap:
    """Pointwise multiplier alpha with alpha(v) in (0,1) exactly on ``region``.

    Off the region alpha must equal 1, so the map is the identity there.
    """

    alpha: Curve
    region: np.ndarray

    def __post_init__(self) -> None:
        region = np.asarray(self.region, dtype=bool)
        a = self.alpha.values
        if region.shape != a.shape:
            raise InputError("region mask and alpha curve have different lengths")
        on = a[region]
        if np.any(on <= 0) or np.any(on >= 1):
            raise InputError("alpha must lie strictly in (0, 1) on the region")
        if np.any(a[~region] != 1.0):
            raise InputError("alpha must equal 1 exactly off the region")
        r = np.array(region, copy=True)
        r.flags.writeable = False
        object.__setattr__(self, "region", r)

    @property
    def grid(self) -> Grid:
        return self.alpha.grid


def make_shrink(grid: Grid, region: np.ndarray, factor: float) -> ShrinkMap:
    """Constant-factor shrink map: alpha = factor on the region, 1 elsewhere."""
    region = np.asarray(region, dtype=bool)
    if not 0 < factor < 1:
        raise ParameterError(f"shrink factor must lie in (0, 1), got {factor}")
    a = np.where(region, float(factor), 1.0)
    return ShrinkMap(Curve(a, grid), region)


def apply_shrink(x: Curve, smap: ShrinkMap) -> Curve:
    """Pointwise product alpha(v) * x(v)."""
    if x.grid != smap.grid:
        raise InputError("curve and shrink map live on different grids")
    return Curve(smap.alpha.values * x.values, x.grid)


# ---------------------------------------------------------------------------
# CSV export: the dataset format's grid row followed by two tagged rows,
# "L,<values>" and "U,<values>"
# ---------------------------------------------------------------------------

_FMT = "%.17g"


def save_envelope_csv(path: str | Path, env: Envelope) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_FMT % p for p in env.grid.points) + "\n")
        fh.write("L," + ",".join(_FMT % v for v in env.lower.values) + "\n")
        fh.write("U," + ",".join(_FMT % v for v in env.upper.values) + "\n")


def load_envelope_csv(path: str | Path) -> Envelope:
    path = Path(path)
    try:
        lines = [
            ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()
        ]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if len(lines) != 3:
        raise InputError(f"{path}: envelope CSV needs grid + L + U rows")
    try:
        pts = np.array([float(c) for c in lines[0].split(",")])
        rows = {}
        for ln in lines[1:]:
            tag, rest = ln.split(",", 1)
            rows[tag] = np.array([float(c) for c in rest.split(",")])
    except ValueError as exc:
        raise InputError(f"{path}: unparseable envelope CSV ({exc})") from exc
    if set(rows) != {"L", "U"}:
        raise InputError(f"{path}: expected rows tagged L and U, got {sorted(rows)}")
    grid = Grid(pts)
    return Envelope(Curve(rows["L"], grid), Curve(rows["U"], grid))

"""Curve-valued random sources.

Finitely supported distributions (including the hand-built witness
distributions used by the property audits), stationary Gaussian-process
samplers, empirical resampling, and contamination mixtures.

Seeds are integers or tuples of integers (entropy keys for numpy's
``default_rng``); every sampler is a pure function of its seed, so
distinct seeds can run in parallel with no shared RNG state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .core import (
    Curve,
    FunctionalSample,
    Grid,
    InputError,
    ParameterError,
    read_curves_csv,
    uniform_grid,
    write_curves_csv,
)

__all__ = [
    "Kernel",
    "GPSpec",
    "AtomicDistribution",
    "ContaminationSpec",
    "CurveDistribution",
    "sample_gp",
    "sample_atomic",
    "draw_from",
    "mix",
    "counterexample_P3",
    "counterexample_P3_RT",
    "counterexample_P5",
    "constant_distribution",
    "subseed",
    "save_atomic",
    "load_atomic",
    "gpspec_to_json",
    "gpspec_from_json",
]

Seed = Union[int, Sequence[int]]

KERNEL_TYPES = ("se", "cosine")

#: Jitter ladder for Cholesky factorization: start, multiplier, cap
#: (all relative to the kernel variance).
JITTER_START = 1e-12
JITTER_CAP = 1e-6


def _seed_key(seed: Seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def subseed(seed: Seed, *tags: int) -> tuple[int, ...]:
    """Derive an independent child seed by appending integer tags."""
    return _seed_key(seed) + tags


def _rng(seed: Seed) -> np.random.Generator:
    return np.random.default_rng(_seed_key(seed))


@dataclass(frozen=True)
class Kernel:
    """Stationary covariance function R(t) on the real line.

    Supported types:

    - ``"se"``: squared exponential, R(t) = variance * exp(-t^2 / (2 ls^2))
      with ls = ``length_scale``.  Smooth, a.s. continuous paths, and
      -R''(0) = variance / ls^2 in closed form (used by the expected
      level-crossing diagnostics).
    - ``"cosine"``: R(t) = variance * cos(2 pi t / ls), the band-limited
      process A cos(2 pi v / ls) + B sin(2 pi v / ls) with independent
      N(0, variance) amplitudes; here ``length_scale`` is the period.
      -R''(0) = variance * (2 pi / ls)^2.
    """

    type: str
    variance: float
    length_scale: float

    def __post_init__(self) -> None:
        if self.type not in KERNEL_TYPES:
            raise ParameterError(
                f"unknown kernel type {self.type!r}; expected one of {KERNEL_TYPES}"
            )
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise ParameterError(f"kernel variance must be > 0, got {self.variance}")
        if not (np.isfinite(self.length_scale) and self.length_scale > 0):
            raise ParameterError(
                f"kernel length_scale must be > 0, got {self.length_scale}"
            )

    def __call__(self, t: np.ndarray) -> np.ndarray:
        """Covariance at lag t (stationary: depends on |t| only)."""
        t = np.abs(np.asarray(t, dtype=float))
        if self.type == "se":
            return self.variance * np.exp(-(t * t) / (2.0 * self.length_scale**2))
        return self.variance * np.cos(2.0 * np.pi * t / self.length_scale)

    def matrix(self, points: np.ndarray) -> np.ndarray:
        """Covariance matrix on a point set; exactly symmetric."""
        lags = np.abs(points[:, None] - points[None, :])
        return self(lags)

    def curvature_at_zero(self) -> float:
        """-R''(0), the spectral second moment."""
        if self.type == "se":
            return self.variance / self.length_scale**2
        return self.variance * (2.0 * np.pi / self.length_scale) ** 2


@dataclass(frozen=True)
class GPSpec:
    """A stationary Gaussian process on a grid: mean curve plus kernel."""

    kernel: Kernel
    grid: Grid
    mean: Curve | None = None

    def __post_init__(self) -> None:
        if self.mean is not None and self.mean.grid != self.grid:
            raise InputError("GP mean curve lives on a different grid")

    def mean_values(self) -> np.ndarray:
        if self.mean is None:
            return np.zeros(self.grid.m)
        return self.mean.values


def _cholesky_with_jitter(K: np.ndarray, variance: float) -> np.ndarray:
    try:
        return np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        pass
    jitter = JITTER_START * variance
    cap = JITTER_CAP * variance
    eye = np.eye(K.shape[0])
    while jitter <= cap * (1 + 1e-12):
        try:
            return np.linalg.cholesky(K + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 2.0
    raise np.linalg.LinAlgError(
        f"kernel matrix not positive definite even with jitter {cap:g}"
    )


def sample_gp(spec: GPSpec, n: int, seed: Seed) -> FunctionalSample:
    """Draw n independent GP paths: mean + L z with L the Cholesky factor.

    Deterministic given the seed.  Raises ``numpy.linalg.LinAlgError`` if
    the kernel matrix stays non-PSD through the whole jitter ladder.
    """
    if n < 1:
        raise ParameterError(f"need n >= 1 draws, got {n}")
    K = spec.kernel.matrix(spec.grid.points)
    L = _cholesky_with_jitter(K, spec.kernel.variance)
    z = _rng(seed).standard_normal(size=(n, spec.grid.m))
    return FunctionalSample(spec.mean_values()[None, :] + z @ L.T, spec.grid)


@dataclass(frozen=True)
class AtomicDistribution:
    """Finitely supported distribution on curves: distinct atoms with probabilities."""

    values: np.ndarray  # (n_atoms, m), one atom per row
    probs: np.ndarray  # (n_atoms,), > 0, sums to 1
    grid: Grid

    def __post_init__(self) -> None:
        vals = np.atleast_2d(np.asarray(self.values, dtype=float))
        p = np.asarray(self.probs, dtype=float)
        if vals.shape[1] != self.grid.m:
            raise InputError(f"atom shape {vals.shape} != (k, {self.grid.m})")
        if not np.all(np.isfinite(vals)):
            raise InputError("atoms must be finite")
        if p.shape != (vals.shape[0],):
            raise InputError("one probability per atom required")
        if not np.all(p > 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InputError("atom probabilities must be > 0 and sum to 1")
        for i in range(vals.shape[0]):
            for j in range(i + 1, vals.shape[0]):
                if np.array_equal(vals[i], vals[j]):
                    raise InputError(f"atoms {i} and {j} coincide as grid vectors")
        v = np.array(vals, copy=True)
        v.flags.writeable = False
        q = np.array(p, copy=True)
        q.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", q)

    @property
    def n_atoms(self) -> int:
        return self.values.shape[0]

    def atom(self, i: int) -> Curve:
        return Curve(self.values[i], self.grid)

    def as_sample(self) -> FunctionalSample:
        """The same distribution viewed as a weighted functional sample."""
        return FunctionalSample(self.values, self.grid, weights=self.probs)


def sample_atomic(dist: AtomicDistribution, n: int, seed: Seed) -> FunctionalSample:
    """n iid draws from a finitely supported distribution."""
    if n < 1:
        raise ParameterError(f"need n >= 1 draws, got {n}")
    idx = _rng(seed).choice(dist.n_atoms, size=n, p=dist.probs)
    return FunctionalSample(dist.values[idx], dist.grid)


CurveDistribution = Union[GPSpec, AtomicDistribution, FunctionalSample]


def draw_from(dist: CurveDistribution, n: int, seed: Seed) -> FunctionalSample:
    """n iid draws from any supported distribution.

    A ``FunctionalSample`` is treated as the empirical measure it
    represents (resampling rows by the sample weights).
    """
    if isinstance(dist, GPSpec):
        return sample_gp(dist, n, seed)
    if isinstance(dist, AtomicDistribution):
        return sample_atomic(dist, n, seed)
    if isinstance(dist, FunctionalSample):
        if n < 1:
            raise ParameterError(f"need n >= 1 draws, got {n}")
        idx = _rng(seed).choice(dist.n, size=n, p=dist.weights)
        return FunctionalSample(dist.values[idx], dist.grid)
    raise InputError(f"not a curve distribution: {type(dist).__name__}")


@dataclass(frozen=True)
class ContaminationSpec:
    """(1 - epsilon) * base + epsilon * outlier mixture."""

    base: CurveDistribution
    outlier: CurveDistribution
    epsilon: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.epsilon < 1.0):
            raise ParameterError(f"epsilon must lie in [0, 1), got {self.epsilon}")


def mix(spec: ContaminationSpec, n: int, seed: Seed) -> FunctionalSample:
    """n draws from the contamination mixture, deterministically in the seed.

    The base draws use the caller's seed unchanged and the contamination
    flags come from a child seed with thresholded uniforms, so runs with
    the same seed but different epsilon share base paths and flip curves
    monotonically (epsilon' > epsilon only adds contaminated indices).
    In particular epsilon = 0 reproduces ``draw_from(base, n, seed)``
    exactly.
    """
    base = draw_from(spec.base, n, seed)
    if spec.epsilon == 0.0:
        return base
    outlier = draw_from(spec.outlier, n, subseed(seed, 1))
    u = _rng(subseed(seed, 2)).uniform(size=n)
    take = u < spec.epsilon
    out = np.where(take[:, None], outlier.values, base.values)
    return FunctionalSample(out, base.grid)


# ---------------------------------------------------------------------------
# Witness distributions used by the property audits
# ---------------------------------------------------------------------------


def counterexample_P3(grid: Grid | None = None) -> AtomicDistribution:
    """Two constant atoms at -1 and +1, probability 1/2 each.

    Every curve strictly between the atoms sits in the single band they
    span, which flattens the band-type depths on that whole region.
    """
    g = grid if grid is not None else uniform_grid()
    atoms = np.stack([-np.ones(g.m), np.ones(g.m)])
    return AtomicDistribution(atoms, np.array([0.5, 0.5]), g)


def counterexample_P3_RT(grid: Grid | None = None) -> AtomicDistribution:
    """Two constant atoms at +2 and -1, probability 1/2 each.

    Every projection of this distribution is a two-point law with equal
    masses, so one-dimensional halfspace depth is 1/2 on the whole
    segment between the projected atoms.
    """
    g = grid if grid is not None else uniform_grid()
    atoms = np.stack([2.0 * np.ones(g.m), -np.ones(g.m)])
    return AtomicDistribution(atoms, np.array([0.5, 0.5]), g)


def counterexample_P5(grid: Grid | None = None) -> AtomicDistribution:
    """Three atoms 1 + v/2, 0, -(1 + v/2) with probability 1/3 each.

    The outer atoms are non-constant with strict signs, so the hull of
    the support has positive-width cross sections everywhere; used to
    probe how depths behave far outside the hull.
    """
    g = grid if grid is not None else uniform_grid()
    upper = 1.0 + g.points / 2.0
    atoms = np.stack([upper, np.zeros(g.m), -upper])
    return AtomicDistribution(atoms, np.full(3, 1.0 / 3.0), g)


def constant_distribution(level: float, grid: Grid) -> AtomicDistribution:
    """Point mass at the constant curve == level."""
    return AtomicDistribution(
        np.full((1, grid.m), float(level)), np.array([1.0]), grid
    )


# ---------------------------------------------------------------------------
# Serialization: AtomicDistribution as curves-CSV + weights-JSON, GPSpec as
# JSON {mean_csv?, kernel: {type, variance, length_scale}}
# ---------------------------------------------------------------------------


def save_atomic(dist: AtomicDistribution, csv_path: str | Path, json_path: str | Path) -> None:
    write_curves_csv(csv_path, dist.grid, dist.values)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump({"weights": [float(p) for p in dist.probs]}, fh)
        fh.write("\n")


def load_atomic(csv_path: str | Path, json_path: str | Path) -> AtomicDistribution:
    grid, values = read_curves_csv(csv_path)
    try:
        with open(json_path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        probs = np.asarray(obj["weights"], dtype=float)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"cannot load weights from {json_path}: {exc}") from exc
    return AtomicDistribution(values, probs, grid)


def gpspec_to_json(spec: GPSpec, mean_csv: str | Path | None = None) -> dict:
    """JSON-serializable form; writes the mean curve to ``mean_csv`` if given."""
    obj: dict = {
        "kernel": {
            "type": spec.kernel.type,
            "variance": spec.kernel.variance,
            "length_scale": spec.kernel.length_scale,
        }
    }
    if mean_csv is not None:
        write_curves_csv(mean_csv, spec.grid, spec.mean_values()[None, :])
        obj["mean_csv"] = str(mean_csv)
    return obj


def gpspec_from_json(obj: dict, grid: Grid | None = None) -> GPSpec:
    """Rebuild a GPSpec from its JSON form.

    The grid comes from the referenced mean CSV when present, otherwise
    from the ``grid`` argument.
    """
    try:
        k = obj["kernel"]
        kernel = Kernel(
            type=str(k["type"]),
            variance=float(k["variance"]),
            length_scale=float(k["length_scale"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise InputError(f"malformed GP spec JSON: {exc}") from exc
    mean = None
    if "mean_csv" in obj:
        mgrid, mvalues = read_curves_csv(obj["mean_csv"])
        if mvalues.shape[0] != 1:
            raise InputError("mean CSV must contain exactly one curve row")
        if grid is not None and mgrid != grid:
            raise InputError("mean CSV grid differs from the requested grid")
        grid = mgrid
        mean = Curve(mvalues[0], grid)
    if grid is None:
        raise InputError("GP spec JSON has no mean_csv and no grid was supplied")
    return GPSpec(kernel=kernel, grid=grid, mean=mean)

"""Six sample depth notions for grid-discretized curves.

Gaussian-kernel h-depth, random Tukey (projection halfspace) depth, band
depth, modified band depth, half-region depth and modified half-region
depth, plus the one-dimensional halfspace depth they build on.  Each
depth is a pure function (query curve, sample) -> DepthResult.

Band-type depths come in two forms that must not be conflated:

- sample form: without-replacement index combinations, exactly the
  classical empirical formulas (uniform curve weights required);
- atomic (population-exact) form on a finitely supported distribution:
  with-replacement tuples weighted by probability products, which
  reproduces closed-form population values exactly.

All tuple counting is done in exact integer arithmetic, and the brute
force reference implementations share only the final count-to-value
normalization, so optimized and exhaustive routes agree bit for bit.
All comparisons are closed (<=, >=) with no epsilon slack; summations
use numpy's pairwise reductions, so results are reproducible for a
fixed input regardless of evaluation order elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .core import (
    Curve,
    FunctionalSample,
    Grid,
    InputError,
    ParameterError,
)
from .distributions import AtomicDistribution, GPSpec, Kernel, Seed, sample_gp

__all__ = [
    "DEPTH_IDS",
    "DepthParams",
    "DepthResult",
    "halfspace_depth_1d",
    "h_depth",
    "random_tukey_depth",
    "draw_directions",
    "band_depth",
    "band_depth_atomic",
    "band_depth_brute",
    "modified_band_depth",
    "modified_band_depth_atomic",
    "modified_band_depth_brute",
    "half_region_depth",
    "modified_half_region_depth",
    "evaluate_depth",
    "depth_values",
    "upper_bound",
]

#: Identifiers for the six depth notions, in report order.
DEPTH_IDS = ("h", "rt", "bd", "mbd", "hr", "mhr")

DEPTH_LABELS = {
    "h": "h-depth",
    "rt": "random Tukey depth",
    "bd": "band depth",
    "mbd": "modified band depth",
    "hr": "half-region depth",
    "mhr": "modified half-region depth",
}

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Resource bounds for the exhaustive atomic (population-exact) variants.
MAX_ATOMS = 8
MAX_ATOMIC_J = 4


@dataclass(frozen=True)
class DepthParams:
    """Tuning parameters shared by the depth functions.

    h : bandwidth of the Gaussian kernel h-depth (> 0).
    J : band-depth order (>= 2; at evaluation time also <= n).
    k : number of random projection directions (>= 1).
    seed : seed for drawing the directions.
    direction_law : Gaussian process the directions are drawn from;
        None means a zero-mean squared-exponential process with unit
        variance and length scale 0.2 on the sample's grid.
    """

    h: float = 1.0
    J: int = 2
    k: int = 20
    seed: Seed = 0
    direction_law: GPSpec | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.h) and self.h > 0):
            raise ParameterError(f"bandwidth h must be > 0, got {self.h}")
        if int(self.J) != self.J or self.J < 2:
            raise ParameterError(f"band order J must be an integer >= 2, got {self.J}")
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"direction count k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class DepthResult:
    """A single depth evaluation: value, which depth, parameter echo, n used."""

    value: float
    depth: str
    params: dict
    n: int

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "value": self.value,
            "params": self.params,
            "n": self.n,
        }


def upper_bound(depth: str, *, h: float = 1.0, J: int = 2) -> float:
    """Largest value the given depth can attain."""
    if depth == "h":
        return 1.0 / (h * _SQRT_2PI)
    if depth in ("rt", "hr", "mhr"):
        return 1.0
    if depth in ("bd", "mbd"):
        return float(J - 1)
    raise ParameterError(f"unknown depth id {depth!r}")


# ---------------------------------------------------------------------------
# One-dimensional halfspace depth
# ---------------------------------------------------------------------------


def halfspace_depth_1d(
    t: float, values: np.ndarray, weights: np.ndarray | None = None
) -> float:
    """min of the two closed tail masses of a weighted point set at t."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InputError("halfspace depth of an empty value set")
    if weights is None:
        weights = np.full(values.size, 1.0 / values.size)
    else:
        weights = np.asarray(weights, dtype=float)
    lo = float(weights[values <= t].sum())
    hi = float(weights[values >= t].sum())
    return min(lo, hi)


# ---------------------------------------------------------------------------
# h-depth
# ---------------------------------------------------------------------------


def _h_depth_values(
    queries: np.ndarray, sample: FunctionalSample, h: float
) -> np.ndarray:
    w = sample.grid.weights
    X = sample.values
    # squared L2 distances from explicit differences: a common shift of
    # queries and sample cancels term by term (so ranks of tied curves
    # survive translation bit-for-bit), and close curves far from the
    # origin lose no precision to cancellation, unlike the expanded
    # product q.q + x.x - 2 q.x.  Chunked to bound the difference tensor.
    out = np.empty(queries.shape[0])
    norm = 1.0 / (h * _SQRT_2PI)
    chunk = max(1, 4_000_000 // max(1, X.size))
    for lo in range(0, queries.shape[0], chunk):
        diff = queries[lo : lo + chunk, None, :] - X[None, :, :]
        d2 = (diff * diff) @ w
        out[lo : lo + chunk] = (np.exp(-d2 / (2.0 * h * h)) * norm) @ sample.weights
    return out


def h_depth(x: Curve, sample: FunctionalSample, h: float = 1.0) -> DepthResult:
    """Average Gaussian kernel of the L2 distances from x to the sample curves.

    (1/n) sum_i K_h(||x - X_i||_2) with K_h(t) = exp(-t^2/(2h^2)) / (h sqrt(2 pi));
    sample weights replace 1/n when non-uniform.
    """
    if not (np.isfinite(h) and h > 0):
        raise ParameterError(f"bandwidth h must be > 0, got {h}")
    _check_query(x, sample)
    value = float(_h_depth_values(x.values[None, :], sample, h)[0])
    return DepthResult(value, "h", {"h": h}, sample.n)


# ---------------------------------------------------------------------------
# Random Tukey depth
# ---------------------------------------------------------------------------


def draw_directions(
    grid: Grid, k: int, seed: Seed, law: GPSpec | None = None
) -> np.ndarray:
    """k direction curves from the given GP law, normalized to unit L2 norm.

    Normalization does not change projected halfspace depths (positive
    scaling of a projection preserves both tail masses) but keeps the
    projections on a readable scale.
    """
    if law is None:
        law = GPSpec(kernel=Kernel("se", 1.0, 0.2), grid=grid)
    elif law.grid != grid:
        raise InputError("direction law lives on a different grid")
    dirs = sample_gp(law, k, seed).values
    norms = np.sqrt(np.maximum((dirs * dirs) @ grid.weights, 0.0))
    if np.any(norms < 1e-12):
        raise np.linalg.LinAlgError("degenerate direction draw (zero norm)")
    return dirs / norms[:, None]


def random_tukey_depth(
    x: Curve,
    sample: FunctionalSample,
    params: DepthParams | None = None,
    directions: np.ndarray | None = None,
) -> DepthResult:
    """min over k random directions u of the 1-d halfspace depth of <u, x>.

    Directions are a deterministic function of (params.k, params.seed,
    params.direction_law), so they are identical across every query in a
    run; precomputed directions can be passed to skip the redraw.
    """
    params = params or DepthParams()
    _check_query(x, sample)
    if directions is None:
        directions = draw_directions(
            sample.grid, params.k, params.seed, params.direction_law
        )
    w = sample.grid.weights
    wU = directions * w  # (k, m): rows integrate against curves
    # project query and sample through one stacked product so that
    # bitwise-equal curves get bitwise-equal projections (exact ties at
    # the closed tails are semantically meaningful)
    proj = np.vstack([x.values[None, :], sample.values]) @ wU.T
    proj_x, proj_X = proj[0], proj[1:]
    value = min(
        halfspace_depth_1d(proj_x[j], proj_X[:, j], sample.weights)
        for j in range(directions.shape[0])
    )
    return DepthResult(
        float(value),
        "rt",
        {"k": int(directions.shape[0]), "seed": _seed_echo(params.seed)},
        sample.n,
    )


def _seed_echo(seed: Seed) -> list:
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


# ---------------------------------------------------------------------------
# Band depth (sample form): exact integer tuple counting
# ---------------------------------------------------------------------------


def _pack_rows(mask: np.ndarray) -> np.ndarray:
    """Pack boolean rows into uint64 words (zero-padded past m bits)."""
    b = np.packbits(mask, axis=1)
    pad = (-b.shape[1]) % 8
    if pad:
        b = np.pad(b, ((0, 0), (0, pad)))
    return b.view(np.uint64)


def _count_pairs_tie_free(above: np.ndarray) -> int:
    """Number of index pairs whose band contains the query, assuming no
    query/sample ties anywhere.

    Without ties, below == ~above pointwise, and a pair (i, j) works iff
    above_j is exactly the bitwise complement of above_i; counting hash
    matches costs O(n) instead of O(n^2).
    """
    U = _pack_rows(above)
    m = above.shape[1]
    pad_bits = np.zeros(U.shape[1] * 64, dtype=np.uint8)
    pad_bits[:m] = 1
    padmask = _pack_rows(pad_bits[None, :])[0]
    comp = (~U) & padmask
    counts: dict[bytes, int] = {}
    for row in U:
        key = row.tobytes()
        counts[key] = counts.get(key, 0) + 1
    total = sum(counts.get(row.tobytes(), 0) for row in comp)
    # each unordered pair is seen from both sides; i == j is impossible
    # because no row equals its own complement
    assert total % 2 == 0
    return total // 2


def _count_pairs(U: np.ndarray, L: np.ndarray) -> int:
    cnt = 0
    n = U.shape[0]
    for i in range(n - 1):
        bad = ((U[i + 1 :] & U[i]) != 0).any(axis=1) | (
            (L[i + 1 :] & L[i]) != 0
        ).any(axis=1)
        cnt += int((~bad).sum())
    return cnt


def _count_triples(U: np.ndarray, L: np.ndarray) -> int:
    cnt = 0
    n = U.shape[0]
    for i in range(n - 2):
        RU, RL = U[i + 1 :], L[i + 1 :]
        TU, TL = RU & U[i], RL & L[i]
        bad = ((TU[:, None, :] & RU[None, :, :]) != 0).any(axis=2) | (
            (TL[:, None, :] & RL[None, :, :]) != 0
        ).any(axis=2)
        iu = np.triu_indices(RU.shape[0], k=1)
        cnt += int((~bad)[iu].sum())
    return cnt


def _count_tuples_generic(U: np.ndarray, L: np.ndarray, j: int) -> int:
    """Depth-first tuple count with subset pruning for arbitrary order j."""
    n = U.shape[0]
    count = 0

    def rec(start: int, depth: int, aU: np.ndarray, aL: np.ndarray) -> None:
        nonlocal count
        remaining = j - depth
        if not aU.any() and not aL.any():
            # running intersections only shrink, so every completion
            # of this prefix qualifies
            count += math.comb(n - start, remaining)
            return
        if remaining == 0:
            return  # nonzero intersection survived to the leaf
        for t in range(start, n - remaining + 1):
            rec(t + 1, depth + 1, aU & U[t], aL & L[t])

    for t in range(0, n - j + 1):
        rec(t + 1, 1, U[t], L[t])
    return count


def _band_counts(x: Curve, sample: FunctionalSample, J: int) -> list[int]:
    """Exact number of j-index-subsets whose band contains x, j = 2..J."""
    X = sample.values
    xv = x.values
    above = X > xv
    below = X < xv
    U = _pack_rows(above)
    L = _pack_rows(below)
    counts = []
    tie_free = not bool((X == xv).any())
    for j in range(2, J + 1):
        if j == 2 and tie_free:
            counts.append(_count_pairs_tie_free(above))
        elif j == 2:
            counts.append(_count_pairs(U, L))
        elif j == 3:
            counts.append(_count_triples(U, L))
        else:
            counts.append(_count_tuples_generic(U, L, j))
    return counts


def _require_uniform_for_band(sample: FunctionalSample, what: str) -> None:
    if not sample.is_uniform:
        raise ParameterError(
            f"{what} uses without-replacement index combinations and is only "
            "defined for uniformly weighted samples; use the atomic "
            "(population-exact) variant for weighted distributions"
        )


def _check_band_order(J: int, n: int) -> None:
    if int(J) != J or not 2 <= J <= n:
        raise ParameterError(f"band order J must satisfy 2 <= J <= n = {n}, got {J}")


def band_depth(x: Curve, sample: FunctionalSample, J: int = 2) -> DepthResult:
    """Fraction of j-curve bands (j = 2..J) that contain x at every grid point.

    sum_{j=2..J} C(n, j)^{-1} #{i_1 < ... < i_j : min <= x <= max pointwise},
    with closed comparisons at the band boundaries.
    """
    _check_query(x, sample)
    _check_band_order(J, sample.n)
    _require_uniform_for_band(sample, "band depth")
    value = 0.0
    for j, cnt in enumerate(_band_counts(x, sample, J), start=2):
        value += cnt / math.comb(sample.n, j)
    return DepthResult(value, "bd", {"J": int(J)}, sample.n)


def band_depth_brute(x: Curve, sample: FunctionalSample, J: int = 2) -> DepthResult:
    """Reference band depth by exhaustive combination enumeration.

    Independent of the bitmask route: every j-subset is materialized and
    its min/max envelope compared against the query directly.
    """
    _check_query(x, sample)
    _check_band_order(J, sample.n)
    _require_uniform_for_band(sample, "band depth")
    X = sample.values
    xv = x.values
    value = 0.0
    for j in range(2, J + 1):
        cnt = 0
        for idx in combinations(range(sample.n), j):
            sub = X[list(idx)]
            if np.all(sub.min(axis=0) <= xv) and np.all(xv <= sub.max(axis=0)):
                cnt += 1
        value += cnt / math.comb(sample.n, j)
    return DepthResult(value, "bd", {"J": int(J)}, sample.n)


# ---------------------------------------------------------------------------
# Modified band depth: per-grid-point tuple counts
# ---------------------------------------------------------------------------


def _mbd_value_from_counts(
    counts_by_j: Sequence[np.ndarray], n: int, grid: Grid
) -> float:
    """Shared count-to-value normalization (keeps optimized == brute exact)."""
    value = 0.0
    for j, cnt in enumerate(counts_by_j, start=2):
        value += float(np.dot(grid.weights, cnt.astype(np.float64))) / (
            grid.length * math.comb(n, j)
        )
    return value


def _mbd_counts(x: Curve, sample: FunctionalSample, J: int) -> list[np.ndarray]:
    """For each j and grid point v, how many j-subsets cover x at v.

    A subset's band misses x at v iff all its members are strictly above
    x(v) or all strictly below, and those events are disjoint, so the
    count is C(n, j) - C(a_v, j) - C(b_v, j) with a_v/b_v the strictly
    above/below curve counts.
    """
    X = sample.values
    xv = x.values
    n = sample.n
    a = (X > xv).sum(axis=0)
    b = (X < xv).sum(axis=0)
    out = []
    for j in range(2, J + 1):
        tab = np.array([math.comb(c, j) for c in range(n + 1)], dtype=np.int64)
        out.append(math.comb(n, j) - tab[a] - tab[b])
    return out


def modified_band_depth(
    x: Curve, sample: FunctionalSample, J: int = 2
) -> DepthResult:
    """Average fraction of the domain where x lies inside j-curve bands.

    sum_{j=2..J} C(n, j)^{-1} sum_{i_1<...<i_j} lebesgue_fraction(min <= x <= max).
    """
    _check_query(x, sample)
    _check_band_order(J, sample.n)
    _require_uniform_for_band(sample, "modified band depth")
    value = _mbd_value_from_counts(
        _mbd_counts(x, sample, J), sample.n, sample.grid
    )
    return DepthResult(value, "mbd", {"J": int(J)}, sample.n)


def modified_band_depth_brute(
    x: Curve, sample: FunctionalSample, J: int = 2
) -> DepthResult:
    """Reference modified band depth by exhaustive enumeration.

    Accumulates, per grid point, the integer number of covering subsets
    from explicit min/max band tests, then applies the same
    normalization as the optimized route.
    """
    _check_query(x, sample)
    _check_band_order(J, sample.n)
    _require_uniform_for_band(sample, "modified band depth")
    X = sample.values
    xv = x.values
    counts = []
    for j in range(2, J + 1):
        cnt = np.zeros(sample.grid.m, dtype=np.int64)
        for idx in combinations(range(sample.n), j):
            sub = X[list(idx)]
            cnt += (sub.min(axis=0) <= xv) & (xv <= sub.max(axis=0))
        counts.append(cnt)
    value = _mbd_value_from_counts(counts, sample.n, sample.grid)
    return DepthResult(value, "mbd", {"J": int(J)}, sample.n)


# ---------------------------------------------------------------------------
# Population-exact band depths on finitely supported distributions
# ---------------------------------------------------------------------------


def _check_atomic_budget(dist: AtomicDistribution, J: int) -> None:
    if int(J) != J or J < 2:
        raise ParameterError(f"band order J must be an integer >= 2, got {J}")
    if dist.n_atoms > MAX_ATOMS or J > MAX_ATOMIC_J:
        raise ParameterError(
            f"exhaustive atomic band depth is limited to {MAX_ATOMS} atoms "
            f"and J <= {MAX_ATOMIC_J} (got {dist.n_atoms} atoms, J = {J})"
        )


def band_depth_atomic(x: Curve, dist: AtomicDistribution, J: int = 2) -> DepthResult:
    """Exact population band depth under a finitely supported distribution.

    Enumerates j-tuples of atoms WITH replacement, weighting each tuple
    by its probability product: sum_{j=2..J} P(x in band of j iid draws).
    """
    _check_query(x, dist)
    _check_atomic_budget(dist, J)
    xv = x.values
    V = dist.values
    value = 0.0
    for j in range(2, J + 1):
        acc = 0.0
        for tup in product(range(dist.n_atoms), repeat=j):
            sub = V[list(tup)]
            if np.all(sub.min(axis=0) <= xv) and np.all(xv <= sub.max(axis=0)):
                acc += float(np.prod(dist.probs[list(tup)]))
        value += acc
    return DepthResult(value, "bd", {"J": int(J), "atomic": True}, dist.n_atoms)


def modified_band_depth_atomic(
    x: Curve, dist: AtomicDistribution, J: int = 2
) -> DepthResult:
    """Exact population modified band depth under a finitely supported
    distribution: expected Lebesgue fraction of the domain covered by the
    band of j iid draws, summed over j = 2..J."""
    _check_query(x, dist)
    _check_atomic_budget(dist, J)
    xv = x.values
    V = dist.values
    w_frac = dist.grid.weights / dist.grid.length
    value = 0.0
    for j in range(2, J + 1):
        acc = 0.0
        for tup in product(range(dist.n_atoms), repeat=j):
            sub = V[list(tup)]
            inside = (sub.min(axis=0) <= xv) & (xv <= sub.max(axis=0))
            acc += float(np.prod(dist.probs[list(tup)])) * float(w_frac[inside].sum())
        value += acc
    return DepthResult(value, "mbd", {"J": int(J), "atomic": True}, dist.n_atoms)


# ---------------------------------------------------------------------------
# Half-region depths
# ---------------------------------------------------------------------------


def half_region_depth(x: Curve, sample: FunctionalSample) -> DepthResult:
    """min of the sample fractions entirely below-or-equal / above-or-equal x."""
    _check_query(x, sample)
    X = sample.values
    xv = x.values
    in_hypo = (X <= xv).all(axis=1)
    in_epi = (X >= xv).all(axis=1)
    value = min(
        float(sample.weights[in_hypo].sum()), float(sample.weights[in_epi].sum())
    )
    return DepthResult(value, "hr", {}, sample.n)


def modified_half_region_depth(x: Curve, sample: FunctionalSample) -> DepthResult:
    """min of the mean Lebesgue fractions where curves sit below / above x."""
    _check_query(x, sample)
    X = sample.values
    xv = x.values
    w = sample.grid.weights
    lam = sample.grid.length
    frac_le = ((X <= xv) @ w) / lam
    frac_ge = ((X >= xv) @ w) / lam
    value = min(
        float(sample.weights @ frac_le), float(sample.weights @ frac_ge)
    )
    return DepthResult(value, "mhr", {}, sample.n)


# ---------------------------------------------------------------------------
# Dispatch helpers
# ---------------------------------------------------------------------------


def _check_query(x: Curve, holder) -> None:
    if x.grid != holder.grid:
        raise InputError("query curve and sample live on different grids")


def evaluate_depth(
    depth: str,
    x: Curve,
    sample: FunctionalSample,
    params: DepthParams | None = None,
    directions: np.ndarray | None = None,
) -> DepthResult:
    """Evaluate one of the six depths by id ('h', 'rt', 'bd', 'mbd', 'hr', 'mhr')."""
    params = params or DepthParams()
    if depth == "h":
        return h_depth(x, sample, params.h)
    if depth == "rt":
        return random_tukey_depth(x, sample, params, directions)
    if depth == "bd":
        return band_depth(x, sample, params.J)
    if depth == "mbd":
        return modified_band_depth(x, sample, params.J)
    if depth == "hr":
        return half_region_depth(x, sample)
    if depth == "mhr":
        return modified_half_region_depth(x, sample)
    raise ParameterError(f"unknown depth id {depth!r}; expected one of {DEPTH_IDS}")


def depth_values(
    depth: str,
    queries: np.ndarray,
    sample: FunctionalSample,
    params: DepthParams | None = None,
    directions: np.ndarray | None = None,
) -> np.ndarray:
    """Depth of each query row against the sample, as a plain array.

    Draws the random-Tukey directions once for the whole batch so every
    query sees the same projection set.
    """
    params = params or DepthParams()
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if depth == "h":
        return np.asarray(_h_depth_values(queries, sample, params.h), dtype=float)
    if depth == "rt" and directions is None:
        directions = draw_directions(
            sample.grid, params.k, params.seed, params.direction_law
        )
    out = np.empty(queries.shape[0])
    for i in range(queries.shape[0]):
        q = Curve(queries[i], sample.grid)
        out[i] = evaluate_depth(depth, q, sample, params, directions).value
    return out

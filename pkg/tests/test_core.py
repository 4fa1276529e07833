import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvedepth.core import (
    Curve,
    FunctionalSample,
    Grid,
    InputError,
    l2_distance,
    l2_norm_rows,
    lebesgue_fraction,
    read_curves_csv,
    sup_distance,
    uniform_grid,
    write_curves_csv,
)

# ---------------------------------------------------------------------------
# Hand-computed oracle values
# ---------------------------------------------------------------------------


def test_l2_identity_is_zero():
    g = uniform_grid(0, 1, 101)
    x = Curve(np.sin(2 * np.pi * g.points), g)
    assert l2_distance(x, x) == 0.0


def test_l2_constant_one_vs_zero():
    # integral of 1^2 over [0,1] is 1, so the distance is exactly 1
    g = uniform_grid(0, 1, 101)
    one = Curve(np.ones(101), g)
    zero = Curve(np.zeros(101), g)
    assert abs(l2_distance(one, zero) - 1.0) < 1e-10


def test_l2_constant_two_vs_minus_one():
    g = uniform_grid(0, 1, 101)
    two = Curve(np.full(101, 2.0), g)
    minus = Curve(np.full(101, -1.0), g)
    assert abs(l2_distance(two, minus) - 3.0) < 1e-10


def test_sup_constant_two_vs_minus_one():
    g = uniform_grid(0, 1, 51)
    two = Curve(np.full(51, 2.0), g)
    minus = Curve(np.full(51, -1.0), g)
    assert sup_distance(two, minus) == 3.0


def test_sup_identity_and_ramp():
    g = uniform_grid(0, 1, 101)
    ramp = Curve(g.points.copy(), g)
    zero = Curve(np.zeros(101), g)
    assert sup_distance(ramp, ramp) == 0.0
    assert sup_distance(ramp, zero) == 1.0  # sup attained at v = 1


def test_lebesgue_fraction_extremes():
    g = uniform_grid(0, 1, 101)
    assert lebesgue_fraction(np.ones(101, dtype=bool), g) == pytest.approx(1.0)
    assert lebesgue_fraction(np.zeros(101, dtype=bool), g) == 0.0


def test_lebesgue_fraction_interval():
    # mask true exactly on [0, 0.3]: 0.305 under trapezoid weights
    # (half-weight endpoint at 0, full weights at 0.01..0.30), and in any
    # case within one grid cell of the true measure 0.3
    g = uniform_grid(0, 1, 101)
    mask = g.points <= 0.3 + 1e-12
    frac = lebesgue_fraction(mask, g)
    assert frac == pytest.approx(0.305, abs=1e-12)
    assert abs(frac - 0.3) <= 0.01


def test_trapezoid_weights_uniform_grid():
    g = uniform_grid(0, 1, 11)
    expected = np.array([0.05] + [0.1] * 9 + [0.05])
    np.testing.assert_allclose(g.weights, expected, rtol=1e-14)
    assert abs(g.weights.sum() - g.length) < 1e-12


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def test_grid_rejects_non_increasing():
    with pytest.raises(InputError):
        Grid(np.array([0.0, 0.5, 0.5, 1.0]))
    with pytest.raises(InputError):
        Grid(np.array([1.0]))


def test_grid_rejects_bad_weights():
    pts = np.linspace(0, 1, 5)
    with pytest.raises(InputError):
        Grid(pts, weights=np.array([0.25, 0.25, 0.25, 0.25, 0.25]))  # sums to 1.25
    with pytest.raises(InputError):
        Grid(pts, weights=np.array([0.5, -0.1, 0.2, 0.2, 0.2]))


def test_curve_rejects_nonfinite_and_wrong_length():
    g = uniform_grid(0, 1, 5)
    with pytest.raises(InputError):
        Curve(np.array([0.0, 1.0, np.nan, 0.0, 0.0]), g)
    with pytest.raises(InputError):
        Curve(np.zeros(4), g)


def test_sample_weight_validation():
    g = uniform_grid(0, 1, 3)
    vals = np.zeros((2, 3))
    FunctionalSample(vals, g, weights=np.array([0.5, 0.5]))
    with pytest.raises(InputError):
        FunctionalSample(vals, g, weights=np.array([0.6, 0.6]))
    with pytest.raises(InputError):
        FunctionalSample(vals, g, weights=np.array([1.2, -0.2]))


def test_distance_rejects_grid_mismatch():
    a = uniform_grid(0, 1, 5)
    b = uniform_grid(0, 1, 7)
    with pytest.raises(InputError):
        l2_distance(Curve(np.zeros(5), a), Curve(np.zeros(7), b))
    with pytest.raises(InputError):
        sup_distance(Curve(np.zeros(5), a), Curve(np.zeros(7), b))


def test_immutability():
    g = uniform_grid(0, 1, 5)
    c = Curve(np.zeros(5), g)
    with pytest.raises(ValueError):
        c.values[0] = 1.0
    with pytest.raises(ValueError):
        g.points[0] = -1.0


# ---------------------------------------------------------------------------
# Property-based invariants
# ---------------------------------------------------------------------------

N_FUZZ = 1000

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@st.composite
def grid_and_curves(draw, n_curves=3, max_m=24):
    m = draw(st.integers(min_value=2, max_value=max_m))
    raw = draw(
        st.lists(
            st.floats(min_value=-100, max_value=100, allow_nan=False),
            min_size=m,
            max_size=m,
            unique=True,
        )
    )
    pts = np.sort(np.array(raw, dtype=float))
    if np.any(np.diff(pts) < 1e-9):  # floats unique but too close after sort
        pts = np.arange(m, dtype=float)
    g = Grid(pts)
    curves = []
    for _ in range(n_curves):
        vals = draw(
            st.lists(finite_floats, min_size=m, max_size=m).map(
                lambda v: np.array(v, dtype=float)
            )
        )
        curves.append(Curve(vals, g))
    return g, curves


@settings(max_examples=N_FUZZ, deadline=None)
@given(grid_and_curves())
def test_fuzz_triangle_inequality(gc):
    _, (x, y, z) = gc
    for dist in (l2_distance, sup_distance):
        dxz = dist(x, z)
        dxy = dist(x, y)
        dyz = dist(y, z)
        assert dxz <= dxy + dyz + 1e-9 * (1 + dxy + dyz), (
            f"{dist.__name__}: {dxz} > {dxy} + {dyz}"
        )


@settings(max_examples=N_FUZZ, deadline=None)
@given(grid_and_curves(n_curves=2))
def test_fuzz_l2_bounded_by_sup(gc):
    g, (x, y) = gc
    bound = sup_distance(x, y) * np.sqrt(g.length)
    assert l2_distance(x, y) <= bound + 1e-9 * (1 + bound)


@settings(max_examples=N_FUZZ, deadline=None)
@given(
    st.integers(min_value=2, max_value=24),
    st.data(),
)
def test_fuzz_lebesgue_fraction_monotone(m, data):
    g = uniform_grid(0, 1, m)
    inner = np.array(
        data.draw(st.lists(st.booleans(), min_size=m, max_size=m)), dtype=bool
    )
    grow = np.array(
        data.draw(st.lists(st.booleans(), min_size=m, max_size=m)), dtype=bool
    )
    outer = inner | grow
    assert lebesgue_fraction(inner, g) <= lebesgue_fraction(outer, g) + 1e-15


@settings(max_examples=N_FUZZ, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-50, max_value=50, allow_nan=False),
        min_size=2,
        max_size=30,
        unique=True,
    )
)
def test_fuzz_trapezoid_weights_sum_to_domain_length(raw):
    pts = np.sort(np.array(raw, dtype=float))
    if np.any(np.diff(pts) < 1e-9):
        pts = np.arange(len(raw), dtype=float)
    g = Grid(pts)
    assert abs(g.weights.sum() - g.length) <= 1e-12 * max(g.length, 1.0)
    assert np.all(g.weights > 0)


@pytest.fixture(scope="module")
def roundtrip_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("csv-roundtrip")


@settings(max_examples=N_FUZZ, deadline=None)
@given(grid_and_curves())
def test_fuzz_csv_round_trip_bit_exact(roundtrip_dir, gc):
    g, curves = gc
    values = np.stack([c.values for c in curves])
    path = roundtrip_dir / "case.csv"
    write_curves_csv(path, g, values)
    g2, values2 = read_curves_csv(path)
    np.testing.assert_array_equal(g2.points, g.points)
    np.testing.assert_array_equal(values2, values)
    # writing the re-read data reproduces the file byte for byte
    path2 = roundtrip_dir / "case2.csv"
    write_curves_csv(path2, g2, values2)
    assert path.read_bytes() == path2.read_bytes()


def test_l2_norm_rows_matches_scalar_distance():
    rng = np.random.default_rng(7)
    g = uniform_grid(0, 1, 31)
    rows = rng.normal(size=(4, 31))
    base = rng.normal(size=31)
    norms = l2_norm_rows(rows - base, g)
    for i in range(4):
        d = l2_distance(Curve(rows[i], g), Curve(base, g))
        assert norms[i] == pytest.approx(d, rel=1e-12)


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------


def test_csv_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(42)
    g = Grid(np.sort(rng.uniform(0, 1, size=17)))
    values = rng.normal(size=(5, 17))
    path = tmp_path / "curves.csv"
    write_curves_csv(path, g, values)
    g2, values2 = read_curves_csv(path)
    np.testing.assert_array_equal(g2.points, g.points)
    np.testing.assert_array_equal(values2, values)


def test_csv_rejects_nan_unless_sparse(tmp_path):
    g = uniform_grid(0, 1, 4)
    values = np.array([[0.0, np.nan, 1.0, 2.0]])
    path = tmp_path / "sparse.csv"
    write_curves_csv(path, g, values)
    with pytest.raises(InputError):
        read_curves_csv(path)
    g2, values2 = read_curves_csv(path, allow_nan=True)
    assert np.isnan(values2[0, 1])
    np.testing.assert_array_equal(g2.points, g.points)


def test_csv_rejects_ragged_and_garbage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,1,2\n1,2\n", encoding="utf-8")
    with pytest.raises(InputError):
        read_curves_csv(path)
    path.write_text("0,1,2\n1,2,fish\n", encoding="utf-8")
    with pytest.raises(InputError):
        read_curves_csv(path)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from certopt.doe import (correlation_matrix, lhs_sample, lhs_subsample, scale_to_bounds,
                         unscale_from_bounds)
from certopt.data import generate_dataset
from certopt.problems import registry_lookup

BK_BOUNDS = [[0.0, 5.0], [0.0, 3.0]]


def stratified(points: np.ndarray) -> bool:
    """Each column holds exactly one value in every [k/n, (k+1)/n)."""
    n = len(points)
    k = np.arange(n)
    for col in points.T:
        s = np.sort(col)
        if not (np.all(s >= k / n) and np.all(s < (k + 1) / n)):
            return False
    return True


def test_four_strata_one_dim():
    pts = lhs_sample(4, 1, seed=3).points[:, 0]
    assert sorted(np.floor(pts * 4).astype(int)) == [0, 1, 2, 3]


def test_single_point_in_unit_cube():
    pts = lhs_sample(1, 3, seed=9).points
    assert pts.shape == (1, 3)
    assert np.all((pts >= 0) & (pts < 1))


def test_deterministic_for_seed():
    a, b = lhs_sample(1000, 2, 7).points, lhs_sample(1000, 2, 7).points
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, lhs_sample(1000, 2, 8).points)


@pytest.mark.parametrize("n, dim", [(0, 2), (3, 0), (-1, 1)])
def test_lhs_rejects_empty(n, dim):
    with pytest.raises(ValueError):
        lhs_sample(n, dim, 0)


@given(st.integers(1, 64), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_stratification_property(n, dim, seed):
    assert stratified(lhs_sample(n, dim, seed).points)


@pytest.mark.parametrize("unit, expected", [
    ((0.0, 0.0), (0.0, 0.0)), ((1.0, 1.0), (5.0, 3.0)), ((0.5, 0.5), (2.5, 1.5)),
])
def test_scale_examples(unit, expected):
    np.testing.assert_allclose(scale_to_bounds(np.array([unit]), BK_BOUNDS)[0], expected)


def test_scale_dimension_mismatch():
    with pytest.raises(ValueError):
        scale_to_bounds(lhs_sample(5, 3, 0), BK_BOUNDS)


@given(hnp.arrays(float, (7, 2), elements=st.floats(0, 1)))
def test_scaling_round_trip(unit):
    back = unscale_from_bounds(scale_to_bounds(unit, BK_BOUNDS), BK_BOUNDS)
    np.testing.assert_allclose(back, unit, atol=1e-12)


def test_scaled_design_inside_bounds():
    x = scale_to_bounds(lhs_sample(500, 2, 1), BK_BOUNDS)
    assert np.all(x >= 0) and np.all(x[:, 0] <= 5) and np.all(x[:, 1] <= 3)


def test_correlation_examples():
    data = np.array([[1.0, 3.0, 5.0], [2.0, 2.0, 5.0], [3.0, 1.0, 5.0]])
    cm = correlation_matrix(data, ["x", "y", "c"])
    assert cm.r[0, 0] == 1.0
    assert cm.r[0, 1] == pytest.approx(-1.0)
    assert cm.r[0, 2] == 0.0 and cm.r[2, 2] == 0.0
    assert cm.constant_columns == ["c"]


def test_correlation_needs_two_rows():
    with pytest.raises(ValueError):
        correlation_matrix(np.ones((1, 3)))


@given(hnp.arrays(float, (12, 4), elements=st.floats(-1e3, 1e3)))
def test_correlation_bounded_symmetric(data):
    r = correlation_matrix(data).r
    assert np.all(np.abs(r) <= 1 + 1e-12)
    np.testing.assert_allclose(r, r.T, atol=1e-12)


@pytest.mark.parametrize("name", ["binh_korn", "zdt3", "dtlz2"])
def test_lhs_inputs_uncorrelated(name):
    ds = generate_dataset(registry_lookup(name), 1000, 7)
    r = correlation_matrix(ds.x).r
    off = r[~np.eye(len(r), dtype=bool)]
    assert np.max(np.abs(off)) < 0.1


def test_subsample_exhaustion_is_permutation(rng):
    pop = rng.random((50, 3))
    idx = lhs_subsample(pop, 50, seed=2)
    assert sorted(idx) == list(range(50))


def test_subsample_singleton(rng):
    idx = lhs_subsample(rng.random((30, 2)), 1, seed=0)
    assert len(idx) == 1 and 0 <= idx[0] < 30


def test_subsample_381_of_10000(rng):
    idx = lhs_subsample(rng.random((10000, 2)), 381, seed=5)
    assert len(set(idx.tolist())) == 381


def test_subsample_too_many(rng):
    with pytest.raises(ValueError):
        lhs_subsample(rng.random((5, 2)), 6, seed=0)


@pytest.mark.parametrize("method", ["lhs", "uniform"])
@given(pop_size=st.integers(1, 80), frac=st.floats(0.01, 1.0), seed=st.integers(0, 1000))
def test_subsample_unique(method, pop_size, frac, seed):
    pop = np.random.default_rng(seed).random((pop_size, 3))
    k = max(1, int(frac * pop_size))
    idx = lhs_subsample(pop, k, seed, method=method)
    assert len(idx) == k == len(set(idx.tolist()))


def test_subsample_handles_constant_coordinate():
    pop = np.column_stack([np.linspace(0, 1, 40), np.full(40, 2.0)])
    assert len(set(lhs_subsample(pop, 10, 0).tolist())) == 10


def test_subsample_spreads_over_population(rng):
    # a clustered population still yields samples across the whole box
    pop = np.vstack([rng.random((900, 2)) * 0.1, rng.random((100, 2))])
    idx = lhs_subsample(pop, 50, seed=1)
    assert np.mean(np.all(pop[idx] < 0.1, axis=1)) < 0.9

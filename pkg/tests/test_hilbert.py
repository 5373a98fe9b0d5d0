import numpy as np
import pytest

from geomedian import (
    ConfigError,
    DataError,
    DimensionMismatchError,
    DistributionSpec,
    inner,
    known_median,
    norm,
    sample,
    substream,
)

SEED = 20240517


def test_inner_orthogonal():
    assert inner([1.0, 0.0], [0.0, 1.0]) == 0.0


def test_inner_squared_norm():
    assert inner([1.0, 2.0], [1.0, 2.0]) == 5.0


def test_inner_hand_value():
    # (3,4).(1,1) = 3 + 4
    assert inner([3.0, 4.0], [1.0, 1.0]) == 7.0


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        inner([1.0, 2.0], [1.0, 2.0, 3.0])


def test_inner_symmetric_bilinear():
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        a, b, c = rng.standard_normal((3, 6))
        s, t = rng.standard_normal(2)
        assert inner(a, b) == pytest.approx(inner(b, a), rel=1e-12)
        assert inner(s * a + t * b, c) == pytest.approx(s * inner(a, c) + t * inner(b, c), rel=1e-10, abs=1e-12)


def test_norm_pythagorean():
    assert norm([3.0, 4.0]) == 5.0


def test_norm_zero_vector():
    assert norm([0.0, 0.0, 0.0]) == 0.0


def test_norm_ones():
    assert norm([1.0, 1.0, 1.0, 1.0]) == 2.0


def test_rejects_non_finite():
    with pytest.raises(DataError):
        norm([1.0, np.nan])
    with pytest.raises(DataError):
        inner([np.inf, 0.0], [1.0, 0.0])


def test_cauchy_schwarz_and_triangle():
    rng = np.random.default_rng(SEED + 1)
    for _ in range(200):
        d = int(rng.integers(1, 12))
        a = rng.standard_normal(d) * rng.uniform(0.1, 10)
        b = rng.standard_normal(d) * rng.uniform(0.1, 10)
        assert abs(inner(a, b)) <= norm(a) * norm(b) * (1 + 1e-12)
        assert norm(a + b) <= norm(a) + norm(b) + 1e-12


def test_sample_deterministic():
    spec = DistributionSpec("gaussian-isotropic", dim=2, seed=99)
    assert np.array_equal(sample(spec, 10), sample(spec, 10))


def test_substreams_differ_and_repeat():
    a = substream(1, 0, 0).standard_normal(5)
    b = substream(1, 0, 1).standard_normal(5)
    c = substream(1, 0, 0).standard_normal(5)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, c)


def test_degenerate_mixture_equals_clean_base():
    clean = DistributionSpec("gaussian-isotropic", dim=3, seed=7)
    mixed = DistributionSpec("mixture-contaminated", dim=3, seed=7, fraction=0.0)
    assert np.array_equal(sample(clean, 50), sample(mixed, 50))


def test_sample_mean_matches_center():
    # law of large numbers at n = 1e5: 3 sigma / sqrt(n) < 0.02 per coordinate
    center = np.array([1.0, -2.0, 0.5])
    spec = DistributionSpec("gaussian-isotropic", dim=3, seed=11, center=center)
    x = sample(spec, 100_000)
    assert np.all(np.abs(x.mean(axis=0) - center) < 0.02)


def test_mixture_contamination_rate_and_outliers():
    spec = DistributionSpec("mixture-contaminated", dim=4, seed=3, fraction=0.1, outlier_magnitude=50.0)
    x = sample(spec, 20_000)
    outlier = np.zeros(4)
    outlier[0] = 50.0
    hits = np.all(x == outlier, axis=1)
    assert 0.08 < hits.mean() < 0.12


def test_sphere_shell_radius():
    spec = DistributionSpec("sphere-shell", dim=5, seed=2, scale=3.0)
    x = sample(spec, 500)
    r = np.linalg.norm(x, axis=1)
    assert np.allclose(r, 3.0, rtol=1e-12)


def test_anisotropic_scales():
    scales = np.array([0.5, 2.0, 5.0])
    spec = DistributionSpec("gaussian-anisotropic", dim=3, seed=8, scales=scales)
    x = sample(spec, 200_000)
    assert np.allclose(x.std(axis=0), scales, rtol=0.02)


def test_discretized_process_shape_and_determinism():
    spec = DistributionSpec("discretized-process", dim=20, seed=4)
    x = sample(spec, 7)
    assert x.shape == (7, 20)
    assert np.array_equal(x, sample(spec, 7))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="nope", dim=2),
        dict(kind="gaussian-isotropic", dim=0),
        dict(kind="gaussian-isotropic", dim=2, scale=0.0),
        dict(kind="mixture-contaminated", dim=2, fraction=1.0),
        dict(kind="mixture-contaminated", dim=2, fraction=-0.1),
        dict(kind="gaussian-anisotropic", dim=2),
        dict(kind="gaussian-anisotropic", dim=2, scales=[1.0, -1.0]),
        dict(kind="gaussian-isotropic", dim=2, center=[1.0, 2.0, 3.0]),
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(ConfigError):
        DistributionSpec(**kwargs)


def test_sample_count_must_be_positive():
    spec = DistributionSpec("gaussian-isotropic", dim=2, seed=1)
    with pytest.raises(ConfigError):
        sample(spec, 0)


def test_dim1_uniqueness_warning_flag():
    assert DistributionSpec("gaussian-isotropic", dim=1, seed=1).uniqueness_warning
    assert not DistributionSpec("gaussian-isotropic", dim=2, seed=1).uniqueness_warning


def test_known_median():
    c = np.array([1.0, 2.0])
    assert np.array_equal(known_median(DistributionSpec("gaussian-isotropic", dim=2, center=c)), c)
    assert np.array_equal(known_median(DistributionSpec("sphere-shell", dim=2, center=c)), c)
    assert known_median(DistributionSpec("mixture-contaminated", dim=2, fraction=0.1)) is None
    assert known_median(DistributionSpec("mixture-contaminated", dim=2, fraction=0.0)) is not None

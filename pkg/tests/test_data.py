import numpy as np
import pytest

from lediflow.data import (
    Kind2D,
    blob_region_mask,
    corner_indices,
    make_2d,
    make_blob_images,
)


@pytest.mark.parametrize("kind", [k.value for k in Kind2D])
def test_make_2d_standardized_and_seeded(kind):
    a = make_2d(kind, 2000, 0.05, seed=3)
    assert a.shape == (2000, 2)
    assert np.all(np.abs(a.mean(axis=0)) < 1e-9)
    assert np.allclose(a.std(axis=0), 1.0, atol=1e-9)
    assert np.array_equal(a, make_2d(kind, 2000, 0.05, seed=3))
    assert not np.array_equal(a, make_2d(kind, 2000, 0.05, seed=4))


def test_gauss_mix8_zero_noise_lands_on_modes():
    a = make_2d("gauss_mix8", 4000, noise=0.0, seed=0)
    modes = np.unique(np.round(a, 9), axis=0)
    assert len(modes) == 8
    # the modes sit on a circle around the origin
    r = np.linalg.norm(modes, axis=1)
    assert np.allclose(r, r[0], rtol=0.05)


def test_two_moons_has_two_arms():
    a = make_2d("two_moons", 4000, noise=0.0, seed=1)
    assert (a[:, 1] > 0).mean() == pytest.approx(0.5, abs=0.1)


def test_make_2d_errors():
    with pytest.raises(ValueError):
        make_2d("circles", 10)
    with pytest.raises(ValueError):
        make_2d("two_moons", 0)
    with pytest.raises(ValueError):
        make_2d("two_moons", 10, noise=-1.0)


def test_single_point_is_finite():
    a = make_2d("spiral", 1, seed=0)
    assert a.shape == (1, 2) and np.all(np.isfinite(a))


def test_blob_images_range_shape_seed():
    x = make_blob_images(100, side=8, seed=2)
    assert x.shape == (100, 64)
    assert x.min() >= -1.0 and x.max() <= 1.0
    assert np.array_equal(x, make_blob_images(100, side=8, seed=2))
    assert not np.array_equal(x, make_blob_images(100, side=8, seed=3))


@pytest.mark.parametrize("side", [1, 17, 0])
def test_blob_images_side_bounds(side):
    with pytest.raises(ValueError):
        make_blob_images(4, side=side)


def test_blob_variance_higher_in_blob_region():
    x = make_blob_images(10_000, side=8, seed=0)
    var = x.var(axis=0)
    region = blob_region_mask(8)
    corners = corner_indices(8)
    assert np.median(var[region]) > var[corners].max()


def test_region_and_corner_helpers():
    m = blob_region_mask(8)
    assert m.shape == (64,) and m.sum() == 16
    assert not m[corner_indices(8)].any()
    assert corner_indices(4).tolist() == [0, 3, 12, 15]

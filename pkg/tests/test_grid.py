import math

import numpy as np
import pytest

from czvar.grid import (Grid, SampledFunction, TestFamily, convolve, dump_binary, dump_csv,
                        fourier_l2_norm, l2_norm, load_binary, load_csv, make_test_function,
                        middle_half_mask, sample, zeros)


@pytest.fixture
def g1():
    return Grid(1, 16.0, 4096)


def test_grid_validation():
    for bad in [(3, 1.0, 64), (1, 1.0, 100), (1, 1.0, 4), (1, -1.0, 64)]:
        with pytest.raises(ValueError):
            Grid(*bad)
    g = Grid(2, 8.0, 128)
    assert g.spacing == 0.125 and g.cell == 0.125 ** 2 and g.shape == (128, 128)
    assert g.axis[g.index_of(0.0)] == 0.0


def test_sampled_function_is_immutable_and_finite(g1):
    f = zeros(g1)
    with pytest.raises(ValueError):
        f.values[0] = 1
    with pytest.raises(ValueError):
        SampledFunction(g1, np.full(g1.shape, np.inf))
    with pytest.raises(ValueError):
        SampledFunction(g1, np.zeros(7))


def test_l2_norm_examples(g1):
    assert l2_norm(zeros(g1)) == 0
    assert l2_norm(sample(g1, lambda x: np.ones_like(x))) == pytest.approx(math.sqrt(32))
    gauss = sample(g1, lambda x: np.exp(-x * x / 2))
    assert l2_norm(gauss) == pytest.approx(math.pi ** 0.25, rel=1e-10)


def test_parseval(g1):
    f = make_test_function(TestFamily("bandlimited-random", count=2, seed=4), g1, 1)
    assert fourier_l2_norm(f) == pytest.approx(l2_norm(f), rel=1e-10)


def test_convolve_delta_identity(g1):
    f = make_test_function(TestFamily("gaussian"), g1, 0)
    delta = np.zeros(g1.shape)
    delta[g1.index_of(0.0)] = 1 / g1.cell
    out = convolve(f, SampledFunction(g1, delta))
    assert np.allclose(out.values, f.values, atol=1e-12)


def test_convolve_commutes(g1):
    f = make_test_function(TestFamily("gaussian"), g1, 2)
    g = make_test_function(TestFamily("smoothed-indicator"), g1, 1)
    assert l2_norm(convolve(f, g) - convolve(g, f)) < 1e-12


def test_gaussian_convolution_closed_form(g1):
    def gauss(w):
        return sample(g1, lambda x: np.exp(-x * x / (2 * w * w)) / (w * math.sqrt(2 * math.pi)))

    out = convolve(gauss(1.0), gauss(1.0))
    ref = gauss(math.sqrt(2))
    assert l2_norm(out - ref) / l2_norm(ref) <= 1e-6


def test_convolution_never_wraps():
    g = Grid(1, 16.0, 512)
    f = sample(g, lambda x: (np.abs(x) < 8) * 1.0)
    k = sample(g, lambda x: (np.abs(x) < 4) * 1.0)
    out = convolve(f, k).values
    assert np.all(np.abs(out[np.abs(g.axis) >= 12 + g.spacing]) < 1e-12)


def test_make_test_function_examples(g1):
    f = make_test_function(TestFamily("gaussian", width=1.0, count=1), g1, 0)
    assert f.values[g1.index_of(0.0)] == 1
    fam = TestFamily("bandlimited-random", count=3, seed=11, window=False, band=2.5)
    a = make_test_function(fam, g1, 2)
    assert np.array_equal(a.values, make_test_function(fam, g1, 2).values)
    w = 2 * np.pi * np.fft.fftfreq(g1.points, d=g1.spacing)
    coeffs = np.fft.fft(a.values)
    assert np.abs(coeffs[np.abs(w) > 2.5]).max() < 1e-9 * np.abs(coeffs).max()
    with pytest.raises(ValueError):
        TestFamily("sawtooth")
    with pytest.raises(ValueError):
        make_test_function(fam, g1, 3)


@pytest.mark.parametrize("family", ["gaussian", "smoothed-indicator", "bandlimited-random"])
@pytest.mark.parametrize("grid", [Grid(1, 16.0, 4096), Grid(2, 8.0, 128)])
def test_families_confined_to_middle_half(family, grid):
    fam = TestFamily(family, count=8)
    outside = ~middle_half_mask(grid)
    for i in range(fam.count):
        f = make_test_function(fam, grid, i)
        assert np.abs(f.values[outside]).max() <= 1e-6 * np.abs(f.values).max()


def test_dump_roundtrips(tmp_path):
    g = Grid(2, 8.0, 16)
    f = make_test_function(TestFamily("bandlimited-random", count=1), g, 0) * (1 + 2j)
    dump_csv(f, tmp_path / "f.csv")
    assert np.array_equal(load_csv(tmp_path / "f.csv").values, f.values)
    dump_binary(f, tmp_path / "f.npz")
    back = load_binary(tmp_path / "f.npz")
    assert back.grid == g and np.array_equal(back.values, f.values)

import math

import numpy as np
import pytest

from czvar.grid import Grid
from czvar.kernels import (FIXTURES, LogPowerModulus, PowerModulus, PowerOfModulus,
                           cancellation_residual, complex_power, complex_power_annulus_integral,
                           dini_norm, hilbert, is_nondecreasing, kernel_from_config,
                           modulus_from_config, odd_dini, omega1, perp_gradient,
                           size_bound_check, smoothness_constant_probe, subadditivity_violations,
                           zero_kernel)


# -- moduli ------------------------------------------------------------------

def test_dini_examples():
    assert dini_norm(PowerModulus(0.5)) == pytest.approx(2.0, abs=1e-4)
    assert dini_norm(PowerModulus(1.0), 0.5) == pytest.approx(2.0, abs=1e-4)
    assert dini_norm(LogPowerModulus(3.0)) == pytest.approx(0.5, abs=2e-4)


def test_dini_divergence_is_flagged():
    assert math.isinf(dini_norm(LogPowerModulus(1.0)))
    assert math.isinf(dini_norm(LogPowerModulus(1.0), 1.0))
    assert math.isinf(dini_norm(LogPowerModulus(3.0), 0.25))


def test_dini_rejects_bad_root():
    with pytest.raises(ValueError):
        dini_norm(PowerModulus(1.0), 0.0)
    with pytest.raises(ValueError):
        dini_norm(PowerModulus(1.0), 1.5)


@pytest.mark.parametrize("omega", [PowerModulus(0.7), LogPowerModulus(3.0, 3.0),
                                   PowerModulus(1.0) + LogPowerModulus(4.0, 4.0)])
def test_root_combinator_matches_root_dini(omega):
    assert dini_norm(omega.root(0.5)) == pytest.approx(dini_norm(omega, 0.5), rel=1e-10)


@pytest.mark.parametrize("omega", [PowerModulus(1.0), LogPowerModulus(3.0, 3.0)])
def test_omega1_dominates_both_parts(omega):
    t = 2.0 ** -np.arange(0, 50)
    w1 = omega1(omega, 0.5)
    assert np.all(w1(t) >= np.maximum(omega(t), t ** 0.5))


@pytest.mark.parametrize("omega", [PowerModulus(0.5), PowerModulus(1.0), LogPowerModulus(3.0, 3.0),
                                   PowerModulus(0.5) + LogPowerModulus(3.0, 3.0),
                                   PowerOfModulus(LogPowerModulus(3.0, 3.0), 0.5)])
def test_modulus_axioms(omega):
    assert omega(0.0) == 0.0
    assert is_nondecreasing(omega)
    assert subadditivity_violations(omega, 4000, seed=1) == 0


def test_unshifted_log_power_is_not_subadditive():
    assert subadditivity_violations(LogPowerModulus(3.0), 4000, seed=1) > 0


def test_modulus_config_roundtrip():
    omega = PowerModulus(0.5) + LogPowerModulus(3.0, 3.0) * 2
    back = modulus_from_config(omega.describe())
    t = np.geomspace(1e-9, 1, 50)
    assert np.array_equal(back(t), omega(t))


# -- fixtures ------------------------------------------------------------------

def test_fixture_values():
    assert hilbert().evaluate(1.0, 0.0) == 1
    v = complex_power(2.0).evaluate(2.0, 0.0)
    assert v == pytest.approx(0.5 * np.exp(-2j * math.log(2)))
    assert v == pytest.approx(0.0917 - 0.4915j, abs=1e-4)
    assert kernel_from_config({"id": "hilbert"}).name == "hilbert"
    with pytest.raises(ValueError):
        kernel_from_config({"id": "riesz"})


def test_perp_gradient_reflection_antisymmetry():
    k = perp_gradient()
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform(-2, 2, 2)
        grad = np.array([c(tuple(x)) for c, _ in k.terms]).real
        e = grad / np.linalg.norm(grad)
        u = rng.uniform(-1, 1, 2)
        ru = 2 * (u @ e) * e - u
        assert k.evaluate(x, x - u) == pytest.approx(-k.evaluate(x, x - ru), abs=1e-12)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_size_bound_holds(name):
    k = FIXTURES[name]()
    violations, ratio = size_bound_check(k, 10_000, seed=0)
    assert violations == 0
    assert ratio <= k.size_constant * (1 + 1e-12)


@pytest.mark.parametrize("k", [hilbert(), complex_power(), odd_dini(), perp_gradient()])
def test_adjoint_kernel(k):
    rng = np.random.default_rng(1)
    x = rng.uniform(-3, 3, (50, k.dimension)).squeeze()
    y = rng.uniform(-3, 3, (50, k.dimension)).squeeze()
    assert np.allclose(k.adjoint().evaluate(x, y), np.conj(k.evaluate(y, x)))
    assert k.adjoint().adjoint().name == k.name


# -- smoothness probes -----------------------------------------------------------

def test_hilbert_smoothness_constant():
    assert smoothness_constant_probe(hilbert(), 10_000, seed=0) <= 4.0


def test_smoothness_probe_scales_with_modulus():
    k = odd_dini()
    a = smoothness_constant_probe(k, 4000, seed=2)
    b = smoothness_constant_probe(k, 4000, seed=2, modulus=k.modulus * 2)
    assert b == pytest.approx(a / 2, rel=1e-12)


def test_zero_kernel_probe():
    assert smoothness_constant_probe(zero_kernel(), 1000) == 0


@pytest.mark.parametrize("k", [hilbert(), odd_dini(), complex_power(), perp_gradient()])
def test_smoothness_probe_settles(k):
    small = smoothness_constant_probe(k, 2500, seed=3)
    large = smoothness_constant_probe(k, 20_000, seed=3)
    assert math.isfinite(large) and large <= 1.5 * small


# -- cancellation -------------------------------------------------------------------

@pytest.mark.parametrize("center", [0.0, 0.5, -1.25])
@pytest.mark.parametrize("orientation", ["x", "y"])
def test_hilbert_residual_vanishes(center, orientation):
    g = Grid(1, 16.0, 4096)
    assert cancellation_residual(hilbert(), g, center, 1.0, 2.0, orientation) == 0


@pytest.mark.parametrize("orientation", ["x", "y"])
def test_perp_gradient_residual_first_order(orientation):
    worst = []
    for G in (128, 256, 512):
        g = Grid(2, 8.0, G)
        k = perp_gradient()
        res = [abs(cancellation_residual(k, g, c, 1.0, 2.0, orientation))
               for c in [(0.0, 0.0), (0.5, -1.0), (1.0, 0.5)]]
        assert max(res) <= 10 * g.spacing * k.size_constant
        worst.append(max(res))
    if orientation == "x":
        assert worst[2] < worst[1] < worst[0]


def test_complex_power_residual_matches_closed_form():
    g = Grid(1, 16.0, 4096)
    exact = complex_power_annulus_integral(2.0, 1.0, 2.0)
    assert abs(exact) == pytest.approx(1.278, abs=1e-3)
    got = cancellation_residual(complex_power(2.0), g, g.spacing / 2, 1.0, 2.0)
    assert abs(got - exact) <= 0.01 * abs(exact)
    assert abs(got) > 0.5


def test_residual_refuses_singular_cell():
    g = Grid(1, 16.0, 512)
    with pytest.raises(ValueError):
        cancellation_residual(hilbert(), g, 0.0, g.spacing, 2.0)
    with pytest.raises(ValueError):
        cancellation_residual(hilbert(), g, 0.0, 1.0, 9.0)

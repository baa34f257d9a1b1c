import json
import math

import numpy as np
import pytest

from czvar.grid import Grid, TestFamily, l2_norm, make_test_function, sample
from czvar.kernels import PowerModulus, complex_power, hilbert, zero_kernel
from czvar.normlab import (NormSurface, NumericFailure, cauchy_gap, decay_violations, envelope,
                           envelope_fit, hilbert_sigma_q_norm, log_s_grid, matrix_probe,
                           norm_surface, operator_norm, pair_j_range, row_peaks,
                           square_function_norm, t1_sum_check)
from czvar.operators import (LinearOp, MollifierFamily, a_op, identity_op, resolved_dyadic_range,
                             truncated_op)

G = Grid(1, 16.0, 256)


# -- operator_norm -----------------------------------------------------------------

def test_identity_and_scaling_probes():
    assert operator_norm(identity_op(G)).value == pytest.approx(1, abs=1e-10)
    assert operator_norm(identity_op(G) * 2).value == pytest.approx(2, abs=1e-10)


def test_random_matrix_probe_matches_svd():
    g = Grid(1, 1.0, 8)
    rng = np.random.default_rng(0)
    m = np.zeros((8, 8), complex)
    m[:5, :5] = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    # the quadrature weight makes the discrete L2 norm the plain 2-norm here
    est = operator_norm(matrix_probe(g, m), seed=1, max_iters=5000, tol=1e-13)
    assert est.converged
    assert est.value == pytest.approx(np.linalg.svd(m, compute_uv=False)[0], rel=1e-8)


def test_norm_is_homogeneous():
    op = truncated_op(hilbert(), G, 0.5)
    a = operator_norm(op, seed=3).value
    b = operator_norm(op * (-2.5j), seed=3).value
    assert b == pytest.approx(2.5 * a, rel=1e-8)


def test_zero_probe_and_nonfinite_probe():
    zero = identity_op(G) * 0
    assert operator_norm(zero).value == 0
    bad = LinearOp(G, lambda v: v * np.nan, lambda v: v * np.nan, "nan")
    with pytest.raises(NumericFailure):
        operator_norm(bad)


def test_unconverged_is_flagged():
    g = Grid(1, 1.0, 8)
    m = np.diag([1.0, 0.999999, 0.5, 0, 0, 0, 0, 0])
    est = operator_norm(matrix_probe(g, m), max_iters=3, tol=1e-15)
    assert not est.converged and est.iterations == 3


# -- surfaces -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def hilbert_surfaces():
    js = list(range(*pair_j_range(G, "sigmaQ")))
    ss = log_s_grid(4 * G.spacing, G.extent / 2, 12)
    return {p: norm_surface(hilbert(), G, p, js, ss, seed=5) for p in ("sigmaQ", "Qsigma")}


def test_zero_kernel_surface():
    s = norm_surface(zero_kernel(), G, "AQ", [-1, 0], [0.5, 1.0])
    assert np.all(s.matrix() == 0) and s.all_converged


def test_surface_rejects_unknown_pair():
    with pytest.raises(ValueError):
        norm_surface(hilbert(), G, "QQ", [0], [1.0])


def test_sigma_q_and_q_sigma_agree(hilbert_surfaces):
    a, b = hilbert_surfaces["sigmaQ"].matrix(), hilbert_surfaces["Qsigma"].matrix()
    assert np.all(np.isfinite(a)) and np.all(a >= 0)
    assert np.max(np.abs(a - b) / np.maximum(a, b)) <= 0.10


def test_row_peaks_sit_at_a_fixed_scale_ratio(hilbert_surfaces):
    # the peak is where the LP symbol's bump meets the shell, a fixed ratio s/2^j
    peaks = row_peaks(hilbert_surfaces["sigmaQ"])
    assert max(peaks) - min(peaks) <= 1.0
    assert 1.0 <= np.median(peaks) <= 3.5


def test_surface_tracks_multiplier_oracle(hilbert_surfaces):
    s = hilbert_surfaces["sigmaQ"]
    j = 0
    row = s.matrix()[s.js.index(j)]
    oracle = np.array([hilbert_sigma_q_norm(j, x) for x in s.ss])
    big = oracle > 0.2 * oracle.max()
    assert np.max(np.abs(row[big] - oracle[big]) / oracle[big]) <= 0.15


def test_hilbert_envelope_is_finite_with_decay(hilbert_surfaces):
    s = hilbert_surfaces["sigmaQ"]
    fit = envelope_fit(s, PowerModulus(1.0), 0.5)
    assert fit.finite and fit.constant > 0
    assert np.all(s.matrix() <= fit.constant * envelope(PowerModulus(1.0), *np.meshgrid(
        s.js, s.ss, indexing="ij")) * (1 + 1e-12))
    assert decay_violations(s) == []


def test_envelope_fit_scaling():
    js, ss = [-1, 0, 1], list(log_s_grid(0.25, 8, 7))
    jj, sg = np.meshgrid(js, ss, indexing="ij")
    e = envelope(PowerModulus(1.0), jj, sg)
    for c in (1.0, 3.0):
        surf = NormSurface("sigmaQ", "synthetic", js, ss, (c * e).tolist(),
                           np.ones_like(e, int).tolist(), np.ones_like(e, bool).tolist())
        assert envelope_fit(surf).constant == pytest.approx(c, rel=1e-12)


def test_envelope_flags_infinite_constant():
    surf = NormSurface("sigmaQ", "synthetic", [0], [1.0], [[1.0]], [[1]], [[True]])
    fit = envelope_fit(surf, PowerModulus(1.0) * 0, 0.5)
    # theta part keeps E positive; only a zero modulus AND zero theta-term could vanish
    assert fit.finite
    bad = NormSurface("sigmaQ", "synthetic", [0], [2.0 ** 60], [[1.0]], [[1]], [[True]])
    assert envelope_fit(bad).constant > 1e8


def test_complex_power_envelope_is_finite():
    js = [-1, 0, 1]
    ss = log_s_grid(4 * G.spacing, G.extent / 2, 6)
    fit = envelope_fit(norm_surface(complex_power(), G, "sigmaQ", js, ss))
    assert fit.finite


def test_surface_determinism_and_serialization(hilbert_surfaces, tmp_path):
    a = hilbert_surfaces["sigmaQ"]
    b = norm_surface(hilbert(), G, "sigmaQ", a.js, a.ss, seed=5, threads=3)
    assert a.to_json() == b.to_json()
    back = NormSurface.from_json(a.to_json())
    assert back.values == a.values and back.js == a.js
    lines = a.to_csv().strip().splitlines()
    assert lines[0].split(",")[:5] == ["j", "s", "estimate", "iterations", "converged"]
    assert len(lines) == 1 + len(a.js) * len(a.ss)
    json.loads(envelope_fit(a).to_json())


def test_mollified_surfaces_are_finite():
    js = list(range(*pair_j_range(G, "AQ")))
    ss = log_s_grid(4 * G.spacing, G.extent / 2, 6)
    for pair in ("AQ", "BQ"):
        s = norm_surface(hilbert(), G, pair, js, ss)
        assert np.all(np.isfinite(s.matrix())) and s.all_converged


# -- square functions and the T1 sum ---------------------------------------------------

def test_square_function_examples():
    f = make_test_function(TestFamily("gaussian"), G, 0)
    assert square_function_norm(hilbert(), "A", f * 0, [0, 1]) == 0
    single = square_function_norm(hilbert(), "A", f, [0])
    direct = l2_norm(f.with_values(a_op(hilbert(), MollifierFamily(G), 0)(f.values)))
    assert single == pytest.approx(direct, rel=1e-14)
    with pytest.raises(ValueError):
        square_function_norm(hilbert(), "C", f, [0])


def test_t1_sum_examples():
    f = make_test_function(TestFamily("gaussian"), G, 0)
    assert t1_sum_check(hilbert(), f, []) == []
    jl, jh = resolved_dyadic_range(G)
    out = t1_sum_check(hilbert(), f, range(jl, jh + 1))
    assert [j for j, _ in out] == list(range(jh, jl - 1, -1))
    # the resolved pieces stop at L/2, so the exact partner is T_(2^jl) - T_(2^(jh+1))
    full = truncated_op(hilbert(), G, 2.0 ** jl)(f.values)
    beyond = truncated_op(hilbert(), G, 2.0 ** (jh + 1))(f.values)
    assert out[-1][1] == pytest.approx(l2_norm(f.with_values(full - beyond)), rel=1e-12)


def test_t1_cauchy_gap_on_fine_grid():
    g = Grid(1, 16.0, 16384)
    w = 16 / 12
    f = sample(g, lambda x: np.exp(-x * x / (2 * w * w)))
    jl, jh = resolved_dyadic_range(g)
    assert cauchy_gap(hilbert(), f, range(jl, jh + 1)) <= 0.01

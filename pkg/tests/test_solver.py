import math

import numpy as np
import pytest

from tmdecomp.solver import (SolverConfig, default_gamma, default_lambda, gradient_point,
                             k0_bound, momentum_point, objective, solve, spectral_norm)
from tmdecomp.synthgen import SynthSpec, generate
from tmdecomp.weights import WeightSpec, build_weights, uniform_weights

from reference_spcp import spcp_reference


def test_spectral_norm(rng):
    assert spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0)
    assert spectral_norm(np.zeros((3, 2))) == 0.0
    M = rng.standard_normal((10, 7))
    s = np.linalg.svd(M, compute_uv=False)
    assert spectral_norm(M) == pytest.approx(s[0], rel=1e-8)


def test_momentum_point(rng):
    cur, prev = rng.standard_normal((3, 2)), rng.standard_normal((3, 2))
    np.testing.assert_array_equal(momentum_point(cur, prev, 1.0, 1.0), cur)
    np.testing.assert_array_equal(momentum_point(cur, cur, 2.5, 2.0), cur)
    np.testing.assert_allclose(momentum_point(cur, prev, 2.5, 2.0), cur + 0.4 * (cur - prev),
                               rtol=1e-15)
    with pytest.raises(ValueError):
        momentum_point(cur, prev[:2], 1.0, 1.0)


def test_gradient_point(rng):
    X = rng.standard_normal((4, 3))
    YA, YE = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
    YN = X - YA - YE
    for G, Y in zip(gradient_point(YA, YE, YN, X), (YA, YE, YN)):
        np.testing.assert_allclose(G, Y, atol=1e-15)
    Z = np.zeros_like(X)
    for G in gradient_point(Z, Z, Z, X, 3.0):
        np.testing.assert_allclose(G, X / 3.0, rtol=1e-15)
    YN = rng.standard_normal((4, 3))
    GA, GE, GN = gradient_point(YA, YE, YN, X)
    np.testing.assert_allclose(GA - YA, GE - YE, atol=1e-15, rtol=0)
    np.testing.assert_allclose(GE - YE, GN - YN, atol=1e-15, rtol=0)


def test_k0_bound():
    assert k0_bound(1.0, 1e-5, 0.9) == 110
    assert k0_bound(1.0 / 0.9, 1.0, 0.9) == 1
    ks = [k0_bound(1.0, 1e-5, eta) for eta in (0.95, 0.9, 0.8, 0.5, 0.1)]
    assert ks == sorted(ks, reverse=True)
    with pytest.raises(ValueError):
        k0_bound(1.0, 2.0, 0.9)
    with pytest.raises(ValueError):
        k0_bound(1.0, 0.1, 1.0)


def test_default_parameters():
    assert default_lambda(2016, 121) == 1 / math.sqrt(2016)
    assert default_gamma(2016, 121) == pytest.approx(
        1 / (2 * math.sqrt(2 * math.log(2016 * 121) * 2016)), rel=1e-15)


def test_config_validation():
    for bad in (dict(eta=1.0), dict(eta=0.0), dict(lam=-1), dict(gamma=0), dict(L_f=2),
                dict(tol=-1), dict(max_iters=0)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)
    with pytest.raises(ValueError):
        SolverConfig(weights=uniform_weights(5)).resolve(6, 2)


def test_zero_input():
    d = solve(np.zeros((8, 3)))
    assert d.diagnostics.iterations == 1 and d.diagnostics.converged
    assert not d.A.any() and not d.E.any() and not d.N.any()


def test_rank_one_recovery(rng):
    # the noise term keeps a share of about 1 / (2 gamma ||X||_2) of X, so
    # ||X||_2 must be well above 1 / (2 gamma) ~ 55 for a 5% recovery
    u = 30 + 15 * np.sin(np.linspace(0, 4 * np.pi, 200))
    v = rng.uniform(0.5, 2, 10)
    X = np.outer(u, v)
    d = solve(X, SolverConfig(max_iters=500))
    assert np.linalg.norm(d.A - X) / np.linalg.norm(X) < 0.05
    assert np.mean(np.abs(d.E) > 1e-6) < 0.01


def test_uniform_weights_match_reference_loop():
    X, _ = generate(SynthSpec(T=64, P=8, rank_r=2, seed=11))
    ref = spcp_reference(X.data, 60)
    got = []
    solve(X, SolverConfig(max_iters=60, tol=0, weights=uniform_weights(64)),
          callback=lambda k, A, E, N: got.append((A.copy(), E.copy(), N.copy())))
    assert len(got) == 60
    for (A, E, N), (rA, rE, rN) in zip(got, ref):
        np.testing.assert_allclose(A, rA, atol=1e-10, rtol=0)
        np.testing.assert_allclose(E, rE, atol=1e-10, rtol=0)
        np.testing.assert_allclose(N, rN, atol=1e-10, rtol=0)


def test_deterministic_and_permutation_equivariant():
    X, _ = generate(SynthSpec(T=128, P=6, rank_r=2, seed=5))
    cfg = SolverConfig(weights=build_weights(WeightSpec(128)), max_iters=200, tol=0)
    d1, d2 = solve(X, cfg), solve(X, cfg)
    assert d1.A.tobytes() == d2.A.tobytes() and d1.N.tobytes() == d2.N.tobytes()
    perm = [3, 1, 5, 0, 2, 4]
    dp = solve(X.data[:, perm], cfg)
    for name in "AEN":
        np.testing.assert_allclose(getattr(dp, name), getattr(d1, name)[:, perm], atol=1e-8)


def test_diagnostics_and_objective():
    X, _ = generate(SynthSpec(T=128, P=6, rank_r=2, seed=2))
    w = build_weights(WeightSpec(128))
    cfg = SolverConfig(weights=w, max_iters=300, tol=0)
    d = solve(X, cfg)
    diag = d.diagnostics
    assert diag.iterations == 300 and not diag.converged
    assert len(diag.objective_trace) == 300
    assert np.all(np.diff(diag.mu_trace) <= 0)
    assert diag.residual_fro < 1e-2
    r = cfg.resolve(128, 6)
    mu_bar = 1e-5 * 0.99 * spectral_norm(X.data)
    F = objective(d.A, d.E, d.N, X.data, mu_bar, r.lam, r.gamma, w)
    assert F == pytest.approx(min(diag.objective_trace), rel=1e-10)


def test_converges_with_loose_tolerance():
    X, _ = generate(SynthSpec(T=64, P=4, rank_r=1, seed=0))
    d = solve(X, SolverConfig(max_iters=5000, tol=1e-4))
    assert d.diagnostics.converged
    assert d.diagnostics.iterations > k0_bound(1, 1e-5, 0.9)


def test_non_finite_input():
    with pytest.raises(ValueError):
        solve(np.array([[1.0, np.nan], [0.0, 1.0]]))

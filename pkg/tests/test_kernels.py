import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from gaussvarlp.errors import PreconditionError
from gaussvarlp.geometry import global_quantities_batch, is_local, u_of_t
from gaussvarlp.kernels import (ALTERNATIVE, GENERAL, _integrand_log_parts, alpha_inf,
                                bound_log, bound_ratios, certify, cz_kernel,
                                expression_profile, growth_report, hermite_profile,
                                kernel_bound_check, kernel_eval, kernel_values,
                                majorant_P, profile_phi, profile_psi, require_certified,
                                sample_global_pairs, theta_profile, verify_orthogonality)
from gaussvarlp.quadrature import truncated_uniform

X0, Y0 = np.array([1.0, 0.0]), np.array([0.0, 1.0])


def t_oracle(x, y, F, m, variant):
    """Independent adaptive quadrature directly in t with phi from its formula."""
    d = len(x)

    def f(t):
        r = math.sqrt(1 - t)
        arg = (x - r * y) / math.sqrt(t) if variant == ALTERNATIVE else (y - r * x) / math.sqrt(t)
        u = float(np.sum((y - r * x) ** 2)) / t
        psi = float(profile_phi(r, m, d, variant)) / r
        return 0.5 * psi * F.eval(arg[None])[0] * math.exp(-u) * t ** (-d / 2 - 1)

    val, _ = integrate.quad(f, 0, 1, points=[1e-3, 0.01, 0.1, 0.5, 0.9], limit=500,
                            epsabs=1e-14, epsrel=1e-12)
    return val


def test_orthogonality_examples(F_z1, F_z1sq):
    assert abs(verify_orthogonality(F_z1)) < 1e-14
    assert abs(verify_orthogonality(F_z1sq)) < 1e-13
    one = hermite_profile([[0, 0]], [1.0])
    assert verify_orthogonality(one) == pytest.approx(1.0)
    with pytest.raises(PreconditionError, match="violates"):
        require_certified(one)


def test_hermite_profile_gradient_matches_finite_differences(rng):
    F = hermite_profile([[2, 1], [0, 3]], [1.0, -0.5])
    z = rng.standard_normal((20, 2))
    h = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (F.eval(z + e) - F.eval(z - e)) / (2 * h)
        assert np.allclose(F.grad(z)[:, j], fd, rtol=1e-6, atol=1e-6)
    assert F.degree == 3 and F.parity == "odd"


def test_expression_profile_metadata():
    F = expression_profile("x1**2*x2**2 - 1/4", 2)
    assert F.degree == 4 and F.parity == "even"
    assert expression_profile("x1*x2", 2).parity == "even"
    assert expression_profile("x1", 2).parity == "odd"


def test_growth_report_finite(F_z1):
    rep = growth_report(F_z1)
    assert all(np.isfinite(v["F"]) and np.isfinite(v["grad"]) for v in rep.values())


def test_phi_psi_examples():
    r = np.linspace(0.05, 0.95, 19)
    for d in (2, 3, 4):
        assert np.allclose(profile_phi(r, 2, d), r ** (d - 1), rtol=1e-14)
    t = np.linspace(0.01, 0.99, 50)
    assert np.allclose(profile_psi(t, 2, 3), np.sqrt(1 - t), rtol=1e-14)
    assert profile_phi(1e-12, 1, 2) < 1e-11
    # r -> 1: -log r / (1 - r^2) -> 1/2
    assert profile_phi(1 - 1e-12, 4, 2) == pytest.approx(0.5, rel=1e-9)
    with pytest.raises(PreconditionError):
        profile_phi(1.0, 2, 2)
    with pytest.raises(PreconditionError):
        profile_psi(0.0, 2, 2)


def test_kernel_matches_independent_oracles(F_z1):
    rep = kernel_eval(X0, Y0, F_z1, 2, ALTERNATIVE)
    # midpoint rule with 10^6 panels in t
    assert rep.value == pytest.approx(0.11134649487, abs=1e-10)
    assert rep.abs_error_estimate >= 0 and not rep.flags
    for m in (1, 2, 3):
        for variant in (ALTERNATIVE, GENERAL):
            v = kernel_eval(X0, Y0, F_z1, m, variant).value
            assert v == pytest.approx(t_oracle(X0, Y0, F_z1, m, variant), rel=1e-9, abs=1e-13)


@pytest.mark.parametrize("m,variant,value", [
    (1, ALTERNATIVE, 0.11649773405256551),
    (3, ALTERNATIVE, 0.10941596776856263),
    (2, GENERAL, -0.05763356305598682),
    (3, GENERAL, -0.029981454789079584),
])
def test_kernel_regression_values(F_z1, m, variant, value):
    assert kernel_eval(X0, Y0, F_z1, m, variant).value == pytest.approx(value, rel=1e-10)


def test_kernel_odd_at_origin(F_z1, rng):
    for y in rng.uniform(-3, 3, (5, 2)):
        a = kernel_eval(np.zeros(2), y, F_z1, 2).value
        b = kernel_eval(np.zeros(2), -y, F_z1, 2).value
        assert abs(a + b) <= 1e-10


def test_kernel_tolerance_self_consistency(F_z1):
    a = kernel_eval(X0, Y0, F_z1, 2, tol=1e-6).value
    b = kernel_eval(X0, Y0, F_z1, 2, tol=1e-9).value
    assert abs(a - b) <= 2e-6


def test_kernel_rejects_diagonal(F_z1):
    with pytest.raises(PreconditionError):
        kernel_eval(X0, X0, F_z1, 2)


def test_fixed_rule_matches_adaptive(F_z1, F_z1sq, rng):
    x = rng.uniform(-3, 3, (15, 2))
    y = x + rng.uniform(-3, 3, (15, 2))
    for F in (F_z1, F_z1sq):
        for m in (1, 3):
            fast = kernel_values(x, y, F, m)
            slow = np.array([kernel_eval(a, b, F, m).value for a, b in zip(x, y)])
            assert np.allclose(fast, slow, rtol=1e-8, atol=1e-12)


def test_argument_relation_between_variants(rng):
    # the alternative argument at (x, y) is the general one at (y, x)
    x = rng.standard_normal((10**4, 2))
    y = rng.standard_normal((10**4, 2))
    t = rng.uniform(1e-3, 1 - 1e-3, (10**4, 1))
    _, alt = _integrand_log_parts(x, y, t, 1 - t, np.log1p(-t), 2, 2, ALTERNATIVE)
    _, gen = _integrand_log_parts(y, x, t, 1 - t, np.log1p(-t), 2, 2, GENERAL)
    direct = (x[:, None] - np.sqrt(1 - t)[..., None] * y[:, None]) / np.sqrt(t)[..., None]
    assert np.max(np.abs(alt - direct)) < 1e-10
    assert np.max(np.abs(alt - gen)) < 1e-12


def test_bound_examples(F_z1):
    rep = kernel_bound_check([1, 0], [-2, 0], F_z1, 2, 0.5)
    assert rep.bound_b_le_0 == pytest.approx(math.exp(-3.5), rel=1e-12)
    assert rep.bound_b_gt_0 is None and np.isfinite(rep.ratio_to_bound)
    rep = kernel_bound_check([1, 0], [2, 0], F_z1, 2, 0.1, scale_const=1.0)
    assert rep.bound_b_gt_0 == pytest.approx(math.exp(-3) / 0.75, rel=1e-12)
    assert rep.bound_b_le_0 is None
    with pytest.raises(PreconditionError):
        kernel_bound_check([2, 0], [2.4, 0], F_z1, 2, 0.1)
    with pytest.raises(PreconditionError):
        kernel_bound_check([1, 0], [3, 0], F_z1, 2, 0.6)


def test_alpha_inf_and_majorant():
    assert alpha_inf(0.1, 2.0) == pytest.approx(0.40)
    with pytest.raises(PreconditionError, match="eps"):
        alpha_inf(0.6, 2.0)
    x = np.array([0.7, -1.2])
    assert majorant_P(x, x, 0.4) == pytest.approx(np.linalg.norm(2 * x) ** 2)


def test_majorant_integrable_uniformly():
    sch = truncated_uniform(2, 30.0, 600, "lebesgue")
    xs = np.stack([np.linspace(0, 5, 20), np.zeros(20)], -1)
    ints = [sch.integrate(majorant_P(x[None], sch.nodes, 0.4)) for x in xs]
    assert np.all(np.isfinite(ints))
    assert max(ints) < 4 * min(ints)
    # doubling the box moves nothing, so the truncated integral is the full one
    big = truncated_uniform(2, 60.0, 1200, "lebesgue")
    assert big.integrate(majorant_P(xs[-1][None], big.nodes, 0.4)) == \
        pytest.approx(ints[-1], rel=1e-3)


def test_cz_kernel(F_z1, F_z1sq, rng):
    assert cz_kernel([1.0, 0.0], F_z1) == pytest.approx(-math.gamma(1.5), abs=1e-12)
    x = rng.uniform(-3, 3, (50, 2))
    for F in (F_z1, F_z1sq):
        assert np.allclose(cz_kernel(2 * x, F), cz_kernel(x, F) / 4, rtol=1e-12, atol=0)
    th = 2 * np.pi * np.arange(256) / 256
    ring = np.stack([np.cos(th), np.sin(th)], -1)
    assert abs(np.mean(cz_kernel(ring, F_z1))) < 1e-12
    with pytest.raises(PreconditionError):
        cz_kernel([0.0, 0.0], F_z1)


def test_theta_profile():
    F = certify(expression_profile("x1**2*x2**2 - 1/4", 2))
    vals = theta_profile(F, [1.0, 2.0, 4.0])
    for v in vals:
        assert not v.unbounded
        assert v.value == pytest.approx((v.t**4 - 0.25) / v.t**2, abs=1e-6)
    for src in ("x1", "x1*x2"):
        assert all(v.unbounded for v in theta_profile(expression_profile(src, 2), [1, 2]))
    with pytest.raises(PreconditionError):
        theta_profile(F, [0.0])


@pytest.mark.parametrize("regime", ["b_le_0", "b_gt_0"])
def test_sampler_is_global_and_regime_pure(regime):
    x, y = sample_global_pairs(3000, 2, regime, seed=4)
    assert not np.any(is_local(x, y, 2.0))
    b = 2 * np.sum(x * y, axis=1)
    assert np.all(b <= 0) if regime == "b_le_0" else np.all(b > 0)
    x2, y2 = sample_global_pairs(1000, 2, regime, seed=4)
    assert np.array_equal(x[:1000], x2) and np.array_equal(y[:1000], y2)


def test_u_at_t0_on_kernel_sample_paths():
    x, y = sample_global_pairs(2000, 2, "b_gt_0", seed=1)
    _, b, t0, u0 = global_quantities_batch(x, y)
    u = np.array([u_of_t(a, c, s) for a, c, s in zip(x, y, t0)])
    assert np.all(np.abs(u - u0) <= 1e-8 * (1 + u0))


def test_bound_ratios_nondecreasing(F_z1):
    x, y = sample_global_pairs(2000, 2, "b_gt_0", seed=0)
    ratio, *_ = bound_ratios(x, y, F_z1, 2, 0.1)
    running = np.maximum.accumulate(ratio)
    assert np.all(np.diff(running) >= 0) and np.isfinite(running[-1])


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
@settings(max_examples=30, deadline=None)
def test_bound_log_regimes(a, c):
    x = np.array([[3 * a, 0.0]])
    y = np.array([[-3.0, 3 * c]])
    lb, b = bound_log(x, y, 0.3)
    assert b[0] < 0
    assert lb[0] == pytest.approx(-np.sum(y**2) + 0.3 * np.sum(x**2))

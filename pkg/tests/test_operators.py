import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.legendre import leggauss

from gaussvarlp.errors import PreconditionError
from gaussvarlp.exponents import constant_exponent, radial_rational_exponent
from gaussvarlp.fields import (FieldSum, ball_indicator, constant_field, gaussian_bump,
                               hermite_field)
from gaussvarlp.kernels import (ALTERNATIVE, GENERAL, expression_profile, hermite_profile,
                                kernel_values)
from gaussvarlp.operators import (OperatorSpec, apply, apply_global, apply_local,
                                  distribution_function, evaluate, gaussian_l1_norm,
                                  operator_norm_estimate, standard_family)
from gaussvarlp.quadrature import gauss_hermite_tensor, truncated_uniform

# y-first polar Gauss-Legendre 48 x 96 over the ball with kernel_eval; the
# ball lies in the global region of x = 0, so no diagonal is involved
BALL_ORACLE_ALT = -1.3124893813e-05


def ball_kernel_oracle(x, center, radius, F, m, variant, nr=32, na=64):
    """int_B K(x, y) dy by polar Gauss-Legendre about the ball centre.

    The kernel is taken against Lebesgue measure: its ``exp(-u)`` factor is
    the Mehler density of the Ornstein-Uhlenbeck semigroup.
    """
    u, wu = leggauss(nr)
    v, wv = leggauss(na)
    r = 0.5 * radius * (u + 1)
    th = math.pi * (v + 1)
    R, T = np.meshgrid(r, th, indexing="ij")
    y = np.stack([center[0] + R * np.cos(T), center[1] + R * np.sin(T)], -1).reshape(-1, 2)
    k = kernel_values(np.broadcast_to(x, y.shape), y, F, m, variant)
    w = np.outer(0.5 * radius * wu, math.pi * wv).ravel() * R.ravel()
    return float(np.sum(k * w))


def test_ball_against_frozen_oracle(alt_spec):
    f = ball_indicator((3.0, 0.0), 0.5)
    val = apply(alt_spec, f, np.zeros(2))
    assert val == pytest.approx(BALL_ORACLE_ALT, rel=1e-6)
    assert apply_local(alt_spec, f, np.zeros(2)) == 0.0


@pytest.mark.parametrize("variant", [ALTERNATIVE, GENERAL])
@pytest.mark.parametrize("x", [(0.0, 0.0), (0.5, -0.3), (-0.2, 0.4)])
def test_global_ball_against_kernel_oracle(F_z1, variant, x):
    spec = OperatorSpec(variant, F_z1, 2, 2)
    f = ball_indicator((3.0, 0.0), 0.5)
    ref = ball_kernel_oracle(np.asarray(x), (3.0, 0.0), 0.5, F_z1, 2, variant)
    assert apply(spec, f, np.asarray(x)) == pytest.approx(ref, rel=1e-5, abs=1e-12)


def test_general_annihilates_constants(gen_spec, rng):
    X = rng.standard_normal((10, 2)) * 2
    assert np.max(np.abs(apply(gen_spec, constant_field(1.0, 2), X))) < 1e-10


@pytest.mark.parametrize("field", [hermite_field((2, 0)), hermite_field((2, 2), kappa=0.3),
                                   ball_indicator((0.0, 0.0), 1.0),
                                   gaussian_bump((0.0, 0.0), 0.5)],
                         ids=["H20", "H22g", "ball", "bump"])
def test_odd_profile_even_field_vanishes_at_origin(alt_spec, field):
    assert abs(apply(alt_spec, field, np.zeros(2))) < 1e-10


def _random_field(rng):
    kind = rng.integers(3)
    c = rng.uniform(-2, 2, 2)
    if kind == 0:
        return hermite_field(tuple(rng.integers(0, 3, 2)), kappa=float(rng.uniform(0, 0.5)),
                             center=c)
    if kind == 1:
        return gaussian_bump(c, float(rng.uniform(0.2, 1.0)))
    return ball_indicator(c, float(rng.uniform(0.3, 1.5)))


def test_local_plus_global_is_full(F_z1, F_z1z2, rng):
    for k in range(20):
        F = F_z1 if k % 2 else F_z1z2
        variant = ALTERNATIVE if k % 3 else GENERAL
        spec = OperatorSpec(variant, F, int(rng.integers(1, 4)), 2)
        f = _random_field(rng)
        x = rng.uniform(-2.5, 2.5, 2)
        full = apply(spec, f, x)
        parts = apply_local(spec, f, x) + apply_global(spec, f, x)
        assert parts == pytest.approx(full, abs=2 * spec.outer_tol * (1 + abs(full)))


@settings(max_examples=15, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_linearity(alt_spec, a, b):
    f, g = hermite_field((1, 1)), gaussian_bump((1.0, -0.5), 0.4)
    X = np.array([[0.3, 0.2], [-1.0, 1.5]])
    lhs = apply(alt_spec, FieldSum([f.scaled(a), g.scaled(b)]), X)
    rhs = a * apply(alt_spec, f, X) + b * apply(alt_spec, g, X)
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)), rtol=1e-10)


def test_error_estimate_small_for_smooth_fields(alt_spec, rng):
    res = evaluate(alt_spec, hermite_field((2, 1)), rng.standard_normal((8, 2)))
    assert res.flags == ()
    assert np.all(res.error_estimate < alt_spec.outer_tol * (1 + np.abs(res.values)))


def test_evaluate_rejects_bad_input(alt_spec):
    with pytest.raises(PreconditionError):
        evaluate(alt_spec, hermite_field((1, 0)), np.zeros((3, 3)))
    with pytest.raises(PreconditionError):
        evaluate(alt_spec, hermite_field((1, 0)), np.zeros((1, 2)), part="middle")


def test_opnorm_is_scale_invariant(alt_spec):
    scheme = gauss_hermite_tensor(2, 24)
    fam = [hermite_field((1, 0)), hermite_field((2, 1)), gaussian_bump((1.0, 0.5), 0.3)]
    for p in (constant_exponent(2.0), radial_rational_exponent(2.0, 1.0)):
        one = operator_norm_estimate(alt_spec, p, fam, scheme)
        five = operator_norm_estimate(alt_spec, p, [f.scaled(5.0) for f in fam], scheme)
        assert np.allclose(one.ratios, five.ratios, rtol=1e-8)
        assert one.max_ratio == pytest.approx(np.max(one.ratios))


def test_opnorm_of_constant_under_general_is_zero(gen_spec):
    scheme = gauss_hermite_tensor(2, 16)
    est = operator_norm_estimate(gen_spec, constant_exponent(2.0), [constant_field(1.0, 2)],
                                 scheme)
    assert est.max_ratio < 1e-8


def test_opnorm_rejects_zero_field(alt_spec):
    with pytest.raises(PreconditionError):
        operator_norm_estimate(alt_spec, constant_exponent(2.0), [constant_field(0.0, 2)],
                               gauss_hermite_tensor(2, 8))


def test_standard10_family():
    fam = standard_family()
    assert len(fam) == 10
    assert len({f.label for f in fam}) == 10
    with pytest.raises(PreconditionError):
        standard_family("other")
    with pytest.raises(PreconditionError):
        standard_family(d=3)


def test_gaussian_l1_norm_closed_form_and_grid():
    b = gaussian_bump((1.0, 0.5), 0.3)
    closed = gaussian_l1_norm(b)
    grid = gaussian_l1_norm(FieldSum([b, b.scaled(0.0)]), grid_n=801)
    assert closed == pytest.approx(grid, rel=1e-6)
    # int 1_B dgamma for the unit disc is 1 - e^{-1}
    assert gaussian_l1_norm(ball_indicator((0.0, 0.0), 1.0), grid_n=1601) == \
        pytest.approx(1 - math.exp(-1), abs=2e-3)


def test_distribution_function_monotone(alt_spec):
    grid = truncated_uniform(2, 5.0, 48)
    lambdas = np.geomspace(1e-3, 10, 12)
    rep = distribution_function(alt_spec, gaussian_bump((1.0, 0.0), 0.3), lambdas, grid)
    assert np.all(np.diff(rep.measures) <= 0)
    assert np.all((rep.measures >= 0) & (rep.measures <= 1))
    assert rep.sup_weak_ratio == pytest.approx(np.max(lambdas * rep.measures / rep.l1_norm))


def test_distribution_of_zero_field(alt_spec):
    grid = truncated_uniform(2, 5.0, 16)
    rep = distribution_function(alt_spec, constant_field(0.0, 2), [0.1, 1.0], grid)
    assert np.all(rep.measures == 0) and rep.sup_weak_ratio == 0


def test_distribution_rejects_lebesgue_grid_and_bad_lambdas(alt_spec):
    f = gaussian_bump((1.0, 0.0), 0.3)
    with pytest.raises(PreconditionError):
        distribution_function(alt_spec, f, [0.0, 1.0], truncated_uniform(2, 5.0, 8))
    lebesgue = truncated_uniform(2, 5.0, 8, measure="lebesgue")
    with pytest.raises(PreconditionError):
        distribution_function(alt_spec, f, [1.0], lebesgue)


def test_spec_validation(F_z1):
    with pytest.raises(PreconditionError):
        OperatorSpec("other", F_z1, 2, 2)
    with pytest.raises(PreconditionError):
        OperatorSpec(ALTERNATIVE, F_z1, 0, 2)
    with pytest.raises(PreconditionError):
        OperatorSpec(ALTERNATIVE, hermite_profile([[1]], [1.0], 1), 2, 1)
    with pytest.raises(PreconditionError):
        OperatorSpec(ALTERNATIVE, hermite_profile([[1, 0, 0]], [1.0], 3), 2, 2)
    with pytest.raises(PreconditionError):
        # x1^2 has nonzero Gaussian mean
        OperatorSpec(GENERAL, expression_profile("x1**2", 2), 2, 2)
    assert OperatorSpec(GENERAL, F_z1, 1, 2).scale_const == 2.0

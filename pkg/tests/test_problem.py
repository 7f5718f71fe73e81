import numpy as np
import pytest

from fracadi.meshes import SpatialMesh
from fracadi.problem import (
    ProblemSpec,
    SpecValidationError,
    inverse_transform,
    multiplier_grid,
    transform,
    validate_spec,
)


def _spec(lambda1=1.0, lambda2=1.0, mu1=0.0, mu2=0.0, gamma=0.0, alpha=0.5,
          f=None, phi=None, psi=None):
    zero3 = lambda x, y, t: np.zeros(np.broadcast(x, y).shape)
    zero2 = lambda x, y: np.zeros(np.broadcast(x, y).shape)
    return ProblemSpec(
        lambda1=lambda1, lambda2=lambda2, mu1=mu1, mu2=mu2, gamma=gamma,
        alpha=alpha, L=1.0, Tf=1.0,
        f=f or zero3, phi=phi or zero2, psi=psi or zero3,
    )


def test_validate_beta_zero_boundary_case():
    spec = _spec()
    assert validate_spec(spec) is spec


def test_validate_rejects_negative_beta():
    with pytest.raises(SpecValidationError, match="mu1"):
        validate_spec(_spec(mu1=2.0, gamma=2.0))


def test_validate_rejects_nonpositive_diffusion():
    with pytest.raises(SpecValidationError, match="lambda1"):
        validate_spec(_spec(lambda1=0.0))


def test_validate_rejects_alpha_out_of_range():
    with pytest.raises(SpecValidationError, match="alpha"):
        validate_spec(_spec(alpha=1.5))


def test_transform_identity_without_convection():
    tp = transform(_spec(gamma=-0.3))
    x = np.linspace(0.0, 1.0, 7)
    np.testing.assert_array_equal(tp.P(x), np.ones(7))
    np.testing.assert_array_equal(tp.Q(x), np.ones(7))
    assert tp.beta == 0.3  # beta = -gamma when mu1 = mu2 = 0


def test_transform_direct_arithmetic():
    tp = transform(_spec(mu1=2.0, mu2=2.0))
    assert tp.beta == pytest.approx(2.0, rel=1e-15)
    x = np.linspace(0.0, 1.0, 5)
    np.testing.assert_allclose(tp.P(x), np.exp(x), rtol=1e-15)
    assert tp.P(0.0) == 1.0
    assert tp.Q(0.0) == 1.0


def test_transform_source_multiplier():
    one = lambda x, y, t: np.ones(np.broadcast(x, y).shape)
    tp = transform(_spec(mu1=2.0, f=one))
    x = np.linspace(0.0, 1.0, 6)[:, None]
    y = np.linspace(0.0, 1.0, 4)[None, :]
    np.testing.assert_allclose(tp.F(x, y, 0.3), np.exp(x) * np.ones((6, 4)), rtol=1e-15)


def test_source_ratio_equals_multiplier():
    f = lambda x, y, t: 1.0 + x * y + np.sin(t) * x
    spec = _spec(mu1=1.2, mu2=-0.7, lambda1=0.8, lambda2=1.5, gamma=-1.0, f=f)
    tp = transform(validate_spec(spec))
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y, t = rng.uniform(0.01, 1.0, 3)
        ratio = tp.F(x, y, t) / f(x, y, t)
        np.testing.assert_allclose(ratio, tp.P(x) * tp.Q(y), rtol=1e-13)


def test_beta_nonnegative_whenever_valid():
    rng = np.random.default_rng(1)
    accepted = 0
    for _ in range(200):
        spec = _spec(
            lambda1=rng.uniform(0.1, 3.0), lambda2=rng.uniform(0.1, 3.0),
            mu1=rng.uniform(-3, 3), mu2=rng.uniform(-3, 3), gamma=rng.uniform(-3, 3),
        )
        try:
            validate_spec(spec)
        except SpecValidationError:
            continue
        accepted += 1
        assert transform(spec).beta >= 0.0
    assert accepted > 20


def test_inverse_transform_identity_without_convection():
    tp = transform(_spec())
    sm = SpatialMesh(5, 5, 1.0)
    rng = np.random.default_rng(2)
    field = rng.standard_normal(sm.shape)
    np.testing.assert_array_equal(inverse_transform(tp, field, sm), field)


def test_inverse_transform_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(10):
        spec = _spec(
            lambda1=rng.uniform(0.2, 2.0), lambda2=rng.uniform(0.2, 2.0),
            mu1=rng.uniform(-2, 2), mu2=rng.uniform(-2, 2), gamma=-rng.uniform(0, 2),
        )
        tp = transform(validate_spec(spec))
        sm = SpatialMesh(int(rng.integers(2, 12)), int(rng.integers(2, 12)), 1.0)
        field = rng.standard_normal(sm.shape)
        back = inverse_transform(tp, field * multiplier_grid(tp, sm), sm)
        np.testing.assert_allclose(back, field, rtol=1e-14, atol=1e-16)


def test_inverse_transform_exponential_field():
    tp = transform(_spec(mu1=2.0))
    sm = SpatialMesh(6, 6, 1.0)
    field = np.exp(sm.x)[:, None] * np.ones(sm.shape)
    np.testing.assert_allclose(inverse_transform(tp, field, sm), 1.0, rtol=1e-14)


def test_inverse_transform_shape_check():
    tp = transform(_spec())
    with pytest.raises(ValueError, match="shape"):
        inverse_transform(tp, np.zeros((3, 3)), SpatialMesh(4, 4, 1.0))

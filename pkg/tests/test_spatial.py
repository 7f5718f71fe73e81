import numpy as np
import pytest

from fracadi.meshes import SpatialMesh
from fracadi.spatial import (
    TridiagonalPivotError,
    TridiagonalSystem,
    apply_dxx,
    apply_dyy,
    apply_hx,
    apply_hy,
    is_strictly_dominant,
    solve_tridiagonal,
)


def grid_field(sm, fn):
    return fn(sm.x[:, None], sm.y[None, :]) * np.ones(sm.shape)


def test_compact_preserves_constants():
    sm = SpatialMesh(8, 6, 1.0)
    field = np.full(sm.shape, 3.25)
    np.testing.assert_array_equal(apply_hx(field, sm), field)
    np.testing.assert_array_equal(apply_hy(field, sm), field)


def test_compact_preserves_linears():
    sm = SpatialMesh(8, 8, 2.0)
    field = grid_field(sm, lambda x, y: x)
    np.testing.assert_allclose(apply_hx(field, sm), field, rtol=0, atol=1e-15)


def test_compact_quadratic_shift():
    sm = SpatialMesh(8, 8, 1.0)
    field = grid_field(sm, lambda x, y: x * x)
    out = apply_hx(field, sm)
    np.testing.assert_allclose(out[1:-1, :], field[1:-1, :] + sm.hx**2 / 6.0, rtol=1e-13)
    np.testing.assert_array_equal(out[0, :], field[0, :])
    np.testing.assert_array_equal(out[-1, :], field[-1, :])


def test_second_diff_annihilates_linears():
    sm = SpatialMesh(10, 10, 1.0)
    field = grid_field(sm, lambda x, y: 2.0 * x - 0.5)
    out = apply_dxx(field, sm)
    np.testing.assert_allclose(out, 0.0, atol=1e-12)


def test_second_diff_quadratic_exact():
    sm = SpatialMesh(8, 8, 1.0)
    field = grid_field(sm, lambda x, y: x * x)
    out = apply_dxx(field, sm)
    np.testing.assert_allclose(out[1:-1, :], 2.0, rtol=0, atol=1e-11)
    np.testing.assert_array_equal(out[0, :], 0.0)
    np.testing.assert_array_equal(out[-1, :], 0.0)


def test_second_diff_sine_taylor_bound():
    L = 1.0
    sm = SpatialMesh(32, 4, L)
    w = np.pi / L
    field = grid_field(sm, lambda x, y: np.sin(w * x))
    out = apply_dxx(field, sm)
    exact = -(w**2) * np.sin(w * sm.x)[:, None] * np.ones(sm.shape)
    err = np.max(np.abs(out[1:-1, :] - exact[1:-1, :]))
    assert err <= 1.05 * w**4 * sm.hx**2 / 12.0


def test_dyy_symmetric_to_dxx():
    sm = SpatialMesh(7, 7, 1.0)
    rng = np.random.default_rng(0)
    field = rng.standard_normal(sm.shape)
    np.testing.assert_array_equal(apply_dyy(field, sm), apply_dxx(field.T, sm).T)


def test_compact_and_diff_commute_on_interior_fields():
    sm = SpatialMesh(12, 9, 1.0)
    rng = np.random.default_rng(1)
    field = rng.standard_normal(sm.shape)
    field[0, :] = field[-1, :] = 0.0
    a = apply_hx(apply_dxx(field, sm), sm)
    b = apply_dxx(apply_hx(field, sm), sm)
    scale = np.max(np.abs(a))
    assert np.max(np.abs(a - b)) <= 1e-13 * max(scale, 1.0)


def test_dimension_mismatch_raises():
    sm = SpatialMesh(4, 4, 1.0)
    with pytest.raises(ValueError, match="shape"):
        apply_hx(np.zeros((3, 5)), sm)


def test_tridiagonal_identity():
    rhs = np.array([1.0, -2.0, 3.5])
    system = TridiagonalSystem(np.zeros(2), np.ones(3), np.zeros(2), rhs)
    np.testing.assert_array_equal(solve_tridiagonal(system), rhs)


def test_tridiagonal_3x3_against_dense():
    sub = np.array([-1.0, -1.0])
    diag = np.array([4.0, 4.0, 4.0])
    sup = np.array([-1.0, -1.0])
    rhs = np.array([1.0, 0.0, 1.0])
    x = solve_tridiagonal(TridiagonalSystem(sub, diag, sup, rhs))
    dense = np.diag(diag) + np.diag(sub, -1) + np.diag(sup, 1)
    np.testing.assert_allclose(x, np.linalg.solve(dense, rhs), rtol=1e-14)


def test_tridiagonal_random_dominant_systems():
    rng = np.random.default_rng(2)
    for n in (10, 100, 200):
        sub = rng.uniform(-1.0, 1.0, n - 1)
        sup = rng.uniform(-1.0, 1.0, n - 1)
        diag = np.empty(n)
        for j in range(n):
            off = (abs(sub[j - 1]) if j > 0 else 0.0) + (abs(sup[j]) if j < n - 1 else 0.0)
            diag[j] = (off + rng.uniform(0.5, 2.0)) * rng.choice([-1.0, 1.0])
        rhs = rng.standard_normal(n)
        x = solve_tridiagonal(TridiagonalSystem(sub, diag, sup, rhs))
        dense = np.diag(diag) + np.diag(sub, -1) + np.diag(sup, 1)
        np.testing.assert_allclose(x, np.linalg.solve(dense, rhs), rtol=0, atol=1e-12)
        resid = np.max(np.abs(dense @ x - rhs))
        scale = np.max(np.abs(dense).sum(axis=1)) * np.max(np.abs(x)) + np.max(np.abs(rhs))
        assert resid <= 1e-12 * scale


def test_near_zero_pivot_reported():
    system = TridiagonalSystem(np.array([1.0]), np.array([1.0, 1.0]), np.array([1.0]), np.ones(2))
    with pytest.raises(TridiagonalPivotError, match="pivot"):
        solve_tridiagonal(system)


def test_system_shape_validation():
    with pytest.raises(ValueError):
        TridiagonalSystem(np.zeros(3), np.ones(3), np.zeros(2), np.ones(3))


def test_adi_row_dominance_for_positive_r():
    for r in (1e-8, 1.0 / 12.0, 0.3, 100.0):
        n = 6
        sub = np.full(n - 1, 1.0 / 12.0 - r)
        diag = np.full(n, 10.0 / 12.0 + 2.0 * r)
        assert is_strictly_dominant(sub, diag, sub)

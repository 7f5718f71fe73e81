import numpy as np
import pytest

from fracadi.meshes import (
    ETA_MAX,
    ETA_MIN,
    MeshError,
    SpatialMesh,
    TemporalMesh,
    build_fitted_mesh,
    local_ratios,
    random_admissible_mesh,
    t_sigma,
)


def test_uniform_degenerate_points():
    mesh = build_fitted_mesh(4, theta=1.0, tf=1.0, alpha=0.5)
    np.testing.assert_array_equal(mesh.points, [0.0, 0.25, 0.5, 0.75, 1.0])


def test_graded_theta2_points():
    mesh = build_fitted_mesh(4, theta=2.0, tf=1.0, alpha=0.5)
    np.testing.assert_array_equal(mesh.points, [0.0, 1 / 16, 1 / 4, 9 / 16, 1.0])


def test_graded_first_ratio_theta2():
    mesh = build_fitted_mesh(4, theta=2.0, tf=1.0, alpha=0.5)
    assert local_ratios(mesh)[0] == pytest.approx(3.0, rel=1e-15)


def test_local_ratios_uniform_all_one():
    mesh = build_fitted_mesh(9, theta=1.0, tf=2.0, alpha=0.3)
    np.testing.assert_allclose(local_ratios(mesh), 1.0, rtol=1e-13)


def test_local_ratios_theta2_closed_form():
    mesh = build_fitted_mesh(8, theta=2.0, tf=1.0, alpha=0.4)
    i = np.arange(1, 8)
    np.testing.assert_allclose(local_ratios(mesh), (2 * i + 1) / (2 * i - 1), rtol=1e-12)


def test_theta3_first_ratio_is_seven():
    mesh = build_fitted_mesh(8, theta=3.0, tf=1.0, alpha=0.5)
    assert local_ratios(mesh)[0] == pytest.approx(7.0, rel=1e-12)


def test_t_sigma_uniform():
    mesh = build_fitted_mesh(4, theta=1.0, tf=1.0, alpha=0.5)
    assert mesh.sigma == 0.75
    assert t_sigma(mesh, 0) == pytest.approx(0.1875, abs=1e-16)


def test_t_sigma_near_one_limit():
    # sigma -> 1 as alpha -> 0, so t_{i+sigma} -> t_{i+1}
    mesh = build_fitted_mesh(4, theta=1.0, tf=1.0, alpha=1e-12)
    assert t_sigma(mesh, 2) == pytest.approx(mesh.points[3], rel=1e-12)


def test_t_sigma_graded_example():
    mesh = build_fitted_mesh(4, theta=2.0, tf=1.0, alpha=0.5)
    assert t_sigma(mesh, 1) == pytest.approx(0.203125, abs=1e-16)


def test_t_sigma_index_range():
    mesh = build_fitted_mesh(4, theta=1.0, tf=1.0, alpha=0.5)
    with pytest.raises(IndexError):
        t_sigma(mesh, 4)
    with pytest.raises(IndexError):
        t_sigma(mesh, -1)


def test_ratio_violation_reports_first_index():
    # theta = 6 gives eta_1 = 2^6 - 1 = 63 > 62
    with pytest.raises(MeshError, match="eta_1"):
        build_fitted_mesh(8, theta=6.0, tf=1.0, alpha=0.5)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(nt=4, theta=1.0, T=2.0, tf=1.0, alpha=0.5),      # T > tf
        dict(nt=4, nhat=8, theta=1.0, tf=1.0, alpha=0.5),     # nhat > nt
        dict(nt=4, nhat=4, theta=1.0, T=0.5, tf=1.0, alpha=0.5),  # tail needs nhat < nt
        dict(nt=4, theta=1.0, tf=1.0, alpha=1.5),             # alpha out of range
        dict(nt=4, theta=0.5, tf=1.0, alpha=0.5),             # theta < 1
        dict(nt=8, nhat=2, theta=1.0, T=0.25, tf=1.0, alpha=0.5),  # below graded fraction
    ],
)
def test_parameter_inconsistencies(kwargs):
    with pytest.raises(MeshError):
        build_fitted_mesh(**kwargs)


def test_split_mesh_structure():
    mesh = build_fitted_mesh(8, nhat=4, theta=2.0, T=0.5, tf=1.0, alpha=0.5)
    assert mesh.points[0] == 0.0
    assert mesh.points[4] == 0.5
    assert mesh.points[8] == 1.0
    assert np.all(np.diff(mesh.points) > 0)
    # tail is exactly uniform
    np.testing.assert_allclose(np.diff(mesh.points[4:]), 0.125, rtol=1e-14)
    ratios = local_ratios(mesh)
    assert np.all((ratios >= ETA_MIN) & (ratios <= ETA_MAX))


def test_graded_width_bound_uniform_in_nt():
    # tau_{i+1} <= C * tf * nt^-theta * i^(theta-1) with C = theta * 2^(theta-1)
    theta, tf = 2.0, 1.0
    for nt in (16, 64, 256, 512):
        mesh = build_fitted_mesh(nt, theta=theta, tf=tf, alpha=0.5)
        i = np.arange(1, nt)
        ratio = mesh.tau[1:] / (tf * nt ** (-theta) * i ** (theta - 1.0))
        assert ratio.max() <= theta * 2 ** (theta - 1.0) + 1e-9


def test_doubling_nt_nearly_halves_max_width():
    for theta in (1.0, 2.0, 3.0):
        for nt in (16, 64, 256):
            coarse = build_fitted_mesh(nt, theta=theta, tf=1.0, alpha=0.5)
            fine = build_fitted_mesh(2 * nt, theta=theta, tf=1.0, alpha=0.5)
            ratio = fine.tau.max() / coarse.tau.max()
            assert ratio <= 0.5 + theta / nt


def test_random_admissible_mesh_ratios():
    rng = np.random.default_rng(5)
    for _ in range(50):
        mesh = random_admissible_mesh(rng, int(rng.integers(3, 20)), alpha=0.5, tf=2.0)
        assert mesh.points[0] == 0.0
        assert mesh.points[-1] == 2.0
        ratios = local_ratios(mesh)
        assert np.all((ratios >= ETA_MIN) & (ratios <= ETA_MAX))


def test_from_points_validation():
    with pytest.raises(MeshError):
        TemporalMesh.from_points([0.0, 0.5, 0.4], alpha=0.5)
    with pytest.raises(MeshError):
        TemporalMesh.from_points([0.1, 0.5, 1.0], alpha=0.5)
    with pytest.raises(MeshError):
        TemporalMesh.from_points([0.0, 1.0], alpha=1.2)


def test_mesh_immutability():
    mesh = build_fitted_mesh(4, theta=1.0, tf=1.0, alpha=0.5)
    with pytest.raises(ValueError):
        mesh.points[0] = 1.0
    with pytest.raises(ValueError):
        mesh.tau[0] = 1.0


def test_spatial_mesh_nodes():
    sm = SpatialMesh(4, 8, 2.0)
    assert sm.hx == 0.5
    assert sm.hy == 0.25
    assert sm.hx * sm.mx == pytest.approx(sm.L, rel=1e-15)
    np.testing.assert_allclose(sm.x, np.arange(5) * 0.5, rtol=1e-15)
    assert sm.shape == (5, 9)


def test_spatial_mesh_validation():
    with pytest.raises(MeshError):
        SpatialMesh(1, 4, 1.0)
    with pytest.raises(MeshError):
        SpatialMesh(4, 4, -1.0)

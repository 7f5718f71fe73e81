import numpy as np
import pytest

from fracadi import _kernels as K

needs_compiled = pytest.mark.skipif(
    "compiled" not in K.available_backends(), reason="compiled kernels not built"
)


@pytest.fixture
def restore_backend():
    saved = K.active_backend()
    yield
    K.set_backend(saved)


def _random_inputs(seed=0):
    rng = np.random.default_rng(seed)
    field = rng.standard_normal((17, 13))
    fields = [rng.standard_normal((9, 11)) for _ in range(7)]
    coeffs = rng.standard_normal(7)
    n = 12
    sub = rng.uniform(0.05, 0.2, n - 1)
    sup = rng.uniform(0.05, 0.2, n - 1)
    diag = rng.uniform(1.0, 2.0, n)
    rhs = rng.standard_normal((n, 5))
    return field, fields, coeffs, sub, diag, sup, rhs


@needs_compiled
def test_backends_bitwise_identical(restore_backend):
    field, fields, coeffs, sub, diag, sup, rhs = _random_inputs()
    results = {}
    for backend in ("python", "compiled"):
        K.set_backend(backend)
        results[backend] = (
            K.compact_x(field),
            K.compact_y(field),
            K.second_diff_x(field, 0.05),
            K.second_diff_y(field, 0.07),
            K.weighted_compact_sum(fields, coeffs),
            K.thomas_solve_many(sub, diag, sup, rhs),
        )
    for a, b in zip(results["python"], results["compiled"]):
        np.testing.assert_array_equal(a, b)


def test_backend_deterministic(restore_backend):
    field, fields, coeffs, *_ = _random_inputs(3)
    first = K.weighted_compact_sum(fields, coeffs)
    second = K.weighted_compact_sum(fields, coeffs)
    np.testing.assert_array_equal(first, second)


@needs_compiled
def test_full_solve_backend_parity(restore_backend):
    from fracadi import SpatialMesh, build_fitted_mesh, solve
    from fracadi.verification import manufactured_singular

    problem = manufactured_singular(0.5)
    tmesh = build_fitted_mesh(10, theta=3.0, tf=1.0, alpha=0.5)
    smesh = SpatialMesh(8, 8, 1.0)
    outs = {}
    for backend in ("python", "compiled"):
        K.set_backend(backend)
        outs[backend] = solve(problem.spec, tmesh, smesh)[0]
    np.testing.assert_array_equal(outs["python"], outs["compiled"])


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError, match="unknown backend"):
        K.set_backend("fortran")


def test_active_backend_is_available():
    assert K.active_backend() in K.available_backends()


def test_kernel_input_validation():
    with pytest.raises(ValueError):
        K.compact_x(np.zeros(5))
    with pytest.raises(ValueError):
        K.weighted_compact_sum([np.zeros((3, 3))], np.zeros(2))
    with pytest.raises(ValueError):
        K.thomas_solve_many(np.zeros(1), np.ones(3), np.zeros(2), np.ones((3, 2)))


def test_thomas_single_unknown():
    out = K.thomas_solve_many(np.empty(0), np.array([2.0]), np.empty(0), np.array([[4.0, 6.0]]))
    np.testing.assert_array_equal(out, [[2.0, 3.0]])

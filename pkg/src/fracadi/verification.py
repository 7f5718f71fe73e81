"""Manufactured solutions, discrete error norms, and convergence-order studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import adi
from .meshes import SpatialMesh, build_fitted_mesh
from .problem import ProblemSpec


@dataclass(frozen=True)
class Coefficients:
    """Coefficient set shared by the built-in manufactured problems."""

    lambda1: float = 1.0
    lambda2: float = 1.0
    mu1: float = 1.0
    mu2: float = 1.0
    gamma: float = 0.0


@dataclass
class ManufacturedProblem:
    """Exact solution plus the spec whose source term makes it exact.

    ``time_factor`` T(t) and ``spatial_factor`` S(x, y) satisfy
    u(x, y, t) = T(t) * S(x, y); ``caputo_time_factor`` is the analytic Caputo
    derivative of T, and ``time_factor_prime`` its first derivative (used by
    the quadrature residual check).
    """

    name: str
    exact_u: Callable
    spec: ProblemSpec
    singular: bool
    time_factor: Callable
    time_factor_prime: Callable
    caputo_time_factor: Callable
    spatial_factor: Callable


def _sine_product_problem(
    name: str,
    alpha: float,
    L: float,
    tf: float,
    coeffs: Coefficients,
    tfun: Callable,
    tfun_prime: Callable,
    caputo_tfun: Callable,
    singular: bool,
) -> ManufacturedProblem:
    c = coeffs
    w = math.pi / L

    def S(x, y):
        return np.sin(w * x) * np.sin(w * y)

    def S_x(x, y):
        return w * np.cos(w * x) * np.sin(w * y)

    def S_y(x, y):
        return w * np.sin(w * x) * np.cos(w * y)

    # S_xx = S_yy = -w^2 S
    def exact_u(x, y, t):
        return tfun(t) * S(x, y)

    def f(x, y, t):
        spatial = (
            -(c.lambda1 + c.lambda2) * w * w * S(x, y)
            + c.mu1 * S_x(x, y)
            + c.mu2 * S_y(x, y)
            + c.gamma * S(x, y)
        )
        return caputo_tfun(t) * S(x, y) - tfun(t) * spatial

    def phi(x, y):
        return exact_u(x, y, 0.0)

    def psi(x, y, t):
        return exact_u(x, y, t)

    spec = ProblemSpec(
        lambda1=c.lambda1,
        lambda2=c.lambda2,
        mu1=c.mu1,
        mu2=c.mu2,
        gamma=c.gamma,
        alpha=alpha,
        L=L,
        Tf=tf,
        f=f,
        phi=phi,
        psi=psi,
    )
    return ManufacturedProblem(
        name=name,
        exact_u=exact_u,
        spec=spec,
        singular=singular,
        time_factor=tfun,
        time_factor_prime=tfun_prime,
        caputo_time_factor=caputo_tfun,
        spatial_factor=S,
    )


def manufactured_singular(
    alpha: float, L: float = 1.0, tf: float = 1.0, coeffs: Coefficients | None = None
) -> ManufacturedProblem:
    """u = (1 + t^alpha) sin(pi x / L) sin(pi y / L); u_t blows up like t^(alpha-1)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    c = coeffs if coeffs is not None else Coefficients()
    g1a = math.gamma(1.0 + alpha)

    def tfun(t):
        return 1.0 + t**alpha

    def tfun_prime(t):
        return alpha * t ** (alpha - 1.0)

    def caputo_tfun(t):
        # Caputo of t^alpha is Gamma(1+alpha); constants drop out
        return g1a + 0.0 * np.asarray(t, dtype=float)

    return _sine_product_problem(
        "singular", alpha, L, tf, c, tfun, tfun_prime, caputo_tfun, singular=True
    )


def manufactured_smooth(
    alpha: float, L: float = 1.0, tf: float = 1.0, coeffs: Coefficients | None = None
) -> ManufacturedProblem:
    """u = (1 + t^2) sin(pi x / L) sin(pi y / L); control case without the singularity."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    c = coeffs if coeffs is not None else Coefficients()
    g3a = math.gamma(3.0 - alpha)

    def tfun(t):
        return 1.0 + t * t

    def tfun_prime(t):
        return 2.0 * t

    def caputo_tfun(t):
        return 2.0 * np.asarray(t, dtype=float) ** (2.0 - alpha) / g3a

    return _sine_product_problem(
        "smooth", alpha, L, tf, c, tfun, tfun_prime, caputo_tfun, singular=False
    )


BUILTIN_PROBLEMS = {
    "singular": manufactured_singular,
    "smooth": manufactured_smooth,
}


def get_problem(name, alpha, L=1.0, tf=1.0, coeffs=None) -> ManufacturedProblem:
    if name not in BUILTIN_PROBLEMS:
        raise ValueError(f"unknown problem {name!r}; available: {sorted(BUILTIN_PROBLEMS)}")
    return BUILTIN_PROBLEMS[name](alpha, L, tf, coeffs)


# ---------------------------------------------------------------------------
# quadrature residual check

def caputo_quadrature(gprime, alpha: float, t: float, *, epsabs=1e-13, epsrel=1e-11) -> float:
    """Caputo derivative of order alpha at t by singularity-aware quadrature.

    Splits [0, t] at t/2; the left piece absorbs a possible t^(alpha-1) blowup
    of gprime through the substitution s = y^(1/alpha), the right piece removes
    the kernel singularity through z = (t - s)^(1-alpha).
    """
    from scipy.integrate import quad

    if t <= 0:
        raise ValueError("t must be positive")

    inv_alpha = 1.0 / alpha
    one_m_alpha = 1.0 - alpha

    def left(y):
        s = y**inv_alpha
        return (t - s) ** (-alpha) * gprime(s) * inv_alpha * y ** (inv_alpha - 1.0)

    def right(z):
        s = t - z ** (1.0 / one_m_alpha)
        return gprime(s) / one_m_alpha

    half = 0.5 * t
    i1, _ = quad(left, 0.0, half**alpha, epsabs=epsabs, epsrel=epsrel, limit=200)
    i2, _ = quad(right, 0.0, half**one_m_alpha, epsabs=epsabs, epsrel=epsrel, limit=200)
    return (i1 + i2) / math.gamma(1.0 - alpha)


def residual_at(problem: ManufacturedProblem, x: float, y: float, t: float) -> float:
    """PDE residual of the exact solution with the derived source, Caputo by quadrature."""
    c = problem.spec
    S = problem.spatial_factor
    caputo = caputo_quadrature(problem.time_factor_prime, c.alpha, t) * S(x, y)
    w = math.pi / c.L
    T = problem.time_factor(t)
    u = T * S(x, y)
    u_xx = -T * w * w * S(x, y)
    u_yy = u_xx
    u_x = T * w * math.cos(w * x) * math.sin(w * y)
    u_y = T * w * math.sin(w * x) * math.cos(w * y)
    rhs = (
        c.lambda1 * u_xx
        + c.lambda2 * u_yy
        + c.mu1 * u_x
        + c.mu2 * u_y
        + c.gamma * u
        + c.f(x, y, t)
    )
    return caputo - rhs


# ---------------------------------------------------------------------------
# norms and orders

def error_norms(numeric: np.ndarray, exact, t: float, smesh: SpatialMesh):
    """(discrete L2 over interior, max over all nodes) of numeric - exact(t)."""
    numeric = np.asarray(numeric, dtype=float)
    if numeric.shape != smesh.shape:
        raise ValueError(f"field shape {numeric.shape} does not match mesh {smesh.shape}")
    exact_field = np.asarray(exact(smesh.x[:, None], smesh.y[None, :], t), dtype=float)
    diff = numeric - np.broadcast_to(exact_field, smesh.shape)
    l2 = adi.interior_l2(diff, smesh)
    return l2, float(np.max(np.abs(diff)))


def predicted_temporal_order(alpha: float, theta: float) -> float:
    """min(3 - alpha, theta*alpha, 1 + 2*alpha, 2 + alpha)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if theta < 1.0:
        raise ValueError(f"theta must be >= 1, got {theta}")
    return min(3.0 - alpha, theta * alpha, 1.0 + 2.0 * alpha, 2.0 + alpha)


PREDICTED_SPATIAL_ORDER = 4.0


@dataclass
class LevelResult:
    param: int
    l2_error: float
    max_error: float
    observed_order: float | None


@dataclass
class ConvergenceReport:
    axis: str
    problem: str
    predicted_order: float
    rows: list[LevelResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def finest_observed(self) -> float | None:
        return self.rows[-1].observed_order if self.rows else None

    def csv_text(self) -> str:
        lines = ["level,param,l2_error,max_error,observed_order,predicted_order"]
        for j, row in enumerate(self.rows):
            obs = "" if row.observed_order is None else format(row.observed_order, ".17g")
            lines.append(
                f"{j},{row.param},{format(row.l2_error, '.17g')},"
                f"{format(row.max_error, '.17g')},{obs},"
                f"{format(self.predicted_order, '.17g')}"
            )
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        obs = self.finest_observed()
        obs_text = "n/a" if obs is None else f"{obs:.4f}"
        return (
            f"axis={self.axis} problem={self.problem} "
            f"predicted_order={self.predicted_order:.4f} finest_observed={obs_text}"
        )


def convergence_study(
    problem: ManufacturedProblem,
    axis: str,
    levels,
    *,
    nt: int = 512,
    m: int = 64,
    theta: float = 1.0,
    split_time: float | None = None,
    graded_fraction: float = 0.5,
    check_subdominance: bool = True,
) -> ConvergenceReport:
    """Refine along one axis, record final-time errors and observed orders.

    For the temporal axis ``levels`` are time-interval counts at fixed spatial
    resolution m; for the spatial axis they are cell counts at fixed nt.  The
    subdominance guard re-runs the finest level with the frozen axis refined
    once and warns when the error moves by 5% or more.
    """
    if axis not in ("temporal", "spatial"):
        raise ValueError(f"axis must be 'temporal' or 'spatial', got {axis!r}")
    levels = [int(p) for p in levels]
    if len(levels) < 2:
        raise ValueError("need at least two refinement levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    spec = problem.spec

    def run(nt_run: int, m_run: int):
        if split_time is None:
            tmesh = build_fitted_mesh(nt_run, theta=theta, tf=spec.Tf, alpha=spec.alpha)
        else:
            nhat = max(1, round(graded_fraction * nt_run))
            tmesh = build_fitted_mesh(
                nt_run, nhat, theta=theta, T=split_time, tf=spec.Tf, alpha=spec.alpha
            )
        smesh = SpatialMesh(m_run, m_run, spec.L)
        u_final = adi.solve(spec, tmesh, smesh)[0]
        return error_norms(u_final, problem.exact_u, spec.Tf, smesh)

    if axis == "temporal":
        predicted = predicted_temporal_order(spec.alpha, theta)
        errors = [run(p, m) for p in levels]
    else:
        predicted = PREDICTED_SPATIAL_ORDER
        errors = [run(nt, p) for p in levels]

    report = ConvergenceReport(axis=axis, problem=problem.name, predicted_order=predicted)
    for j, (p, (l2, linf)) in enumerate(zip(levels, errors)):
        if j == 0:
            obs = None
        else:
            l2_prev = report.rows[-1].l2_error
            obs = math.log(l2_prev / l2) / math.log(p / levels[j - 1])
        report.rows.append(LevelResult(param=p, l2_error=l2, max_error=linf, observed_order=obs))

    if check_subdominance:
        finest_l2 = report.rows[-1].l2_error
        if axis == "temporal":
            other_l2, _ = run(levels[-1], 2 * m)
        else:
            other_l2, _ = run(2 * nt, levels[-1])
        change = abs(other_l2 - finest_l2) / finest_l2 if finest_l2 else 0.0
        if change >= 0.05:
            report.warnings.append(
                f"frozen-axis refinement moved the finest-level error by "
                f"{100.0 * change:.1f}% (>= 5%): the frozen axis may pollute the order"
            )
    return report


def write_report_csv(report: ConvergenceReport, path) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(report.csv_text())

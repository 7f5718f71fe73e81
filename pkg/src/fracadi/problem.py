"""Continuous problem data and the convection-removing exponential change of variables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .meshes import SpatialMesh


class SpecValidationError(ValueError):
    """A coefficient or parameter invariant of the continuous problem fails."""


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients and data of the convection-diffusion problem.

    The PDE is  D_t^alpha u = lambda1 u_xx + lambda2 u_yy + mu1 u_x + mu2 u_y
    + gamma u + f  on (0, L)^2 x (0, Tf], with initial data phi(x, y) and
    Dirichlet boundary data psi(x, y, t).  Data functions must accept NumPy
    arrays (broadcasting) for their coordinate arguments.
    """

    lambda1: float
    lambda2: float
    mu1: float
    mu2: float
    gamma: float
    alpha: float
    L: float
    Tf: float
    f: Callable
    phi: Callable
    psi: Callable


@dataclass(frozen=True)
class TransformedProblem:
    """Reaction-diffusion problem obtained by dividing out exp-multipliers.

    With P(x) = exp(mu1/(2 lambda1) x) and Q(y) = exp(mu2/(2 lambda2) y), the
    substitution v = P*Q*u removes the convection terms and leaves
    D_t^alpha v = lambda1 v_xx + lambda2 v_yy - beta v + F with
    beta = mu1^2/(4 lambda1) + mu2^2/(4 lambda2) - gamma >= 0.
    """

    lambda1: float
    lambda2: float
    alpha: float
    beta: float
    F: Callable
    phi_tilde: Callable
    psi_tilde: Callable
    P: Callable
    Q: Callable


def _beta(spec: ProblemSpec) -> float:
    return (
        spec.mu1 * spec.mu1 / (4.0 * spec.lambda1)
        + spec.mu2 * spec.mu2 / (4.0 * spec.lambda2)
        - spec.gamma
    )


def validate_spec(spec: ProblemSpec) -> ProblemSpec:
    """Check the standing assumptions; return the spec unchanged if they hold."""
    if not spec.lambda1 > 0:
        raise SpecValidationError(f"diffusion coefficient lambda1 must be positive, got {spec.lambda1}")
    if not spec.lambda2 > 0:
        raise SpecValidationError(f"diffusion coefficient lambda2 must be positive, got {spec.lambda2}")
    if not 0.0 < spec.alpha < 1.0:
        raise SpecValidationError(f"fractional order alpha must lie in (0,1), got {spec.alpha}")
    if not spec.L > 0:
        raise SpecValidationError(f"domain edge L must be positive, got {spec.L}")
    if not spec.Tf > 0:
        raise SpecValidationError(f"final time Tf must be positive, got {spec.Tf}")
    b = _beta(spec)
    if b < 0:
        raise SpecValidationError(
            "coefficients must satisfy mu1^2/(4 lambda1) + mu2^2/(4 lambda2) - gamma >= 0, "
            f"got {b}"
        )
    for name in ("f", "phi", "psi"):
        if not callable(getattr(spec, name)):
            raise SpecValidationError(f"data function {name!r} must be callable")
    return spec


def transform(spec: ProblemSpec) -> TransformedProblem:
    """Build the exp-multiplier transform of a validated spec."""
    a1 = spec.mu1 / (2.0 * spec.lambda1)
    a2 = spec.mu2 / (2.0 * spec.lambda2)

    def P(x):
        return np.exp(a1 * np.asarray(x, dtype=float))

    def Q(y):
        return np.exp(a2 * np.asarray(y, dtype=float))

    f, phi, psi = spec.f, spec.phi, spec.psi

    def F(x, y, t):
        return P(x) * Q(y) * f(x, y, t)

    def phi_tilde(x, y):
        return P(x) * Q(y) * phi(x, y)

    def psi_tilde(x, y, t):
        return P(x) * Q(y) * psi(x, y, t)

    return TransformedProblem(
        lambda1=spec.lambda1,
        lambda2=spec.lambda2,
        alpha=spec.alpha,
        beta=_beta(spec),
        F=F,
        phi_tilde=phi_tilde,
        psi_tilde=psi_tilde,
        P=P,
        Q=Q,
    )


def multiplier_grid(tp: TransformedProblem, smesh: SpatialMesh) -> np.ndarray:
    """Nodal values P(x_m) * Q(y_n) as an (mx+1, my+1) array."""
    return tp.P(smesh.x)[:, None] * tp.Q(smesh.y)[None, :]


def inverse_transform(tp: TransformedProblem, field: np.ndarray, smesh: SpatialMesh) -> np.ndarray:
    """Map a transformed-variable field back: u = v / (P(x) Q(y))."""
    field = np.asarray(field, dtype=float)
    if field.shape != smesh.shape:
        raise ValueError(f"field shape {field.shape} does not match mesh {smesh.shape}")
    return field / multiplier_grid(tp, smesh)

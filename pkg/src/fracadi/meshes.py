"""Fitted temporal meshes (power-graded head, uniform tail) and uniform spatial meshes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

#: admissible range for the local step ratio tau[i+1]/tau[i]; the convolution
#: weight rows are monotone for ratios inside [3/4, 62]
ETA_MIN = 0.75
ETA_MAX = 62.0


class MeshError(ValueError):
    """Mesh parameters are inconsistent or a step-ratio constraint is violated."""


def _readonly(values) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(values, dtype=float))
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TemporalMesh:
    """Time grid 0 = t_0 < ... < t_nt = tf with offset weight sigma = 1 - alpha/2.

    ``points[i]`` is t_i.  The graded head covers [0, T] with t_i = T*(i/nhat)**theta;
    the tail [T, tf] is uniform.  ``tau[i]`` is the width t_{i+1} - t_i (0-based, so
    ``tau[i]`` is the width of interval number i+1).
    """

    points: np.ndarray
    nhat: int
    theta: float | None
    T: float
    Tf: float
    alpha: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "points", _readonly(self.points))

    @property
    def nt(self) -> int:
        return len(self.points) - 1

    @cached_property
    def tau(self) -> np.ndarray:
        return _readonly(np.diff(self.points))

    @classmethod
    def from_points(cls, points, alpha, *, validate_ratios=True) -> "TemporalMesh":
        """Wrap an explicit strictly-increasing grid starting at 0."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 1 or len(pts) < 2:
            raise MeshError("need at least two time points")
        if pts[0] != 0.0:
            raise MeshError("time grid must start at t = 0")
        if np.any(np.diff(pts) <= 0):
            raise MeshError("time points must be strictly increasing")
        if not 0.0 < alpha < 1.0:
            raise MeshError(f"alpha must lie in (0,1), got {alpha}")
        mesh = cls(
            points=pts,
            nhat=len(pts) - 1,
            theta=None,
            T=float(pts[-1]),
            Tf=float(pts[-1]),
            alpha=float(alpha),
            sigma=1.0 - 0.5 * alpha,
        )
        if validate_ratios:
            _check_ratios(mesh)
        return mesh


def _check_ratios(mesh: TemporalMesh) -> None:
    ratios = local_ratios(mesh)
    bad = np.nonzero((ratios < ETA_MIN) | (ratios > ETA_MAX))[0]
    if bad.size:
        i = int(bad[0]) + 1  # ratio index is 1-based: eta_i = tau_{i+1}/tau_i
        raise MeshError(
            f"local step ratio eta_{i} = {ratios[bad[0]]:.6g} outside "
            f"[{ETA_MIN}, {ETA_MAX}]"
        )


def build_fitted_mesh(
    nt: int,
    nhat: int | None = None,
    theta: float = 1.0,
    T: float | None = None,
    tf: float = 1.0,
    alpha: float = 0.5,
    *,
    min_graded_fraction: float = 0.5,
) -> TemporalMesh:
    """Build the fitted mesh: t_i = T*(i/nhat)**theta on [0, T], uniform on [T, tf].

    By default nhat = nt and T = tf (pure graded mesh).  The uniform tail is the
    simplest admissible quasiuniform realization.  Step ratios are validated
    against [3/4, 62] and the first offending index is reported.
    """
    if nt < 1:
        raise MeshError(f"nt must be >= 1, got {nt}")
    if nhat is None:
        nhat = nt
    if T is None:
        T = tf
    if not 0.0 < alpha < 1.0:
        raise MeshError(f"alpha must lie in (0,1), got {alpha}")
    if theta < 1.0:
        raise MeshError(f"theta must be >= 1, got {theta}")
    if not 0.0 < T <= tf:
        raise MeshError(f"need 0 < T <= tf, got T={T}, tf={tf}")
    if not 1 <= nhat <= nt:
        raise MeshError(f"need 1 <= nhat <= nt, got nhat={nhat}, nt={nt}")
    if T < tf and nhat >= nt:
        raise MeshError("a tail on [T, tf] requires nhat < nt")
    if T == tf and nhat != nt:
        raise MeshError("T == tf requires nhat == nt (no tail intervals)")
    if nhat < min_graded_fraction * nt:
        raise MeshError(
            f"nhat = {nhat} below the configured graded fraction "
            f"{min_graded_fraction} of nt = {nt}"
        )

    pts = np.empty(nt + 1)
    i = np.arange(nhat + 1, dtype=float)
    pts[: nhat + 1] = T * (i / nhat) ** theta
    if nhat < nt:
        pts[nhat:] = np.linspace(T, tf, nt - nhat + 1)
    mesh = TemporalMesh(
        points=pts,
        nhat=int(nhat),
        theta=float(theta),
        T=float(T),
        Tf=float(tf),
        alpha=float(alpha),
        sigma=1.0 - 0.5 * alpha,
    )
    _check_ratios(mesh)
    return mesh


def local_ratios(mesh: TemporalMesh) -> np.ndarray:
    """Step ratios eta_i = tau_{i+1}/tau_i for i = 1..nt-1 (returned 0-based)."""
    tau = mesh.tau
    return tau[1:] / tau[:-1]


def t_sigma(mesh: TemporalMesh, i: int) -> float:
    """Offset evaluation time t_{i+sigma} = t_i + sigma * tau_{i+1}."""
    if not 0 <= i <= mesh.nt - 1:
        raise IndexError(f"level {i} outside 0..{mesh.nt - 1}")
    return float(mesh.points[i] + mesh.sigma * mesh.tau[i])


def random_admissible_mesh(
    rng: np.random.Generator,
    n_intervals: int,
    alpha: float,
    tf: float = 1.0,
    eta_range: tuple[float, float] = (ETA_MIN, ETA_MAX),
) -> TemporalMesh:
    """Random mesh whose consecutive step ratios lie in ``eta_range`` (log-uniform)."""
    lo, hi = eta_range
    etas = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n_intervals - 1))
    tau = np.empty(n_intervals)
    tau[0] = 1.0
    for j in range(1, n_intervals):
        tau[j] = tau[j - 1] * etas[j - 1]
    pts = np.concatenate([[0.0], np.cumsum(tau)])
    pts *= tf / pts[-1]
    pts[0] = 0.0
    pts[-1] = tf
    return TemporalMesh.from_points(pts, alpha)


@dataclass(frozen=True)
class SpatialMesh:
    """Uniform grid on the square [0, L]^2 with mx * my cells."""

    mx: int
    my: int
    L: float

    def __post_init__(self):
        if self.mx < 2 or self.my < 2:
            raise MeshError(f"need mx, my >= 2, got {self.mx}, {self.my}")
        if self.L <= 0:
            raise MeshError(f"domain edge L must be positive, got {self.L}")

    @property
    def hx(self) -> float:
        return self.L / self.mx

    @property
    def hy(self) -> float:
        return self.L / self.my

    @cached_property
    def x(self) -> np.ndarray:
        return _readonly(np.arange(self.mx + 1) * self.hx)

    @cached_property
    def y(self) -> np.ndarray:
        return _readonly(np.arange(self.my + 1) * self.hy)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.mx + 1, self.my + 1)

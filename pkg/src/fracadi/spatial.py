"""Fourth-order compact operators, second differences, and tridiagonal solves.

Fields are plain float64 arrays of shape (mx+1, my+1); the mesh travels
alongside.  The compact operator applies the (1, 10, 1)/12 stencil on interior
lines and copies boundary lines; the second difference is zeroed on its own
boundary lines, which the scheme never consumes there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .meshes import SpatialMesh

Field2D = np.ndarray


class TridiagonalPivotError(RuntimeError):
    """Elimination hit a vanishing pivot; the system is not diagonally dominant."""


def _checked(field, smesh: SpatialMesh) -> np.ndarray:
    arr = np.asarray(field, dtype=float)
    if arr.shape != smesh.shape:
        raise ValueError(f"field shape {arr.shape} does not match mesh {smesh.shape}")
    return arr


def apply_hx(field, smesh: SpatialMesh) -> Field2D:
    """Compact average along x; boundary columns m = 0, mx are copied."""
    return K.compact_x(_checked(field, smesh))


def apply_hy(field, smesh: SpatialMesh) -> Field2D:
    return K.compact_y(_checked(field, smesh))


def apply_dxx(field, smesh: SpatialMesh) -> Field2D:
    """Second difference along x; output at m = 0, mx is zero by convention."""
    return K.second_diff_x(_checked(field, smesh), smesh.hx)


def apply_dyy(field, smesh: SpatialMesh) -> Field2D:
    return K.second_diff_y(_checked(field, smesh), smesh.hy)


@dataclass
class TridiagonalSystem:
    """One n x n tridiagonal system: sub/sup have length n-1, diag and rhs length n."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.sub = np.asarray(self.sub, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.sup = np.asarray(self.sup, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        n = len(self.diag)
        if n < 1:
            raise ValueError("empty system")
        if len(self.sub) != n - 1 or len(self.sup) != n - 1 or len(self.rhs) != n:
            raise ValueError("inconsistent tridiagonal system shapes")


def is_strictly_dominant(sub, diag, sup) -> bool:
    n = len(diag)
    for j in range(n):
        off = (abs(sub[j - 1]) if j > 0 else 0.0) + (abs(sup[j]) if j < n - 1 else 0.0)
        if not abs(diag[j]) > off:
            return False
    return True


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """Thomas elimination without pivoting (valid for dominant systems)."""
    try:
        out = K.thomas_solve_many(system.sub, system.diag, system.sup, system.rhs[:, None])
    except ZeroDivisionError as exc:
        raise TridiagonalPivotError(str(exc)) from exc
    return out[:, 0]

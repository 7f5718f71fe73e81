"""Kernel backend selection: compiled extension when available, NumPy fallback."""

from __future__ import annotations

import os

import numpy as np

from . import py_backend

try:
    from . import _core
except ImportError:  # extension not built; NumPy path covers everything
    _core = None

_BACKENDS = {"python": py_backend}
if _core is not None:
    _BACKENDS["compiled"] = _core


def available_backends():
    return sorted(_BACKENDS)


def _pick_default():
    choice = os.environ.get("FRACADI_BACKEND", "auto")
    if choice == "auto":
        return _BACKENDS.get("compiled", py_backend)
    if choice not in _BACKENDS:
        raise ImportError(
            f"FRACADI_BACKEND={choice!r} not available; have {available_backends()}"
        )
    return _BACKENDS[choice]


_active = _pick_default()


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    _active = _BACKENDS[name]


def active_backend() -> str:
    return "compiled" if _core is not None and _active is _core else "python"


def _grid(v) -> np.ndarray:
    arr = np.ascontiguousarray(v, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d field, got shape {arr.shape}")
    return arr


def compact_x(v):
    return _active.compact_x(_grid(v))


def compact_y(v):
    return _active.compact_y(_grid(v))


def second_diff_x(v, hx):
    return _active.second_diff_x(_grid(v), float(hx))


def second_diff_y(v, hy):
    return _active.second_diff_y(_grid(v), float(hy))


def weighted_compact_sum(fields, coeffs):
    fields = [_grid(f) for f in fields]
    coeffs = np.ascontiguousarray(coeffs, dtype=float)
    if len(fields) != len(coeffs):
        raise ValueError("one coefficient per field required")
    return _active.weighted_compact_sum(fields, coeffs)


def thomas_solve_many(sub, diag, sup, rhs):
    sub = np.ascontiguousarray(sub, dtype=float)
    diag = np.ascontiguousarray(diag, dtype=float)
    sup = np.ascontiguousarray(sup, dtype=float)
    rhs = np.ascontiguousarray(rhs, dtype=float)
    n = len(diag)
    if rhs.ndim != 2 or rhs.shape[0] != n or len(sub) != n - 1 or len(sup) != n - 1:
        raise ValueError("inconsistent tridiagonal system shapes")
    return _active.thomas_solve_many(sub, diag, sup, rhs)

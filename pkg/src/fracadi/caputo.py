"""Closed-form L2-1sigma convolution weights on nonuniform meshes, with quadrature oracles.

The discrete Caputo derivative of order alpha at the offset point t_{i+sigma} is

    D g = w[i,i] g(t_{i+1}) - sum_{k=1..i} (w[i,k] - w[i,k-1]) g(t_k) - w[i,0] g(t_0),

where the weights are assembled from two families of kernel integrals (r and s)
that have power-function antiderivatives.  The production path evaluates those
antiderivatives in closed form; ``r_coeff_quad``/``s_coeff_quad`` provide an
independent arbitrary-precision quadrature oracle for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .meshes import (
    ETA_MAX,
    ETA_MIN,
    TemporalMesh,
    local_ratios,
    random_admissible_mesh,
    t_sigma,
)

# tau/(t_{i+sigma}-t_k) below this switches s to its series form; the direct
# antiderivative form cancels to O(eps^2) and loses digits for small eps
_S_SERIES_SWITCH = 0.15
_S_SERIES_MAX_TERMS = 80

#: bounds claimed for the ratio w[i,i] * Gamma(2-alpha) * tau^alpha / sigma^(1-alpha)
#: on meshes with step ratios in [3/4, 62]
RHO_BOUNDS = (1.6597542, 13.215168)


def _pow_gap(base: float, delta: float, p: float) -> float:
    """base**p - (base - delta)**p for 0 <= delta <= base, stable for delta << base."""
    return -(base**p) * math.expm1(p * math.log1p(-delta / base))


def _check_level(mesh: TemporalMesh, i: int) -> None:
    if not 0 <= i <= mesh.nt - 1:
        raise IndexError(f"level {i} outside 0..{mesh.nt - 1}")


def r_coeff(mesh: TemporalMesh, i: int, k: int) -> float:
    """First kernel piece for interval k of the row at level i.

    For k < i this is the integral of (t_{i+sigma} - v)**(-alpha) over
    [t_k, t_{k+1}] divided by Gamma(1-alpha); for k = i the integral runs to
    t_{i+sigma} and collapses to sigma**(1-alpha) tau**(1-alpha) / Gamma(2-alpha).
    """
    _check_level(mesh, i)
    if not 0 <= k <= i:
        raise IndexError(f"k = {k} outside 0..{i}")
    a = mesh.alpha
    if k == i:
        return mesh.sigma ** (1.0 - a) * mesh.tau[i] ** (1.0 - a) / math.gamma(2.0 - a)
    b = t_sigma(mesh, i) - mesh.points[k]
    return _pow_gap(b, mesh.tau[k], 1.0 - a) / math.gamma(2.0 - a)


def _s_core_series(a: float, b: float, tau: float, eps: float) -> float:
    # integral of (t_s - v)^(-a) (v - midpoint) over [t_k, t_{k+1}] as
    # tau^2 b^(-a) * sum_{j>=1} (a)_j eps^j j / (2 j! (j+1)(j+2)), eps = tau/b
    poch = a
    factj = 1.0
    epsj = eps
    total = 0.0
    j = 1
    while j <= _S_SERIES_MAX_TERMS:
        term = poch * epsj * j / (2.0 * factj * (j + 1) * (j + 2))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
        j += 1
        poch *= a + j - 1
        factj *= j
        epsj *= eps
    return tau * tau * b ** (-a) * total


def s_coeff(mesh: TemporalMesh, i: int, k: int) -> float:
    """Second kernel piece: midpoint-weighted integral over [t_k, t_{k+1}], k <= i-1."""
    _check_level(mesh, i)
    if i < 1 or not 0 <= k <= i - 1:
        raise IndexError(f"k = {k} outside 0..{i - 1}")
    a = mesh.alpha
    b = t_sigma(mesh, i) - mesh.points[k]
    tau = mesh.tau[k]
    eps = tau / b
    if eps <= _S_SERIES_SWITCH:
        core = _s_core_series(a, b, tau, eps)
    else:
        core = -_pow_gap(b, tau, 2.0 - a) / (2.0 - a) + (b - 0.5 * tau) * _pow_gap(
            b, tau, 1.0 - a
        ) / (1.0 - a)
    gap2 = mesh.points[k + 2] - mesh.points[k]
    return 2.0 * core / (math.gamma(1.0 - a) * gap2)


@dataclass(frozen=True)
class WeightRow:
    """Convolution weights w[i,0..i] for one time level."""

    level: int
    weights: np.ndarray
    sigma: float
    alpha: float

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def weight_row(mesh: TemporalMesh, i: int) -> WeightRow:
    """Assemble the weight row at level i from the r and s kernel pieces."""
    _check_level(mesh, i)
    w = np.empty(i + 1)
    if i == 0:
        w[0] = r_coeff(mesh, 0, 0) / mesh.tau[0]
    else:
        s = [s_coeff(mesh, i, k) for k in range(i)]
        # k = 0 carries -s so the s-pieces telescope out of sum_k w[k]*(g_{k+1}-g_k);
        # with +s the operator would not even reproduce linear functions
        w[0] = (r_coeff(mesh, i, 0) - s[0]) / mesh.tau[0]
        for k in range(1, i):
            w[k] = (r_coeff(mesh, i, k) + s[k - 1] - s[k]) / mesh.tau[k]
        w[i] = (r_coeff(mesh, i, i) + s[i - 1]) / mesh.tau[i]
    return WeightRow(level=i, weights=w, sigma=mesh.sigma, alpha=mesh.alpha)


def rho_from_ratio(alpha: float, eta: float) -> float:
    """Closed form of w[i,i] * Gamma(2-alpha) * tau^alpha / sigma^(1-alpha) via eta."""
    sigma = 1.0 - 0.5 * alpha
    u = 1.0 + 1.0 / (sigma * eta)
    bracket = (u ** (2.0 - alpha) - 1.0) - (u ** (1.0 - alpha) + 1.0) / eta
    return 1.0 + bracket / (1.0 + 1.0 / eta)


def rho(mesh: TemporalMesh, i: int) -> float:
    """Normalized last weight at level i >= 1; depends only on (alpha, eta_i)."""
    if not 1 <= i <= mesh.nt - 1:
        raise IndexError(f"level {i} outside 1..{mesh.nt - 1}")
    return rho_from_ratio(mesh.alpha, mesh.tau[i] / mesh.tau[i - 1])


def discrete_caputo(history, row: WeightRow) -> float:
    """Apply the discrete Caputo operator to sampled values g(t_0)..g(t_{i+1})."""
    g = np.asarray(history, dtype=float)
    i = row.level
    if len(g) != i + 2:
        raise ValueError(f"history length {len(g)} != {i + 2}")
    w = row.weights
    total = w[i] * g[i + 1]
    comp = 0.0
    for k in range(1, i + 1):
        term = -(w[k] - w[k - 1]) * g[k]
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    term = -w[0] * g[0]
    y = term - comp
    total = total + y
    return total


# ---------------------------------------------------------------------------
# quadrature oracles (verification only; never on the production path)

def _quad_points(lo, hi):
    # cluster split points toward hi, where the kernel's (off-interval)
    # singularity sits; keeps tanh-sinh levels modest on every piece
    import mpmath as mp

    width = hi - lo
    pts = [lo] + [hi - width * mp.mpf(10.0) ** (-j) for j in (1, 2, 3, 4, 6, 8)] + [hi]
    return pts


def r_coeff_quad(mesh: TemporalMesh, i: int, k: int, dps: int = 40) -> float:
    """r_coeff recomputed by adaptive quadrature in ``dps``-digit arithmetic."""
    import mpmath as mp

    _check_level(mesh, i)
    if not 0 <= k <= i:
        raise IndexError(f"k = {k} outside 0..{i}")
    with mp.workdps(dps):
        a = mp.mpf(mesh.alpha)
        if k == i:
            # integral to the offset point; substituting w = t_{i+sigma} - v
            # puts the endpoint singularity exactly at zero
            upper = mp.mpf(mesh.sigma) * mp.mpf(float(mesh.tau[i]))
            val = mp.quad(lambda w: w ** (-a), [0, upper], method="tanh-sinh")
            return float(val / mp.gamma(1 - a))
        ts = mp.mpf(t_sigma(mesh, i))
        lo = mp.mpf(float(mesh.points[k]))
        hi = mp.mpf(float(mesh.points[k + 1]))
        val = mp.quad(
            lambda v: (ts - v) ** (-a), _quad_points(lo, hi), method="tanh-sinh", maxdegree=10
        )
        return float(val / mp.gamma(1 - a))


def s_coeff_quad(mesh: TemporalMesh, i: int, k: int, dps: int = 40) -> float:
    """s_coeff recomputed by adaptive quadrature in ``dps``-digit arithmetic."""
    import mpmath as mp

    _check_level(mesh, i)
    if i < 1 or not 0 <= k <= i - 1:
        raise IndexError(f"k = {k} outside 0..{i - 1}")
    with mp.workdps(dps):
        a = mp.mpf(mesh.alpha)
        ts = mp.mpf(t_sigma(mesh, i))
        lo = mp.mpf(float(mesh.points[k]))
        hi = mp.mpf(float(mesh.points[k + 1]))
        mid = (lo + hi) / 2
        val = mp.quad(
            lambda v: (ts - v) ** (-a) * (v - mid),
            _quad_points(lo, hi),
            method="tanh-sinh",
            maxdegree=10,
        )
        val = val * 2 / (mp.gamma(1 - a) * (mp.mpf(float(mesh.points[k + 2])) - lo))
        return float(val)


# ---------------------------------------------------------------------------
# property sweeps (shared by the check workflow and the acceptance suite)

@dataclass
class PropertyCheck:
    """Outcome of one numerical property sweep."""

    name: str
    samples: int
    worst_margin: float
    passed: bool
    note: str = ""


def _tsigma_mp(mesh: TemporalMesh, i: int):
    """t_{i+sigma} from exact differences of the float mesh points.

    Must stay consistent with the widths used by ``_row_mp``: a 1-ulp
    difference in t_{i+sigma} shifts margins by more than the quantities
    being resolved.
    """
    import mpmath as mp

    lo = mp.mpf(float(mesh.points[i]))
    hi = mp.mpf(float(mesh.points[i + 1]))
    return lo + mp.mpf(mesh.sigma) * (hi - lo)


def _row_mp(mesh: TemporalMesh, i: int, dps: int = 80):
    """Weight row in ``dps``-digit arithmetic; margin refinement for near-ties."""
    import mpmath as mp

    with mp.workdps(dps):
        a = mp.mpf(mesh.alpha)
        sig = mp.mpf(mesh.sigma)
        pts = [mp.mpf(float(p)) for p in mesh.points[: i + 2]]
        if i + 2 <= mesh.nt:
            pts.append(mp.mpf(float(mesh.points[i + 2])))
        tau = [pts[k + 1] - pts[k] for k in range(len(pts) - 1)]
        ts = pts[i] + sig * tau[i]

        def r_mp(k):
            if k == i:
                return sig ** (1 - a) * tau[i] ** (1 - a) / mp.gamma(2 - a)
            b = ts - pts[k]
            return (b ** (1 - a) - (b - tau[k]) ** (1 - a)) / mp.gamma(2 - a)

        def s_mp(k):
            b = ts - pts[k]
            t = tau[k]
            core = -(b ** (2 - a) - (b - t) ** (2 - a)) / (2 - a) + (b - t / 2) * (
                b ** (1 - a) - (b - t) ** (1 - a)
            ) / (1 - a)
            return 2 * core / (mp.gamma(1 - a) * (pts[k + 2] - pts[k]))

        if i == 0:
            return [r_mp(0) / tau[0]]
        s = [s_mp(k) for k in range(i)]
        w = [(r_mp(0) - s[0]) / tau[0]]
        for k in range(1, i):
            w.append((r_mp(k) + s[k - 1] - s[k]) / tau[k])
        w.append((r_mp(i) + s[i - 1]) / tau[i])
        return w


#: float margins below this are recomputed in extended precision; the strict
#: inequalities can be mathematically true with margins far below 1 ulp
_MARGIN_REFINE_TOL = 1e-12


def _margin_tracker():
    return {"worst": math.inf, "count": 0}


def sweep_weight_inequalities(meshes) -> list[PropertyCheck]:
    """Check the five coefficient inequalities on every row of every mesh.

    Margins are relative (dimensionless); a sweep passes when its worst margin
    stays strictly positive.  Items with ratio hypotheses are only asserted
    where their hypotheses hold.  Margins too small for float64 to resolve are
    recomputed in extended precision.
    """
    import mpmath as mp

    lower = _margin_tracker()
    first_step = _margin_tracker()
    second_vs_first = _margin_tracker()
    increasing = _margin_tracker()
    last_pair = _margin_tracker()

    def record(tracker, margin):
        tracker["count"] += 1
        if margin < tracker["worst"]:
            tracker["worst"] = margin

    for mesh in meshes:
        sig = mesh.sigma
        etas = local_ratios(mesh)
        for i in range(mesh.nt):
            w = weight_row(mesh, i).weights
            mp_row = None

            def refined(margin, expr):
                # expr maps the extended-precision row to the same margin
                nonlocal mp_row
                if abs(margin) >= _MARGIN_REFINE_TOL:
                    return margin
                if mp_row is None:
                    mp_row = _row_mp(mesh, i)
                with mp.workdps(80):
                    return float(expr(mp_row))

            bound = t_sigma(mesh, i) ** (-mesh.alpha) / math.gamma(1.0 - mesh.alpha)

            def bound_mp():
                a = mp.mpf(mesh.alpha)
                return _tsigma_mp(mesh, i) ** (-a) / mp.gamma(1 - a)

            record(
                lower,
                refined(
                    (w[0] - bound) / bound,
                    lambda mw: (mw[0] - bound_mp()) / bound_mp(),
                ),
            )
            if i == 1:
                val = (2.0 * sig - 1.0) * w[1] - sig * w[0]
                record(
                    first_step,
                    refined(
                        val / (sig * w[0]),
                        lambda mw: ((2 * mp.mpf(sig) - 1) * mw[1] - mp.mpf(sig) * mw[0])
                        / (mp.mpf(sig) * mw[0]),
                    ),
                )
            if i >= 1:
                record(
                    second_vs_first,
                    refined((w[1] - w[0]) / w[1], lambda mw: (mw[1] - mw[0]) / mw[1]),
                )
            hyp_prefix = True
            for k in range(2, i + 1):
                ek1, ek = etas[k - 2], etas[k - 1]
                hyp_prefix = hyp_prefix and ek1 * ek1 * (ek1 + 1.0) >= ek / (ek + 1.0)
                if hyp_prefix:
                    record(
                        increasing,
                        refined(
                            (w[k] - w[k - 1]) / w[k],
                            lambda mw, k=k: (mw[k] - mw[k - 1]) / mw[k],
                        ),
                    )
            if i >= 2:
                ei1, ei = etas[i - 2], etas[i - 1]
                hyp = ei1 * ei1 * (2.0 - 1.0 / sig + ei * (ei + 2.0)) >= ei * (ei + 1.0) / (
                    ei1 + 1.0
                )
                if hyp:
                    val = (2.0 * sig - 1.0) * w[i] - sig * w[i - 1]
                    record(
                        last_pair,
                        refined(
                            val / ((2.0 * sig - 1.0) * w[i]),
                            lambda mw: ((2 * mp.mpf(sig) - 1) * mw[i] - mp.mpf(sig) * mw[i - 1])
                            / ((2 * mp.mpf(sig) - 1) * mw[i]),
                        ),
                    )

    out = []
    for name, tracker in (
        ("weights: first weight above kernel tail bound", lower),
        ("weights: sigma-combination positive at level 1", first_step),
        ("weights: w[i,1] > w[i,0]", second_vs_first),
        ("weights: row increasing under ratio hypothesis", increasing),
        ("weights: sigma-combination positive at last pair", last_pair),
    ):
        worst = tracker["worst"]
        out.append(
            PropertyCheck(
                name=name,
                samples=tracker["count"],
                worst_margin=worst,
                passed=tracker["count"] > 0 and worst > 0.0,
            )
        )
    return out


def sweep_rho_bounds(
    n_samples: int,
    rng: np.random.Generator,
    bounds: tuple[float, float] = RHO_BOUNDS,
) -> PropertyCheck:
    """Sample (alpha, eta) with eta in [3/4, 62] and test rho against ``bounds``."""
    alphas = rng.uniform(0.005, 0.995, size=n_samples)
    etas = np.exp(rng.uniform(np.log(ETA_MIN), np.log(ETA_MAX), size=n_samples))
    values = np.array([rho_from_ratio(a, e) for a, e in zip(alphas, etas)])
    lo, hi = bounds
    margin = min(values.min() - lo, hi - values.max())
    return PropertyCheck(
        name=f"rho within [{lo}, {hi}]",
        samples=n_samples,
        worst_margin=float(margin),
        passed=bool(margin >= 0.0),
        note=f"observed rho range [{values.min():.9f}, {values.max():.9f}]",
    )


def sweep_telescoping(meshes, tol: float = 1e-13) -> PropertyCheck:
    """Discrete Caputo of a constant must vanish to ``tol`` relative to w[i,i]."""
    worst = 0.0
    count = 0
    for mesh in meshes:
        for i in range(mesh.nt):
            row = weight_row(mesh, i)
            resid = abs(discrete_caputo(np.ones(i + 2), row)) / row.weights[i]
            worst = max(worst, resid)
            count += 1
    return PropertyCheck(
        name=f"telescoping: |D(const)| <= {tol:g} * w[i,i]",
        samples=count,
        worst_margin=tol - worst,
        passed=worst <= tol,
        note=f"worst residual {worst:.3e}",
    )


def standard_sweep_meshes(rng: np.random.Generator, n_meshes: int) -> list[TemporalMesh]:
    """Random admissible meshes with alpha drawn from {0.1, ..., 0.9}."""
    meshes = []
    for _ in range(n_meshes):
        alpha = rng.integers(1, 10) / 10.0
        n = int(rng.integers(3, 17))
        meshes.append(random_admissible_mesh(rng, n, alpha))
    return meshes

"""Command line front end: solve, convergence, and check workflows.

Exit statuses: 0 success (and all properties PASS), 1 usage or validation
error, 2 a numerical property or order check FAILed.  CSV output uses '.'
decimals, 17 significant digits, LF line endings, and a header row.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import adi, caputo
from .meshes import SpatialMesh, build_fitted_mesh
from .problem import ProblemSpec
from .verification import (
    Coefficients,
    ConvergenceReport,
    convergence_study,
    error_norms,
    get_problem,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PROPERTY_FAIL = 2

THREADS_ENV = "FRACADI_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are exit 1
        raise UsageError(message)


@dataclass
class RunConfig:
    workflow: str
    problem: str = "singular"
    alpha: float = 0.5
    theta: float = 1.0
    nt: int = 64
    nhat: int | None = None
    split_time: float | None = None
    tf: float = 1.0
    mx: int = 32
    my: int = 32
    levels: list[int] | None = None
    axis: str | None = None
    tolerance: float = 0.3
    out: str | None = None
    threads: int = 1
    lambda1: float = 1.0
    lambda2: float = 1.0
    mu1: float = 1.0
    mu2: float = 1.0
    gamma: float = 0.0
    domain_edge: float = 1.0
    seed: int = 20241
    check_meshes: int = 1000
    check_rho_samples: int = 10000
    check_perturbations: int = 50


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_levels(text) -> list[int]:
    if isinstance(text, list):
        return [int(v) for v in text]
    try:
        return [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse levels list {text!r}: {exc}") from exc


_CONVERTERS = {
    "problem": str,
    "axis": str,
    "out": str,
    "workflow": str,
    "levels": _parse_levels,
    "nt": int,
    "nhat": int,
    "mx": int,
    "my": int,
    "threads": int,
    "seed": int,
    "check_meshes": int,
    "check_rho_samples": int,
    "check_perturbations": int,
}


def _convert(key: str, value):
    if key not in _FIELD_TYPES:
        raise UsageError(f"unknown configuration key {key!r}")
    conv = _CONVERTERS.get(key, float)
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {key}: {value!r} ({exc})") from exc


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                key = key.strip().replace("-", "_")
                values[key] = _convert(key, value.strip())
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    if "workflow" in values:
        raise UsageError("workflow cannot be set from a config file")
    return values


def _build_parser() -> _Parser:
    parser = _Parser(prog="fracadi", description=__doc__.splitlines()[0])
    parser.add_argument("workflow", choices=("solve", "convergence", "check"))
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--problem", help="built-in problem name (singular, smooth, zero)")
    parser.add_argument("--alpha", type=float, help="fractional order in (0,1)")
    parser.add_argument("--theta", type=float, help="temporal grading exponent >= 1")
    parser.add_argument("--nt", type=int, help="time interval count")
    parser.add_argument("--nhat", type=int, help="graded-section interval count")
    parser.add_argument("--split-time", dest="split_time", type=float,
                        help="end of the graded section (default: final time)")
    parser.add_argument("--tf", type=float, help="final time")
    parser.add_argument("--mx", type=int, help="spatial cells along x")
    parser.add_argument("--my", type=int, help="spatial cells along y")
    parser.add_argument("--levels", help="comma-separated refinement levels")
    parser.add_argument("--axis", choices=("temporal", "spatial"), help="study axis")
    parser.add_argument("--tolerance", type=float,
                        help="allowed |observed - predicted| at the finest pair")
    parser.add_argument("--out", help="output path ('-' for stdout)")
    parser.add_argument("--threads", type=int,
                        help=f"worker thread hint (default ${THREADS_ENV} or 1)")
    return parser


def parse_config(argv) -> RunConfig:
    """Merge built-in defaults, config file values, and CLI flags (flags win)."""
    parser = _build_parser()
    namespace = parser.parse_args(argv)
    cli_values = {k: v for k, v in vars(namespace).items() if v is not None and k != "config"}
    if "levels" in cli_values:
        cli_values["levels"] = _parse_levels(cli_values["levels"])

    merged = {}
    if namespace.config:
        merged.update(_read_config_file(namespace.config))
    merged.update(cli_values)

    env_threads = os.environ.get(THREADS_ENV)
    if "threads" not in merged and env_threads is not None:
        merged["threads"] = _convert("threads", env_threads)

    cfg = RunConfig(**merged)
    if cfg.threads < 1:
        raise UsageError(f"threads must be >= 1, got {cfg.threads}")
    if not 0.0 < cfg.alpha < 1.0:
        raise UsageError(f"alpha must lie in (0,1), got {cfg.alpha}")
    return cfg


def _coefficients(cfg: RunConfig) -> Coefficients:
    return Coefficients(cfg.lambda1, cfg.lambda2, cfg.mu1, cfg.mu2, cfg.gamma)


def _zero_spec(cfg: RunConfig) -> ProblemSpec:
    zero3 = lambda x, y, t: np.zeros(np.broadcast(x, y).shape)
    zero2 = lambda x, y: np.zeros(np.broadcast(x, y).shape)
    c = _coefficients(cfg)
    return ProblemSpec(
        lambda1=c.lambda1, lambda2=c.lambda2, mu1=c.mu1, mu2=c.mu2, gamma=c.gamma,
        alpha=cfg.alpha, L=cfg.domain_edge, Tf=cfg.tf, f=zero3, phi=zero2, psi=zero3,
    )


def _select_problem(cfg: RunConfig):
    """Return (spec, manufactured_or_None)."""
    if cfg.problem == "zero":
        return _zero_spec(cfg), None
    problem = get_problem(cfg.problem, cfg.alpha, cfg.domain_edge, cfg.tf, _coefficients(cfg))
    return problem.spec, problem


def _temporal_mesh(cfg: RunConfig):
    return build_fitted_mesh(
        cfg.nt, cfg.nhat, cfg.theta, cfg.split_time, cfg.tf, cfg.alpha
    )


def _open_out(path: str | None, default: str):
    target = default if path is None else path
    if target == "-":
        return sys.stdout, False
    return open(target, "w", newline=""), True


def _fmt(x: float) -> str:
    return format(x, ".17g")


def cmd_solve(cfg: RunConfig) -> int:
    spec, manufactured = _select_problem(cfg)
    tmesh = _temporal_mesh(cfg)
    smesh = SpatialMesh(cfg.mx, cfg.my, spec.L)
    u_final = adi.solve(spec, tmesh, smesh)[0]

    handle, owned = _open_out(cfg.out, "solution.csv")
    try:
        handle.write("t,x,y,u\n")
        t = _fmt(spec.Tf)
        for m in range(cfg.mx + 1):
            x = _fmt(smesh.x[m])
            for n in range(cfg.my + 1):
                handle.write(f"{t},{x},{_fmt(smesh.y[n])},{_fmt(u_final[m, n])}\n")
    finally:
        if owned:
            handle.close()

    stream = sys.stderr if not owned else sys.stdout
    if manufactured is not None:
        l2, linf = error_norms(u_final, manufactured.exact_u, spec.Tf, smesh)
        print(
            f"solve: problem={cfg.problem} nt={cfg.nt} mx={cfg.mx} my={cfg.my} "
            f"l2_error={l2:.6e} max_error={linf:.6e}",
            file=stream,
        )
    else:
        print(f"solve: problem={cfg.problem} nt={cfg.nt} mx={cfg.mx} my={cfg.my}", file=stream)
    return EXIT_OK


def cmd_convergence(cfg: RunConfig) -> int:
    if cfg.axis is None:
        raise UsageError("convergence needs --axis temporal|spatial")
    if not cfg.levels or len(cfg.levels) < 2:
        raise UsageError("convergence needs --levels with at least two entries")
    if cfg.mx != cfg.my:
        raise UsageError("convergence studies use square grids: set mx == my")
    _, manufactured = _select_problem(cfg)
    if manufactured is None:
        raise UsageError("convergence needs a manufactured problem with an exact solution")

    report = convergence_study(
        manufactured,
        cfg.axis,
        cfg.levels,
        nt=cfg.nt,
        m=cfg.mx,
        theta=cfg.theta,
        split_time=cfg.split_time,
    )
    handle, owned = _open_out(cfg.out, "convergence.csv")
    try:
        handle.write(report.csv_text())
    finally:
        if owned:
            handle.close()
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)

    observed = report.finest_observed()
    gap = abs(observed - report.predicted_order)
    passed = gap <= cfg.tolerance
    verdict = "PASS" if passed else "FAIL"
    print(f"{report.summary()} |observed-predicted|={gap:.4f} "
          f"tolerance={cfg.tolerance} {verdict}")
    return EXIT_OK if passed else EXIT_PROPERTY_FAIL


def cmd_check(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    meshes = caputo.standard_sweep_meshes(rng, cfg.check_meshes)
    checks = list(caputo.sweep_weight_inequalities(meshes))
    checks.append(caputo.sweep_rho_bounds(cfg.check_rho_samples, rng))
    checks.append(caputo.sweep_telescoping(meshes))
    checks.append(adi.sweep_stability(rng, cfg.check_perturbations, alpha=cfg.alpha))

    width = max(len(c.name) for c in checks)
    lines = [f"{'property'.ljust(width)}  samples  worst_margin   status"]
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"{c.name.ljust(width)}  {c.samples:7d}  {c.worst_margin:+.6e}  {status}")
        if c.note:
            lines.append(f"{''.ljust(width)}  note: {c.note}")
    all_passed = all(c.passed for c in checks)
    lines.append(f"overall: {'PASS' if all_passed else 'FAIL'}")
    text = "\n".join(lines) + "\n"

    handle, owned = _open_out(cfg.out, "-")
    try:
        handle.write(text)
    finally:
        if owned:
            handle.close()
    return EXIT_OK if all_passed else EXIT_PROPERTY_FAIL


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if cfg.workflow == "solve":
            return cmd_solve(cfg)
        if cfg.workflow == "convergence":
            return cmd_convergence(cfg)
        return cmd_check(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()

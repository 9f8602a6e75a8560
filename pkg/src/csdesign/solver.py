"""Projection-matrix design by nonlinear conjugate gradient.

One CG engine minimizes any :class:`~csdesign.objective.ObjectiveSpec`;
on top of it sit the four designed methods plus the random baseline:

* ``design_mt``: training-free design, Gram target fixed at the identity;
* ``alternating_design``: training-free design alternating with a
  relaxed-ETF Gram target (method tag ``mt-etf``);
* ``design_lh``: SRE-regularized design, identity target;
* ``design_lh_etf``: SRE-regularized design with the alternating target;
* ``random_projection``: i.i.d. standard normal entries.

The CG flavor is Polak-Ribiere+ (beta clamped at zero) with a periodic
restart and a backtracking Armijo line search.  A failed line search
falls back to a steepest-descent step; if that fails too, the solve
returns its best iterate with ``converged=False`` rather than raising.
Identical inputs, config, and seed reproduce a bitwise-identical result.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .matio import FLOAT_FMT
from .objective import ObjectiveSpec, objective_value, value_and_gradient
from .streams import stream

__all__ = [
    "DEFAULT_OUTER_ITERS",
    "SolverConfig",
    "RelaxedETFTarget",
    "TracePoint",
    "DesignResult",
    "cg_minimize",
    "project_to_relaxed_etf",
    "alternating_design",
    "design_mt",
    "design_lh",
    "design_lh_etf",
    "random_projection",
    "write_trace_csv",
]

#: default number of target/matrix alternations for the ETF designs
DEFAULT_OUTER_ITERS = 50


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs of the CG engine.

    ``grad_tol`` applies to the gradient norm relative to
    ``max(1, ||phi||_F)``.  ``cg_restart_period=None`` restarts every
    M*N iterations (the number of unknowns).
    """

    max_cg_iterations: int = 500
    grad_tol: float = 1e-6
    ls_initial_step: float = 1.0
    ls_shrink: float = 0.5
    ls_sufficient_decrease: float = 1e-4
    ls_max_backtracks: int = 60
    cg_restart_period: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_cg_iterations < 1:
            raise ValueError("max_cg_iterations must be >= 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.ls_initial_step <= 0 or not 0 < self.ls_shrink < 1:
            raise ValueError("invalid line-search step parameters")
        if self.ls_sufficient_decrease <= 0 or self.ls_max_backtracks < 1:
            raise ValueError("invalid line-search acceptance parameters")
        if self.cg_restart_period is not None and self.cg_restart_period < 1:
            raise ValueError("cg_restart_period must be >= 1 or None")


@dataclass(frozen=True)
class RelaxedETFTarget:
    """Symmetric unit-diagonal matrix with off-diagonals bounded by `xi`."""

    data: np.ndarray
    xi: float

    def __post_init__(self):
        g = np.asarray(self.data, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"target must be square, got shape {g.shape}")
        if not 0.0 <= self.xi < 1.0:
            raise ValueError(f"xi must lie in [0, 1), got {self.xi}")
        if np.max(np.abs(g - g.T)) > 1e-12:
            raise ValueError("target is not symmetric")
        if np.max(np.abs(np.diag(g) - 1.0)) > 1e-12:
            raise ValueError("target diagonal is not unit")
        off = np.abs(g - np.diag(np.diag(g)))
        if off.max() > self.xi + 1e-12:
            raise ValueError("off-diagonal entries exceed xi")
        object.__setattr__(self, "data", g)
        object.__setattr__(self, "xi", float(self.xi))


class TracePoint(NamedTuple):
    outer_iter: int
    cg_iter: int
    f: float
    grad_norm: float


@dataclass(frozen=True)
class DesignResult:
    """Designed projection matrix plus the full optimization trace."""

    phi: np.ndarray
    trace: tuple[TracePoint, ...]
    method: str
    config: SolverConfig
    converged: bool


def project_to_relaxed_etf(gram, xi: float) -> RelaxedETFTarget:
    """Project a square matrix onto the relaxed-ETF set at level `xi`.

    Off-diagonal entries with magnitude at most `xi` are kept, larger
    ones are clipped to ``xi * sign``, the diagonal is set to one, and
    the result is symmetrized as ``(G + G.T) / 2`` to absorb any
    floating-point asymmetry of the input.  Idempotent: projecting a
    member of the set returns it unchanged, entry for entry.
    """
    g = np.asarray(gram, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {g.shape}")
    if not 0.0 <= xi < 1.0:
        raise ValueError(f"xi must lie in [0, 1), got {xi}")
    clipped = np.clip(g, -xi, xi)
    np.fill_diagonal(clipped, 1.0)
    return RelaxedETFTarget(data=(clipped + clipped.T) / 2.0, xi=float(xi))


def _frob(a: np.ndarray) -> float:
    return float(math.sqrt(np.sum(a * a)))


def _relative_grad_norm(grad_norm: float, phi: np.ndarray) -> float:
    return grad_norm / max(1.0, _frob(phi))


def _armijo(spec, phi, f, d, gd, cfg) -> tuple[float, float] | None:
    """Backtracking line search; returns (step, trial value) or None.

    After the plain backtracking loop accepts a step, one quadratic
    interpolation through (f(0), f'(0), f(t)) proposes a refined step;
    it is taken only if it also passes the Armijo test with a lower
    value.  Without this polish the accepted steps are only
    power-of-shrink accurate, which degrades conjugacy enough to stall
    the PR+ iteration against the cap on ill-conditioned instances.
    """
    t = cfg.ls_initial_step
    accepted = None
    for _ in range(cfg.ls_max_backtracks + 1):
        f_trial = objective_value(phi + t * d, spec)
        if np.isfinite(f_trial) and f_trial <= f + cfg.ls_sufficient_decrease * t * gd:
            accepted = (t, f_trial)
            break
        t *= cfg.ls_shrink
    if accepted is None:
        return None
    t_acc, f_acc = accepted
    denom = 2.0 * (f_acc - f - gd * t_acc)
    if denom > 0.0:
        t_ref = -gd * t_acc * t_acc / denom
        t_ref = min(max(t_ref, 0.1 * t_acc), 10.0 * t_acc)
        f_ref = objective_value(phi + t_ref * d, spec)
        if (
            np.isfinite(f_ref)
            and f_ref <= f + cfg.ls_sufficient_decrease * t_ref * gd
            and f_ref < f_acc
        ):
            return t_ref, f_ref
    return accepted


def _cg_solve(
    spec: ObjectiveSpec,
    phi: np.ndarray,
    cfg: SolverConfig,
    outer_iter: int,
    trace: list[TracePoint],
) -> tuple[np.ndarray, bool]:
    """Run one CG solve, appending to `trace`; never raises on numerics."""
    restart_period = cfg.cg_restart_period or phi.size
    f, g = value_and_gradient(phi, spec)
    g_dot = float(np.sum(g * g))
    trace.append(TracePoint(outer_iter, 0, f, math.sqrt(g_dot)))
    if _relative_grad_norm(math.sqrt(g_dot), phi) <= cfg.grad_tol:
        return phi, True

    d = -g
    for it in range(1, cfg.max_cg_iterations + 1):
        gd = float(np.sum(g * d))
        if gd >= 0.0:
            d = -g
            gd = -g_dot
        accepted = _armijo(spec, phi, f, d, gd, cfg)
        if accepted is None and gd != -g_dot:
            d = -g
            gd = -g_dot
            accepted = _armijo(spec, phi, f, d, gd, cfg)
        if accepted is None:
            return phi, False  # stalled below line-search resolution
        step, _ = accepted
        phi = phi + step * d
        f, g_new = value_and_gradient(phi, spec)
        g_dot_new = float(np.sum(g_new * g_new))
        beta = max(0.0, float(np.sum(g_new * (g_new - g))) / g_dot)
        if it % restart_period == 0:
            beta = 0.0
        d = -g_new + beta * d
        g, g_dot = g_new, g_dot_new
        trace.append(TracePoint(outer_iter, it, f, math.sqrt(g_dot)))
        if _relative_grad_norm(math.sqrt(g_dot), phi) <= cfg.grad_tol:
            return phi, True
    return phi, False


def _check_phi0(phi0, spec: ObjectiveSpec) -> np.ndarray:
    phi0 = np.asarray(phi0, dtype=float)
    if phi0.ndim != 2 or phi0.shape[1] != spec.n:
        raise ValueError(
            f"phi0 must have {spec.n} columns to match psi rows, got shape {phi0.shape}"
        )
    if not np.all(np.isfinite(phi0)):
        raise ValueError("phi0 contains non-finite entries")
    return phi0


def cg_minimize(
    spec: ObjectiveSpec,
    phi0,
    cfg: SolverConfig | None = None,
    method: str = "mt",
) -> DesignResult:
    """Minimize a design objective from `phi0` with one CG solve."""
    cfg = cfg or SolverConfig()
    phi0 = _check_phi0(phi0, spec)
    trace: list[TracePoint] = []
    phi, converged = _cg_solve(spec, phi0, cfg, outer_iter=1, trace=trace)
    return DesignResult(
        phi=phi, trace=tuple(trace), method=method, config=cfg, converged=converged
    )


def _alternate(
    spec_for_target: Callable[[np.ndarray], ObjectiveSpec],
    psi: np.ndarray,
    xi: float,
    outer_iters: int,
    phi0: np.ndarray,
    cfg: SolverConfig,
    method: str,
) -> DesignResult:
    if outer_iters < 1:
        raise ValueError(f"outer_iters must be >= 1, got {outer_iters}")
    trace: list[TracePoint] = []
    phi = phi0
    converged = True
    for k in range(1, outer_iters + 1):
        d = phi @ psi
        target = project_to_relaxed_etf(d.T @ d, xi)
        spec = spec_for_target(target.data)
        phi, ok = _cg_solve(spec, phi, cfg, outer_iter=k, trace=trace)
        converged = converged and ok
    return DesignResult(
        phi=phi, trace=tuple(trace), method=method, config=cfg, converged=converged
    )


def design_mt(psi, lam: float, phi0, cfg: SolverConfig | None = None) -> DesignResult:
    """Training-free design with the Gram target fixed at the identity."""
    spec = ObjectiveSpec(psi=psi, gram_target=None, lam=lam)
    return cg_minimize(spec, phi0, cfg, method="mt")


def alternating_design(
    psi,
    lam: float,
    xi: float,
    outer_iters: int = DEFAULT_OUTER_ITERS,
    phi0=None,
    cfg: SolverConfig | None = None,
) -> DesignResult:
    """Training-free design alternating with a relaxed-ETF Gram target.

    Each round re-derives the target by projecting the current
    equivalent-dictionary Gram onto the relaxed-ETF set, then re-solves
    for the projection matrix by CG warm-started at the previous one.
    """
    cfg = cfg or SolverConfig()
    spec0 = ObjectiveSpec(psi=psi, lam=lam)
    phi0 = _check_phi0(phi0, spec0)
    return _alternate(
        lambda g: ObjectiveSpec(psi=spec0.psi, gram_target=g, lam=lam),
        spec0.psi,
        xi,
        outer_iters,
        phi0,
        cfg,
        method="mt-etf",
    )


def design_lh(psi, lam: float, sre, phi0, cfg: SolverConfig | None = None) -> DesignResult:
    """SRE-regularized design with the identity Gram target."""
    spec = ObjectiveSpec(psi=psi, gram_target=None, lam=lam, sre=sre)
    return cg_minimize(spec, phi0, cfg, method="lh")


def design_lh_etf(
    psi,
    lam: float,
    sre,
    xi: float,
    outer_iters: int = DEFAULT_OUTER_ITERS,
    phi0=None,
    cfg: SolverConfig | None = None,
) -> DesignResult:
    """SRE-regularized design alternating with a relaxed-ETF Gram target."""
    cfg = cfg or SolverConfig()
    spec0 = ObjectiveSpec(psi=psi, lam=lam, sre=sre)
    phi0 = _check_phi0(phi0, spec0)
    return _alternate(
        lambda g: ObjectiveSpec(psi=spec0.psi, gram_target=g, lam=lam, sre=spec0.sre),
        spec0.psi,
        xi,
        outer_iters,
        phi0,
        cfg,
        method="lh-etf",
    )


def random_projection(m: int, n: int, rng_seed: int) -> np.ndarray:
    """M x N matrix of i.i.d. standard normal entries, reproducible per seed."""
    if m < 1 or n < 1:
        raise ValueError(f"dimensions must be positive, got {m} x {n}")
    return stream(rng_seed, "random-projection").standard_normal((m, n))


def write_trace_csv(trace, path: str | os.PathLike) -> None:
    """Write an optimization trace as CSV (outer_iter,cg_iter,f,grad_norm)."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("outer_iter,cg_iter,f,grad_norm\n")
        for point in trace:
            fh.write(
                f"{point.outer_iter},{point.cg_iter},"
                f"{FLOAT_FMT % point.f},{FLOAT_FMT % point.grad_norm}\n"
            )

"""Dense small-scale numerics: finite differences and a damped Newton solver.

Every implicit system in the integrator is a handful of unknowns, so plain
dense linear algebra on float64 arrays is the right tool.  Vectors and
matrices are numpy arrays throughout; the helpers here validate finiteness at
API boundaries but stay out of the hot loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationFailure, SingularJacobian


def as_vector(x, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float64 array and reject non-finite entries."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise EvaluationFailure(f"{name} contains non-finite entries: {v}")
    return v


@dataclass(frozen=True)
class NewtonOptions:
    """Tolerances and limits for :func:`newton_solve`.

    tol is a bound on the residual infinity norm; fd_eps is the base step
    for finite-difference Jacobians (scaled per coordinate).
    """

    tol: float = 1e-10
    max_iter: int = 50
    max_backtracks: int = 30
    fd_eps: float = 1e-7

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be non-negative")
        if self.fd_eps <= 0:
            raise ValueError("fd_eps must be positive")


DEFAULT_NEWTON_OPTIONS = NewtonOptions()


@dataclass
class NewtonResult:
    x: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


def fd_jacobian(F: Callable[[np.ndarray], np.ndarray], x, eps: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of F at x.

    Entry (i, j) is (F_i(x + e_j) - F_i(x - e_j)) / (2 e_j) with the step
    e_j = eps * max(1, |x_j|), balancing truncation against round-off.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, dtype=float)
    n = x.size
    cols = []
    for j in range(n):
        e = eps * max(1.0, abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += e
        xm[j] -= e
        fp = np.atleast_1d(np.asarray(F(xp), dtype=float))
        fm = np.atleast_1d(np.asarray(F(xm), dtype=float))
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise EvaluationFailure(
                f"non-finite function value while differencing coordinate {j}"
            )
        cols.append((fp - fm) / (2.0 * e))
    return np.column_stack(cols) if cols else np.empty((0, 0))


def _solve_linear(J: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Solve J dx = F, falling back to a Tikhonov-shifted system if singular."""
    try:
        dx = np.linalg.solve(J, F)
        if np.all(np.isfinite(dx)):
            return dx
    except np.linalg.LinAlgError:
        pass
    # Near-grazing impact systems can be close to singular; one regularized
    # step often escapes the bad region.
    norm_inf = np.max(np.abs(J)) if J.size else 0.0
    shift = 1e-12 * max(norm_inf, 1e-300)
    try:
        dx = np.linalg.solve(J + shift * np.eye(J.shape[0]), F)
    except np.linalg.LinAlgError as exc:
        raise SingularJacobian(
            f"linear solve failed after Tikhonov fallback (shift={shift:.3e})"
        ) from exc
    if not np.all(np.isfinite(dx)):
        raise SingularJacobian("regularized solve produced non-finite step")
    return dx


def newton_solve(
    F: Callable[[np.ndarray], np.ndarray],
    x0,
    opts: NewtonOptions = DEFAULT_NEWTON_OPTIONS,
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> NewtonResult:
    """Damped Newton iteration for F(x) = 0 with backtracking line search.

    The Jacobian comes from `jac` when supplied, otherwise from
    :func:`fd_jacobian`.  Steps that increase the residual infinity norm are
    halved up to `opts.max_backtracks` times; if no damping helps, the
    smallest step is taken anyway and the iteration continues.  Returns the
    first iterate with residual norm <= opts.tol, or the best iterate seen
    with converged=False after max_iter iterations.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    Fx = np.atleast_1d(np.asarray(F(x), dtype=float))
    if not np.all(np.isfinite(Fx)):
        raise EvaluationFailure("residual non-finite at the initial guess")
    norm = float(np.max(np.abs(Fx))) if Fx.size else 0.0

    best_x = x.copy()
    best_norm = norm
    iterations = 0

    while norm > opts.tol and iterations < opts.max_iter:
        J = jac(x) if jac is not None else fd_jacobian(F, x, opts.fd_eps)
        J = np.asarray(J, dtype=float)
        dx = _solve_linear(J, Fx)

        step = 1.0
        x_new = x - dx
        F_new = np.atleast_1d(np.asarray(F(x_new), dtype=float))
        norm_new = float(np.max(np.abs(F_new))) if np.all(np.isfinite(F_new)) else np.inf
        backtracks = 0
        while norm_new >= norm and backtracks < opts.max_backtracks:
            step *= 0.5
            x_new = x - step * dx
            F_new = np.atleast_1d(np.asarray(F(x_new), dtype=float))
            norm_new = float(np.max(np.abs(F_new))) if np.all(np.isfinite(F_new)) else np.inf
            backtracks += 1
        if not np.isfinite(norm_new):
            raise EvaluationFailure("residual non-finite after exhausting backtracking")

        x = x_new
        Fx = F_new
        norm = norm_new
        iterations += 1
        if norm < best_norm:
            best_norm = norm
            best_x = x.copy()

    if norm <= opts.tol:
        return NewtonResult(x=x, residual_norm=norm, iterations=iterations, converged=True)
    return NewtonResult(x=best_x, residual_norm=best_norm, iterations=iterations, converged=False)

"""Centralized reference solvers for the stationary point used in plots
and reduction tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import textio
from .errors import NotConverged
from .problems import Problem


@dataclass
class ReferenceSolution:
    x_star: np.ndarray
    u_star: float
    residual: float
    iterations: int

    def save(self, path) -> None:
        textio.save_vector(path, self.x_star)


def centralized_prox_grad(problem: Problem, alpha: Optional[float] = None,
                          tol: float = 1e-10, max_iters: int = 200_000,
                          x0: Optional[np.ndarray] = None) -> ReferenceSolution:
    """Proximal gradient on the averaged objective until the scaled step
    norm drops below tol.

    For nonconvex instances the returned point is the stationary point
    reached from x0, not a certified global solution; pass the same x0 as
    the decentralized run to compare against the solution it approaches.
    """
    if alpha is None:
        alpha = 0.9 / problem.L
    x = np.zeros(problem.d) if x0 is None else np.array(x0, dtype=float)
    residual = np.inf
    for it in range(1, max_iters + 1):
        x_next = problem.prox.evaluate(x - alpha * problem.grad_avg(x), alpha)
        residual = float(np.linalg.norm(x_next - x)) / alpha
        x = x_next
        if residual <= tol:
            return ReferenceSolution(x_star=x, u_star=problem.u(x),
                                     residual=residual, iterations=it)
    raise NotConverged(
        f"residual {residual:.3g} > tol {tol:.3g} after {max_iters} iterations")


def prox_grad_residual(problem: Problem, x: np.ndarray,
                       alpha: Optional[float] = None) -> float:
    """Fixed-point residual of the prox-gradient map at x."""
    if alpha is None:
        alpha = 0.9 / problem.L
    x = np.asarray(x, dtype=float)
    x_next = problem.prox.evaluate(x - alpha * problem.grad_avg(x), alpha)
    return float(np.linalg.norm(x_next - x)) / alpha


def brute_force_stationary_1d(problem: Problem, interval=(-3.0, 3.0),
                              grid: float = 1e-4) -> float:
    """Grid minimizer of the 1-D composite objective, refined by bisection
    on the prox-gradient residual. Test oracle only."""
    if problem.d != 1:
        raise ValueError("only defined for one-dimensional problems")
    lo, hi = interval
    xs = np.arange(lo, hi + grid, grid)
    vals = np.array([problem.u(np.array([x])) for x in xs])
    k = int(np.argmin(vals))
    x_best = xs[k]

    # bisection on the signed prox-gradient step around the grid minimum
    alpha = 0.9 / problem.L

    def signed_step(x):
        x = np.array([x])
        return float(problem.prox.evaluate(x - alpha * problem.grad_avg(x),
                                           alpha)[0] - x[0])

    a, b = x_best - grid, x_best + grid
    fa, fb = signed_step(a), signed_step(b)
    if fa * fb < 0:
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = signed_step(mid)
            if fm == 0.0:
                return mid
            if fa * fm < 0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
        return 0.5 * (a + b)
    return float(x_best)

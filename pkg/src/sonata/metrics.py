"""Per-iteration diagnostics and runtime verification of the descent chain.

Every inequality the analysis relies on is re-checked numerically along a
trajectory, with relative slack 1e-9 scaled by the magnitude of the bound
to absorb floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .problems import Problem
from .theory import TheoryConstants
from .textio import format_float

SLACK = 1e-9

CSV_COLUMNS = ("nu", "U", "lyap", "cons_err", "track_err", "delta",
               "dnorm", "E", "T", "dist_ref")


@dataclass
class TraceRecord:
    nu: int
    U: float
    lyap: float
    cons_err: float
    track_err: float
    delta: float
    dnorm: float
    E: float
    T: float
    dist_ref: Optional[float] = None
    # subgradient diagnostics, populated only in verification runs and
    # never serialized
    gnorm: Optional[float] = None

    def csv_row(self) -> str:
        vals = [str(self.nu)]
        for name in CSV_COLUMNS[1:]:
            v = getattr(self, name)
            vals.append("" if v is None else format_float(v))
        return ",".join(vals)


@dataclass
class Trace:
    records: List[TraceRecord]
    constants: Optional[TheoryConstants] = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        vals = [getattr(r, name) for r in self.records]
        return np.array([math.nan if v is None else v for v in vals])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for rec in self.records:
                fh.write(rec.csv_row() + "\n")

    @staticmethod
    def from_csv(path) -> "Trace":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != CSV_COLUMNS:
                raise ValueError(f"unexpected trace columns: {header}")
            records = []
            for line in fh:
                parts = line.rstrip("\n").split(",")
                vals = [float(p) if p else None for p in parts[1:]]
                records.append(TraceRecord(int(parts[0]), *vals))
        return Trace(records=records)


@dataclass
class InequalityReport:
    name: str
    violated_iters: List[int]
    max_violation: float

    @property
    def passed(self) -> bool:
        return not self.violated_iters


def consensus_projection(M: np.ndarray) -> np.ndarray:
    """(I - J) M: deviation of each row from the row average."""
    return M - M.mean(axis=0, keepdims=True)


def consensus_error_energy(X: np.ndarray, Y: np.ndarray, L_mx: float) -> float:
    """Weighted consensus/tracking energy 2||Y_perp||^2 + 4 L_mx^2 ||X_perp||^2."""
    xp = np.linalg.norm(consensus_projection(X))
    yp = np.linalg.norm(consensus_projection(Y))
    return 2.0 * yp**2 + 4.0 * L_mx**2 * xp**2


def diagnostics(state, x_half: np.ndarray, problem: Problem,
                consts: Optional[TheoryConstants] = None,
                ref: Optional[np.ndarray] = None,
                with_subgradient: bool = False,
                alpha: Optional[float] = None) -> TraceRecord:
    """Full per-iteration diagnostic record at iterate `state` and its
    prox half-step `x_half`."""
    X, Y = state.X, state.Y
    m = problem.m
    xp = np.linalg.norm(consensus_projection(X))
    yp = np.linalg.norm(consensus_projection(Y))
    L_mx = problem.L_mx
    E = 2.0 * yp**2 + 4.0 * L_mx**2 * xp**2
    D = x_half - X
    dnorm = float(np.linalg.norm(D))
    U = problem.U(X)

    # average-gradient mismatch of the trackers
    avg_grads = problem.grad_avg(X)
    delta = float(np.linalg.norm(avg_grads - Y))

    gamma = consts.gamma if consts is not None else math.nan
    lyap = U + gamma * E
    if consts is not None and consts.c2t > 0.0 and consts.c3t > 0.0:
        T = math.sqrt(consts.c2t * dnorm**2 + consts.c3t * E)
    else:
        T = math.nan

    dist_ref = None
    if ref is not None:
        dist_ref = float(np.linalg.norm(X - np.outer(np.ones(m), ref)))

    gnorm = None
    if with_subgradient:
        if alpha is None:
            raise ValueError("alpha required for the subgradient diagnostic")
        G = subgradient_element(X, x_half, Y, problem, alpha)
        gnorm = float(np.linalg.norm(G))

    return TraceRecord(nu=state.nu, U=U, lyap=lyap, cons_err=float(xp),
                       track_err=float(yp), delta=delta, dnorm=dnorm,
                       E=E, T=T, dist_ref=dist_ref, gnorm=gnorm)


def subgradient_element(X, x_half, Y, problem: Problem, alpha: float) -> np.ndarray:
    """Explicit element of the composite subdifferential at the half-step.

    Row i is grad_avg(x_half_i) - y_i - (x_half_i - x_i)/alpha; the second
    and third terms reproduce the prox optimality condition, so each row
    is a valid (sub)gradient of the composite objective at x_half_i.
    """
    return problem.grad_avg(x_half) - Y - (x_half - X) / alpha


def nonconvex_jensen_gap(u, L: float, weights, points) -> float:
    """Signed violation of the smooth-function Jensen surrogate.

    For an L-smooth u, convex weights w and points x_i,
    u(sum w_i x_i) <= sum w_i u(x_i) + (L/2) sum_ij w_i w_j ||x_j - x_i||^2.
    Returns lhs - rhs, which is <= 0 whenever the inequality holds.
    """
    w = np.asarray(weights, dtype=float)
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if w.ndim != 1 or w.shape[0] != X.shape[0]:
        raise ValueError("need one weight per point")
    if (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be convex coefficients")
    lhs = float(u(w @ X))
    mean_val = float(sum(wi * u(xi) for wi, xi in zip(w, X)))
    sq = np.square(X[:, None, :] - X[None, :, :]).sum(axis=2)
    spread = float(w @ sq @ w)
    return lhs - mean_val - 0.5 * L * spread


def check_tracking_bound(trace: Trace, L_mx: float) -> InequalityReport:
    """Tracker mismatch vs consensus/tracking energies."""
    violated, worst = [], 0.0
    for rec in trace.records:
        lhs = rec.delta**2
        rhs = 2.0 * rec.track_err**2 + 4.0 * L_mx**2 * rec.cons_err**2
        gap = lhs - rhs - SLACK * (1.0 + rhs)
        if gap > 0.0:
            violated.append(rec.nu)
            worst = max(worst, gap)
    return InequalityReport("tracking_bound", violated, worst)


def check_consensus_dynamics(trace: Trace, rho: float, L_mx: float) -> InequalityReport:
    """One-step contraction of the consensus and tracking errors."""
    violated, worst = [], 0.0
    for prev, nxt in zip(trace.records, trace.records[1:]):
        rhs_x = rho * prev.cons_err + rho * prev.dnorm
        rhs_y = rho * prev.track_err + 2.0 * rho * L_mx * prev.cons_err \
            + rho * L_mx * prev.dnorm
        gap = max(nxt.cons_err - rhs_x - SLACK * (1.0 + rhs_x),
                  nxt.track_err - rhs_y - SLACK * (1.0 + rhs_y))
        if gap > 0.0:
            violated.append(nxt.nu)
            worst = max(worst, gap)
    return InequalityReport("consensus_dynamics", violated, worst)


def check_lyapunov_descent(trace: Trace,
                           consts: TheoryConstants) -> InequalityReport:
    """Strict descent of the merit function with its quadratic margins."""
    violated, worst = [], 0.0
    for prev, nxt in zip(trace.records, trace.records[1:]):
        bound = prev.lyap - consts.c2t * prev.dnorm**2 - consts.c3t * prev.E
        gap = nxt.lyap - bound - SLACK * (1.0 + abs(prev.lyap))
        if gap > 0.0:
            violated.append(nxt.nu)
            worst = max(worst, gap)
    return InequalityReport("lyapunov_descent", violated, worst)


def check_lyapunov_monotone(trace: Trace) -> InequalityReport:
    """Plain monotonicity of the merit function."""
    violated, worst = [], 0.0
    for prev, nxt in zip(trace.records, trace.records[1:]):
        gap = nxt.lyap - prev.lyap - SLACK * (1.0 + abs(prev.lyap))
        if gap > 0.0:
            violated.append(nxt.nu)
            worst = max(worst, gap)
    return InequalityReport("lyapunov_monotone", violated, worst)


def check_subgradient_bound(trace: Trace, problem: Problem,
                            alpha: float) -> InequalityReport:
    """Size of the constructed subgradient vs direction and energy terms.

    Requires a verification run (records carry gnorm).
    """
    L = problem.L
    violated, worst = [], 0.0
    for rec in trace.records:
        if rec.gnorm is None:
            continue
        rhs = 3.0 * (L**2 + 1.0 / alpha**2) * rec.dnorm**2 + 3.0 * rec.E
        gap = rec.gnorm**2 - rhs - SLACK * (1.0 + rhs)
        if gap > 0.0:
            violated.append(rec.nu)
            worst = max(worst, gap)
    return InequalityReport("subgradient_bound", violated, worst)


def check_tracking_average_identity(trace_states, problem: Problem,
                                    tol: float = 1e-10) -> InequalityReport:
    """Average of trackers equals average of local gradients.

    Operates on (nu, X, Y) triples collected during a verification run.
    """
    violated, worst = [], 0.0
    for nu, X, Y in trace_states:
        lhs = Y.mean(axis=0)
        rhs = problem.grad_stack(X).mean(axis=0)
        err = float(np.linalg.norm(lhs - rhs))
        if err > tol:
            violated.append(nu)
            worst = max(worst, err - tol)
    return InequalityReport("tracking_average_identity", violated, worst)


def standard_checks(trace: Trace, problem: Problem,
                    consts: TheoryConstants) -> List[InequalityReport]:
    """The full inequality suite on a recorded trajectory."""
    reports = [
        check_tracking_bound(trace, problem.L_mx),
        check_consensus_dynamics(trace, consts.rho, problem.L_mx),
        check_lyapunov_descent(trace, consts),
        check_subgradient_bound(trace, problem, consts.alpha),
    ]
    return reports

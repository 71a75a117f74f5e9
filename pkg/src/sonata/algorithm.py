"""The decentralized gradient-tracking iteration and its parameter tuning.

One iteration is: a row-wise prox step on X - alpha*Y, consensus mixing of
the half-step, and a mixed tracker update that adds the fresh gradient
increments. Gradients are cached so each agent evaluates exactly one new
gradient per iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import metrics, theory
from .errors import (InfeasibleInit, InvalidRegime, MixingTooWeak, NoProgress,
                     NumericalBlowup)
from .graph import GossipMatrix
from .problems import Problem

# iterations of stagnation of the stopping quantity before giving up
STALL_WINDOW = 10_000
STALL_RTOL = 1e-3

GAMMA_MARGIN = 0.1
DEFAULT_SAFETY = 0.9


@dataclass
class RunConfig:
    alpha: float
    gamma: float
    xi: float
    max_iters: int = 10_000
    stop_tol: float = 1e-13
    gossip_rounds: int = 1
    seed: int = 0
    # fall back to the raw direction norm for stopping when the descent
    # margins are unavailable (e.g. hand-picked step sizes)
    stop_on_dnorm: bool = False

    def __post_init__(self):
        if self.alpha <= 0 or self.gamma <= 0 or self.xi <= 0:
            raise ValueError("alpha, gamma, xi must be positive")
        if self.gossip_rounds < 1:
            raise ValueError("gossip_rounds must be at least 1")


@dataclass
class IterateState:
    X: np.ndarray          # m x d local copies
    Y: np.ndarray          # m x d gradient trackers
    nu: int
    grad_cache: np.ndarray  # per-agent gradients at the rows of X


def tune(problem: Problem, W: GossipMatrix,
         safety: float = DEFAULT_SAFETY, **overrides) -> RunConfig:
    """Pick step size and merit-function weights with guaranteed descent.

    The tracker weight is the mean smoothness constant; the merit weight
    gets a 10% margin over its lower bound and the step size a `safety`
    fraction of its upper bound, so both descent margins come out strictly
    positive. Requires rho < 1/sqrt(5); boost the mixing matrix first
    otherwise.
    """
    if not 0.0 < safety < 1.0:
        raise ValueError("safety must be in (0, 1)")
    rho = W.rho
    if rho >= theory.RHO_LIMIT:
        raise MixingTooWeak(
            f"rho={rho:.4f} >= 1/sqrt(5); boost the gossip matrix first")
    L, L_mx, w_mx = problem.L, problem.L_mx, W.w_mx
    xi = L
    gamma = (1.0 + GAMMA_MARGIN) * (1.0 / (2.0 * xi) + L * w_mx / L_mx**2) \
        / (1.0 - 5.0 * rho**2)
    alpha_cap = min(
        1.0 / (L / 2.0 + xi / 2.0 + 14.0 * L_mx**2 * gamma * rho**2),
        math.sqrt(((1.0 - 5.0 * rho**2) * gamma - 1.0 / (2.0 * xi))
                  / (2.0 * L * w_mx)),
    )
    alpha = safety * alpha_cap
    # strict=True: raises InvalidRegime if the margins came out non-positive
    theory.constants(L, L_mx, w_mx, rho, alpha, gamma, xi, strict=True)
    return RunConfig(alpha=alpha, gamma=gamma, xi=xi, **overrides)


def sample_in_unit_ball(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    """m points uniform in the d-dimensional unit ball."""
    v = rng.standard_normal((m, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    radii = rng.random(m) ** (1.0 / d)
    return v * radii[:, None]


def init(problem: Problem, W: GossipMatrix, cfg: RunConfig,
         X0: Optional[np.ndarray] = None) -> IterateState:
    """Initial state: X0 in the domain of r, trackers set to local gradients."""
    if X0 is None:
        rng = np.random.default_rng(cfg.seed)
        X0 = sample_in_unit_ball(rng, problem.m, problem.d)
    X0 = np.array(X0, dtype=float)
    if X0.shape != (problem.m, problem.d):
        raise ValueError(f"X0 must be {problem.m} x {problem.d}")
    for i, row in enumerate(X0):
        if not problem.prox.in_domain(row):
            raise InfeasibleInit(f"row {i} outside the domain of r")
    grads = problem.grad_stack(X0)
    return IterateState(X=X0, Y=grads.copy(), nu=0, grad_cache=grads)


def half_step(state: IterateState, problem: Problem, cfg: RunConfig) -> np.ndarray:
    """Row-wise prox step on X - alpha * Y."""
    V = state.X - cfg.alpha * state.Y
    prox = problem.prox
    # elementwise proxes act on the whole matrix; others go row by row
    from .prox import L1Prox, ZeroProx
    if isinstance(prox, (L1Prox, ZeroProx)):
        return prox.evaluate(V, cfg.alpha)
    return np.stack([prox.evaluate(row, cfg.alpha) for row in V])


def advance(state: IterateState, x_half: np.ndarray, problem: Problem,
            W: GossipMatrix, cfg: RunConfig) -> IterateState:
    """Consensus mixing and tracker update given the prox half-step."""
    X_new = W.W @ x_half
    grads_new = problem.grad_stack(X_new)
    Y_new = W.W @ (state.Y + grads_new - state.grad_cache)
    if not (np.isfinite(X_new).all() and np.isfinite(Y_new).all()):
        raise NumericalBlowup(f"non-finite iterate at nu={state.nu + 1}")
    return IterateState(X=X_new, Y=Y_new, nu=state.nu + 1, grad_cache=grads_new)


def step(state: IterateState, problem: Problem, W: GossipMatrix,
         cfg: RunConfig) -> IterateState:
    return advance(state, half_step(state, problem, cfg), problem, W, cfg)


def run(problem: Problem, W: GossipMatrix, cfg: RunConfig,
        ref: Optional[np.ndarray] = None,
        X0: Optional[np.ndarray] = None,
        verify: bool = False,
        keep_states: bool = False) -> metrics.Trace:
    """Iterate to the stopping tolerance, recording one diagnostic per step.

    Deterministic given cfg.seed. Stops when the composite residual drops
    below stop_tol (or the direction norm, when margins are unavailable),
    raises NoProgress on prolonged stagnation above tolerance.
    """
    consts = _constants_for(problem, W, cfg)
    state = init(problem, W, cfg, X0=X0)
    records = []
    states = []
    best = math.inf
    stall = 0
    while True:
        xh = half_step(state, problem, cfg)
        rec = metrics.diagnostics(state, xh, problem, consts=consts, ref=ref,
                                  with_subgradient=verify, alpha=cfg.alpha)
        records.append(rec)
        if keep_states:
            states.append((state.nu, state.X.copy(), state.Y.copy()))
        stop_val = rec.T if (not cfg.stop_on_dnorm and math.isfinite(rec.T)) \
            else rec.dnorm
        if state.nu >= cfg.max_iters or stop_val <= cfg.stop_tol:
            break
        if stop_val < best * (1.0 - STALL_RTOL):
            best = stop_val
            stall = 0
        else:
            stall += 1
            if stall >= STALL_WINDOW:
                raise NoProgress(
                    f"stopping quantity stuck near {best:.3g} for "
                    f"{STALL_WINDOW} iterations")
        state = advance(state, xh, problem, W, cfg)

    trace = metrics.Trace(records=records, constants=consts,
                          meta={"problem": problem.name,
                                "alpha": cfg.alpha, "gamma": cfg.gamma,
                                "xi": cfg.xi, "seed": cfg.seed,
                                "final_state": state,
                                "final_half_step": half_step(state, problem, cfg)})
    if keep_states:
        trace.meta["states"] = states
    return trace


def _constants_for(problem: Problem, W: GossipMatrix,
                   cfg: RunConfig) -> theory.TheoryConstants:
    kl = problem.kl_meta
    kappa = kl.kappa if kl is not None else None
    theta = kl.theta if (kl is not None and kappa is not None) else None
    return theory.constants(problem.L, problem.L_mx, W.w_mx, W.rho,
                            cfg.alpha, cfg.gamma, cfg.xi,
                            kappa=kappa, theta=theta, d=problem.d,
                            strict=False)

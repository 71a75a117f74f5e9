"""Shared fixtures: the three desk-scale tuned experiments, run once per
session and reused by the module and acceptance tests."""

import time

import numpy as np
import pytest

from sonata import algorithm, graph, oracle, problems

DESK_GRAPH = dict(m_to_seed=7, p=0.45, rho_target=0.2)
ALGO_SEED = 5

DESK_PROBLEMS = {
    "lasso": dict(m=10, n=15, d=60, sparsity=0.4,
                  noise_sd=np.sqrt(0.1), lam=0.2, seed=3),
    "pca": dict(m=20, n=20, d=50, seed=11),
    "scad": dict(m=10, n=15, d=60, sparsity=0.2,
                 noise_sd=np.sqrt(0.1), lam=0.2, a=3.7, seed=4),
}


def build_desk_problem(name):
    params = DESK_PROBLEMS[name]
    if name == "lasso":
        return problems.make_lasso(**params)
    if name == "pca":
        return problems.make_pca(**params)
    if name == "scad":
        return problems.make_scad(**params)
    raise KeyError(name)


def build_desk_gossip(m):
    g = graph.erdos_renyi(m, DESK_GRAPH["p"], DESK_GRAPH["m_to_seed"])
    W = graph.metropolis_hastings(g)
    W, _ = graph.boost_mixing(W, DESK_GRAPH["rho_target"])
    return W


def run_desk_experiment(name, keep_states=False):
    problem = build_desk_problem(name)
    W = build_desk_gossip(problem.m)
    cfg = algorithm.tune(problem, W, seed=ALGO_SEED, max_iters=10_000,
                         stop_tol=1e-13)
    rng = np.random.default_rng(cfg.seed)
    X0 = algorithm.sample_in_unit_ball(rng, problem.m, problem.d)
    ref = oracle.centralized_prox_grad(problem, tol=1e-12, x0=X0.mean(axis=0))
    start = time.perf_counter()
    trace = algorithm.run(problem, W, cfg, ref=ref.x_star, X0=X0,
                          verify=True, keep_states=keep_states)
    elapsed = time.perf_counter() - start
    return dict(problem=problem, W=W, cfg=cfg, X0=X0, ref=ref,
                trace=trace, elapsed=elapsed)


@pytest.fixture(scope="session")
def desk_runs():
    return {name: run_desk_experiment(name, keep_states=True)
            for name in DESK_PROBLEMS}

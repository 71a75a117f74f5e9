"""Rate fitting against the predicted regimes and numerical KL certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyLevelBand, WindowTooSmall
from .metrics import Trace
from .problems import Problem

DIST_FLOOR = 1e-12
DEFAULT_BURN_IN_FRACTION = 0.2
MIN_WINDOW = 10


@dataclass
class RateFit:
    model: str            # "geometric" or "power"
    slope_or_exponent: float
    r_squared: float
    burn_in: int
    window: tuple         # (first_nu, last_nu) of the fitted range

    @property
    def contracting(self) -> bool:
        return self.slope_or_exponent < 0 if self.model == "geometric" \
            else self.slope_or_exponent > 0


def _fit_window(trace: Trace, burn_in: Optional[int]):
    dist = trace.column("dist_ref")
    nus = trace.column("nu")
    if np.isnan(dist).all():
        raise ValueError("trace has no reference distances")
    if burn_in is None:
        burn_in = int(DEFAULT_BURN_IN_FRACTION * len(trace))
    keep = (nus >= burn_in) & np.isfinite(dist) & (dist > DIST_FLOOR)
    if keep.sum() < MIN_WINDOW:
        raise WindowTooSmall(
            f"only {int(keep.sum())} usable points after burn-in {burn_in}")
    return nus[keep], dist[keep], burn_in


def _least_squares_line(x: np.ndarray, y: np.ndarray):
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), r2


def fit_linear_rate(trace: Trace, burn_in: Optional[int] = None) -> RateFit:
    """Least-squares slope of log(distance) vs iteration.

    A strictly negative slope with high R^2 certifies geometric decay;
    the slope is the per-iteration log contraction.
    """
    nus, dist, burn = _fit_window(trace, burn_in)
    slope, r2 = _least_squares_line(nus, np.log(dist))
    return RateFit(model="geometric", slope_or_exponent=slope, r_squared=r2,
                   burn_in=burn, window=(int(nus[0]), int(nus[-1])))


def fit_sublinear_rate(trace: Trace, burn_in: Optional[int] = None) -> RateFit:
    """Least-squares exponent of log(distance) vs log(iteration).

    Returns the positive decay exponent q of a dist ~ nu^{-q} model.
    """
    nus, dist, burn = _fit_window(trace, burn_in)
    pos = nus > 0
    if pos.sum() < MIN_WINDOW:
        raise WindowTooSmall("too few positive-iteration points")
    slope, r2 = _least_squares_line(np.log(nus[pos]), np.log(dist[pos]))
    return RateFit(model="power", slope_or_exponent=-slope, r_squared=r2,
                   burn_in=burn, window=(int(nus[pos][0]), int(nus[pos][-1])))


def select_model(trace: Trace, burn_in: Optional[int] = None) -> RateFit:
    """Pick the better-explaining of the geometric and power models."""
    geo = fit_linear_rate(trace, burn_in)
    try:
        pow_ = fit_sublinear_rate(trace, burn_in)
    except WindowTooSmall:
        return geo
    return geo if geo.r_squared >= pow_.r_squared else pow_


@dataclass
class KLCertificate:
    theta: float
    kappa_supplied: Optional[float]
    kappa_empirical: Optional[float]  # largest coefficient valid on all samples
    samples_in_band: int
    passed: bool
    vacuous: bool


def kl_certificate(problem: Problem, x_bar: np.ndarray, theta: float,
                   kappa: Optional[float] = None, region_radius: float = 0.5,
                   samples: int = 1000, eta: float = 1.0,
                   two_sided: bool = False, seed: int = 0) -> KLCertificate:
    """Sample-based check of the sharpness inequality around x_bar.

    Samples points in a ball around x_bar, keeps those inside the level
    band, and reports the largest coefficient kappa' with
    ||g_x|| >= kappa' * |u(x) - u(x_bar)|^theta on every kept sample.
    The empirical kappa' is a sampled lower bound, not the true KL
    coefficient. For problems with a nonsmooth term the subgradient is the
    explicit prox-residual element, evaluated at the prox-mapped point.
    """
    rng = np.random.default_rng(seed)
    x_bar = np.asarray(x_bar, dtype=float)
    u_bar = problem.u(x_bar)
    alpha = 0.9 / problem.L
    smooth = problem.r_value(x_bar) == 0.0 and _is_identity_prox(problem)

    ratios = []
    n_nonflat = 0
    for _ in range(samples):
        v = rng.standard_normal(problem.d)
        v *= region_radius * rng.random() ** (1.0 / problem.d) / np.linalg.norm(v)
        x = x_bar + v
        if smooth:
            point, g = x, problem.grad_avg(x)
        else:
            y = problem.grad_avg(x)
            x_half = problem.prox.evaluate(x - alpha * y, alpha)
            point = x_half
            g = problem.grad_avg(x_half) - y - (x_half - x) / alpha
        gap = problem.u(point) - u_bar
        if gap == 0.0:
            continue
        n_nonflat += 1
        if two_sided:
            in_band = 0.0 < abs(gap) < eta
            level = abs(gap)
        else:
            in_band = 0.0 < gap < eta
            level = gap
        if not in_band:
            continue
        ratios.append(float(np.linalg.norm(g)) / level**theta)

    if not ratios:
        if n_nonflat == 0:
            # flat landscape: the inequality holds vacuously
            return KLCertificate(theta, kappa, None, 0, True, True)
        raise EmptyLevelBand("no samples landed inside the level band")

    kappa_emp = min(ratios)
    passed = kappa is None or kappa_emp >= kappa * (1.0 - 1e-9)
    return KLCertificate(theta, kappa, kappa_emp, len(ratios), passed, False)


def _is_identity_prox(problem: Problem) -> bool:
    probe = np.ones(problem.d)
    return bool(np.array_equal(problem.prox.evaluate(probe, 1.0), probe))

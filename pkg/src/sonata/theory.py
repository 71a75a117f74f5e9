"""Named constants of the convergence analysis and predicted rates.

All expressions are reproduced exactly as printed in the analysis,
including the `- 1/xi` term inside c4t whose sign can drive it negative
for well-mixed networks; a `sanitize` flag clamps c4t at zero so the
derived contraction gain stays positive (infinite when the clamp fires).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ExponentUnbounded, InvalidRegime, RegimeNotApplicable

RHO_LIMIT = 1.0 / math.sqrt(5.0)

# The c2/c3 margins are small differences of larger terms, so the
# expressions are evaluated in extended precision and rounded to double
# once at the end; plain double evaluation loses several digits there.
_EXT = np.longdouble


@dataclass(frozen=True)
class TheoryConstants:
    L: float
    L_mx: float
    w_mx: float
    rho: float
    alpha: float
    gamma: float
    xi: float
    c1t: float
    c2t: float
    c3t: float
    c4t: float
    c4t_negative: bool
    rho_condition_ok: bool
    corollary_rho_ok: bool
    theta: Optional[float] = None
    kappa: Optional[float] = None
    c5t: Optional[float] = None
    c6t: Optional[float] = None
    c7t: Optional[float] = None
    omega: Optional[float] = None
    omega_prime: Optional[float] = None
    tau: Optional[float] = None
    tau_prime: Optional[float] = None


def constants(L, L_mx, w_mx, rho, alpha, gamma, xi,
              kappa: Optional[float] = None, theta: Optional[float] = None,
              d: int = 1, sanitize: bool = False,
              strict: bool = True) -> TheoryConstants:
    """Evaluate every named constant of the analysis.

    The KL-dependent fields (c5t..c7t, omega, tau) are filled only when
    kappa and theta are both supplied. With strict=True a non-positive
    descent margin raises InvalidRegime.
    """
    if min(L, L_mx, w_mx, alpha, gamma, xi) <= 0:
        raise ValueError("L, L_mx, w_mx, alpha, gamma, xi must be positive")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must be in [0, 1)")

    eL, eL_mx, ew, er = _EXT(L), _EXT(L_mx), _EXT(w_mx), _EXT(rho)
    ea, eg, ex = _EXT(alpha), _EXT(gamma), _EXT(xi)

    ec1 = 1 / (2 * ex) + max(eL * ew / eL_mx**2, 2 * eL * ea**2 * ew)
    ec2 = 1 / ea - eL / 2 - ex / 2 - 14 * eL_mx**2 * eg * er**2
    ec3 = (1 - 5 * er**2) * eg - ec1
    c1t, c2t, c3t = float(ec1), float(ec2), float(ec3)
    if strict and (c2t <= 0.0 or c3t <= 0.0):
        raise InvalidRegime(
            f"non-positive descent margins: c2t={c2t:.3g}, c3t={c3t:.3g}")

    if c2t > 0.0 and c3t > 0.0:
        c4t_raw = float(max(14 * eg * er**2 * eL_mx**2 / ec2,
                            (5 * eg * er**2 + ec1 - 1 / ex) / ec3))
    else:
        c4t_raw = math.nan
    c4t_negative = c4t_raw < 0.0
    c4t = max(c4t_raw, 0.0) if sanitize and not math.isnan(c4t_raw) else c4t_raw

    omega_prime = _safe_inverse(c4t)
    tau_prime = _contraction_factor(omega_prime)

    c5t = c6t = c7t = omega = tau = None
    if kappa is not None and theta is not None:
        if not 0.0 < theta < 1.0 or kappa <= 0.0:
            raise ValueError("need theta in (0,1) and kappa > 0")
        if c2t > 0.0 and c3t > 0.0:
            ek, et = _EXT(kappa), _EXT(theta)
            ec5 = max(_EXT(d) ** (et - _EXT(0.5)), _EXT(1)) * np.sqrt(
                max(3 * (eL**2 + 1 / ea**2) / ec2, 3 / ec3))
            ec6 = ec5**2 / ek ** (1 / et) + _EXT(c4t)
            ec7 = (ec5 / ek) ** (1 / et) + _EXT(c4t)
            c5t, c6t, c7t = float(ec5), float(ec6), float(ec7)
            omega = _safe_inverse(c6t)
            tau = _contraction_factor(omega)

    return TheoryConstants(
        L=L, L_mx=L_mx, w_mx=w_mx, rho=rho, alpha=alpha, gamma=gamma, xi=xi,
        c1t=c1t, c2t=c2t, c3t=c3t, c4t=c4t, c4t_negative=c4t_negative,
        rho_condition_ok=rho < RHO_LIMIT,
        corollary_rho_ok=rho < corollary_rho_threshold(L, L_mx, w_mx),
        theta=theta, kappa=kappa, c5t=c5t, c6t=c6t, c7t=c7t,
        omega=omega, omega_prime=omega_prime, tau=tau, tau_prime=tau_prime,
    )


def corollary_rho_threshold(L: float, L_mx: float, w_mx: float) -> float:
    """Network-mixing threshold under which the complexity bound applies."""
    return min(RHO_LIMIT, L / (L_mx * math.sqrt(42.0 * w_mx + 26.0)))


def predicted_complexity(consts: TheoryConstants, epsilon: float) -> int:
    """Iterations to reach an epsilon-accurate point in the linear regime."""
    if consts.theta is None or consts.kappa is None:
        raise RegimeNotApplicable("kappa and theta required")
    if consts.theta > 0.5:
        raise RegimeNotApplicable("complexity bound only holds for theta <= 1/2")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if epsilon >= 1.0:
        return 0
    tau = consts.tau
    if tau is None or not 0.0 < tau < 1.0:
        raise InvalidRegime("no valid contraction factor for these parameters")
    return math.ceil(math.log(1.0 / epsilon) / math.log(1.0 / tau))


def predicted_sublinear_exponent(theta: float) -> float:
    """Power-law decay exponent of the distance in the sublinear regime."""
    if theta <= 0.5:
        raise ExponentUnbounded("exponent defined only for theta in (1/2, 1)")
    if theta >= 1.0:
        raise ValueError("theta must be below 1")
    return (1.0 - theta) / (2.0 * theta - 1.0)


def _safe_inverse(x: Optional[float]) -> Optional[float]:
    if x is None or math.isnan(x):
        return None
    if x == 0.0:
        return math.inf
    return 1.0 / x


def _contraction_factor(omega: Optional[float]) -> Optional[float]:
    if omega is None:
        return None
    if math.isinf(omega):
        return 0.0
    if omega <= -1.0:
        return None
    return math.sqrt(1.0 / (1.0 + omega))

"""Problem instances: data generation and smooth/nonsmooth oracles.

Each constructor returns a Problem bundling per-agent smooth oracles (value
and gradient, vectorized over rows of points), exact smoothness constants
from dense SVDs of the small design matrices, the shared nonsmooth term
with its prox, and optional KL metadata (exponent, coefficient).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import textio
from .errors import BadHyper, NotSmooth
from .prox import L1Prox, ProxOp, UnitBallProx, ZeroProx


class KLMeta(NamedTuple):
    theta: float
    kappa: Optional[float]


@dataclass
class DataBundle:
    """Generated data for one problem instance, reproducible from its seed."""

    kind: str
    params: dict
    arrays: dict  # name -> ndarray
    seed: int


@dataclass
class Problem:
    name: str
    m: int
    d: int
    L_i: np.ndarray
    prox: ProxOp
    kl_meta: Optional[KLMeta] = None
    bundle: Optional[DataBundle] = None
    # per-agent oracles; accept points of shape (..., d) and vectorize
    # over the leading dimensions
    _f: Callable = field(default=None, repr=False)
    _grad: Callable = field(default=None, repr=False)

    @property
    def L(self) -> float:
        return float(np.mean(self.L_i))

    @property
    def L_mx(self) -> float:
        return float(np.max(self.L_i))

    def f(self, i: int, x):
        return self._f(i, np.asarray(x, dtype=float))

    def grad(self, i: int, x):
        return self._grad(i, np.asarray(x, dtype=float))

    def f_avg(self, x):
        x = np.asarray(x, dtype=float)
        return sum(self._f(i, x) for i in range(self.m)) / self.m

    def grad_avg(self, x):
        x = np.asarray(x, dtype=float)
        return sum(self._grad(i, x) for i in range(self.m)) / self.m

    def r_value(self, x) -> float:
        return float(self.prox.value(np.asarray(x, dtype=float)))

    def u(self, x) -> float:
        """Composite objective at a single point."""
        return float(self.f_avg(x)) + self.r_value(x)

    def u_rows(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        smooth = self.f_avg(X)
        rough = np.array([self.prox.value(row) for row in X])
        return smooth + rough

    def U(self, X) -> float:
        """Sum of the composite objective over the rows of X."""
        return float(self.u_rows(X).sum())

    def grad_stack(self, X) -> np.ndarray:
        """Rows grad_i(x_i) for the stacked iterate matrix X."""
        X = np.asarray(X, dtype=float)
        return np.stack([self._grad(i, X[i]) for i in range(self.m)])


def _threshold_smallest(x: np.ndarray, fraction: float) -> np.ndarray:
    """Zero out the given fraction of entries with smallest magnitude."""
    x = x.copy()
    k = int(round(fraction * x.size))
    if k > 0:
        idx = np.argsort(np.abs(x))[:k]
        x[idx] = 0.0
    return x


def _regression_data(m, n, d, sparsity, noise_sd, seed):
    rng = np.random.default_rng(seed)
    x_star = _threshold_smallest(rng.standard_normal(d), sparsity)
    A = rng.standard_normal((m, n, d))
    A /= np.linalg.norm(A, axis=2, keepdims=True)
    noise = noise_sd * rng.standard_normal((m, n))
    y = np.einsum("inj,j->in", A, x_star) + noise
    return A, y, x_star


def make_lasso(m, n, d, sparsity, noise_sd, lam, seed) -> Problem:
    """Sparse linear regression with l1 regularization.

    f_i(x) = (1/2)||A_i x - y_i||^2 with unit-norm design rows,
    r(x) = lam * ||x||_1. L_i is the exact squared top singular value.
    """
    if lam <= 0:
        raise BadHyper("lam must be positive")
    A, y, x_star = _regression_data(m, n, d, sparsity, noise_sd, seed)
    L_i = np.array([np.linalg.svd(A[i], compute_uv=False)[0] ** 2 for i in range(m)])

    def f(i, x):
        res = x @ A[i].T - y[i]
        return 0.5 * np.square(res).sum(axis=-1)

    def grad(i, x):
        res = x @ A[i].T - y[i]
        return res @ A[i]

    bundle = DataBundle(
        kind="lasso",
        params={"m": m, "n": n, "d": d, "sparsity": sparsity,
                "noise_sd": noise_sd, "lam": lam},
        arrays={"A": A, "y": y, "x_star": x_star},
        seed=seed,
    )
    return Problem(name="lasso", m=m, d=d, L_i=L_i, prox=L1Prox(lam),
                   kl_meta=KLMeta(0.5, None), bundle=bundle, _f=f, _grad=grad)


def scad_penalty(x, lam: float, a: float, denominator: str = "continuous"):
    """Concave part of the SCAD split, applied componentwise.

    The middle branch uses denominator 2(a-1) in the `continuous` variant,
    which makes both the value and the derivative continuous across branch
    boundaries; the `paper` variant uses 2(a^2-1) as printed, which leaves
    jumps at |x| = a*lam.
    """
    den = _scad_den(a, denominator)
    ax = np.abs(np.asarray(x, dtype=float))
    mid = (ax - lam) ** 2 / (2.0 * den)
    outer = lam * ax - (a + 1.0) * lam**2 / 2.0
    return np.where(ax <= lam, 0.0, np.where(ax <= a * lam, mid, outer))


def scad_penalty_grad(x, lam: float, a: float, denominator: str = "continuous"):
    den = _scad_den(a, denominator)
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    mid = (ax - lam) / den * np.sign(x)
    outer = lam * np.sign(x)
    return np.where(ax <= lam, 0.0, np.where(ax <= a * lam, mid, outer))


def _scad_den(a: float, denominator: str) -> float:
    if denominator == "continuous":
        return a - 1.0
    if denominator == "paper":
        return a**2 - 1.0
    raise ValueError("denominator must be 'continuous' or 'paper'")


def make_scad(m, n, d, sparsity, noise_sd, lam, a, seed,
              scad_denominator: str = "continuous") -> Problem:
    """Sparse linear regression with the SCAD penalty, via its DC split.

    The concave part of the penalty joins each agent's smooth loss,
    f_i(x) = (1/2)||A_i x - y_i||^2 - sum_k p(x_k), and the convex part
    lam*||x||_1 stays in the prox term.
    """
    if a <= 1:
        raise BadHyper("SCAD shape parameter a must exceed 1")
    if lam <= 0:
        raise BadHyper("lam must be positive")
    A, y, x_star = _regression_data(m, n, d, sparsity, noise_sd, seed)
    lip_pen = 1.0 / _scad_den(a, scad_denominator)
    L_i = np.array([np.linalg.svd(A[i], compute_uv=False)[0] ** 2 + lip_pen
                    for i in range(m)])

    def f(i, x):
        res = x @ A[i].T - y[i]
        return 0.5 * np.square(res).sum(axis=-1) \
            - scad_penalty(x, lam, a, scad_denominator).sum(axis=-1)

    def grad(i, x):
        res = x @ A[i].T - y[i]
        return res @ A[i] - scad_penalty_grad(x, lam, a, scad_denominator)

    bundle = DataBundle(
        kind="scad",
        params={"m": m, "n": n, "d": d, "sparsity": sparsity,
                "noise_sd": noise_sd, "lam": lam, "a": a,
                "scad_denominator": scad_denominator},
        arrays={"A": A, "y": y, "x_star": x_star},
        seed=seed,
    )
    return Problem(name="scad", m=m, d=d, L_i=L_i, prox=L1Prox(lam),
                   kl_meta=KLMeta(0.5, None), bundle=bundle, _f=f, _grad=grad)


def make_pca(m, n, d, seed) -> Problem:
    """Leading-eigenvector extraction over local sample covariances.

    f_i(x) = -(1/n) sum_j (a_ij^T x)^2 with samples from N(0, Sigma),
    Sigma built from a random orthonormal basis and uniform eigenvalues;
    r is the indicator of the unit ball.
    """
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eigvals = rng.uniform(0.0, 1.0, size=d)
    sqrt_sigma = Q * np.sqrt(eigvals)  # Sigma = Q diag(eigvals) Q^T
    A = rng.standard_normal((m, n, d)) @ sqrt_sigma.T
    C = np.einsum("inj,ink->ijk", A, A) / n  # local sample covariances
    L_i = np.array([2.0 * np.linalg.eigvalsh(C[i])[-1] for i in range(m)])

    def f(i, x):
        return -np.sum((x @ C[i]) * x, axis=-1)

    def grad(i, x):
        return -2.0 * (x @ C[i])

    bundle = DataBundle(
        kind="pca",
        params={"m": m, "n": n, "d": d},
        arrays={"A": A, "sigma_eigvals": eigvals},
        seed=seed,
    )
    return Problem(name="pca", m=m, d=d, L_i=L_i, prox=UnitBallProx(),
                   kl_meta=KLMeta(0.5, None), bundle=bundle, _f=f, _grad=grad)


def make_logistic(m, n, d, seed) -> Problem:
    """Logistic loss f_i(x) = (1/n) sum_j log(1 + exp(b_ij^T x)), r = 0."""
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((m, n, d))
    L_i = np.array([np.linalg.svd(B[i], compute_uv=False)[0] ** 2 / (4.0 * n)
                    for i in range(m)])

    def f(i, x):
        z = x @ B[i].T
        return np.logaddexp(0.0, z).sum(axis=-1) / n

    def grad(i, x):
        z = x @ B[i].T
        sig = 1.0 / (1.0 + np.exp(-z))
        return (sig @ B[i]) / n

    bundle = DataBundle(kind="logistic", params={"m": m, "n": n, "d": d},
                        arrays={"B": B}, seed=seed)
    return Problem(name="logistic", m=m, d=d, L_i=L_i, prox=ZeroProx(),
                   kl_meta=KLMeta(0.5, None), bundle=bundle, _f=f, _grad=grad)


def make_phase_retrieval(m, n, d, noise_sd, seed) -> Problem:
    """Magnitude-only recovery: f_i(x) = (1/2n) sum_j (|a_ij^T x| - y_ij)^2.

    The gradient uses sign(a^T x) with sign(0) := 0; the objective is
    nonsmooth only on a measure-zero set and is treated as smooth.
    """
    rng = np.random.default_rng(seed)
    x_star = rng.standard_normal(d)
    x_star /= np.linalg.norm(x_star)
    A = rng.standard_normal((m, n, d))
    y = np.abs(np.einsum("inj,j->in", A, x_star)) \
        + noise_sd * rng.standard_normal((m, n))
    # |a^T x| is 1-Lipschitz with unit gradient a.e., so the local loss
    # curvature is bounded by that of the quadratic in a^T x
    L_i = np.array([np.linalg.svd(A[i], compute_uv=False)[0] ** 2 / n
                    for i in range(m)])

    def f(i, x):
        z = x @ A[i].T
        return 0.5 / n * np.square(np.abs(z) - y[i]).sum(axis=-1)

    def grad(i, x):
        z = x @ A[i].T
        coef = (np.abs(z) - y[i]) * np.sign(z)
        return (coef @ A[i]) / n

    bundle = DataBundle(kind="phase_retrieval",
                        params={"m": m, "n": n, "d": d, "noise_sd": noise_sd},
                        arrays={"A": A, "y": y, "x_star": x_star}, seed=seed)
    return Problem(name="phase_retrieval", m=m, d=d, L_i=L_i, prox=ZeroProx(),
                   kl_meta=KLMeta(0.5, None), bundle=bundle, _f=f, _grad=grad)


def make_synthetic_kl(theta: float, m: int, seed: int,
                      region_radius: float = 2.0) -> Problem:
    """One-dimensional family |x|^p / p with a tunable KL exponent.

    p = 1/(1 - theta) makes |u'(x)| = p^theta * |u(x)|^theta at the
    minimizer 0, so the exponent is exactly theta with coefficient
    p^theta. Only theta >= 1/2 (p >= 2) keeps the gradient Lipschitz
    near 0; the smoothness constant is local to |x| <= region_radius.
    """
    if not 0.0 < theta < 1.0:
        raise BadHyper("theta must be in (0, 1)")
    p = 1.0 / (1.0 - theta)
    if p < 2.0:
        raise NotSmooth("theta < 1/2 makes |x|^p non-smooth at 0")
    L_local = (p - 1.0) * region_radius ** (p - 2.0)
    L_i = np.full(m, L_local)

    def f(i, x):
        return (np.abs(x) ** p / p).sum(axis=-1)

    def grad(i, x):
        return np.sign(x) * np.abs(x) ** (p - 1.0)

    bundle = DataBundle(kind="synthetic_kl",
                        params={"theta": theta, "m": m, "p": p,
                                "region_radius": region_radius},
                        arrays={"x_star": np.zeros(1)}, seed=seed)
    return Problem(name="synthetic_kl", m=m, d=1, L_i=L_i, prox=ZeroProx(),
                   kl_meta=KLMeta(theta, p**theta), bundle=bundle,
                   _f=f, _grad=grad)


# ---------------------------------------------------------------------------
# bundle serialization: one header line with shapes/seed/params, then the
# arrays in the plain-text matrix format, each introduced by a name line

def export_bundle(path, bundle: DataBundle) -> None:
    with open(path, "w") as fh:
        params = " ".join(f"{k}={v}" for k, v in sorted(bundle.params.items()))
        fh.write(f"# kind={bundle.kind} seed={bundle.seed} {params}\n")
        for name in sorted(bundle.arrays):
            arr = np.asarray(bundle.arrays[name], dtype=float)
            shape = " ".join(str(s) for s in arr.shape)
            fh.write(f"@ {name} {shape}\n")
            fh.write(textio.matrix_to_text(arr.reshape(-1, arr.shape[-1])
                                           if arr.ndim > 1 else arr.reshape(1, -1)))


def import_bundle(path) -> DataBundle:
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = lines[0]
    if not header.startswith("# kind="):
        raise ValueError("not a bundle file")
    fields = dict(tok.split("=", 1) for tok in header[2:].split())
    kind = fields.pop("kind")
    seed = int(fields.pop("seed"))
    params = {k: _parse_scalar(v) for k, v in fields.items()}
    arrays = {}
    i = 1
    while i < len(lines):
        if not lines[i].startswith("@ "):
            i += 1
            continue
        parts = lines[i].split()
        name, shape = parts[1], tuple(int(s) for s in parts[2:])
        nrows = int(np.prod(shape[:-1])) if len(shape) > 1 else 1
        block = lines[i + 1:i + 1 + nrows]
        arrays[name] = textio.matrix_from_lines(block).reshape(shape)
        i += 1 + nrows
    return DataBundle(kind=kind, params=params, arrays=arrays, seed=seed)


def _parse_scalar(s: str):
    try:
        f = float(s)
    except ValueError:
        return s
    return int(f) if f.is_integer() and "." not in s and "e" not in s.lower() else f

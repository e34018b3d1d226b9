"""Zero-mean Gaussian process evidence, gradients, fitting and BIC.

Hyperparameters live in an unconstrained vector aligned with
:func:`hrkl.grammar.param_layout`: variances, lengthscales, periods and the
noise variance are stored as logs, the LIN shift ``c`` as is.  Base kernels::

    SE(x, x')  = s * exp(-(x - x')^2 / (2 l^2))
    PER(x, x') = s * exp(-2 sin^2(pi (x - x') / p) / l^2)
    LIN(x, x') = s * (x - c) (x' - c)

Observation noise ``sn * I`` is always added on top of the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack
from scipy.optimize import minimize

from .errors import FitError, NumericError
from .grammar import BASE_PARAMS, KernelExpr, Base, Sum, canonical_form, canonicalize, param_layout

LOG_2PI = math.log(2 * math.pi)
JITTER_START = 1e-8
JITTER_MAX = 1e-2

# Box constraints for the optimizer, by parameter role.
BOUNDS = {
    "log_variance": (-12.0, 7.0),
    "log_lengthscale": (-7.0, 7.0),
    "log_period": (math.log(0.02), math.log(10.0)),
    "shift": (-10.0, 10.0),
    "log_noise": (math.log(1e-6), math.log(10.0)),
}


@dataclass(frozen=True)
class FitConfig:
    restarts: int = 3
    max_iters: int = 200
    tol: float = 1e-6
    seed: int = 0
    gtol: float = 1e-5


@dataclass(frozen=True)
class FittedModel:
    kernel: str
    params: np.ndarray
    lml: float
    bic: float
    restarts_used: int
    n: int
    init_lml: float = float("nan")
    diagnostics: list = field(default_factory=list, compare=False)

    @property
    def param_count(self) -> int:
        return len(self.params)


def bic(lml: float, param_count: int, n: int) -> float:
    """Bayesian information criterion, ``-2 lml + |M| log n`` (lower is better)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return -2.0 * lml + param_count * math.log(n)


class _Geometry:
    """Input-dependent quantities shared by every evaluation on one series.

    SE and PER only depend on ``|x - x'|``, so they are evaluated once per
    distinct lag and scattered back through ``inv``.
    """

    def __init__(self, x):
        self.x = np.asarray(x, dtype=float)
        n = len(self.x)
        lags, inv = np.unique(np.abs(self.x[:, None] - self.x[None, :]), return_inverse=True)
        self.lags = lags
        self.inv = inv.reshape(n, n)
        self.sqlags = lags**2
        self.pilags = np.pi * lags
        self.eye = np.eye(n)


def _base(name, p, geo, grad):
    inv = geo.inv
    if name == "SE":
        s, ell2 = math.exp(p[0]), math.exp(2 * p[1])
        r2 = geo.sqlags / ell2
        k = s * np.exp(-0.5 * r2)
        K = np.take(k, inv)
        return K, ([K, np.take(k * r2, inv)] if grad else None)
    if name == "PER":
        s, ell2, period = math.exp(p[0]), math.exp(2 * p[1]), math.exp(p[2])
        u = geo.pilags / period
        sin2 = np.sin(u) ** 2
        k = s * np.exp(-2.0 * sin2 / ell2)
        K = np.take(k, inv)
        if not grad:
            return K, None
        d_ell = np.take(k * (4.0 / ell2) * sin2, inv)
        d_period = np.take(k * (2.0 / ell2) * u * np.sin(2 * u), inv)
        return K, [K, d_ell, d_period]
    s, c = math.exp(p[0]), p[1]
    xc = geo.x - c
    K = s * np.outer(xc, xc)
    if not grad:
        return K, None
    return K, [K, -s * (xc[:, None] + xc[None, :])]


def _evaluate(e, theta, geo, offset, grad):
    if isinstance(e, Base):
        k = len(BASE_PARAMS[e.name])
        K, g = _base(e.name, theta[offset : offset + k], geo, grad)
        return K, g, offset + k
    Kl, gl, offset = _evaluate(e.left, theta, geo, offset, grad)
    Kr, gr, offset = _evaluate(e.right, theta, geo, offset, grad)
    if isinstance(e, Sum):
        return Kl + Kr, (gl + gr if grad else None), offset
    if not grad:
        return Kl * Kr, None, offset
    return Kl * Kr, [g * Kr for g in gl] + [Kl * g for g in gr], offset


def _check_theta(e, theta):
    theta = np.asarray(theta, dtype=float)
    count = param_layout(e).count
    if theta.shape != (count,):
        raise ValueError(f"{canonicalize(e)} needs {count} hyperparameters, got {theta.shape}")
    return theta


def covariance(e: KernelExpr, theta, x) -> np.ndarray:
    """Noisy covariance ``k_e(x_i, x_j) + sn * [i == j]``."""
    theta = _check_theta(e, theta)
    geo = _Geometry(x)
    K, _, _ = _evaluate(e, theta, geo, 0, False)
    K = K + math.exp(theta[-1]) * geo.eye
    if not np.all(np.isfinite(K)):
        raise NumericError(f"non-finite covariance for {canonicalize(e)} at theta={theta.tolist()}")
    return K


def cholesky(K):
    """Lower Cholesky factor with the jitter escalation policy.

    Returns ``(L, jitter)``.  Tries the matrix as given, then adds 1e-8 to
    the diagonal and grows it tenfold up to 1e-2 before giving up.
    """
    L, info = lapack.dpotrf(K, lower=1, clean=1)
    if info == 0:
        return L, 0.0
    jitter = JITTER_START
    diag = np.arange(len(K))
    while jitter <= JITTER_MAX * (1 + 1e-9):
        Kj = K.copy()
        Kj[diag, diag] += jitter
        L, info = lapack.dpotrf(Kj, lower=1, clean=1)
        if info == 0:
            return L, jitter
        jitter *= 10
    raise NumericError(f"Cholesky failed even with jitter {JITTER_MAX}")


class GPObjective:
    """Log marginal likelihood of one (kernel, series) pair and its gradient."""

    def __init__(self, e: KernelExpr, x, y):
        self.e = e
        self.name = canonicalize(e)
        self.layout = param_layout(e)
        self.geo = _Geometry(x)
        self.y = np.asarray(y, dtype=float)
        self.n = len(self.y)
        self._diag = np.diag_indices(self.n)

    def _check(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.layout.count,):
            raise ValueError(f"{self.name} needs {self.layout.count} hyperparameters, got {theta.shape}")
        return theta

    def _factor(self, theta, grad):
        K, grads, _ = _evaluate(self.e, theta, self.geo, 0, grad)
        noise = math.exp(theta[-1])
        K = K + noise * self.geo.eye
        if not np.all(np.isfinite(K)):
            raise NumericError(f"non-finite covariance for {self.name} at theta={theta.tolist()}")
        L, _ = cholesky(K)
        return L, grads, noise

    def lml(self, theta) -> float:
        theta = self._check(theta)
        L, _, _ = self._factor(theta, False)
        alpha, _ = lapack.dpotrs(L, self.y, lower=1)
        return float(
            -0.5 * self.y @ alpha - np.log(np.diag(L)).sum() - 0.5 * self.n * LOG_2PI
        )

    def lml_and_grad(self, theta):
        theta = self._check(theta)
        L, grads, noise = self._factor(theta, True)
        alpha, _ = lapack.dpotrs(L, self.y, lower=1)
        value = float(-0.5 * self.y @ alpha - np.log(np.diag(L)).sum() - 0.5 * self.n * LOG_2PI)
        Kinv, info = lapack.dpotri(L, lower=1)
        if info != 0:
            raise NumericError(f"inverse failed for {self.name}")
        # dpotri writes the lower triangle; the upper one is still L's zeros
        W = np.outer(alpha, alpha) - Kinv - Kinv.T
        W[self._diag] += Kinv[self._diag]
        w = W.ravel()
        g = np.empty(len(theta))
        for i, dK in enumerate(grads):
            g[i] = 0.5 * np.dot(dK.ravel(), w)
        g[-1] = 0.5 * noise * np.trace(W)
        return value, g


def log_marginal_likelihood(e: KernelExpr, theta, series) -> float:
    """``-1/2 y'K^-1 y - 1/2 log|K| - n/2 log 2pi`` for a series (or ``(x, y)``)."""
    x, y = _xy(series)
    return GPObjective(e, x, y).lml(theta)


def lml_gradient(e: KernelExpr, theta, series) -> np.ndarray:
    """Gradient of the log marginal likelihood in the log-parameter space."""
    x, y = _xy(series)
    return GPObjective(e, x, y).lml_and_grad(theta)[1]


def _xy(series):
    if hasattr(series, "x"):
        return series.x, series.y
    x, y = series
    return x, y


def bounds_for(e: KernelExpr):
    return [BOUNDS[role] for role in param_layout(e).roles]


def initial_theta(e: KernelExpr, rng: np.random.Generator) -> np.ndarray:
    """Draw one restart's starting point (clipped into the box)."""
    theta = []
    for role in param_layout(e).roles:
        if role == "log_variance":
            v = rng.normal(0.0, 1.0)
        elif role == "log_lengthscale":
            v = rng.normal(math.log(0.2), 1.0)
        elif role == "log_period":
            v = rng.uniform(math.log(0.05), math.log(0.5))
        elif role == "shift":
            v = rng.uniform(0.0, 1.0)
        else:
            v = rng.normal(math.log(0.1), 1.0)
        theta.append(v)
    lo, hi = np.array(bounds_for(e)).T
    return np.clip(np.array(theta), lo, hi)


_FAILED = 1e25


def fit(e: KernelExpr, series, config: FitConfig = FitConfig(), rng=None) -> FittedModel:
    """Maximize the evidence over hyperparameters; keep the best of the restarts.

    Each restart runs bounded L-BFGS-B from a random start.  Points where
    the covariance cannot be factorized are reported to the optimizer as a
    huge objective so the line search backs away from them.
    """
    e = canonical_form(e)  # params follow the leaf order of the reported kernel
    x, y = _xy(series)
    obj = GPObjective(e, x, y)
    bounds = bounds_for(e)
    if rng is None:
        rng = np.random.default_rng(config.seed)

    def negated(theta):
        try:
            v, g = obj.lml_and_grad(theta)
        except NumericError:
            return _FAILED, np.zeros_like(theta)
        if not np.isfinite(v) or not np.all(np.isfinite(g)):
            return _FAILED, np.zeros_like(theta)
        return -v, -g

    best, diagnostics, used = None, [], 0
    for r in range(config.restarts):
        theta0 = initial_theta(e, rng)
        try:
            init = obj.lml(theta0)
        except NumericError as exc:
            diagnostics.append({"restart": r, "error": f"init: {exc}"})
            continue
        res = minimize(
            negated,
            theta0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": config.max_iters, "ftol": config.tol, "gtol": config.gtol},
        )
        theta = res.x
        try:
            value = obj.lml(theta)
        except NumericError as exc:
            diagnostics.append({"restart": r, "error": f"final: {exc}"})
            continue
        if not np.isfinite(value):
            diagnostics.append({"restart": r, "error": "non-finite evidence"})
            continue
        if value < init:
            theta, value = theta0, init
        used += 1
        diagnostics.append({"restart": r, "lml": value, "init_lml": init, "iters": int(res.nit)})
        if best is None or value > best[1]:
            best = (theta, value, init)

    if best is None:
        raise FitError(f"all {config.restarts} restarts failed for {obj.name}", diagnostics)
    theta, value, init = best
    count = len(theta)
    return FittedModel(
        kernel=obj.name,
        params=np.array(theta),
        lml=value,
        bic=bic(value, count, obj.n),
        restarts_used=used,
        n=obj.n,
        init_lml=init,
        diagnostics=diagnostics,
    )

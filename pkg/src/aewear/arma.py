"""Box-Jenkins identification, exact-likelihood estimation and whiteness checks.

Conventions
-----------
The model is ``X_t = c0 + sum_i phi_i X_{t-i} + e_t + sum_j theta_j e_{t-j}`` with
Gaussian innovations of variance ``sigma2``. Causality and invertibility are the
root conditions on ``1 - sum phi_i z^i`` and ``1 + sum theta_j z^j``.

Estimation maximizes the exact Gaussian likelihood, evaluated with the
innovations algorithm applied to the transformed process of Brockwell & Davis
(ITSF, 2nd ed., section 3.3). The mean is concentrated out by generalized least
squares, ``sigma2`` is profiled, and the remaining coefficients are optimized
over an unconstrained partial-autocorrelation parametrization
(``r = tanh(u)`` followed by the Durbin-Levinson step-up), so every iterate is
causal and invertible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit
from scipy import optimize
from scipy.signal import lfilter

from .numerics import chi_square_sf, kolmogorov_isf, rng

GTOL = 1e-8
MAX_ITER = 500
# BFGS frequently stops with "precision loss" once the finite-difference
# gradient is at its noise floor; such stops count as converged below this norm.
GTOL_PRECISION_LOSS = 1e-5
DEFAULT_MAX_P = 5
DEFAULT_MAX_Q = 5
DEFAULT_LB_LAGS = (5, 10, 15, 20)

_LOG_2PI = math.log(2.0 * math.pi)


class ArmaConvergenceError(RuntimeError):
    """Optimizer hit the iteration cap; carries the best point seen."""

    def __init__(self, message, p, q, best_params=None, best_nll=None, grad_norm=None):
        super().__init__(message)
        self.p = p
        self.q = q
        self.best_params = best_params
        self.best_nll = best_nll
        self.grad_norm = grad_norm


def _step_down(a: np.ndarray) -> np.ndarray | None:
    # partial autocorrelations of AR coefficients a_1..a_k by the Schur-Cohn
    # step-down; None once any |r| >= 1
    a = np.array(a, dtype=float)
    r = np.zeros(a.size)
    for j in range(a.size - 1, -1, -1):
        rj = a[j]
        if not abs(rj) < 1.0:
            return None
        r[j] = rj
        if j:
            a[:j] = (a[:j] + rj * a[j - 1::-1]) / (1.0 - rj * rj)
    return r


def _roots_outside(poly_coeffs: np.ndarray) -> bool:
    # poly_coeffs are c_1..c_k of 1 + c_1 z + ... + c_k z^k; all roots lie
    # outside the unit circle iff every step-down partial has |r| < 1
    r = _step_down(-np.asarray(poly_coeffs, dtype=float))
    return r is not None and bool(np.all(np.abs(r) < 1.0 - 1e-12))


def is_causal(ar_coeffs) -> bool:
    return _roots_outside(-np.asarray(ar_coeffs, dtype=float))


def is_invertible(ma_coeffs) -> bool:
    return _roots_outside(np.asarray(ma_coeffs, dtype=float))


@dataclass(frozen=True)
class ArmaSpec:
    ar_coeffs: tuple = ()
    ma_coeffs: tuple = ()
    intercept: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ar_coeffs", tuple(float(v) for v in self.ar_coeffs))
        object.__setattr__(self, "ma_coeffs", tuple(float(v) for v in self.ma_coeffs))
        if not self.sigma2 > 0:
            raise ValueError("innovation variance must be positive")
        if not is_causal(self.ar_coeffs):
            raise ValueError("AR polynomial has a root on or inside the unit circle")
        if not is_invertible(self.ma_coeffs):
            raise ValueError("MA polynomial has a root on or inside the unit circle")

    @property
    def p(self) -> int:
        return len(self.ar_coeffs)

    @property
    def q(self) -> int:
        return len(self.ma_coeffs)

    @property
    def mean(self) -> float:
        return self.intercept / (1.0 - sum(self.ar_coeffs))

    @property
    def stationary_variance(self) -> float:
        phi = np.array(self.ar_coeffs)
        theta = np.array(self.ma_coeffs)
        return float(_arma_acov(phi, theta, 0)[0] * self.sigma2)


@dataclass
class ArmaFit:
    spec: ArmaSpec
    residuals: np.ndarray
    log_likelihood: float
    bic: float
    std_errors: np.ndarray  # order: intercept, ar..., ma...
    n_obs: int
    sample_variance: float
    init_log_likelihood: float = float("nan")
    n_iter: int = 0
    grad_norm: float = 0.0

    @property
    def p(self):
        return self.spec.p

    @property
    def q(self):
        return self.spec.q

    @property
    def sigma2(self):
        return self.spec.sigma2

    @property
    def param_names(self) -> list[str]:
        return (["intercept"] + [f"ar{i}" for i in range(1, self.p + 1)]
                + [f"ma{j}" for j in range(1, self.q + 1)])

    @property
    def params(self) -> np.ndarray:
        return np.array([self.spec.intercept, *self.spec.ar_coeffs, *self.spec.ma_coeffs])

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "coefficients": dict(zip(self.param_names, map(float, self.params))),
            "std_errors": dict(zip(self.param_names, map(float, self.std_errors))),
            "sigma2": float(self.sigma2),
            "log_likelihood": float(self.log_likelihood),
            "bic": float(self.bic),
            "n_obs": int(self.n_obs),
        }


@dataclass
class BicGrid:
    max_p: int
    max_q: int
    bic_values: np.ndarray  # nan marks a failed cell
    best: tuple[int, int]
    fits: dict = field(default_factory=dict, repr=False)
    errors: dict = field(default_factory=dict, repr=False)

    @property
    def best_fit(self) -> ArmaFit:
        return self.fits[self.best]

    def to_csv(self) -> str:
        header = "p," + ",".join(f"q{j}" for j in range(self.max_q + 1))
        rows = [header]
        for i in range(self.max_p + 1):
            cells = ["" if np.isnan(v) else repr(float(v)) for v in self.bic_values[i]]
            rows.append(f"{i}," + ",".join(cells))
        return "\n".join(rows) + "\n"


# -- numba kernels ------------------------------------------------------------


@njit(cache=True)
def _pacf_to_coeffs(u):
    k = u.size
    a = np.zeros(k)
    tmp = np.zeros(k)
    for j in range(k):
        r = math.tanh(u[j])
        for i in range(j):
            tmp[i] = a[i] - r * a[j - 1 - i]
        for i in range(j):
            a[i] = tmp[i]
        a[j] = r
    return a


@njit(cache=True)
def _arma_acov(phi, theta, nlags):
    """Autocovariances gamma(0..nlags) of a causal ARMA with unit innovation variance."""
    p = phi.size
    q = theta.size
    th = np.zeros(q + 1)
    th[0] = 1.0
    th[1:] = theta
    psi = np.zeros(q + 1)
    psi[0] = 1.0
    for j in range(1, q + 1):
        s = th[j]
        for i in range(1, min(j, p) + 1):
            s += phi[i - 1] * psi[j - i]
        psi[j] = s
    size = max(nlags, p) + 1
    rhs = np.zeros(size)
    for k in range(min(q, size - 1) + 1):
        s = 0.0
        for j in range(k, q + 1):
            s += th[j] * psi[j - k]
        rhs[k] = s
    A = np.zeros((p + 1, p + 1))
    for k in range(p + 1):
        A[k, k] += 1.0
        for i in range(1, p + 1):
            A[k, abs(k - i)] -= phi[i - 1]
    g = np.zeros(size)
    g[: p + 1] = np.linalg.solve(A, rhs[: p + 1].copy())
    for k in range(p + 1, size):
        s = rhs[k]
        for i in range(1, p + 1):
            s += phi[i - 1] * g[k - i]
        g[k] = s
    return g[: nlags + 1]


@njit(cache=True)
def _kappa_tables(phi, theta, m):
    # covariances of the transformed process W, indexed by lag: times both <= m,
    # straddling m (upper time <= 2m), and both > m
    p = phi.size
    q = theta.size
    gam = _arma_acov(phi, theta, 2 * m + p + 1)
    th0 = np.zeros(q + 1)
    th0[0] = 1.0
    th0[1:] = theta
    low = gam[: 2 * m + 1].copy()
    mid = np.zeros(2 * m + 1)
    for h in range(2 * m + 1):
        s = gam[h]
        for r in range(1, p + 1):
            s -= phi[r - 1] * gam[abs(r - h)]
        mid[h] = s
    high = np.zeros(q + 1)
    for h in range(q + 1):
        s = 0.0
        for r in range(q - h + 1):
            s += th0[r] * th0[r + h]
        high[h] = s
    return low, mid, high


@njit(cache=True)
def _innovations(x, phi, theta):
    """One-step innovations of the rows of ``x`` and their relative variances ``v``.

    ``u[k, t] = x[k, t] - E[x[k, t] | past]`` and ``Var(u[k, t]) = sigma2 * v[t]``.
    """
    p = phi.size
    q = theta.size
    m = max(p, q)
    n = x.shape[1]
    low, mid, high = _kappa_tables(phi, theta, m)
    TH = np.zeros((n, m + 1))
    v = np.zeros(n)
    v[0] = low[0] if m > 0 else high[0]
    for t in range(1, n):
        wt = t if t < m else q
        kstart = 0 if t < m else t - q
        for k in range(kstart, t):
            # kappa at 1-based times (t + 1, k + 1), k < t
            h = t - k
            if t + 1 <= m:
                s = low[h]
            elif k + 1 <= m:
                s = mid[h] if t + 1 <= 2 * m else 0.0
            else:
                s = high[h] if h <= q else 0.0
            wk = k if k < m else q
            jlo = max(k - wk, t - wt)
            if jlo < 0:
                jlo = 0
            for j in range(jlo, k):
                s -= TH[k, k - j] * TH[t, t - j] * v[j]
            TH[t, t - k] = s / v[k]
        s = low[0] if t + 1 <= m else high[0]
        for j in range(max(0, t - wt), t):
            s -= TH[t, t - j] * TH[t, t - j] * v[j]
        v[t] = s
    u = np.zeros_like(x)
    for row in range(x.shape[0]):
        u[row, 0] = x[row, 0]
        for t in range(1, n):
            pred = 0.0
            if t < m:
                for j in range(1, t + 1):
                    pred += TH[t, j] * u[row, t - j]
            else:
                for i in range(1, p + 1):
                    pred += phi[i - 1] * x[row, t - i]
                for j in range(1, q + 1):
                    pred += TH[t, j] * u[row, t - j]
            u[row, t] = x[row, t] - pred
    return u, v


@njit(cache=True)
def _concentrated(x, phi, theta):
    """Per-observation profile objective, GLS mean, sigma2 and standardized residuals."""
    n = x.size
    X = np.empty((2, n))
    X[0] = x
    X[1] = 1.0
    u, v = _innovations(X, phi, theta)
    a = 0.0
    b = 0.0
    for t in range(n):
        a += u[0, t] * u[1, t] / v[t]
        b += u[1, t] * u[1, t] / v[t]
    mu = a / b
    e = np.empty(n)
    S = 0.0
    logv = 0.0
    for t in range(n):
        e[t] = (u[0, t] - mu * u[1, t]) / math.sqrt(v[t])
        S += e[t] * e[t]
        logv += math.log(v[t])
    sigma2 = S / n
    f = 0.5 * (math.log(sigma2) + logv / n)
    return f, mu, sigma2, e


@njit(cache=True)
def _split(z, p, q):
    phi = _pacf_to_coeffs(z[:p])
    theta = -_pacf_to_coeffs(z[p:p + q])
    return phi, theta


@njit(cache=True)
def _objective(z, x, p, q):
    phi, theta = _split(z, p, q)
    return _concentrated(x, phi, theta)[0]


@njit(cache=True)
def _objective_grad(z, x, p, q, h):
    f0 = _objective(z, x, p, q)
    k = z.size
    g = np.zeros(k)
    zz = z.copy()
    for i in range(k):
        step = h * max(1.0, abs(z[i]))
        zz[i] = z[i] + step
        fp = _objective(zz, x, p, q)
        zz[i] = z[i] - step
        fm = _objective(zz, x, p, q)
        zz[i] = z[i]
        g[i] = (fp - fm) / (2.0 * step)
    return f0, g


@njit(cache=True)
def _full_nll(theta_full, x, p, q):
    # negative log-likelihood with explicit mean, sigma2 profiled
    mu = theta_full[0]
    phi, theta = _split(theta_full[1:], p, q)
    n = x.size
    X = np.empty((1, n))
    X[0] = x - mu
    u, v = _innovations(X, phi, theta)
    S = 0.0
    logv = 0.0
    for t in range(n):
        S += u[0, t] * u[0, t] / v[t]
        logv += math.log(v[t])
    sigma2 = S / n
    return 0.5 * (n * (_LOG_2PI + 1.0 + math.log(sigma2)) + logv)


# -- reparametrization helpers ------------------------------------------------


def coeffs_to_pacf(a: Sequence[float]) -> np.ndarray:
    """Inverse step-down of :func:`_pacf_to_coeffs`; returns the unconstrained ``u``."""
    r = _step_down(np.asarray(a, dtype=float))
    if r is None:
        raise ValueError("coefficients are outside the stationary region")
    return np.arctanh(r)


def _shrink_into_region(a: np.ndarray, limit: float = 0.99) -> np.ndarray:
    # scales roots outward (a_i -> a_i c^i) until all partials satisfy |r| < limit
    a = np.asarray(a, dtype=float)
    c = 1.0
    for _ in range(200):
        cand = a * c ** np.arange(1, a.size + 1)
        try:
            u = coeffs_to_pacf(cand)
        except ValueError:
            c *= 0.95
            continue
        if np.all(np.abs(np.tanh(u)) < limit):
            return cand
        c *= 0.95
    return np.zeros_like(a)


# -- identification -----------------------------------------------------------


def _as_series(series) -> np.ndarray:
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be 1-d")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    return y


def acf(series: Sequence[float], max_lag: int) -> np.ndarray:
    """Biased sample autocorrelation at lags 0..max_lag."""
    y = _as_series(series)
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if y.size < max_lag + 2:
        raise ValueError("series too short for the requested lags")
    d = y - y.mean()
    denom = d @ d
    if denom <= 0 or np.ptp(y) == 0:
        raise ValueError("degenerate series: constant")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = (d[:-k] @ d[k:]) / denom
    return out


def durbin_levinson(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve the Yule-Walker equations for autocorrelations ``rho[0..K]``.

    Returns ``(partials, ar_coeffs_order_K, relative_error_variance)``.
    """
    K = rho.size - 1
    phi = np.zeros(K)
    partials = np.zeros(K)
    v = 1.0
    for k in range(1, K + 1):
        num = rho[k] - phi[: k - 1] @ rho[k - 1:0:-1]
        if v <= 1e-14:
            raise ValueError("singular Toeplitz system in Durbin-Levinson")
        a = num / v
        prev = phi[: k - 1].copy()
        phi[: k - 1] = prev - a * prev[::-1]
        phi[k - 1] = a
        partials[k - 1] = a
        v *= 1.0 - a * a
    return partials, phi, v


def pacf(series: Sequence[float], max_lag: int) -> np.ndarray:
    """Sample partial autocorrelation at lags 1..max_lag."""
    return durbin_levinson(acf(series, max_lag))[0]


# -- estimation ---------------------------------------------------------------


def hannan_rissanen(y: np.ndarray, p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Two-stage regression start values for (phi, theta) on a demeaned series."""
    n = y.size
    if p + q == 0:
        return np.zeros(0), np.zeros(0)
    if q == 0:
        lag_cols = [y[p - i:n - i] for i in range(1, p + 1)]
        X = np.column_stack(lag_cols)
        beta = np.linalg.lstsq(X, y[p:], rcond=None)[0]
        return beta, np.zeros(0)
    long_order = int(min(max(p + q + 1, math.ceil(10 * math.log10(n))), n // 4))
    _, a, _ = durbin_levinson(acf(y, long_order))
    eps = np.zeros(n)
    eps[long_order:] = y[long_order:] - sum(
        a[i - 1] * y[long_order - i:n - i] for i in range(1, long_order + 1))
    start = long_order + q
    cols = [y[start - i:n - i] for i in range(1, p + 1)]
    cols += [eps[start - j:n - j] for j in range(1, q + 1)]
    beta = np.linalg.lstsq(np.column_stack(cols), y[start:], rcond=None)[0]
    return beta[:p], beta[p:]


def _initial_z(y: np.ndarray, p: int, q: int) -> np.ndarray:
    phi0, theta0 = hannan_rissanen(y, p, q)
    phi0 = _shrink_into_region(phi0) if p else phi0
    theta0 = -_shrink_into_region(-theta0) if q else theta0
    return np.concatenate([coeffs_to_pacf(phi0), coeffs_to_pacf(-theta0)])


def _std_errors(x, mu, z, p, q, center, scale):
    # Hessian of the full negative log-likelihood of the standardized series in
    # (mu, u) space, mapped to (intercept, phi, theta) on the data scale by the
    # delta method
    w = np.concatenate([[mu], z])
    k = w.size
    steps = np.full(k, 1e-4)
    steps[0] = 1e-3
    f = lambda v: _full_nll(v, x, p, q)
    H = np.empty((k, k))
    f0 = f(w)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = steps[i]
        H[i, i] = (f(w + ei) - 2 * f0 + f(w - ei)) / steps[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = steps[j]
            H[i, j] = H[j, i] = (f(w + ei + ej) - f(w + ei - ej) - f(w - ei + ej)
                                 + f(w - ei - ej)) / (4 * steps[i] * steps[j])
    cov_w = np.linalg.pinv(H)

    def natural(v):
        phi, theta = _split(v[1:], p, q)
        mean = center + scale * v[0]
        return np.concatenate([[mean * (1.0 - phi.sum())], phi, theta])

    J = np.empty((k, k))
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = steps[i]
        J[:, i] = (natural(w + ei) - natural(w - ei)) / (2 * steps[i])
    cov = J @ cov_w @ J.T
    return np.sqrt(np.abs(np.diag(cov)))


def fit_arma(series: Sequence[float], p: int, q: int) -> ArmaFit:
    """Exact Gaussian maximum likelihood fit of an ARMA(p, q) with intercept."""
    y = _as_series(series)
    n = y.size
    if p < 0 or q < 0:
        raise ValueError("orders must be nonnegative")
    if n <= 10 * (p + q + 1):
        raise ValueError(f"series of length {n} too short for ARMA({p},{q})")
    if np.ptp(y) == 0:
        raise ValueError("degenerate series: constant")
    ybar = y.mean()
    sd = y.std()
    x = (y - ybar) / sd  # optimization runs on the standardized series

    z0 = _initial_z(x, p, q)
    init_f = _objective(z0, x, p, q)
    n_iter = 0
    gnorm = 0.0
    if p + q:
        res = optimize.minimize(
            _objective_grad, z0, args=(x, p, q, 1e-5), jac=True, method="BFGS",
            options={"gtol": GTOL, "maxiter": MAX_ITER},
        )
        z = res.x
        gnorm = float(np.max(np.abs(res.jac)))
        n_iter = int(res.nit)
        converged = res.success or (res.status == 2 and gnorm < GTOL_PRECISION_LOSS)
        if not converged or res.fun > init_f:
            phi_b, theta_b = _split(z, p, q)
            raise ArmaConvergenceError(
                f"ARMA({p},{q}) did not converge: {res.message}", p, q,
                best_params=(phi_b, theta_b), best_nll=res.fun * n, grad_norm=gnorm)
    else:
        z = z0
    phi, theta = _split(z, p, q)
    f, mu_std, sigma2_std, e = _concentrated(x, phi, theta)
    mu = ybar + sd * mu_std
    sigma2 = sigma2_std * sd * sd
    resid = e * sd
    loglik = -n * (f + 0.5 * (_LOG_2PI + 1.0)) - n * math.log(sd)
    init_loglik = -n * (init_f + 0.5 * (_LOG_2PI + 1.0)) - n * math.log(sd)

    se = _std_errors(x, mu_std, z, p, q, ybar, sd)
    intercept = mu * (1.0 - phi.sum())
    spec = ArmaSpec(tuple(phi), tuple(theta), intercept, sigma2)
    sample_var = float(np.mean((y - ybar) ** 2))
    return ArmaFit(
        spec=spec,
        residuals=resid,
        log_likelihood=float(loglik),
        bic=bic_value(n, p, q, float(np.mean(resid ** 2)), sample_var),
        std_errors=se,
        n_obs=n,
        sample_variance=sample_var,
        init_log_likelihood=float(init_loglik),
        n_iter=n_iter,
        grad_norm=gnorm,
    )


def bic_value(n: int, p: int, q: int, sigma2: float, sample_variance: float) -> float:
    """Four-term BIC of an ARMA(p, q) fit; the last two terms vanish when p + q = 0."""
    if not sigma2 > 0:
        raise ValueError("residual variance must be positive")
    if not sample_variance > 0:
        raise ValueError("sample variance must be positive")
    k = p + q
    val = n * math.log(sigma2) + k * math.log(n)
    if k:
        val += -(n - k) * math.log(1.0 - k / n)
        val += k * math.log((sample_variance / sigma2) / k)
    return val


def bic(fit: ArmaFit, sample_variance: float) -> float:
    sigma2 = float(np.mean(fit.residuals ** 2))
    return bic_value(fit.n_obs, fit.p, fit.q, sigma2, sample_variance)


def bic_grid_search(series: Sequence[float], max_p: int = DEFAULT_MAX_P,
                    max_q: int = DEFAULT_MAX_Q) -> BicGrid:
    """Fit every ARMA(p, q) with p <= max_p, q <= max_q and pick the minimum BIC.

    Cells whose fit fails are left as NaN. Ties go to the smaller p + q, then the
    smaller p.
    """
    y = _as_series(series)
    if np.ptp(y) == 0:
        raise ValueError("degenerate series: constant")
    values = np.full((max_p + 1, max_q + 1), np.nan)
    fits, errors = {}, {}
    for p in range(max_p + 1):
        for q in range(max_q + 1):
            try:
                fit = fit_arma(y, p, q)
            except (ArmaConvergenceError, ValueError, np.linalg.LinAlgError,
                    ZeroDivisionError) as exc:
                errors[(p, q)] = str(exc)
                continue
            if not np.isfinite(fit.bic):
                errors[(p, q)] = "non-finite BIC"
                continue
            values[p, q] = fit.bic
            fits[(p, q)] = fit
    if not fits:
        raise ArmaConvergenceError("every cell of the BIC grid failed", max_p, max_q)
    best = min(fits, key=lambda pq: (values[pq], pq[0] + pq[1], pq[0]))
    return BicGrid(max_p, max_q, values, best, fits, errors)


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class LjungBoxResult:
    Q: float
    p_value: float
    n_lags: int
    df: int


def ljung_box(residuals: Sequence[float], n_lags: int, fitted_params: int = 0) -> LjungBoxResult:
    e = _as_series(residuals)
    n = e.size
    df = n_lags - fitted_params
    if df <= 0:
        raise ValueError("n_lags must exceed the number of fitted parameters")
    if n <= n_lags + fitted_params:
        raise ValueError("too few residuals for the requested lags")
    rho = acf(e, n_lags)[1:]
    k = np.arange(1, n_lags + 1)
    Q = float(n * (n + 2) * np.sum(rho ** 2 / (n - k)))
    return LjungBoxResult(Q, chi_square_sf(Q, df), n_lags, df)


@dataclass(frozen=True)
class CumulativePeriodogramResult:
    max_deviation: float
    bound: float
    within_band: bool
    cumulative: np.ndarray


def cumulative_periodogram_test(residuals: Sequence[float],
                                level: float = 0.05) -> CumulativePeriodogramResult:
    """Bartlett's cumulative periodogram test for white noise.

    Uses the m = (n - 1) // 2 Fourier frequencies below Nyquist. The band
    half-width is the Kolmogorov quantile with Stephens' finite-sample
    correction, ``c / (sqrt(m - 1) + 0.12 + 0.11 / sqrt(m - 1))``.
    """
    e = _as_series(residuals)
    n = e.size
    if n < 16:
        raise ValueError("cumulative periodogram test needs at least 16 values")
    m = (n - 1) // 2
    spec = np.fft.rfft(e - e.mean())
    power = np.abs(spec[1:m + 1]) ** 2
    cs = np.cumsum(power)
    total = cs[-1]
    if total <= 0:
        raise ValueError("zero total power")
    C = cs / total
    diag = np.arange(1, m + 1) / m
    dev = float(np.max(np.abs(C - diag)))
    root = math.sqrt(m - 1)
    bound = kolmogorov_isf(level) / (root + 0.12 + 0.11 / root)
    return CumulativePeriodogramResult(dev, bound, dev <= bound, C)


def simulate_arma(spec: ArmaSpec, n: int, seed: int) -> np.ndarray:
    """Gaussian ARMA path of length ``n``; 10 (p + q + 1) + 100 leading samples are discarded."""
    if n < 1:
        raise ValueError("n must be positive")
    burn = 10 * (spec.p + spec.q + 1) + 100
    e = rng(seed).normal(0.0, math.sqrt(spec.sigma2), size=n + burn)
    b = np.concatenate([[1.0], spec.ma_coeffs])
    a = np.concatenate([[1.0], -np.asarray(spec.ar_coeffs)])
    return lfilter(b, a, e)[burn:] + spec.mean


def whiteness_report(fit: ArmaFit, lags: Sequence[int] = DEFAULT_LB_LAGS,
                     level: float = 0.05) -> dict:
    k = fit.p + fit.q
    lb = {}
    for h in lags:
        if h > k and fit.n_obs > h + k:
            r = ljung_box(fit.residuals, h, k)
            lb[str(h)] = {"Q": r.Q, "df": r.df, "p_value": r.p_value}
    cp = cumulative_periodogram_test(fit.residuals, level)
    return {
        "ljung_box": lb,
        "cumulative_periodogram": {
            "max_deviation": cp.max_deviation,
            "bound": cp.bound,
            "level": level,
            "within_band": cp.within_band,
        },
    }

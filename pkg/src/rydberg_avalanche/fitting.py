"""Least-squares line-shape and decay fits with a scikit-learn estimator API.

Both regressors take a one-dimensional abscissa (detuning or time) as ``X``
of shape ``(n_samples,)`` or ``(n_samples, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from .exceptions import FitError


@dataclass
class LMResult:
    params: np.ndarray
    covariance: np.ndarray
    cost: float
    n_iter: int
    converged: bool


def levenberg_marquardt(residual, jacobian, p0, max_iter=200, xtol=1e-10, lam0=1e-3):
    """Minimise ``sum(residual(p)**2)`` by damped Gauss-Newton steps.

    Uses Marquardt's diagonal scaling of the normal equations. Converges
    when an accepted step changes every parameter by less than ``xtol``
    relative to its magnitude. The covariance is ``inv(J.T J)`` scaled by the
    residual variance ``cost / (n - p)``.
    """
    p = np.array(p0, dtype=float)
    r = residual(p)
    cost = float(r @ r)
    lam = lam0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        J = jacobian(p)
        g = J.T @ r
        A = J.T @ J
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        accepted = False
        while lam < 1e20:
            try:
                dp = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            p_new = p + dp
            r_new = residual(p_new)
            cost_new = float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new <= cost:
                accepted = True
                break
            lam *= 10
        small = np.all(np.abs(dp) <= xtol * (np.abs(p) + xtol))
        if not accepted:
            # no downhill step even at huge damping: stationary to precision
            converged = bool(small) or cost == 0.0
            break
        p, r, cost = p_new, r_new, cost_new
        lam = max(lam / 10, 1e-15)
        if small:
            converged = True
            break

    J = jacobian(p)
    dof = max(len(r) - len(p), 1)
    try:
        cov = np.linalg.pinv(J.T @ J) * (cost / dof)
    except np.linalg.LinAlgError:
        cov = np.full((len(p), len(p)), np.inf)
    return LMResult(p, cov, cost, it, converged)


def _as_1d(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single feature, got shape {X.shape}")
        X = X[:, 0]
    return X


def lorentzian_dip(x, offset, amplitude, center, fwhm):
    h2 = (0.5 * fwhm) ** 2
    return offset - amplitude * h2 / ((x - center) ** 2 + h2)


def half_depth_width(x, y):
    """Distance between the half-depth crossings around the minimum of ``y``.

    Crossings are linearly interpolated. With only one crossing the width is
    twice its distance from the minimum; with none it is a quarter of the span.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i = int(np.argmin(y))
    half = 0.5 * (y.max() + y[i])
    left = right = None
    j = i
    while j > 0 and y[j - 1] < half:
        j -= 1
    if j > 0:
        left = x[j] + (half - y[j]) * (x[j - 1] - x[j]) / (y[j - 1] - y[j])
    j = i
    while j < len(y) - 1 and y[j + 1] < half:
        j += 1
    if j < len(y) - 1:
        right = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j])
    if left is not None and right is not None:
        return right - left
    if left is not None:
        return 2 * (x[i] - left)
    if right is not None:
        return 2 * (right - x[i])
    return (x.max() - x.min()) / 4


class LorentzianDipRegressor(RegressorMixin, BaseEstimator):
    """Fit ``offset - amplitude * (w/2)**2 / ((x - center)**2 + (w/2)**2)``.

    Parameters
    ----------
    max_iter : int, default=200
        Iteration cap of the Levenberg-Marquardt loop.
    xtol : float, default=1e-10
        Relative parameter change that counts as converged.

    Attributes
    ----------
    offset_, amplitude_, center_, fwhm_ : float
        Fitted parameters; ``fwhm_`` is reported positive.
    errors_ : ndarray of shape (4,)
        One-sigma uncertainties in the order above.
    converged_ : bool
    n_iter_ : int
    residual_norm_ : float
        Euclidean norm of the residual vector.
    """

    def __init__(self, max_iter=200, xtol=1e-10):
        self.max_iter = max_iter
        self.xtol = xtol

    def _initial_guess(self, x, y):
        i = int(np.argmin(y))
        offset = float(y.max())
        return np.array([offset, offset - float(y[i]), float(x[i]), half_depth_width(x, y)])

    def fit(self, X, y):
        X, y = check_X_y(np.reshape(_as_1d(X), (-1, 1)), y, y_numeric=True)
        x = X[:, 0]
        if len(x) < 5:
            raise FitError(f"need at least 5 points for a Lorentzian fit, got {len(x)}")
        if np.ptp(y) == 0:
            raise FitError("cannot fit a Lorentzian to a constant signal")

        p0 = self._initial_guess(x, y)
        # work in units of the initial width so all parameters are O(1)
        xs = abs(p0[3]) or 1.0
        u = x / xs
        q0 = np.array([p0[0], p0[1], p0[2] / xs, p0[3] / xs])

        def residual(q):
            return lorentzian_dip(u, *q) - y

        def jacobian(q):
            o, a, c, w = q
            h2 = 0.25 * w * w
            dx = u - c
            D = dx * dx + h2
            L = h2 / D
            return np.column_stack(
                [
                    np.ones_like(u),
                    -L,
                    -a * h2 * 2 * dx / (D * D),
                    -a * 0.5 * w * dx * dx / (D * D),
                ]
            )

        res = levenberg_marquardt(residual, jacobian, q0, self.max_iter, self.xtol)
        scale = np.array([1.0, 1.0, xs, xs])
        params = res.params * scale
        cov = res.covariance * np.outer(scale, scale)

        self.offset_, self.amplitude_, self.center_ = params[:3]
        self.fwhm_ = abs(params[3])
        self.covariance_ = cov
        self.errors_ = np.sqrt(np.clip(np.diag(cov), 0, None))
        self.n_iter_ = res.n_iter
        self.converged_ = bool(res.converged and self.fwhm_ > 0)
        self.residual_norm_ = float(np.sqrt(res.cost))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "fwhm_")
        x = check_array(np.reshape(_as_1d(X), (-1, 1)))[:, 0]
        return lorentzian_dip(x, self.offset_, self.amplitude_, self.center_, self.fwhm_)


class ExponentialDecayRegressor(RegressorMixin, BaseEstimator):
    """Fit ``amplitude * exp(-rate * t) + offset`` to decaying data.

    The rate is first bracketed by a log-spaced scan in which amplitude and
    offset are solved linearly, then refined by Levenberg-Marquardt.

    Attributes
    ----------
    amplitude_, rate_, offset_ : float
    rate_err_ : float
        One-sigma standard error of ``rate_`` from the fit covariance.
    """

    def __init__(self, max_iter=200, xtol=1e-10, n_scan=200):
        self.max_iter = max_iter
        self.xtol = xtol
        self.n_scan = n_scan

    def fit(self, X, y):
        X, y = check_X_y(np.reshape(_as_1d(X), (-1, 1)), y, y_numeric=True)
        t = X[:, 0]
        if len(t) < 3:
            raise FitError(f"need at least 3 points for a decay fit, got {len(t)}")
        if np.any(np.diff(t) <= 0):
            raise FitError("times must be strictly increasing")
        if np.ptp(y) == 0:
            raise FitError("data do not decay")

        t0 = t[0]
        span = t[-1] - t0
        tt = (t - t0) / span

        best = None
        for k in np.logspace(-3, 3, self.n_scan):
            M = np.column_stack([np.exp(-k * tt), np.ones_like(tt)])
            coef, *_ = np.linalg.lstsq(M, y, rcond=None)
            c = float(np.sum((M @ coef - y) ** 2))
            if best is None or c < best[0]:
                best = (c, coef[0], k, coef[1])
        _, a0, k0, c0 = best
        if a0 <= 0:
            raise FitError("data do not decay")

        def residual(q):
            return q[0] * np.exp(-q[1] * tt) + q[2] - y

        def jacobian(q):
            e = np.exp(-q[1] * tt)
            return np.column_stack([e, -q[0] * tt * e, np.ones_like(tt)])

        res = levenberg_marquardt(residual, jacobian, [a0, k0, c0], self.max_iter, self.xtol)
        a, k, c = res.params
        if not (a > 0 and k > 0):
            raise FitError("data do not decay")
        # undo the time normalisation: a exp(-k (t - t0)/span) = a e^{k t0/span} exp(-(k/span) t)
        self.rate_ = k / span
        self.rate_err_ = float(np.sqrt(max(res.covariance[1, 1], 0.0))) / span
        self.amplitude_ = a * np.exp(k * t0 / span)
        self.offset_ = c
        self.converged_ = res.converged
        self.n_iter_ = res.n_iter
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "rate_")
        t = check_array(np.reshape(_as_1d(X), (-1, 1)))[:, 0]
        return self.amplitude_ * np.exp(-self.rate_ * t) + self.offset_

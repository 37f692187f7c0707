"""Forward-backward steps, the forward-backward envelope and step-size management."""

import math
from dataclasses import dataclass

import numpy as np


class GammaFailure(RuntimeError):
    """Raised when the Lipschitz estimate has been increased too many times."""


@dataclass
class ProxGradStep:
    """One forward-backward evaluation at ``x``.

    ``x_bar`` is the prox oracle's selection from ``T_gamma(x)``, ``r`` the
    residual ``(x - x_bar) / gamma`` and ``fbe`` the envelope value
    ``phi_gamma(x)``. ``g_xbar`` is ``g(x_bar)``, hence ``f_x`` and
    ``g_xbar`` do not add up to ``phi`` at any single point.
    """

    x: np.ndarray
    f_x: float
    grad_f_x: np.ndarray
    x_bar: np.ndarray
    g_xbar: float
    r: np.ndarray
    fbe: float
    gamma: float

    @property
    def res_norm(self):
        return float(np.linalg.norm(self.r))

    @property
    def finite(self):
        return math.isfinite(self.fbe)


def prox_grad_step(p, x, gamma):
    """Evaluate ``T_gamma``, ``R_gamma`` and ``phi_gamma`` at ``x``.

    Costs one smooth evaluation and one prox evaluation. The envelope uses
    ``g^gamma(x - gamma grad f(x)) = g(x_bar) + ||x - gamma grad f(x) - x_bar||^2 / (2 gamma)``
    expanded as ``f - <grad f, x - x_bar> + ||x - x_bar||^2 / (2 gamma) + g(x_bar)``,
    which avoids cancelling two terms of size ``gamma ||grad f||^2``.
    """
    p.nonsmooth.check_gamma(gamma)
    x = np.asarray(x, dtype=float)
    f_x, grad = p.smooth.eval(x)
    x_bar, g_xbar = p.nonsmooth.prox(x - gamma * grad, gamma)
    diff = x - x_bar
    fbe = f_x - float(grad @ diff) + float(diff @ diff) / (2.0 * gamma) + g_xbar
    if not (math.isfinite(f_x) and np.all(np.isfinite(grad)) and np.all(np.isfinite(x_bar))):
        raise FloatingPointError("oracle returned a nonfinite value")
    return ProxGradStep(x, f_x, grad, x_bar, g_xbar, diff / gamma, fbe, gamma)


def check_quadratic_bound(step, p, L, f_bar=None, rtol=1e-12):
    """True iff ``f(x_bar) <= f(x) - <grad f(x), x - x_bar> + L/2 ||x - x_bar||^2``.

    Spends one smooth evaluation at ``x_bar`` unless the caller already has
    ``f_bar``. A relative slack ``rtol`` absorbs rounding when ``x_bar`` is
    (numerically) equal to ``x``.
    """
    diff = step.x - step.x_bar
    dd = float(diff @ diff)
    if dd == 0.0:
        return True
    if f_bar is None:
        f_bar = p.smooth.value(step.x_bar)
    bound = step.f_x - float(step.grad_f_x @ diff) + 0.5 * L * dd
    return f_bar <= bound + rtol * (1.0 + abs(step.f_x))


@dataclass
class GammaManager:
    """Lipschitz estimate ``L`` with the step size and decrease constant tied to it.

    The defaults set ``gamma = gamma_fraction * min(1/L, gamma_g)`` and ``sigma``
    to the midpoint of ``(0, gamma (1 - gamma L) / 2)``.
    """

    L: float
    gamma: float
    sigma: float
    alpha: float = 0.5
    gamma_fraction: float = 0.95
    adjustments: int = 0
    max_adjustments: int = 60

    @classmethod
    def from_lipschitz(cls, L, gamma_g=math.inf, gamma_fraction=0.95, sigma_fraction=0.5, alpha=0.5, max_adjustments=60):
        if not L > 0.0:
            raise ValueError("Lipschitz estimate must be positive")
        # (1 - eps) keeps gamma strictly below gamma_g when gamma_fraction is 1
        gamma = gamma_fraction * min(1.0 / L, gamma_g * (1.0 - 1e-12))
        sigma = sigma_fraction * gamma * (1.0 - gamma * L) / 2.0
        return cls(L, gamma, sigma, alpha, gamma_fraction, 0, max_adjustments)

    @classmethod
    def from_gamma(cls, gamma, L=None, sigma_fraction=0.5, gamma_fraction=0.95, alpha=0.5, max_adjustments=60):
        """Fixed user step; without ``L`` the estimate is taken as ``gamma_fraction / gamma``."""
        if L is None:
            L = gamma_fraction / gamma
        if not gamma * L < 1.0:
            raise ValueError(f"gamma={gamma} must be below 1/L={1.0 / L}")
        sigma = sigma_fraction * gamma * (1.0 - gamma * L) / 2.0
        return cls(L, gamma, sigma, alpha, gamma_fraction, 0, max_adjustments)

    def sigma_bound(self):
        return self.gamma * (1.0 - self.gamma * self.L) / 2.0


def gamma_backtrack(mgr):
    """``L <- L/alpha``, ``gamma <- alpha gamma``, ``sigma <- alpha sigma`` (in place)."""
    if mgr.adjustments >= mgr.max_adjustments:
        raise GammaFailure(
            f"Lipschitz estimate increased {mgr.adjustments} times; gradient may not be Lipschitz"
        )
    mgr.L /= mgr.alpha
    mgr.gamma *= mgr.alpha
    mgr.sigma *= mgr.alpha
    mgr.adjustments += 1
    return mgr


def estimate_initial_L(p, x0, rng=None):
    """Directional gradient-difference quotient at ``x0``, floored at 1e-12.

    Costs two smooth evaluations.
    """
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    rng = np.random.default_rng(0) if rng is None else rng
    e = rng.standard_normal(x0.shape)
    e /= np.linalg.norm(e)
    delta = 1e-6 * (1.0 + np.linalg.norm(x0))
    g0 = p.smooth.gradient(x0)
    g1 = p.smooth.gradient(x0 + delta * e)
    return max(float(np.linalg.norm(g1 - g0)) / delta, 1e-12)

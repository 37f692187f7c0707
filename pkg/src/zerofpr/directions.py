"""Quasi-Newton direction engines ``d = -H v``.

Each engine exposes ``apply(v) -> d``, ``push(s, y)`` and ``reset()``. The
solver decides which vector ``v`` to feed: the residual at ``x_bar`` or, for
:class:`SymmetrizedBFGS`, the symmetrized residual (``symmetrized = True``).
"""

from collections import deque

import numpy as np

from . import kernels


def powell_theta(gamma_k, theta_bar):
    """Powell's safeguard: 1 if ``|gamma_k| >= theta_bar``, else a damped value."""
    if abs(gamma_k) >= theta_bar:
        return 1.0
    sign = 1.0 if gamma_k >= 0.0 else -1.0
    return (1.0 - sign * theta_bar) / (1.0 - gamma_k)


def broyden_push(H, s, y, theta_bar=1e-4):
    """Modified (Powell-damped) Broyden rank-one update of the inverse Jacobian model."""
    ss = float(s @ s)
    if ss == 0.0:
        return H
    Hy = H @ y
    gamma_k = float(Hy @ s) / ss
    theta = powell_theta(gamma_k, theta_bar)
    denom = float(s @ ((1.0 / theta - 1.0) * s + Hy))
    return H + np.outer(s - Hy, s @ H) / denom


def bfgs_push(H, s, y):
    """Inverse BFGS update; skipped entirely when ``<s, y> <= 0``."""
    sy = float(s @ y)
    if sy <= 0.0 or float(s @ s) == 0.0:
        return H
    rho = 1.0 / sy
    Hy = H @ y
    yH = y @ H
    # (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded
    return (
        H
        - rho * (np.outer(s, yH) + np.outer(Hy, s))
        + (rho * rho * float(y @ Hy) + rho) * np.outer(s, s)
    )


def lbfgs_apply(memory, v, scaling=None):
    """Return ``-H v`` by the two-loop recursion.

    ``memory`` is a sequence of ``(s, y, rho)`` triples, oldest first. The
    initial matrix is ``scaling * I``; by default ``<s,y>/<y,y>`` of the newest
    pair, or 1 when memory is empty.
    """
    v = np.asarray(v, dtype=float)
    if not memory:
        return -(1.0 if scaling is None else scaling) * v
    if scaling is None:
        s, y, _ = memory[-1]
        scaling = float(s @ y) / float(y @ y)
    S = np.array([m[0] for m in memory])
    Y = np.array([m[1] for m in memory])
    rho = np.array([m[2] for m in memory])
    return -kernels.lbfgs_two_loop(S, Y, rho, v, scaling)


class NullDirection:
    """``d = 0``; ZeroFPR then reduces to plain forward-backward splitting."""

    name = "null"
    symmetrized = False

    def apply(self, v):
        return np.zeros_like(v)

    def push(self, s, y):
        pass

    def reset(self):
        pass


class _DenseEngine:
    symmetrized = False

    def __init__(self):
        self.H = None
        self.pairs_used = 0

    def reset(self):
        self.H = None
        self.pairs_used = 0

    def _ensure(self, n):
        if self.H is None:
            self.H = np.eye(n)

    def apply(self, v):
        self._ensure(v.size)
        return -(self.H @ v)


class Broyden(_DenseEngine):
    """Full-memory Broyden with Powell's theta safeguard (``theta_bar`` default 1e-4)."""

    name = "broyden"

    def __init__(self, theta_bar=1e-4):
        super().__init__()
        self.theta_bar = theta_bar

    def push(self, s, y):
        if not np.any(s):
            return
        self._ensure(s.size)
        self.H = broyden_push(self.H, s, y, self.theta_bar)
        self.pairs_used += 1


class BFGS(_DenseEngine):
    """Full-memory inverse BFGS."""

    name = "bfgs"

    def push(self, s, y):
        if not np.any(s):
            return
        self._ensure(s.size)
        if float(s @ y) > 0.0:
            self.H = bfgs_push(self.H, s, y)
            self.pairs_used += 1


class SymmetrizedBFGS(BFGS):
    """BFGS applied to the symmetrized residual (one extra gradient per iteration)."""

    name = "sbfgs"
    symmetrized = True


class LBFGS:
    """Limited-memory BFGS with ``memory`` pairs (default 10)."""

    name = "lbfgs"
    symmetrized = False

    def __init__(self, memory=10, curvature_tol=1e-12):
        self.memory = memory
        self.curvature_tol = curvature_tol
        self.pairs = deque(maxlen=memory)

    def reset(self):
        self.pairs.clear()

    def push(self, s, y):
        if not np.any(s):
            return
        sy = float(s @ y)
        if sy <= self.curvature_tol * np.linalg.norm(s) * np.linalg.norm(y):
            return
        self.pairs.append((s.copy(), y.copy(), 1.0 / sy))

    def apply(self, v):
        return lbfgs_apply(self.pairs, v)


def symmetrized_bfgs_residual(step, p):
    """``r_bar + grad f(x_bar - gamma r_bar) - grad f(x_bar)`` for a step taken at ``x_bar``.

    ``x_bar - gamma r_bar`` is ``step.x_bar``, so this costs one gradient.
    """
    if not np.any(step.r):
        return np.zeros_like(step.r)
    return step.r + p.smooth.gradient(step.x_bar) - step.grad_f_x


ENGINES = {
    "null": NullDirection,
    "broyden": Broyden,
    "bfgs": BFGS,
    "sbfgs": SymmetrizedBFGS,
    "lbfgs": LBFGS,
}


def make_engine(name, **kwargs):
    try:
        return ENGINES[name](**kwargs)
    except KeyError:
        raise ValueError(f"unknown direction engine {name!r}; choose from {sorted(ENGINES)}") from None

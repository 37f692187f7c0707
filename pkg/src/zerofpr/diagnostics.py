"""Numerical checks of first- and second-order envelope theory at computed points.

Finite differences use central differences with step
``h = eps**(1/3) * (1 + ||x||)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .fbe import prox_grad_step

FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)


def _fd_step(x):
    return FD_STEP * (1.0 + float(np.linalg.norm(x)))


def forward_backward_point(p, x, gamma):
    """Selection of ``T_gamma(x)`` and the residual ``R_gamma(x)``."""
    s = prox_grad_step(p, x, gamma)
    return s.x_bar, s.r


# ------------------------------------------------------------- criticality


def estimate_criticality_threshold(p, x, gamma_max, tol=1e-10, bisections=40):
    """Bisection estimate of ``sup{gamma > 0 : x in T_gamma(x)}`` over ``(0, gamma_max]``.

    ``x`` passes at ``gamma`` when ``||x - T_gamma(x)|| <= tol (1 + ||x||)``.
    Returns 0 when no tested ``gamma`` passes. The result has resolution
    ``gamma_max * 2**-bisections``; attainment of the supremum is not claimed.
    """
    if gamma_max >= p.nonsmooth.gamma_g:
        raise ValueError(f"gamma_max={gamma_max} must be below gamma_g={p.nonsmooth.gamma_g}")
    x = np.asarray(x, dtype=float)
    thr = tol * (1.0 + float(np.linalg.norm(x)))

    def fixed(gamma):
        xb, _ = forward_backward_point(p, x, gamma)
        return float(np.linalg.norm(x - xb)) <= thr

    if fixed(gamma_max):
        return float(gamma_max)
    lo, hi = 0.0, float(gamma_max)
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if fixed(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ------------------------------------------------------------- first order


def fd_jacobian(fun, x, h=None):
    """Central-difference Jacobian of a vector map (columns are directional derivatives)."""
    x = np.asarray(x, dtype=float)
    h = _fd_step(x) if h is None else h
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((fun(x + e) - fun(x - e)) / (2.0 * h))
    return np.column_stack(cols)


def fd_gradient(fun, x, h=None):
    x = np.asarray(x, dtype=float)
    h = _fd_step(x) if h is None else h
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g


def fd_hessian_f(p, x, h=None):
    """Symmetrized central-difference Hessian of ``f`` from its gradient."""
    H = fd_jacobian(p.smooth.gradient, x, h)
    return 0.5 * (H + H.T)


def probe_single_valued(p, x, gamma, h=None, factor=10.0, lipschitz=None):
    """Return ``(ok, worst_ratio)``: does ``T_gamma`` move continuously near ``x``?

    ``T_gamma`` is evaluated at ``x +- h e_i``; a jump larger than
    ``factor * 2h * lipschitz`` flags a branch switch of a set-valued prox.
    ``lipschitz`` defaults to ``(1 + gamma L) / (1 - gamma L)`` with ``L`` the
    problem's estimate (1 if unknown).
    """
    x = np.asarray(x, dtype=float)
    h = _fd_step(x) if h is None else h
    if lipschitz is None:
        L = p.lipschitz_estimate or 1.0
        gl = min(gamma * L, 0.99)
        lipschitz = (1.0 + gl) / (1.0 - gl)
    worst = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        jp, _ = forward_backward_point(p, x + e, gamma)
        jm, _ = forward_backward_point(p, x - e, gamma)
        worst = max(worst, float(np.linalg.norm(jp - jm)) / (2.0 * h * lipschitz))
    return worst <= factor, worst


@dataclass
class GradientCheck:
    error: float
    fd_grad: np.ndarray
    analytic_grad: np.ndarray
    single_valued: bool


def fd_gradient_check_fbe(p, x, gamma, h=None):
    """Compare the central-difference gradient of ``phi_gamma`` with ``Q_gamma(x) R_gamma(x)``.

    ``Q_gamma = I - gamma * Hess f`` with the Hessian by finite differences.
    The error is ``||fd - analytic||_inf / max(1, ||analytic||_inf)``. A
    detected prox branch switch is reported in ``single_valued``, not raised.
    """
    x = np.asarray(x, dtype=float)
    ok, _ = probe_single_valued(p, x, gamma, h)
    fd = fd_gradient(lambda z: prox_grad_step(p, z, gamma).fbe, x, h)
    Q = np.eye(x.size) - gamma * fd_hessian_f(p, x, h)
    an = Q @ prox_grad_step(p, x, gamma).r
    err = float(np.max(np.abs(fd - an))) / max(1.0, float(np.max(np.abs(an))))
    return GradientCheck(err, fd, an, ok)


# ------------------------------------------------------------- second order


@dataclass
class SecondOrderReport:
    J_R: np.ndarray
    Q_gamma: np.ndarray
    H_fbe: np.ndarray
    symmetry_defect: float
    min_eigenvalue: float
    eigenvalues: np.ndarray
    single_valued: bool
    probe_ratio: float

    @property
    def positive_definite(self):
        return self.min_eigenvalue > 0.0


def second_order_report(p, x_star, gamma, h=None, residual_tol=1e-8):
    """Finite-difference ``J R_gamma``, ``Q_gamma`` and ``H = Q_gamma J R_gamma`` at a critical point.

    Raises ``ValueError`` when ``x_star`` is not critical to ``residual_tol``.
    A prox branch switch within the FD stencil is reported through
    ``single_valued``.
    """
    x = np.asarray(x_star, dtype=float)
    _, r = forward_backward_point(p, x, gamma)
    if float(np.linalg.norm(r)) > residual_tol * (1.0 + float(np.linalg.norm(x))):
        raise ValueError(f"||R_gamma(x)||={np.linalg.norm(r):.3e} exceeds the criticality tolerance")
    ok, ratio = probe_single_valued(p, x, gamma, h)
    J = fd_jacobian(lambda z: forward_backward_point(p, z, gamma)[1], x, h)
    Q = np.eye(x.size) - gamma * fd_hessian_f(p, x, h)
    H = Q @ J
    nrm = float(np.linalg.norm(H))
    defect = float(np.linalg.norm(H - H.T)) / nrm if nrm > 0 else 0.0
    eig = np.linalg.eigvalsh(0.5 * (H + H.T))
    return SecondOrderReport(J, Q, H, defect, float(eig[0]), eig, ok, ratio)


def dennis_more_ratio(rbars, directions, J_R):
    """``||r_bar + J_R d|| / ||d||`` per iteration; zero directions are skipped."""
    out = []
    for rb, d in zip(rbars, directions):
        nd = float(np.linalg.norm(d))
        if nd == 0.0:
            continue
        out.append(float(np.linalg.norm(rb + J_R @ d)) / nd)
    return np.array(out)


# ------------------------------------------------------------- rates


@dataclass
class RateReport:
    """Windowed Q-factors of a residual sequence and the resulting classification.

    ``q_factors`` holds one geometric-mean factor per window of ``window``
    consecutive single-step ratios ``e_{k+1}/e_k``, oldest first.
    """

    q_factors: np.ndarray
    classification: str
    factor: float
    window: int

    def __str__(self):
        if self.classification == "linear":
            return f"linear({self.factor:.3g})"
        return self.classification


def windowed_q_factors(tail, window):
    """Geometric-mean Q-factors over non-overlapping windows aligned to the end of ``tail``."""
    tail = np.asarray(tail, dtype=float)
    count = (tail.size - 1) // window
    ends = np.arange(tail.size - 1 - (count - 1) * window, tail.size, window)
    return (tail[ends] / tail[ends - window]) ** (1.0 / window)


def classify_rate(residual_norms, window=3, depth=3):
    """Classify convergence from windowed Q-factors of a residual sequence.

    Only the tail after the sequence first drops below a tenth of its initial
    value is used; it must contain at least 10 entries. Averaging each window
    removes the step-to-step jitter of nonmonotone methods.

    * superlinear: the last ``depth`` windowed factors strictly decrease and
      the final one is below 0.1;
    * sublinear: the factors creep toward 1 (the gap ``1 - q`` shrinks by at
      least a quarter from the first to the last window, which is above 0.8);
    * linear otherwise, with the last windowed factor as rate.

    Examples
    --------
    >>> str(classify_rate(0.5 ** np.arange(30)))
    'linear(0.5)'
    >>> classify_rate(2.0 ** -(np.arange(14) ** 2)).classification
    'superlinear'
    """
    e = np.asarray(residual_norms, dtype=float)
    if e.size == 0:
        raise ValueError("empty residual sequence")
    if window < 1 or depth < 2:
        raise ValueError("window must be >= 1 and depth >= 2")
    below = np.nonzero(e < e[0] / 10.0)[0]
    if below.size == 0 or e.size - below[0] < 10:
        raise ValueError("need at least 10 residuals below a tenth of the initial one")
    tail = e[below[0]:]
    if np.any(tail == 0.0):
        # exact termination: everything up to the first zero
        tail = tail[: int(np.argmax(tail == 0.0))]
        if tail.size < 2:
            return RateReport(np.zeros(1), "superlinear", 0.0, window)
    w = max(1, min(window, (tail.size - 1) // depth))
    q = windowed_q_factors(tail, w)
    last = q[-depth:]
    if last.size >= 2 and np.all(np.diff(last) < 0.0) and last[-1] < 0.1:
        return RateReport(q, "superlinear", float(last[-1]), w)
    if q[-1] > 0.8 and (1.0 - q[-1]) <= 0.75 * (1.0 - q[0]):
        return RateReport(q, "sublinear", float(q[-1]), w)
    return RateReport(q, "linear", float(q[-1]), w)

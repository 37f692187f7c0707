"""Pure numpy versions of the hot kernels.

Every function here has a twin of the same signature in ``_kernels.pyx``;
``zerofpr.kernels`` picks one set at import time.
"""

import numpy as np


def prox_l_half(x, mu):
    """Elementwise minimizer of ``mu*sqrt(|z|) + (z - x)**2 / 2``.

    The nonzero candidate is the largest root of the stationarity cubic in
    ``t = sqrt(z)``, written in trigonometric form. It is kept only when its
    objective is strictly below the value at zero.
    """
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    out = np.zeros_like(a)
    if mu <= 0.0:
        return x.copy()
    pos = a > 0.0
    arg = np.full_like(a, np.inf)
    with np.errstate(over="ignore", divide="ignore"):
        # tiny |x| overflows (or underflows to a zero base) to inf, which correctly selects zero
        arg[pos] = (mu / 4.0) * (a[pos] / 3.0) ** -1.5
    ok = arg <= 1.0
    if not np.any(ok):
        return out
    ao = a[ok]
    phi = np.arccos(arg[ok])
    z = (2.0 * ao / 3.0) * (1.0 + np.cos(2.0 * np.pi / 3.0 - 2.0 * phi / 3.0))
    obj_z = mu * np.sqrt(z) + 0.5 * (z - ao) ** 2
    obj_0 = 0.5 * ao**2
    out[ok] = np.where(obj_z < obj_0, z, 0.0)
    return np.where(out != 0.0, np.copysign(out, x), 0.0)


def hard_threshold(x, thresh):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) > thresh, x, 0.0)


def box_l0_columns(C, N, T):
    """Keep the ``N`` largest-magnitude entries of each column, clipped to [-T, T].

    ``C`` is 2-D; columns are processed independently. Ties keep the lowest
    row index.
    """
    C = np.asarray(C, dtype=float)
    k, m = C.shape
    out = np.zeros_like(C)
    if N <= 0:
        return out
    if N >= k:
        return np.clip(C, -T, T)
    order = np.argsort(-np.abs(C), axis=0, kind="stable")[:N]
    cols = np.broadcast_to(np.arange(m), order.shape)
    out[order, cols] = np.clip(C[order, cols], -T, T)
    return out


def sphere_columns(Dm):
    """Normalize each column; zero columns map to the first basis vector."""
    Dm = np.asarray(Dm, dtype=float)
    norms = np.sqrt(np.sum(Dm * Dm, axis=0))
    out = np.zeros_like(Dm)
    nz = norms > 0.0
    out[:, nz] = Dm[:, nz] / norms[nz]
    out[0, ~nz] = 1.0
    return out


def lbfgs_two_loop(S, Y, rho, q, scaling):
    """Return ``H q`` for the L-BFGS inverse-Hessian model.

    Rows of ``S`` and ``Y`` hold the stored pairs, oldest first.
    """
    q = np.array(q, dtype=float)
    m = S.shape[0]
    alpha = np.empty(m)
    for i in range(m - 1, -1, -1):
        alpha[i] = rho[i] * np.dot(S[i], q)
        q -= alpha[i] * Y[i]
    q *= scaling
    for i in range(m):
        b = rho[i] * np.dot(Y[i], q)
        q += (alpha[i] - b) * S[i]
    return q

"""Catalog of proximal mappings and projections.

Set-valued proxes return one deterministic selection:

* ``prox_l0``: an entry with ``|x_i| == sqrt(2 gamma lam)`` maps to 0.
* ``prox_l_half``: when zero and the nonzero candidate tie, zero wins.
* ``project_sphere``: the zero vector maps to the first basis vector.
* ``project_box_l0``: among equal magnitudes the lowest index survives.
* ``project_rank``: the leading ``r`` triplets of ``numpy.linalg.svd``.
* ``project_points``: equidistant points resolve to the earliest listed one.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .problem import INF, NonsmoothOracle

_FEAS_TOL = 1e-9


@dataclass
class ProxCatalogEntry:
    name: str
    oracle: NonsmoothOracle
    separable: bool
    convex: bool
    gamma_g: float = INF


# ---------------------------------------------------------------- operators


def prox_l1(x, lam, gamma):
    """Soft thresholding at ``lam * gamma``."""
    x = np.asarray(x, dtype=float)
    t = lam * gamma
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def prox_l_half(x, lam, gamma):
    """Prox of ``lam * sum(sqrt(|x_i|))`` with step ``gamma``.

    Each coordinate compares the closed-form cubic root against zero by
    objective value, so no separate threshold formula is needed.
    """
    return kernels.prox_l_half(np.asarray(x, dtype=float), lam * gamma)


def prox_l0(x, lam, gamma):
    """Hard thresholding at ``sqrt(2 gamma lam)``; ties go to zero."""
    return kernels.hard_threshold(np.asarray(x, dtype=float), math.sqrt(2.0 * gamma * lam))


def project_sphere(d):
    """Euclidean projection onto the unit sphere."""
    d = np.asarray(d, dtype=float)
    return kernels.sphere_columns(d.reshape(-1, 1)).ravel()


def project_box_l0(c, N, T):
    """Projection onto ``{c : ||c||_0 <= N, ||c||_inf <= T}``."""
    c = np.asarray(c, dtype=float)
    if N > c.size:
        raise ValueError(f"N={N} exceeds vector length {c.size}")
    return kernels.box_l0_columns(c.reshape(-1, 1), int(N), float(T)).ravel()


def project_rank(X, r):
    """Projection onto matrices of rank at most ``r`` (truncated SVD)."""
    X = np.asarray(X, dtype=float)
    if r > min(X.shape):
        raise ValueError(f"r={r} exceeds min{X.shape}")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    return (U[:, :r] * s[:r]) @ Vt[:r]


def project_points(x, points):
    """Componentwise projection onto a finite set of reals."""
    x = np.asarray(x, dtype=float)
    pts = np.asarray(points, dtype=float)
    # argmin returns the first minimizer, giving the documented tie-break
    idx = np.argmin(np.abs(x[..., None] - pts), axis=-1)
    return pts[idx]


# ---------------------------------------------------------------- oracles


def _entry(name, prox, value, separable, convex, dim=None):
    oracle = NonsmoothOracle(prox, value, name=name)
    oracle.dim = dim
    return ProxCatalogEntry(name, oracle, separable, convex)


def zero_entry(dim=None):
    return _entry("zero", lambda x, gamma: (x.copy(), 0.0), lambda x: 0.0, True, True, dim)


def l1_entry(lam, dim=None):
    def prox(x, gamma):
        z = prox_l1(x, lam, gamma)
        return z, lam * float(np.abs(z).sum())

    return _entry("l1", prox, lambda x: lam * float(np.abs(x).sum()), True, True, dim)


def l_half_entry(lam, dim=None):
    def value(x):
        return lam * float(np.sqrt(np.abs(x)).sum())

    def prox(x, gamma):
        z = prox_l_half(x, lam, gamma)
        return z, value(z)

    return _entry("l_half", prox, value, True, False, dim)


def l0_entry(lam, dim=None):
    def value(x):
        return lam * float(np.count_nonzero(x))

    def prox(x, gamma):
        z = prox_l0(x, lam, gamma)
        return z, value(z)

    return _entry("l0", prox, value, True, False, dim)


def points_entry(points, dim=None):
    """Indicator of ``points^dim`` for a finite set of reals."""
    pts = np.asarray(points, dtype=float)

    def value(x):
        ok = np.all(np.min(np.abs(x[..., None] - pts), axis=-1) <= _FEAS_TOL)
        return 0.0 if ok else INF

    return _entry("points", lambda x, gamma: (project_points(x, pts), 0.0), value, True, False, dim)


def sphere_entry(n_rows, n_cols=1):
    """Indicator of ``n_cols`` unit-norm columns of length ``n_rows``, stored column-major."""

    def value(x):
        norms = np.linalg.norm(x.reshape(n_cols, n_rows), axis=1)
        return 0.0 if np.all(np.abs(norms - 1.0) <= _FEAS_TOL) else INF

    def prox(x, gamma):
        D = x.reshape(n_cols, n_rows).T
        return kernels.sphere_columns(D).T.ravel(), 0.0

    return _entry("sphere", prox, value, False, False, n_rows * n_cols)


def box_l0_entry(k, N, T, n_cols=1):
    """Indicator of ``n_cols`` columns in ``{||c||_0 <= N, ||c||_inf <= T}``, column-major."""

    def value(x):
        C = x.reshape(n_cols, k).T
        nnz_ok = np.all(np.count_nonzero(C, axis=0) <= N)
        box_ok = np.all(np.abs(C) <= T * (1.0 + _FEAS_TOL))
        return 0.0 if (nnz_ok and box_ok) else INF

    def prox(x, gamma):
        C = x.reshape(n_cols, k).T
        return kernels.box_l0_columns(C, int(N), float(T)).T.ravel(), 0.0

    return _entry("box_l0", prox, value, False, False, k * n_cols)


def rank_entry(m, n, r):
    """Indicator of ``{X in R^{m x n} : rank X <= r}`` on the column-major vectorization."""

    def value(x):
        s = np.linalg.svd(x.reshape(n, m).T, compute_uv=False)
        if s.size <= r or s[0] == 0.0:
            return 0.0
        return 0.0 if s[r] <= 1e-10 * s[0] else INF

    def prox(x, gamma):
        X = x.reshape(n, m).T
        return project_rank(X, r).T.ravel(), 0.0

    return _entry("rank", prox, value, False, False, m * n)


def prox_product(entries):
    """Blockwise separable sum ``g(x) = sum_i g_i(x[start_i:stop_i])``.

    Parameters
    ----------
    entries : list of (ProxCatalogEntry, (start, stop))
        Block ranges must partition ``range(0, n)``.
    """
    if not entries:
        raise ValueError("prox_product needs at least one block")
    blocks = sorted(entries, key=lambda e: e[1][0])
    pos = 0
    for entry, (start, stop) in blocks:
        if start != pos:
            raise ValueError(f"block ranges overlap or leave a gap at index {pos}")
        if stop <= start:
            raise ValueError(f"empty block range ({start}, {stop})")
        dim = getattr(entry.oracle, "dim", None)
        if dim is not None and dim != stop - start:
            raise ValueError(f"block {entry.name} expects length {dim}, got {stop - start}")
        pos = stop
    n = pos

    def prox(x, gamma):
        z = np.empty_like(x)
        total = 0.0
        for entry, (start, stop) in blocks:
            zb, gb = entry.oracle._prox(x[start:stop], gamma)
            z[start:stop] = zb
            total += gb
        return z, total

    def value(x):
        total = 0.0
        for entry, (start, stop) in blocks:
            total += entry.oracle.value(x[start:stop])
            if total == INF:
                return INF
        return total

    gamma_g = min(entry.oracle.gamma_g for entry, _ in blocks)
    oracle = NonsmoothOracle(prox, value, gamma_g=gamma_g, name="product")
    oracle.dim = n
    oracle.blocks = blocks
    return oracle


def catalog(lam=1.0):
    """The separable entries used in the prox-optimality checks."""
    return [zero_entry(), l1_entry(lam), l_half_entry(lam), l0_entry(lam), points_entry([-1.0, 1.0])]

"""Random problem generators for the three benchmark experiments.

Matrices are vectorized column-major (``X.T.ravel()``), so one column of a
matrix is one contiguous block of the variable vector.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..problem import Problem, SmoothOracle, compose_least_squares
from ..prox import box_l0_entry, l0_entry, l_half_entry, prox_product, rank_entry, sphere_entry
from ..testlib import rng_for


@dataclass
class GeneratedProblem:
    """A benchmark instance with its starting point and generating data.

    ``adaptive`` asks the solvers to backtrack on the Lipschitz estimate.
    """

    kind: str
    problem: Problem
    x0: np.ndarray
    adaptive: bool = False
    truth: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


def vec(X):
    return np.asarray(X, dtype=float).T.ravel()


def unvec(x, rows, cols):
    return np.asarray(x).reshape(cols, rows).T


def gen_sparse_approx(n=500, lam=0.1, seed=0, nnz=5):
    """``0.5 ||A x - b||^2 + lam sum_i |x_i|^(1/2)`` with ``m = n // 5`` rows.

    ``A`` has i.i.d. ``N(0, 1/m)`` entries, ``b = A x_orig + v`` where
    ``x_orig`` has ``nnz`` standard normal nonzeros and ``v ~ N(0, 1/m)``.
    With ``lam = 0`` the regularizer (and its prox) is the identity map.
    """
    if n < 5:
        raise ValueError("n must be at least 5")
    m = n // 5
    rng = rng_for(seed, 10, n)
    A = rng.standard_normal((m, n)) / math.sqrt(m)
    x_orig = np.zeros(n)
    support = rng.choice(n, size=min(nnz, n), replace=False)
    x_orig[support] = rng.standard_normal(support.size)
    b = A @ x_orig + rng.standard_normal(m) / math.sqrt(m)
    L = float(np.linalg.norm(A, 2) ** 2)
    p = Problem(compose_least_squares(A, b), l_half_entry(lam, n).oracle, lipschitz_estimate=L)
    return GeneratedProblem(
        "sparse_approx", p, np.zeros(n),
        truth={"A": A, "b": b, "x_orig": x_orig},
        params={"n": n, "m": m, "lambda": lam, "seed": seed},
    )


def dict_learning_oracle(Y, k):
    """``f(D, C) = 0.5 ||Y - D C||_F^2`` on ``x = [vec(D), vec(C)]``.

    One evaluation forms ``D C`` and the two gradient products, charged as one
    forward and one adjoint product.
    """
    Y = np.asarray(Y, dtype=float)
    n, m = Y.shape
    nd = n * k

    def fun(x):
        D = unvec(x[:nd], n, k)
        C = unvec(x[nd:], k, m)
        E = D @ C - Y
        return 0.5 * float(np.sum(E * E)), np.concatenate([vec(E @ C.T), vec(D.T @ E)])

    return SmoothOracle(fun, nd + k * m, matvecs_per_eval=(1, 1), name="dict_learning")


def gen_dict_learning(n=20, m=500, k=50, N=3, T=1e6, seed=0, noise_var=1e-2):
    """Dictionary learning over unit-norm atoms and ``N``-sparse, box-bounded codes.

    ``D_gen`` has normalized Gaussian columns, ``C_gen`` has ``N`` Gaussian
    nonzeros per column and ``Y = D_gen C_gen + V`` with ``V ~ N(0, noise_var)``.
    The gradient is not globally Lipschitz, so ``adaptive`` is set and no
    Lipschitz constant is attached.
    """
    if min(n, m, k, N) < 1:
        raise ValueError("sizes must be positive")
    rng = rng_for(seed, 11, n, m, k)
    D_gen = rng.standard_normal((n, k))
    D_gen /= np.linalg.norm(D_gen, axis=0)
    C_gen = np.zeros((k, m))
    for j in range(m):
        rows = rng.choice(k, size=min(N, k), replace=False)
        C_gen[rows, j] = rng.standard_normal(rows.size)
    Y = D_gen @ C_gen + math.sqrt(noise_var) * rng.standard_normal((n, m))
    nd = n * k
    g = prox_product([
        (sphere_entry(n, k), (0, nd)),
        (box_l0_entry(k, N, T, m), (nd, nd + k * m)),
    ])
    p = Problem(dict_learning_oracle(Y, k), g)
    return GeneratedProblem(
        "dict_learning", p, np.zeros(nd + k * m), adaptive=True,
        truth={"Y": Y, "D_gen": D_gen, "C_gen": C_gen},
        params={"n": n, "m": m, "k": k, "N": N, "T": T, "seed": seed},
    )


def mat_decomp_oracle(A):
    """``f(X_L, X_S) = 0.5 ||A - X_L - X_S||_F^2`` on ``x = [vec(X_L), vec(X_S)]``."""
    a = vec(A)
    size = a.size

    def fun(x):
        e = x[:size] + x[size:] - a
        return 0.5 * float(e @ e), np.concatenate([e, e])

    return SmoothOracle(fun, 2 * size, name="mat_decomp")


def gen_mat_decomp(m=80, n=60, r=1, lam=3e-3, seed=0, density=0.05, noise=1e-3, A=None):
    """Low-rank plus sparse decomposition with ``L_f = 2``.

    ``A`` is a rank-``r`` Gaussian background plus a foreground with a
    ``density`` fraction of ``N(0, 1)`` entries and Gaussian noise of standard
    deviation ``noise``; pass ``A`` to decompose a given matrix instead.
    """
    if min(m, n, r) < 1:
        raise ValueError("sizes must be positive")
    truth = {}
    if A is None:
        rng = rng_for(seed, 12, m, n)
        L0 = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
        S0 = np.where(rng.random((m, n)) < density, rng.standard_normal((m, n)), 0.0)
        A = L0 + S0 + noise * rng.standard_normal((m, n))
        truth = {"L0": L0, "S0": S0}
    A = np.asarray(A, dtype=float)
    if A.shape != (m, n):
        raise ValueError(f"A has shape {A.shape}, expected {(m, n)}")
    size = m * n
    g = prox_product([(rank_entry(m, n, r), (0, size)), (l0_entry(lam, size), (size, 2 * size))])
    p = Problem(mat_decomp_oracle(A), g, lipschitz_estimate=2.0)
    truth["A"] = A
    return GeneratedProblem(
        "mat_decomp", p, np.zeros(2 * size), truth=truth,
        params={"m": m, "n": n, "r": r, "lambda": lam, "seed": seed},
    )


GENERATORS = {
    "sparse_approx": gen_sparse_approx,
    "dict_learning": gen_dict_learning,
    "mat_decomp": gen_mat_decomp,
}

"""Oracle abstractions for composite problems ``minimize f(x) + g(x)``.

``f`` is reached through a :class:`SmoothOracle` (value and gradient in one
call) and ``g`` through a :class:`NonsmoothOracle` (proximal mapping plus the
value of ``g`` at the returned point). Both carry call counters so solvers and
benchmarks can report oracle complexity instead of wall time.

Extended reals are plain floats; ``+inf`` marks points outside ``dom g``.
"""

import copy
import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class Counts:
    """Snapshot of the oracle counters of a problem."""

    smooth: int = 0
    prox: int = 0
    matvec_A: int = 0
    matvec_At: int = 0

    @property
    def matvecs(self):
        return self.matvec_A + self.matvec_At

    def __sub__(self, other):
        return Counts(
            self.smooth - other.smooth,
            self.prox - other.prox,
            self.matvec_A - other.matvec_A,
            self.matvec_At - other.matvec_At,
        )


class SmoothOracle:
    """Smooth term ``f`` given by a callable returning ``(value, gradient)``.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (float, ndarray)``.
    dim : int
        Length of the variable vector.
    matvecs_per_eval : tuple of int, optional
        Products with ``A`` and ``A^T`` charged to the counters per call.
    """

    def __init__(self, fun, dim, matvecs_per_eval=(0, 0), name="smooth"):
        self._fun = fun
        self.dim = int(dim)
        self.matvecs_per_eval = tuple(matvecs_per_eval)
        self.name = name
        self.reset_counters()

    def reset_counters(self):
        self.evals = 0
        self.matvec_A = 0
        self.matvec_At = 0

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        self.evals += 1
        self.matvec_A += self.matvecs_per_eval[0]
        self.matvec_At += self.matvecs_per_eval[1]
        val, grad = self._fun(x)
        return float(val), np.asarray(grad, dtype=float)

    def value(self, x):
        return self.eval(x)[0]

    def gradient(self, x):
        return self.eval(x)[1]

    def fresh(self):
        """Shallow copy sharing the data but owning zeroed counters."""
        other = copy.copy(self)
        other.reset_counters()
        return other


def compose_least_squares(A, b):
    """Oracle for ``f(x) = 0.5 * ||A x - b||^2``.

    Each evaluation costs one product with ``A`` and one with ``A^T``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("A must be a nonempty matrix")
    if b.shape != (A.shape[0],):
        raise ValueError(f"b has shape {b.shape}, expected ({A.shape[0]},)")

    def fun(x):
        res = A @ x - b
        return 0.5 * float(res @ res), A.T @ res

    oracle = SmoothOracle(fun, A.shape[1], matvecs_per_eval=(1, 1), name="least_squares")
    oracle.A = A
    oracle.b = b
    return oracle


def compose_quadratic(Q, q):
    """Oracle for ``f(x) = 0.5 * x^T Q x - q^T x`` (one product with Q per call)."""
    Q = np.asarray(Q, dtype=float)
    q = np.asarray(q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or q.shape != (Q.shape[0],):
        raise ValueError("Q must be square and q conformant")

    def fun(x):
        Qx = Q @ x
        return 0.5 * float(x @ Qx) - float(q @ x), Qx - q

    oracle = SmoothOracle(fun, Q.shape[0], matvecs_per_eval=(1, 0), name="quadratic")
    oracle.Q = Q
    oracle.q = q
    return oracle


class NonsmoothOracle:
    """Nonsmooth term ``g`` given by its proximal mapping.

    Parameters
    ----------
    prox : callable
        ``prox(x, gamma) -> (z, g(z))`` returning one element of
        ``argmin_z g(z) + ||z - x||^2 / (2 gamma)``.
    value : callable
        ``value(x) -> float``, possibly ``inf``.
    gamma_g : float
        Prox-boundedness threshold; calls with ``gamma >= gamma_g`` raise.
    """

    def __init__(self, prox, value, gamma_g=INF, name="nonsmooth"):
        self._prox = prox
        self._value = value
        self.gamma_g = float(gamma_g)
        self.name = name
        self.reset_counters()

    def reset_counters(self):
        self.prox_evals = 0

    def check_gamma(self, gamma):
        if not (0.0 < gamma < self.gamma_g):
            raise ValueError(f"gamma={gamma} outside (0, {self.gamma_g})")

    def prox(self, x, gamma):
        self.check_gamma(gamma)
        self.prox_evals += 1
        z, gz = self._prox(np.asarray(x, dtype=float), float(gamma))
        return np.asarray(z, dtype=float), float(gz)

    def value(self, x):
        return float(self._value(np.asarray(x, dtype=float)))

    def fresh(self):
        other = copy.copy(self)
        other.reset_counters()
        return other


def zero_oracle(name="zero"):
    """``g = 0``; the prox is the identity."""
    return NonsmoothOracle(lambda x, gamma: (x.copy(), 0.0), lambda x: 0.0, name=name)


@dataclass
class Problem:
    """A composite problem ``f + g`` with an optional Lipschitz constant of ``grad f``."""

    smooth: SmoothOracle
    nonsmooth: NonsmoothOracle
    dimension: int = None
    lipschitz_estimate: float = None

    def __post_init__(self):
        if self.dimension is None:
            self.dimension = self.smooth.dim
        if self.dimension != self.smooth.dim:
            raise ValueError("dimension does not match the smooth oracle")
        dim_g = getattr(self.nonsmooth, "dim", None)
        if dim_g is not None and dim_g != self.dimension:
            raise ValueError("dimension does not match the nonsmooth oracle")

    def counts(self):
        s = self.smooth
        return Counts(s.evals, self.nonsmooth.prox_evals, s.matvec_A, s.matvec_At)

    def reset_counters(self):
        self.smooth.reset_counters()
        self.nonsmooth.reset_counters()

    def fresh(self):
        """Copy sharing all data but with independent, zeroed counters."""
        return Problem(self.smooth.fresh(), self.nonsmooth.fresh(), self.dimension, self.lipschitz_estimate)

    def objective(self, x):
        """``f(x) + g(x)``; counts one smooth evaluation."""
        gx = self.nonsmooth.value(x)
        if gx == INF:
            return INF
        return self.smooth.value(x) + gx


def moreau_envelope(g, x, gamma):
    """Moreau envelope ``min_z g(z) + ||z - x||^2 / (2 gamma)`` via one prox call."""
    g.check_gamma(gamma)
    z, gz = g.prox(x, gamma)
    d = z - np.asarray(x, dtype=float)
    val = gz + float(d @ d) / (2.0 * gamma)
    if not math.isfinite(val):
        raise ValueError("Moreau envelope is not finite; prox oracle returned an infeasible point")
    return val

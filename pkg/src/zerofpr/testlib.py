"""Analytic test problems with known solutions, and the per-iteration auditor."""

import math
from dataclasses import dataclass, field

import numpy as np

from .problem import INF, NonsmoothOracle, Problem, compose_least_squares, compose_quadratic, zero_oracle
from .prox import l1_entry, points_entry


@dataclass
class AnalyticProblem:
    problem: Problem
    known_minimizer: np.ndarray = None
    known_min_value: float = None
    known_L_f: float = None
    description: str = ""


def rng_for(seed, *keys):
    """Generator for ``seed`` split along ``keys`` (one stream per purpose)."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def make_quadratic(n, condition=100.0, seed=0):
    """``f = 0.5 x^T Q x - b^T x``, ``g = 0`` with eigenvalues log-spaced in ``[1, condition]``."""
    rng = rng_for(seed, 1)
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = np.logspace(0.0, math.log10(condition), n) if n > 1 else np.array([1.0])
    Q = (U * eigs) @ U.T
    Q = 0.5 * (Q + Q.T)
    b = rng.standard_normal(n)
    x_star = np.linalg.solve(Q, b)
    p = Problem(compose_quadratic(Q, b), zero_oracle(), lipschitz_estimate=float(eigs.max()))
    return AnalyticProblem(
        p, x_star, -0.5 * float(b @ x_star), float(eigs.max()),
        f"strongly convex quadratic, n={n}, condition={condition}",
    )


def make_lasso(m, n, lam=0.1, seed=0, density=0.25, margin=0.5):
    """``0.5 ||A x - b||^2 + lam ||x||_1`` built around a chosen minimizer.

    With ``m >= n`` the vector ``b`` is set so that a sparse ``x*`` satisfies
    the optimality condition with dual certificate ``|z_i| <= margin < 1``
    off the support (strict complementarity). For ``m < n`` no minimizer is
    known and ``b`` is random.
    """
    rng = rng_for(seed, 2)
    A = rng.standard_normal((m, n)) / math.sqrt(m)
    L_f = float(np.linalg.norm(A, 2) ** 2)
    if m < n:
        b = rng.standard_normal(m)
        return AnalyticProblem(
            Problem(compose_least_squares(A, b), l1_entry(lam).oracle, lipschitz_estimate=L_f),
            None, None, L_f, f"lasso m={m} n={n} lam={lam}",
        )
    k = max(1, int(round(density * n)))
    support = rng.choice(n, size=k, replace=False)
    x_star = np.zeros(n)
    x_star[support] = rng.choice([-1.0, 1.0], size=k) * rng.uniform(0.5, 1.5, size=k)
    z = rng.uniform(-margin, margin, size=n)
    z[support] = np.sign(x_star[support])
    b = A @ x_star + lam * (A @ np.linalg.solve(A.T @ A, z))
    p = Problem(compose_least_squares(A, b), l1_entry(lam).oracle, lipschitz_estimate=L_f)
    res = A @ x_star - b
    return AnalyticProblem(
        p, x_star, 0.5 * float(res @ res) + lam * float(np.abs(x_star).sum()), L_f,
        f"lasso m={m} n={n} lam={lam} with strict complementarity margin {1 - margin}",
    )


def make_two_point_problem():
    """``f = x^2/2`` and ``g`` the indicator of ``{-1, 1}``; both points are minimizers."""
    p = Problem(compose_quadratic(np.eye(1), np.zeros(1)), points_entry([-1.0, 1.0], dim=1).oracle,
                lipschitz_estimate=1.0)
    return AnalyticProblem(p, np.array([-1.0]), 0.5, 1.0, "x^2/2 + indicator{-1,+1}; minimizers -1 and +1")


def _prox_power(w, gamma, power=5.0 / 3.0):
    """Scalar prox of ``z -> sign(z)|z|^(5/3)`` by enumerating stationary points."""
    c = (5.0 / 3.0) * gamma

    def obj(z):
        return math.copysign(abs(z) ** power, z) + (z - w) ** 2 / (2.0 * gamma)

    cands = [0.0]
    # z = u^3 > 0: u^3 + c u^2 - w = 0;  z = -u^3 < 0: u^3 - c u^2 + w = 0
    for coeffs, sgn in (([1.0, c, 0.0, -w], 1.0), ([1.0, -c, 0.0, w], -1.0)):
        for u in np.roots(coeffs):
            if abs(u.imag) <= 1e-9 * (1.0 + abs(u.real)) and u.real > 0.0:
                cands.append(sgn * u.real**3)
    return min(cands, key=obj)


def power_oracle():
    """``g(x) = sum sign(x_i) |x_i|^(5/3)`` (real cube root convention)."""

    def value(x):
        return float(np.sum(np.sign(x) * np.abs(x) ** (5.0 / 3.0)))

    def prox(x, gamma):
        z = np.array([_prox_power(float(w), gamma) for w in np.ravel(x)]).reshape(np.shape(x))
        return z, value(z)

    return NonsmoothOracle(prox, value, name="power_5_3")


def make_l1_plus_power():
    """``f = x^2/2``, ``g = x^(5/3)``: the origin is stationary but not critical."""
    p = Problem(compose_quadratic(np.eye(1), np.zeros(1)), power_oracle(), lipschitz_estimate=1.0)
    x_star = np.array([-(5.0 / 3.0) ** 3])
    val = 0.5 * x_star[0] ** 2 - abs(x_star[0]) ** (5.0 / 3.0)
    return AnalyticProblem(p, x_star, val, 1.0, "x^2/2 + x^(5/3); x=0 stationary, not critical")


def verify_lipschitz(ap, samples=100, seed=0, scale=1.0):
    """Largest sampled ratio ``||grad f(x) - grad f(y)|| / ||x - y||``."""
    rng = rng_for(seed, 3)
    n = ap.problem.dimension
    worst = 0.0
    for _ in range(samples):
        x = scale * rng.standard_normal(n)
        y = scale * rng.standard_normal(n)
        gx = ap.problem.smooth.gradient(x)
        gy = ap.problem.smooth.gradient(y)
        worst = max(worst, float(np.linalg.norm(gx - gy) / np.linalg.norm(x - y)))
    return worst


# ------------------------------------------------------------------ auditing


@dataclass
class AuditReport:
    """Margins ``rhs - lhs`` per check and iteration; a check passes when margin >= -tolerance."""

    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def add(self, name, k, margin, scale, slack):
        self.checks.setdefault(name, []).append((k, margin, scale))
        if margin < -slack * (1.0 + abs(scale)):
            self.failures.append((name, k, margin))

    @property
    def passed(self):
        return not self.failures

    def worst(self, name):
        """Smallest normalized margin ``margin / (1 + |scale|)`` for one check."""
        vals = [m / (1.0 + abs(s)) for _, m, s in self.checks.get(name, [])]
        return min(vals) if vals else math.inf

    def summary(self):
        return {name: (len(v), self.worst(name)) for name, v in self.checks.items()}


def audit_inequalities(trace, p=None, gamma=None, L_f=None, sigma=None, p_min=None, slack=1e-8):
    """Check the per-iteration inequalities of an FBE-based run.

    Checks, for each iteration with an accepted step:

    * ``linesearch``: ``phi_gamma(x+) <= phibar - sigma ||r||^2``;
    * ``sandwich``: ``phi_gamma(x_bar) <= phi(x_bar) <= phi_gamma(x) <= phibar``;
    * ``envelope_decrease``: ``phi(x_bar) <= phi_gamma(x) - (1 - gamma L)/(2 gamma) ||x - x_bar||^2``;
    * ``phibar_decrease``: ``phibar+ <= phibar - p sigma ||r||^2``;
    * ``square_summable``: ``sum ||r||^2 <= (phibar_0 - phi_gamma(x_final)) / (sigma p_min)``,
      per constant-``gamma`` segment;
    * ``sufficient_decrease`` (only when ``p`` is given and iterates were stored):
      ``phi(x_bar) <= phi(x) - (1 - gamma L)/(2 gamma) ||x - x_bar||^2``.

    ``gamma``, ``L_f``, ``sigma`` default to the values recorded per
    iteration, ``p_min`` to the trace's.
    """
    rep = AuditReport()
    recs = trace.records
    pm = trace.p_min if p_min is None else p_min
    seg_start = 0
    for i, r in enumerate(recs):
        if r.gamma_changed and i > seg_start:
            _audit_segment(rep, recs[seg_start:i], sigma, pm, slack)
            seg_start = i
        if math.isnan(r.fbe_next):
            continue
        g = r.gamma if gamma is None else gamma
        L = r.L if L_f is None else L_f
        sg = r.sigma if sigma is None else sigma
        rn2 = r.res_norm**2
        rep.add("linesearch", r.k, r.phibar - sg * rn2 - r.fbe_next, r.phibar, slack)
        rep.add("sandwich", r.k, r.phi_xbar - r.fbe_xbar, r.phi_xbar, slack)
        rep.add("sandwich", r.k, r.fbe - r.phi_xbar, r.fbe, slack)
        rep.add("sandwich", r.k, r.phibar - r.fbe, r.phibar, slack)
        dist2 = (g * r.res_norm) ** 2
        rep.add("envelope_decrease", r.k, r.fbe - (1.0 - g * L) / (2.0 * g) * dist2 - r.phi_xbar, r.fbe, slack)
        if i + 1 < len(recs) and not recs[i + 1].gamma_changed:
            pk = 1.0 if math.isnan(r.p) else r.p
            rep.add("phibar_decrease", r.k, r.phibar - pk * sg * rn2 - recs[i + 1].phibar, r.phibar, slack)
        if p is not None and i < len(trace.iterates):
            x, xb = trace.iterates[i], trace.xbars[i]
            phi_x = p.objective(x)
            if math.isfinite(phi_x):
                d = x - xb
                rep.add("sufficient_decrease", r.k,
                        phi_x - (1.0 - g * L) / (2.0 * g) * float(d @ d) - r.phi_xbar, phi_x, slack)
    _audit_segment(rep, recs[seg_start:], sigma, pm, slack)
    return rep


def _audit_segment(rep, recs, sigma, p_min, slack):
    steps = [r for r in recs if not math.isnan(r.fbe_next)]
    if not steps:
        return
    sg = steps[0].sigma if sigma is None else sigma
    total = sum(r.res_norm**2 for r in steps)
    bound = (steps[0].phibar - steps[-1].fbe_next) / (sg * p_min)
    rep.add("square_summable", steps[0].k, bound - total, steps[0].phibar / (sg * p_min), slack)

import numpy as np
import pytest

from zerofpr import SolverConfig, afbs_solve, fbs_solve, ifbs_solve
from zerofpr.bench.generators import gen_dict_learning, gen_sparse_approx
from zerofpr.problem import Problem, compose_quadratic, zero_oracle
from zerofpr.testlib import audit_inequalities, make_lasso, make_quadratic


def test_fbs_is_gradient_descent_on_smooth_problem(rng):
    ap = make_quadratic(5, 10.0, seed=1)
    Q, q = ap.problem.smooth.Q, ap.problem.smooth.q
    gamma = 0.05
    x0 = rng.standard_normal(5)
    _, tr = fbs_solve(ap.problem, x0, SolverConfig(gamma=gamma, tol=1e-300, max_iters=10, store_iterates=True))
    x = x0.copy()
    for k in range(10):
        np.testing.assert_allclose(tr.iterates[k], x, rtol=1e-13, atol=1e-14)
        x = x - gamma * (Q @ x - q)


def test_fbs_sufficient_decrease_on_nonconvex_instances():
    for seed in range(3):
        g = gen_sparse_approx(100, 0.05, seed)
        _, tr = fbs_solve(g.problem, g.x0, SolverConfig(tol=1e-6, store_iterates=True))
        rep = audit_inequalities(tr, p=g.problem.fresh())
        assert rep.passed, rep.failures[:3]
        assert "sufficient_decrease" in rep.checks


def test_ifbs_without_inertia_equals_fbs():
    p = make_lasso(30, 15, 0.1, seed=2).problem
    cfg = SolverConfig(tol=1e-9)
    _, ta = ifbs_solve(p.fresh(), np.zeros(15), cfg, inertia=0.0)
    _, tb = fbs_solve(p.fresh(), np.zeros(15), cfg)
    np.testing.assert_array_equal(ta.res_norms, tb.res_norms)
    np.testing.assert_array_equal(ta.x, tb.x)


def test_ifbs_converges_and_rejects_adaptive():
    p = make_lasso(30, 15, 0.1, seed=2).problem
    x, tr = ifbs_solve(p, np.zeros(15), SolverConfig(tol=1e-8))
    assert tr.status == "converged"
    with pytest.raises(ValueError):
        ifbs_solve(p, np.zeros(15), SolverConfig(adaptive_gamma=True))


@pytest.mark.parametrize("seed", range(3))
def test_afbs_reaches_lasso_minimizer(seed):
    ap = make_lasso(40, 20, 0.1, seed)
    x, tr = afbs_solve(ap.problem, np.zeros(20), SolverConfig(tol=1e-9))
    assert tr.status == "converged"
    np.testing.assert_allclose(x, ap.known_minimizer, atol=1e-6)


def test_afbs_beats_fbs_on_ill_conditioned_lasso():
    ap = make_lasso(40, 40, 0.01, seed=0)
    _, ta = afbs_solve(ap.problem.fresh(), np.zeros(40), SolverConfig(tol=1e-8, max_iters=100_000))
    _, tf = fbs_solve(ap.problem.fresh(), np.zeros(40), SolverConfig(tol=1e-8, max_iters=100_000))
    assert ta.final.prox_evals < tf.final.prox_evals


def test_adaptive_baselines_on_dictionary_learning():
    g = gen_dict_learning(n=6, m=20, k=8, N=2, seed=0)
    for solve in (fbs_solve, afbs_solve):
        p = g.problem.fresh()
        x, tr = solve(p, g.x0, SolverConfig(tol=1e-4, adaptive_gamma=True, max_iters=20_000))
        assert tr.status == "converged"
        assert np.isfinite(p.objective(x))


def test_fbs_adaptive_gamma_audit():
    ap = make_lasso(30, 15, 0.1, seed=6)
    p = Problem(ap.problem.smooth, ap.problem.nonsmooth)  # no Lipschitz constant: estimated and adaptive
    _, tr = fbs_solve(p, np.zeros(15), SolverConfig(tol=1e-8))
    assert tr.status == "converged"
    assert audit_inequalities(tr).passed


def test_afbs_stops_on_zero_residual_at_start():
    b = np.array([1.0, 2.0])
    p = Problem(compose_quadratic(np.eye(2), b), zero_oracle(), lipschitz_estimate=1.0)
    x, tr = afbs_solve(p, b.copy(), SolverConfig(tol=1e-12))
    assert tr.status == "converged" and tr.iterations == 0

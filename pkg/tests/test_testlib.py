import copy

import numpy as np
import pytest

from zerofpr import SolverConfig, zerofpr_solve
from zerofpr.fbe import prox_grad_step
from zerofpr.testlib import (
    _prox_power, audit_inequalities, make_two_point_problem, make_l1_plus_power, make_lasso, make_quadratic, rng_for,
    verify_lipschitz,
)


def test_rng_streams_are_reproducible_and_distinct():
    assert rng_for(3, 1).standard_normal() == rng_for(3, 1).standard_normal()
    assert rng_for(3, 1).standard_normal() != rng_for(3, 2).standard_normal()


def test_quadratic_known_solution():
    ap = make_quadratic(8, 50.0, seed=1)
    Q = ap.problem.smooth.Q
    np.testing.assert_allclose(Q @ ap.known_minimizer, ap.problem.smooth.q, atol=1e-10)
    assert np.linalg.cond(Q) == pytest.approx(50.0, rel=1e-6)
    assert ap.problem.objective(ap.known_minimizer) == pytest.approx(ap.known_min_value)


@pytest.mark.parametrize("seed", range(5))
def test_lasso_known_minimizer_is_critical(seed):
    ap = make_lasso(40, 20, 0.1, seed)
    gamma = 0.95 / ap.known_L_f
    s = prox_grad_step(ap.problem, ap.known_minimizer, gamma)
    assert s.res_norm <= 1e-10
    A, b = ap.problem.smooth.A, ap.problem.smooth.b
    z = -A.T @ (A @ ap.known_minimizer - b) / 0.1
    off = ap.known_minimizer == 0
    assert np.max(np.abs(z[off])) <= 0.5 + 1e-10  # strict complementarity margin


def test_underdetermined_lasso_has_no_known_minimizer():
    assert make_lasso(5, 10, seed=0).known_minimizer is None


def test_lipschitz_constants_are_upper_bounds():
    for ap in (make_quadratic(6, 20.0, 0), make_lasso(15, 10, seed=1)):
        assert verify_lipschitz(ap) <= ap.known_L_f * (1 + 1e-12)


def test_power_prox_against_grid():
    grid = np.linspace(-8, 8, 400_001)
    for w in (-3.0, -0.2, 0.0, 0.7, 4.0):
        for gamma in (0.1, 0.5, 1.0):
            z = _prox_power(w, gamma)
            vals = np.sign(grid) * np.abs(grid) ** (5 / 3) + (grid - w) ** 2 / (2 * gamma)
            obj = np.sign(z) * abs(z) ** (5 / 3) + (z - w) ** 2 / (2 * gamma)
            assert obj <= vals.min() + 1e-9


def test_power_problem_minimizer_is_critical():
    ap = make_l1_plus_power()
    s = prox_grad_step(ap.problem, ap.known_minimizer, 0.5)
    assert s.res_norm <= 1e-9
    assert ap.problem.objective(ap.known_minimizer) == pytest.approx(ap.known_min_value)


def test_two_point_fixture():
    ap = make_two_point_problem()
    assert ap.problem.objective(np.array([1.0])) == ap.problem.objective(np.array([-1.0])) == 0.5


class TestAudit:
    def _run(self):
        p = make_lasso(30, 15, 0.1, seed=0).problem
        _, tr = zerofpr_solve(p, np.zeros(15), SolverConfig(tol=1e-9, store_iterates=True))
        return p, tr

    def test_clean_run_passes_every_check(self):
        p, tr = self._run()
        rep = audit_inequalities(tr, p=p.fresh())
        assert rep.passed
        assert set(rep.checks) == {"linesearch", "sandwich", "envelope_decrease", "phibar_decrease",
                                   "square_summable", "sufficient_decrease"}

    def test_tampered_linesearch_is_caught(self):
        _, tr = self._run()
        bad = copy.deepcopy(tr)
        bad.records[2].fbe_next = bad.records[2].phibar + 1.0
        rep = audit_inequalities(bad)
        assert not rep.passed
        assert ("linesearch", 2) in [(n, k) for n, k, _ in rep.failures]

    def test_tampered_merit_is_caught(self):
        _, tr = self._run()
        bad = copy.deepcopy(tr)
        bad.records[3].phibar = bad.records[2].phibar + 1.0
        assert not audit_inequalities(bad).passed

    def test_overstated_decrease_parameter_is_caught(self):
        _, tr = self._run()
        assert not audit_inequalities(tr, sigma=1e3).passed

    def test_summary(self):
        _, tr = self._run()
        summary = audit_inequalities(tr).summary()
        assert summary["linesearch"][0] == tr.iterations
        assert summary["linesearch"][1] >= -1e-8

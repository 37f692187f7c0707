import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from zerofpr.prox import (
    box_l0_entry, catalog, l0_entry, l1_entry, l_half_entry, project_box_l0, project_points, project_rank,
    project_sphere, prox_l0, prox_l1, prox_l_half, prox_product, sphere_entry, zero_entry,
)

GRID = np.linspace(-12.0, 12.0, 100_001)


def grid_argmin(gfun, x, gamma, grid=GRID):
    vals = gfun(grid) + (grid - x) ** 2 / (2.0 * gamma)
    return grid[np.argmin(vals)], vals.min()


class TestL1:
    def test_zero(self):
        assert prox_l1(np.zeros(3), 1.0, 1.0).tolist() == [0.0, 0.0, 0.0]

    def test_shrink(self):
        np.testing.assert_array_equal(prox_l1(np.array([2.0, -2.0]), 1.0, 1.0), [1.0, -1.0])

    def test_grid(self, rng):
        for x in rng.uniform(-10, 10, 20):
            z = prox_l1(np.array([x]), 0.8, 0.6)[0]
            zg, _ = grid_argmin(lambda t: 0.8 * np.abs(t), x, 0.6)
            assert abs(z - zg) <= 2 * (GRID[1] - GRID[0])


class TestLHalf:
    def test_zero(self, backend):
        assert prox_l_half(np.zeros(1), 1.0, 1.0)[0] == 0.0

    def test_large_input_matches_fine_grid(self, backend):
        z = prox_l_half(np.array([10.0]), 1.0, 1.0)[0]
        grid = np.linspace(0.0, 10.0, 1_000_001)
        zg = grid[np.argmin(np.sqrt(grid) + 0.5 * (grid - 10.0) ** 2)]
        assert 0.0 < z < 10.0
        assert abs(z - zg) <= 2e-5

    def test_tiny_input_maps_to_zero(self, backend):
        assert prox_l_half(np.array([1e-6]), 1.0, 1.0)[0] == 0.0

    def test_odd_symmetry(self, backend, rng):
        x = rng.uniform(-5, 5, 50)
        np.testing.assert_array_equal(prox_l_half(-x, 0.7, 0.9), -prox_l_half(x, 0.7, 0.9))

    def test_stationarity_of_nonzero_branch(self, backend, rng):
        lam, gamma = 0.6, 0.8
        x = rng.uniform(-8, 8, 200)
        z = prox_l_half(x, lam, gamma)
        nz = z != 0
        # d/dz [lam sqrt|z| + (z-x)^2/(2 gamma)] = 0
        res = lam * np.sign(z[nz]) / (2 * np.sqrt(np.abs(z[nz]))) + (z[nz] - x[nz]) / gamma
        assert np.max(np.abs(res)) <= 1e-9


class TestL0:
    def test_zero(self, backend):
        assert prox_l0(np.zeros(2), 1.0, 1.0).tolist() == [0.0, 0.0]

    def test_threshold_one(self, backend):
        np.testing.assert_array_equal(prox_l0(np.array([2.0, 0.5]), 0.5, 1.0), [2.0, 0.0])

    def test_tie_goes_to_zero_and_uses_magnitude(self, backend):
        np.testing.assert_array_equal(prox_l0(np.array([1.0, -1.0, -2.0]), 0.5, 1.0), [0.0, 0.0, -2.0])

    def test_invariant_under_fixed_product(self, backend, rng):
        x = rng.standard_normal(50) * 2
        np.testing.assert_array_equal(prox_l0(x, 0.2, 2.0), prox_l0(x, 0.8, 0.5))

    def test_grid(self, backend, rng):
        for x in rng.uniform(-4, 4, 30):
            z = prox_l0(np.array([x]), 0.5, 0.7)[0]
            # exact candidate set {0, x}
            cand = {0.0: 0.5 * 0.0 + x * x / 1.4, x: 0.5}
            assert cand[z] <= min(cand.values()) + 1e-12


class TestSphere:
    def test_scaling(self, backend):
        np.testing.assert_allclose(project_sphere([3.0, 4.0]), [0.6, 0.8])

    def test_idempotent(self, backend, rng):
        d = project_sphere(rng.standard_normal(5))
        np.testing.assert_allclose(project_sphere(d), d, rtol=1e-15)

    def test_zero_maps_to_e1(self, backend):
        np.testing.assert_array_equal(project_sphere(np.zeros(3)), [1.0, 0.0, 0.0])

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.integers(1, 10), elements=st.floats(-1e6, 1e6)))
    def test_unit_norm(self, d):
        assert abs(np.linalg.norm(project_sphere(d)) - 1.0) <= 1e-12


class TestBoxL0:
    def test_keep_two(self, backend):
        np.testing.assert_array_equal(project_box_l0([3.0, -1.0, 2.0], 2, 10.0), [3.0, 0.0, 2.0])

    def test_clip(self, backend):
        np.testing.assert_array_equal(project_box_l0([3.0, -1.0, 2.0], 2, 2.5), [2.5, 0.0, 2.0])

    def test_ties_keep_lowest_index(self, backend):
        np.testing.assert_array_equal(project_box_l0([1.0, -1.0, 1.0], 2, 5.0), [1.0, -1.0, 0.0])

    def test_N_too_large(self):
        with pytest.raises(ValueError):
            project_box_l0([1.0, 2.0], 3, 1.0)

    def test_exhaustive_support_enumeration(self, backend, rng):
        for _ in range(30):
            c = rng.standard_normal(6) * 2
            out = project_box_l0(c, 3, 1.5)
            best = min(
                np.sum((c - _clip_support(c, s, 1.5)) ** 2) for s in itertools.combinations(range(6), 3)
            )
            assert np.sum((c - out) ** 2) <= best + 1e-12

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.integers(1, 12), elements=st.floats(-100, 100)), st.integers(0, 12),
           st.floats(0.01, 50))
    def test_feasible(self, c, N, T):
        N = min(N, c.size)
        out = project_box_l0(c, N, T)
        assert np.count_nonzero(out) <= N
        assert np.all(np.abs(out) <= T)


def _clip_support(c, support, T):
    z = np.zeros_like(c)
    idx = list(support)
    z[idx] = np.clip(c[idx], -T, T)
    return z


class TestRank:
    def test_rank_one_fixed(self, rng):
        X = np.outer(rng.standard_normal(4), rng.standard_normal(3))
        assert np.linalg.norm(project_rank(X, 1) - X) <= 1e-10

    def test_diagonal(self):
        np.testing.assert_allclose(project_rank(np.diag([3.0, 2.0, 1.0]), 2), np.diag([3.0, 2.0, 0.0]), atol=1e-14)

    def test_tail_energy(self, rng):
        X = rng.standard_normal((5, 4))
        s = np.linalg.svd(X, compute_uv=False)
        assert np.linalg.norm(X - project_rank(X, 2)) ** 2 == pytest.approx(s[2] ** 2 + s[3] ** 2, rel=1e-12)

    def test_numerical_rank(self, rng):
        s = np.linalg.svd(project_rank(rng.standard_normal((6, 5)), 2), compute_uv=False)
        assert s[2] <= 1e-10 * s[0]

    def test_r_too_large(self):
        with pytest.raises(ValueError):
            project_rank(np.eye(2), 3)


def test_project_points_first_listed_wins():
    np.testing.assert_array_equal(project_points(np.array([0.0, 0.4, -3.0]), [-1.0, 1.0]), [-1.0, 1.0, -1.0])


class TestProduct:
    def test_single_block_matches_entry(self, rng):
        x = rng.standard_normal(5)
        g = prox_product([(l1_entry(0.5), (0, 5))])
        np.testing.assert_array_equal(g.prox(x, 0.4)[0], prox_l1(x, 0.5, 0.4))

    def test_two_zero_blocks_identity(self, rng):
        x = rng.standard_normal(6)
        g = prox_product([(zero_entry(), (0, 2)), (zero_entry(), (2, 6))])
        np.testing.assert_array_equal(g.prox(x, 1.0)[0], x)

    def test_dictionary_layout_matches_independent_projections(self, backend, rng):
        n, k, m, N, T = 4, 3, 5, 2, 0.8
        x = rng.standard_normal(n * k + k * m)
        g = prox_product([(sphere_entry(n, k), (0, n * k)), (box_l0_entry(k, N, T, m), (n * k, n * k + k * m))])
        z, gz = g.prox(x, 1.0)
        for j in range(k):
            np.testing.assert_allclose(z[j * n:(j + 1) * n], project_sphere(x[j * n:(j + 1) * n]))
        off = n * k
        for j in range(m):
            blk = slice(off + j * k, off + (j + 1) * k)
            np.testing.assert_array_equal(z[blk], project_box_l0(x[blk], N, T))
        assert gz == 0.0 and g.value(z) == 0.0

    def test_value_is_sum_of_blocks(self, rng):
        x = rng.standard_normal(6)
        g = prox_product([(l1_entry(1.0), (0, 3)), (l0_entry(2.0), (3, 6))])
        assert g.value(x) == pytest.approx(np.abs(x[:3]).sum() + 2.0 * np.count_nonzero(x[3:]))

    @pytest.mark.parametrize("ranges", [[(0, 2), (1, 4)], [(0, 2), (3, 4)], [(1, 4)], [(0, 0), (0, 3)]])
    def test_bad_partitions(self, ranges):
        with pytest.raises(ValueError):
            prox_product([(zero_entry(), r) for r in ranges])

    def test_block_length_checked(self):
        with pytest.raises(ValueError):
            prox_product([(sphere_entry(3, 2), (0, 5))])


@pytest.mark.parametrize("entry", catalog(0.5), ids=lambda e: e.name)
def test_catalog_is_prox_bounded(entry):
    assert entry.gamma_g == np.inf and entry.oracle.gamma_g == np.inf

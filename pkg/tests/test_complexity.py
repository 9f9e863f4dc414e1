import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randset import complexity as cx
from randset.errors import ConfigError, DomainError, RangeError


def exact_rademacher(values):
    """Enumeration oracle: average of sup sign sums over all 2^n vectors."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    total = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        total += (np.asarray(signs) @ values).max()
    return total / (2 ** n) / n


def minimal_cover_bruteforce(points, delta):
    """Exhaustive minimal internal cover with closed delta-balls (<= 12 points)."""
    points = np.asarray(points, dtype=float)
    N = len(points)
    dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    for size in range(1, N + 1):
        for centers in itertools.combinations(range(N), size):
            if np.all(dist[:, list(centers)].min(axis=1) <= delta):
                return size
    return N


class TestRademacherMc:
    def test_singleton_hypothesis(self):
        lm = cx.LossMatrix(np.array([[0.3], [0.8], [0.1]]), 1.0)
        est = cx.rademacher_mc(lm, 50_000, seed=0)
        assert exact_rademacher(lm.values) == pytest.approx(0.0, abs=1e-12)
        assert abs(est.mean) <= 3 * est.std_error

    def test_two_hypotheses_one_point(self):
        lm = cx.LossMatrix(np.array([[0.0, 1.0]]), 1.0)
        assert exact_rademacher(lm.values) == 0.5
        est = cx.rademacher_mc(lm, 100_000, seed=1)
        assert abs(est.mean - 0.5) <= 3 * est.std_error

    def test_identical_rows(self):
        lm = cx.LossMatrix(np.array([[0.0, 1.0], [0.0, 1.0]]), 1.0)
        assert exact_rademacher(lm.values) == 0.25
        est = cx.rademacher_mc(lm, 100_000, seed=2)
        assert abs(est.mean - 0.25) <= 3 * est.std_error

    def test_deterministic_given_seed(self):
        lm = cx.LossMatrix(np.random.default_rng(0).uniform(size=(5, 3)), 1.0)
        a = cx.rademacher_mc(lm, 1000, seed=42)
        b = cx.rademacher_mc(lm, 1000, seed=42)
        assert a == b

    def test_empty_matrix_rejected(self):
        lm = cx.LossMatrix(np.empty((0, 0)), 1.0)
        with pytest.raises(DomainError):
            cx.rademacher_mc(lm, 10, seed=0)

    def test_se_definition(self):
        lm = cx.LossMatrix(np.random.default_rng(1).uniform(size=(4, 2)), 1.0)
        est = cx.rademacher_mc(lm, 5000, seed=3)
        assert est.std_error >= 0
        assert est.draws == 5000


class TestMgf:
    def test_zero_matrix_gives_exactly_one(self):
        lm = cx.LossMatrix(np.zeros((3, 2)), 1.0)
        est = cx.rademacher_mgf_mc(lm, 2.0, 100, seed=0)
        assert est.mean == 1.0 and est.std_error == 0.0

    def test_single_entry_cosh(self):
        lm = cx.LossMatrix(np.array([[1.0]]), 1.0)
        est = cx.rademacher_mgf_mc(lm, 1.0, 200_000, seed=1)
        assert abs(est.mean - np.cosh(1.0)) <= 4 * est.std_error

    def test_small_lambda_limit(self):
        lm = cx.LossMatrix(np.random.default_rng(2).uniform(size=(4, 3)), 1.0)
        est = cx.rademacher_mgf_mc(lm, 1e-9, 20_000, seed=2)
        assert abs(est.mean - 1.0) <= max(3 * est.std_error, 1e-8)

    def test_overflow_cap(self):
        lm = cx.LossMatrix(np.ones((2, 2)), 1.0)
        with pytest.raises(RangeError, match="reduce lambda"):
            cx.rademacher_mgf_mc(lm, 31.0, 100, seed=0)


class TestMassart:
    def test_single_class_is_zero(self):
        assert cx.massart_bound(1, 1.0, 10) == 0.0

    def test_hand_arithmetic(self):
        assert cx.massart_bound(4, 1.0, 100) == pytest.approx(
            np.sqrt(2 * np.log(4) / 100), rel=1e-15
        )
        assert cx.massart_bound(4, 1.0, 100) == pytest.approx(0.16651, abs=5e-6)

    def test_scales_linearly_in_bound(self):
        assert cx.massart_bound(7, 2.0, 50) == pytest.approx(
            2 * cx.massart_bound(7, 1.0, 50), rel=1e-15
        )

    def test_domination_of_mc_estimates(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n, K = int(rng.integers(1, 5)), int(rng.integers(1, 4))
            lm = cx.LossMatrix(rng.uniform(size=(n, K)), 1.0)
            est = cx.rademacher_mc(lm, 4000, seed=int(rng.integers(2**32)))
            bound = cx.massart_bound(K, 1.0, n)
            assert est.mean <= bound + 4 * max(est.std_error, 1e-12)


class TestPseudometric:
    def test_identical_columns(self):
        lm = cx.LossMatrix(np.tile([[0.2], [0.4]], (1, 3)), 1.0)
        assert np.all(cx.pseudometric_matrix(lm) == 0.0)

    def test_hand_value(self):
        lm = cx.LossMatrix(np.array([[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]]), 1.0)
        dm = cx.pseudometric_matrix(lm)
        assert dm[0, 1] == 1.0 and dm[1, 0] == 1.0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_axioms_on_random_tables(self, seed):
        rng = np.random.default_rng(seed)
        lm = cx.LossMatrix(rng.uniform(size=(4, 5)), 1.0)
        dm = cx.pseudometric_matrix(lm)
        assert np.allclose(dm, dm.T, atol=0)
        assert np.all(np.diag(dm) == 0.0)
        assert dm.max() <= 1.0 + 1e-15
        for i, j, k in itertools.product(range(5), repeat=3):
            assert dm[i, k] <= dm[i, j] + dm[j, k] + 1e-12


class TestGreedyCover:
    def test_singleton(self):
        res = cx.greedy_cover(np.array([[3.0, 4.0]]), 0.5)
        assert res.size == 1 and res.packing_lower_bound == 1

    def test_two_points_cases(self):
        pts = np.array([[0.0], [1.0]])
        assert cx.greedy_cover(pts, 1.0).size == 1
        assert cx.greedy_cover(pts, 0.4).size == 2

    def test_grid_cover_range(self):
        pts = np.linspace(0, 1, 101)[:, None]
        res = cx.greedy_cover(pts, 0.05)
        # 1-D sweep oracle: exact minimal internal cover of the grid
        exact = 0
        covered_until = -np.inf
        for p in pts.ravel():
            if p > covered_until:
                center = pts.ravel()[pts.ravel() <= p + 0.05].max()
                covered_until = center + 0.05
                exact += 1
        assert exact == 10
        assert 10 <= res.size <= 21
        assert res.packing_lower_bound <= exact

    def test_precomputed_matrix_input(self):
        pts = np.array([[0.0], [1.0], [2.0]])
        dm = np.abs(pts - pts.T)
        res = cx.greedy_cover(dm, 0.9, metric="data-dependent")
        assert res.size == 3

    def test_sandwich_against_bruteforce(self):
        rng = np.random.default_rng(7)
        for trial in range(10):
            pts = rng.uniform(size=(int(rng.integers(2, 13)), 2))
            for delta in (0.1, 0.25, 0.5):
                exact = minimal_cover_bruteforce(pts, delta)
                res = cx.greedy_cover(pts, delta)
                assert res.packing_lower_bound <= exact <= res.size


class TestCoveringCurve:
    def test_singleton_all_ones(self):
        curve = cx.covering_curve(np.array([[0.0]]), [1.0, 0.5, 0.25])
        assert np.all(curve.cover_sizes == 1)
        assert np.all(curve.pack_sizes == 1)

    def test_segment_doubling(self):
        pts = np.linspace(0, 1, 513)[:, None]
        scales = [2.0 ** -k for k in range(2, 7)]
        curve = cx.covering_curve(pts, scales)
        ratios = curve.cover_sizes[1:] / curve.cover_sizes[:-1]
        assert np.all((1.5 <= ratios) & (ratios <= 2.5))

    def test_pack_below_cover(self):
        rng = np.random.default_rng(11)
        pts = rng.normal(size=(200, 3))
        curve = cx.covering_curve(pts, [2.0, 1.0, 0.5, 0.25])
        assert np.all(curve.pack_sizes <= curve.cover_sizes)

    def test_matches_single_scale_calls(self):
        rng = np.random.default_rng(13)
        pts = rng.uniform(size=(40, 2))
        scales = [0.5, 0.3, 0.2, 0.1]
        curve = cx.covering_curve(pts, scales)
        for s, c, p in zip(scales, curve.cover_sizes, curve.pack_sizes):
            single = cx.greedy_cover(pts, s)
            assert single.size == c
            assert single.packing_lower_bound == p

    def test_increasing_scales_rejected(self):
        with pytest.raises(ConfigError):
            cx.covering_curve(np.array([[0.0]]), [0.1, 0.2])

    def test_csv_export(self, tmp_path):
        curve = cx.covering_curve(np.linspace(0, 1, 33)[:, None], [0.25, 0.125])
        path = tmp_path / "curve.csv"
        curve.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "scale,cover_size,pack_size"
        assert len(lines) == 3


class TestDimensionFit:
    def test_single_point_dimension_zero(self):
        curve = cx.covering_curve(np.array([[0.0]]), [0.5, 0.25, 0.125])
        fit = cx.fit_box_dimension(curve, window=(0, 3))
        assert fit.dimension == 0.0

    def test_segment(self):
        pts = np.linspace(0, 1, 2048)[:, None]
        curve = cx.covering_curve(pts, [2.0 ** -k for k in range(2, 8)])
        fit = cx.fit_box_dimension(curve)
        assert fit.dimension == pytest.approx(1.0, abs=0.15)

    def test_cantor(self):
        pts = np.array([0.0])
        length = 1.0
        for _ in range(10):
            length /= 3.0
            pts = np.concatenate([pts, pts + 2 * length])
        curve = cx.covering_curve(np.sort(pts)[:, None],
                                  [3.0 ** -k for k in range(2, 8)])
        fit = cx.fit_box_dimension(curve)
        assert fit.dimension == pytest.approx(np.log(2) / np.log(3), abs=0.05)

    def test_square_grid(self):
        g = np.linspace(0, 1, 64)
        pts = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2)
        curve = cx.covering_curve(pts, [2.0 ** (-k / 2) for k in range(4, 13)])
        fit = cx.fit_box_dimension(curve)
        assert fit.dimension == pytest.approx(2.0, abs=0.2)

    def test_too_few_scales_rejected(self):
        curve = cx.covering_curve(np.array([[0.0], [1.0]]), [0.5, 0.25])
        with pytest.raises(DomainError):
            cx.fit_box_dimension(curve, window=(0, 2))


class TestCldComplexityBound:
    def test_vanishes_for_large_n(self):
        assert cx.rademacher_cld_bound(1, 1, 1, 1, 1, 10 ** 8) < 0.01

    def test_hand_arithmetic(self):
        val = cx.rademacher_cld_bound(1.0, 1.0, 1.0, 1, 1.0, 100)
        assert val == pytest.approx(0.1 + np.sqrt(2 * np.log(400) / 100), rel=1e-12)
        assert val == pytest.approx(0.1 + 0.3461, abs=2e-4)

    def test_monotone_in_n(self):
        vals = [cx.rademacher_cld_bound(1, 1, 1, 3, 2.0, n) for n in
                (10, 100, 1000, 10_000, 100_000)]
        assert np.all(np.diff(vals) < 0)

    def test_log_domain_error(self):
        with pytest.raises(DomainError):
            cx.rademacher_cld_bound(1.0, 1e-9, 1e-9, 1, 1e-6, 1)

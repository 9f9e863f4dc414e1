import math

import numpy as np
import pytest

from randset import bounds as bd
from randset.errors import ConfigError, DegenerateError


LAMBDA_GRID = np.logspace(-3, 3, 200)


def grid_best(make_report, side="upper"):
    """1-D grid-search oracle over lambda."""
    vals = [make_report(lam).value for lam in LAMBDA_GRID]
    return min(vals) if side == "upper" else max(vals)


def zeta_for_log(target):
    """zeta with log(1/zeta) == target."""
    return float(np.exp(-target))


class TestGenericSubgaussian:
    def test_vanishing_log_term(self):
        rep = bd.generic_subgaussian_bound(0.0, 0.9999, 2.0, 0.5)
        assert rep.value == pytest.approx(2.0 * 0.5, abs=1e-3)

    def test_optimized_hand_value(self):
        # it + log(1/zeta) = 2, coeff = 9/800 -> 2 sqrt(2 * 9/800) = 0.3
        zeta = zeta_for_log(1.0)
        rep = bd.generic_subgaussian_bound(1.0, zeta, "optimize", 9.0 / 800.0)
        assert rep.value == pytest.approx(0.3, rel=1e-12)

    def test_residual_linear_in_lambda(self):
        zeta = 0.5
        r1 = bd.generic_subgaussian_bound(0.0, zeta, 1.0, 0.25)
        r2 = bd.generic_subgaussian_bound(0.0, zeta, 2.0, 0.25)
        assert r2.terms["residual"] == pytest.approx(2 * r1.terms["residual"], rel=1e-15)


class TestRademacherUpper:
    def test_rad_free_limit(self):
        rep = bd.pacbayes_rademacher_upper(0.0, 0.0, 1.0, 100, 0.9999, 5.0)
        assert rep.value == pytest.approx(5.0 * 9.0 / 800.0, abs=1e-3)

    def test_hand_arithmetic(self):
        zeta = zeta_for_log(1.0)
        rep = bd.pacbayes_rademacher_upper(0.1, 1.0, 1.0, 100, zeta, 20.0)
        assert rep.value == pytest.approx(0.525, rel=1e-12)

    def test_optimized_matches_closed_form_and_grid(self):
        zeta = 0.1
        it = 0.7
        a = it + np.log(1 / zeta)
        rep = bd.pacbayes_rademacher_upper(0.3, it, 2.0, 50, zeta, "optimize")
        closed = 0.6 + 2 * np.sqrt(a * 9.0 * 4.0 / (8 * 50))
        assert rep.value == pytest.approx(closed, rel=1e-12)
        best = grid_best(
            lambda lam: bd.pacbayes_rademacher_upper(0.3, it, 2.0, 50, zeta, lam)
        )
        assert rep.value <= best + 1e-9 * abs(best)


class TestClosedForm:
    def test_hand_arithmetic(self):
        zeta = 2 * np.exp(-1.0)  # log(2/zeta) = 1
        rep = bd.pacbayes_rademacher_upper_closed(0.0, 0.0, 1.0, 2, zeta)
        assert rep.value == pytest.approx(3.0, rel=1e-12)

    def test_monotone_in_confidence(self):
        vals = [
            bd.pacbayes_rademacher_upper_closed(0.0, 0.0, 1.0, 10, z).value
            for z in (0.5, 0.2, 0.1, 0.05)
        ]
        assert np.all(np.diff(vals) > 0)

    def test_quadruple_n_halves_sqrt_term(self):
        a = bd.pacbayes_rademacher_upper_closed(0.0, 1.0, 1.0, 25, 0.1)
        b = bd.pacbayes_rademacher_upper_closed(0.0, 1.0, 1.0, 100, 0.1)
        assert b.value == pytest.approx(a.value / 2.0, rel=1e-12)


class TestMgfFinite:
    def test_singleton_limit(self):
        rep = bd.mgf_finite_upper(1.0, 0.0, 1.0, 10, 0.9999, 3.0)
        assert rep.value == pytest.approx(3.0 * 2.0 / 10.0, abs=1e-3)

    def test_hand_arithmetic(self):
        zeta = zeta_for_log(1.0)
        rep = bd.mgf_finite_upper(np.e, 0.0, 1.0, 2, zeta, 1.0)
        assert rep.value == pytest.approx(3.0, rel=1e-12)

    def test_optimized_matches_closed_form_and_grid(self):
        zeta = 0.2
        a = np.log(5.0) + 0.4 + np.log(1 / zeta)
        rep = bd.mgf_finite_upper(5.0, 0.4, 1.5, 80, zeta, "optimize")
        closed = 2 * 1.5 * np.sqrt(2 * a / 80)
        assert rep.value == pytest.approx(closed, rel=1e-12)
        best = grid_best(lambda lam: bd.mgf_finite_upper(5.0, 0.4, 1.5, 80, zeta, lam))
        assert rep.value <= best + 1e-9 * abs(best)


class TestCoveringUpper:
    def test_trivial_cover_limit(self):
        rep = bd.covering_upper(0.0, 1, 1.0, 100, 0.0, 0.9999, 2.0)
        assert rep.value == pytest.approx(2.0 * 9.0 / 800.0, abs=1e-3)

    def test_hand_arithmetic(self):
        zeta = zeta_for_log(1.0)
        rep = bd.covering_upper(0.1, 16, 1.0, 100, 0.0, zeta, 10.0)
        expected = 0.2 + 2 * np.sqrt(2 * np.log(16) / 100) + 0.1 + 10 * 9 / 800
        assert rep.value == pytest.approx(expected, rel=1e-12)

    def test_euclidean_scales_first_term_by_l(self):
        kwargs = dict(delta=0.2, cover_size=8, B=1.0, n=50, it_term=0.1,
                      zeta=0.1, lam=5.0, metric="euclidean")
        r1 = bd.covering_upper(L=1.0, **kwargs)
        r2 = bd.covering_upper(L=2.0, **kwargs)
        assert r2.terms["resolution"] == pytest.approx(2 * r1.terms["resolution"])
        for name in ("complexity", "it", "confidence", "residual"):
            assert r2.terms[name] == r1.terms[name]

    def test_euclidean_requires_l(self):
        with pytest.raises(ConfigError):
            bd.covering_upper(0.1, 4, 1.0, 50, 0.0, 0.1, 1.0, metric="euclidean")

    def test_specialization_chain(self):
        # delta = 0, one center: must equal the Rademacher form with rad = 0
        zeta, lam, B, n, it = 0.25, 7.0, 1.3, 64, 0.5
        cov = bd.covering_upper(0.0, 1, B, n, it, zeta, lam)
        rad = bd.pacbayes_rademacher_upper(0.0, it, B, n, zeta, lam)
        assert cov.terms["resolution"] == 0.0
        assert cov.terms["complexity"] == rad.terms["complexity"] == 0.0
        for name in ("it", "confidence", "residual"):
            assert cov.terms[name] == rad.terms[name]
        assert cov.value == rad.value


class TestFractalUpper:
    def test_dimension_zero_limit(self):
        rep = bd.fractal_upper(0.0, 1e-9, 100, 1.0, 0.0, 0.9999, 2.0)
        assert rep.value == pytest.approx(2.0 / 100 + 2.0 * 9.0 / 800.0, abs=1e-3)

    def test_data_dependent_dominant_term(self):
        rep = bd.fractal_upper(1.0, 0.1, 100, 1.0, 0.0, 0.5, 1.0)
        assert rep.terms["complexity"] == pytest.approx(
            2 * np.sqrt(2 * 1.1 * np.log(100) / 100), rel=1e-12
        )
        assert rep.terms["complexity"] == pytest.approx(0.6366, abs=1e-4)

    def test_confidence_metadata(self):
        rep = bd.fractal_upper(0.5, 0.1, 50, 1.0, 0.0, 0.1, 1.0, gamma=0.02)
        assert rep.metadata["claimed_confidence"] == pytest.approx(1 - 0.1 - 0.02)
        rep_e = bd.fractal_upper(0.5, 0.1, 50, 1.0, 0.0, 0.1, 1.0,
                                 metric="euclidean", L=2.0, gamma=0.02)
        assert rep_e.metadata["claimed_confidence"] == pytest.approx(1 - 0.1 - 0.06)
        assert rep_e.metadata["assumption_conditional"] is True

    def test_forms_share_n_scaling(self):
        # value * sqrt(n / log n) approaches a constant for both forms
        for metric, kw in (("data-dependent", {}), ("euclidean", {"L": 1.0})):
            scaled = []
            for n in (10**2, 10**3, 10**4, 10**5, 10**6):
                rep = bd.fractal_upper(1.0, 0.1, n, 1.0, 0.0, 0.1, "optimize",
                                       metric=metric, **kw)
                scaled.append(rep.value * np.sqrt(n / np.log(n)))
            assert abs(scaled[-1] - scaled[-2]) / scaled[-1] < 0.05


class TestLowerBound:
    def test_rad_free_is_negative(self):
        rep = bd.lower_bound(0.0, 1.0, 100, 0.0, 0.5, 1.0)
        assert rep.side == "lower"
        assert rep.value < 0

    def test_hand_arithmetic(self):
        zeta = zeta_for_log(1.0)
        rep = bd.lower_bound(0.8, 1.0, 100, 0.0, zeta, 20.0)
        assert rep.value == pytest.approx(0.075, rel=1e-12)

    def test_below_matching_upper(self):
        zeta, lam, B, n, it, rad = 0.1, 10.0, 1.0, 100, 0.3, 0.4
        lower = bd.lower_bound(rad, B, n, it, zeta, lam)
        upper = bd.pacbayes_rademacher_upper(rad, it, B, n, zeta, lam)
        assert lower.value <= upper.value
        assert lower.terms["complexity"] <= upper.terms["complexity"]
        assert lower.terms["it"] <= upper.terms["it"]

    def test_optimized_beats_grid(self):
        zeta, it = 0.1, 0.5
        rep = bd.lower_bound(0.9, 1.0, 200, it, zeta, "optimize")
        best = grid_best(
            lambda lam: bd.lower_bound(0.9, 1.0, 200, it, zeta, lam), side="lower"
        )
        assert rep.value >= best - 1e-9 * abs(best)


class TestSgldUpper:
    def test_trivial_limit(self):
        rep = bd.sgld_upper(0.0, 1, 1.0, 10, 0.9999, 3.0)
        assert rep.value == pytest.approx(3.0 * 2.0 / 10.0, abs=1e-3)

    def test_optimized_value(self):
        # frozen from the lambda* plug-in: 2 sqrt(2 (log 100 + 1) / 50)
        rep = bd.sgld_upper(1.0, 10, 1.0, 50, 0.1, "optimize")
        assert rep.value == pytest.approx(2 * np.sqrt(2 * (np.log(100) + 1) / 50),
                                          rel=1e-12)
        assert rep.value == pytest.approx(0.9470096, abs=1e-6)
        assert rep.lambda_value == pytest.approx(np.sqrt(50 * (np.log(100) + 1) / 2),
                                                 rel=1e-12)

    def test_lipschitz_identity_on_grid(self):
        # KL = beta L^2 sum(eta) / 4 must reproduce
        # 2 B sqrt((4 log(T/zeta) + beta L^2 sum(eta)) / (2 n))
        rng = np.random.default_rng(0)
        for _ in range(100):
            B = rng.uniform(0.5, 3)
            n = int(rng.integers(10, 1000))
            T = int(rng.integers(1, 200))
            zeta = rng.uniform(0.01, 0.5)
            beta = rng.uniform(0.5, 20)
            L = rng.uniform(0.1, 2)
            sum_eta = rng.uniform(0.01, 5)
            kl = beta * L * L * sum_eta / 4
            rep = bd.sgld_upper(kl, T, B, n, zeta, "optimize")
            target = 2 * B * np.sqrt(
                (4 * np.log(T / zeta) + beta * L * L * sum_eta) / (2 * n)
            )
            assert abs(rep.value - target) <= 1e-9 * target

    def test_optimized_beats_grid(self):
        rep = bd.sgld_upper(0.7, 25, 1.0, 120, 0.05, "optimize")
        best = grid_best(lambda lam: bd.sgld_upper(0.7, 25, 1.0, 120, 0.05, lam))
        assert rep.value <= best + 1e-9 * abs(best)


class TestCldUpper:
    def test_zero_kl_matches_rademacher_form(self):
        zeta, lam = 0.2, 4.0
        cld = bd.cld_upper_brownian(0.3, 0.0, 1.0, 50, zeta, lam)
        rad = bd.pacbayes_rademacher_upper(0.3, 0.0, 1.0, 50, zeta, lam)
        assert cld.value == rad.value

    def test_hand_arithmetic(self):
        zeta = zeta_for_log(1.0)
        rep = bd.cld_upper_brownian(0.2, 0.5, 1.0, 100, zeta, 10.0)
        assert rep.value == pytest.approx(0.4 + 0.05 + 0.1 + 0.1125, rel=1e-12)

    def test_optimized_beats_grid(self):
        rep = bd.cld_upper_brownian(0.2, 0.8, 1.0, 150, 0.1, "optimize")
        best = grid_best(
            lambda lam: bd.cld_upper_brownian(0.2, 0.8, 1.0, 150, 0.1, lam)
        )
        assert rep.value <= best + 1e-9 * abs(best)


class TestBaselines:
    def test_rademacher_baseline(self):
        rep = bd.baseline_bounds("rademacher", 0.0, 1.0, 50, zeta_for_log(1.0))
        assert rep.value == pytest.approx(0.3, rel=1e-12)

    def test_kl_baseline(self):
        rep = bd.baseline_bounds("kl", 0.0, 1.0, 4, 0.5)
        assert rep.value == pytest.approx(np.sqrt(np.log(8.0) / 8.0), rel=1e-12)
        assert rep.value == pytest.approx(0.50983, abs=1e-4)

    def test_zeta_range_enforced(self):
        with pytest.raises(ConfigError):
            bd.baseline_bounds("kl", 0.0, 1.0, 4, 2.0)

    def test_both_decrease_in_n(self):
        for kind, value in (("rademacher", 0.1), ("kl", 0.5)):
            vals = [bd.baseline_bounds(kind, value, 1.0, n, 0.1).value
                    for n in (10, 100, 1000)]
            assert np.all(np.diff(vals) < 0)


class TestReports:
    def test_term_accounting(self):
        reps = [
            bd.pacbayes_rademacher_upper(0.2, 0.5, 1.0, 30, 0.1, 2.0),
            bd.lower_bound(0.2, 1.0, 30, 0.5, 0.1, 2.0),
            bd.fractal_upper(1.0, 0.1, 30, 1.0, 0.5, 0.1, 2.0),
            bd.sgld_upper(0.5, 10, 1.0, 30, 0.1, "optimize"),
        ]
        for rep in reps:
            assert rep.value == pytest.approx(math.fsum(rep.terms.values()), abs=1e-12)

    def test_flat_dict_round_trip(self):
        rep = bd.fractal_upper(1.0, 0.1, 30, 1.0, 0.5, 0.1, 2.0, gamma=0.01)
        back = bd.BoundReport.from_flat_dict(rep.to_flat_dict())
        assert back == rep

    def test_monotonicity_in_it_b_n(self):
        for make in (
            lambda it, B, n: bd.pacbayes_rademacher_upper(0.1, it, B, n, 0.1, 3.0),
            lambda it, B, n: bd.sgld_upper(it, 10, B, n, 0.1, 3.0),
            lambda it, B, n: bd.covering_upper(0.05, 8, B, n, it, 0.1, 3.0),
            lambda it, B, n: bd.mgf_finite_upper(3.0, it, B, n, 0.1, 3.0),
        ):
            for it in (0.0, 0.5, 1.0):
                for B in (0.5, 1.0, 2.0):
                    vals = [make(it, B, n).value for n in (10, 40, 160)]
                    assert np.all(np.diff(vals) < 0)
            assert make(1.0, 1.0, 50).value >= make(0.0, 1.0, 50).value
            assert make(0.5, 2.0, 50).value >= make(0.5, 1.0, 50).value


class TestGibbsPosterior:
    def test_lambda_zero_returns_prior(self):
        prior = np.array([0.25, 0.5, 0.25])
        out = bd.gibbs_rademacher_posterior([0.1, 5.0, 2.0], prior, 0.0)
        assert np.array_equal(out, prior)

    def test_equal_scores_return_prior(self):
        prior = np.array([0.1, 0.6, 0.3])
        out = bd.gibbs_rademacher_posterior([1.0, 1.0, 1.0], prior, 3.0)
        assert np.allclose(out, prior, atol=1e-15)

    def test_softmax_hand_value(self):
        out = bd.gibbs_rademacher_posterior([0.0, np.log(2.0)], [0.5, 0.5], 1.0)
        assert out == pytest.approx([2.0 / 3.0, 1.0 / 3.0], rel=1e-12)

    def test_degenerate_prior_rejected(self):
        with pytest.raises(DegenerateError):
            bd.gibbs_rademacher_posterior([np.inf, np.inf], [0.5, 0.5], 1.0)

    def test_optimality_against_random_posteriors(self):
        rng = np.random.default_rng(21)
        zeta = 0.1
        for _ in range(100):
            K = int(rng.integers(2, 7))
            scores = rng.uniform(0, 2, size=K)
            prior = rng.dirichlet(np.ones(K))
            prior = prior / prior.sum()
            lam = float(rng.uniform(0.1, 10))
            gibbs = bd.gibbs_rademacher_posterior(scores, prior, lam)
            g_obj = bd.gibbs_objective(gibbs, scores, prior, lam, zeta)
            for _ in range(100):
                rho = rng.dirichlet(np.ones(K))
                rho = rho / rho.sum()
                assert g_obj <= bd.gibbs_objective(rho, scores, prior, lam, zeta) + 1e-12

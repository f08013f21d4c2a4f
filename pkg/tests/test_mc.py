"""Monte Carlo engine: determinism, coverage, flags, families."""

import math
from fractions import Fraction as F

import pytest

import sumtails as st

Z_GRID = [-0.9, -0.5, 0.0, 0.4, 0.9]


@pytest.fixture(scope="module")
def coin_spec(two_coins):
    return st.SamplerSpec(family="discrete-system", system=two_coins)


@pytest.fixture(scope="module")
def two_coins():
    half = [(F(-1, 2), F(1, 2)), (F(1, 2), F(1, 2))]
    return st.make_system([half, half], unit_variance=False)


class TestDeterminism:
    def test_repeat_runs_bit_identical(self, coin_spec):
        a = st.mc_tails(coin_spec, Z_GRID, 50_000, seed=7)
        b = st.mc_tails(coin_spec, Z_GRID, 50_000, seed=7)
        assert a == b

    def test_worker_count_invariant(self, coin_spec):
        serial = st.mc_tails(coin_spec, Z_GRID, 200_000, seed=7, workers=1)
        parallel = st.mc_tails(coin_spec, Z_GRID, 200_000, seed=7, workers=8)
        assert serial == parallel

    def test_seeds_differ(self, coin_spec):
        a = st.mc_tails(coin_spec, [0.0], 50_000, seed=1)
        b = st.mc_tails(coin_spec, [0.0], 50_000, seed=2)
        assert a[0].p_hat != b[0].p_hat


class TestEstimates:
    def test_two_coin_tail_within_ci(self, coin_spec):
        (est,) = st.mc_tails(coin_spec, [0.0], 1_000_000, seed=3)
        assert est.ci_lo <= 0.25 <= est.ci_hi
        assert est.p_hat == pytest.approx(0.25, abs=0.005)

    def test_exponential_closed_form(self):
        spec = st.SamplerSpec(family="standardized-exponential", n=1)
        (est,) = st.mc_tails(spec, [0.0], 1_000_000, seed=5)
        assert est.ci_lo <= math.exp(-1) <= est.ci_hi

    def test_beyond_bounded_support(self, coin_spec):
        (est,) = st.mc_tails(coin_spec, [5.0], 10_000, seed=1)
        assert est.p_hat == 0.0
        assert est.ci_lo == 0.0

    def test_monotone_in_z(self, coin_spec):
        grid = [n / 4 for n in range(-8, 12)]
        estimates = st.mc_tails(coin_spec, grid, 50_000, seed=9)
        p_hats = [e.p_hat for e in estimates]
        assert all(a >= b for a, b in zip(p_hats, p_hats[1:]))

    def test_capped_modes_lower_the_tail(self, coin_spec):
        raw = st.mc_tails(coin_spec, [0.4], 100_000, seed=4)
        for mode in ("winsorize", "truncate"):
            capped = st.mc_tails(coin_spec, [0.4], 100_000, seed=4, mode=mode, w=0.3)
            assert capped[0].p_hat <= raw[0].p_hat

    def test_coverage_over_replications(self, two_coins, coin_spec):
        # CP at 99% should cover the exact tail almost always
        oracle = st.SystemOracle(two_coins)
        law = oracle.law_sum()
        exact = {z: float(law.tail(z)) for z in Z_GRID}
        inside = total = 0
        for seed in range(100):
            for est in st.mc_tails(coin_spec, Z_GRID, 20_000, seed=seed):
                total += 1
                inside += exact[est.z] <= est.ci_hi and exact[est.z] >= est.ci_lo
        assert inside / total >= 0.95

    def test_validation(self, coin_spec):
        with pytest.raises(ValueError, match="1000"):
            st.mc_tails(coin_spec, [0.0], 10, seed=1)
        with pytest.raises(ValueError, match="cap"):
            st.mc_tails(coin_spec, [0.0], 10_000, seed=1, mode="winsorize")
        with pytest.raises(ValueError, match="mode"):
            st.mc_tails(coin_spec, [0.0], 10_000, seed=1, mode="clip")
        with pytest.raises(ValueError, match="seed"):
            st.mc_tails(coin_spec, [0.0], 10_000, seed=-1)


class TestFamilies:
    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown family"):
            st.SamplerSpec(family="cauchy")

    def test_discrete_needs_system(self):
        with pytest.raises(ValueError, match="needs a system"):
            st.SamplerSpec(family="discrete-system")

    def test_pareto_needs_finite_variance(self):
        with pytest.raises(ValueError, match="alpha"):
            st.SamplerSpec(family="standardized-pareto", n=2, alpha=2.0)

    def test_two_point_q_validation(self):
        with pytest.raises(ValueError, match="q"):
            st.SamplerSpec(family="standardized-two-point", n=2, q=1.5)

    @pytest.mark.parametrize(
        "spec",
        [
            st.SamplerSpec(family="standardized-exponential", n=8),
            st.SamplerSpec(family="standardized-two-point", n=8, q=0.3),
            st.SamplerSpec(family="standardized-pareto", n=8, alpha=4.5),
        ],
        ids=["exponential", "two-point", "pareto"],
    )
    def test_standardization(self, spec):
        # empirical mean ~ 0 and variance ~ 1 for the sum
        import numpy as np

        from sumtails.mc import _block_rng, _draw_summands

        draws = _draw_summands(spec, _block_rng(11, 0), 60_000)
        sums = draws.sum(axis=1)
        assert abs(float(np.mean(sums))) < 0.02
        assert float(np.var(sums)) == pytest.approx(1.0, abs=0.06)

    def test_summand_cdf_matches_sampling(self):
        spec = st.SamplerSpec(family="standardized-exponential", n=4)
        from sumtails.mc import _block_rng, _draw_summands, summand_cdf

        draws = _draw_summands(spec, _block_rng(3, 0), 50_000)[:, 0]
        for t in (-0.3, 0.0, 0.5, 2.0):
            empirical = float((draws <= t).mean())
            assert empirical == pytest.approx(summand_cdf(spec, t), abs=0.01)

    def test_summand_cdf_rejects_discrete(self, coin_spec):
        from sumtails.mc import summand_cdf

        with pytest.raises(ValueError, match="exact oracles"):
            summand_cdf(coin_spec, 0.0)


class TestClopperPearson:
    def test_edge_cases(self):
        lo, hi = st.clopper_pearson(0, 100)
        assert lo == 0.0 and 0 < hi < 0.1
        lo, hi = st.clopper_pearson(100, 100)
        assert hi == 1.0 and 0.9 < lo < 1
        with pytest.raises(ValueError):
            st.clopper_pearson(5, 3)

    def test_interval_contains_point_estimate(self):
        for k, n in ((3, 1000), (250, 1000), (999, 1000)):
            lo, hi = st.clopper_pearson(k, n)
            assert lo <= k / n <= hi

    def test_known_value(self):
        # binomial k=0: hi solves (1-p)^n = alpha/2 -> p = 1 - (0.005)^(1/n)
        n = 500
        _, hi = st.clopper_pearson(0, n)
        assert hi == pytest.approx(1 - 0.005 ** (1 / n), rel=1e-9)


class TestBoundChecks:
    def test_discrete_agrees_with_exact_verifier(self, two_coins, coin_spec):
        params = st.BoundParams(w=F(1, 4))
        report = st.mc_check_bounds(
            coin_spec, params, [n / 2 for n in range(0, 9)], 100_000, seed=11
        )
        assert report.ok
        # the exact sweep reports no violations either
        assert st.verify_osipov(two_coins, w_grid=(F(1, 4),)) == []

    def test_exponential_p1_clean(self):
        spec = st.SamplerSpec(family="standardized-exponential", n=32)
        report = st.mc_check_bounds(
            spec, st.BoundParams(w=1), [n / 2 for n in range(0, 9)], 100_000, seed=12
        )
        assert report.ok
        assert all(row.p2 is None for row in report.rows)

    def test_negative_control_raises_flags(self, coin_spec):
        params = st.BoundParams(w=F(1, 4))
        report = st.mc_check_bounds(
            coin_spec,
            params,
            [n / 2 for n in range(0, 9)],
            100_000,
            seed=11,
            bound_scale=0.01,
        )
        assert report.n_flags > 0
        assert not report.ok

    def test_delta_hat_nonnegative(self, coin_spec):
        report = st.mc_check_bounds(
            coin_spec, st.BoundParams(w=F(1, 4)), Z_GRID, 50_000, seed=2
        )
        assert all(row.delta_hat >= 0 for row in report.rows)

    def test_worker_invariance(self, coin_spec):
        params = st.BoundParams(w=F(1, 4))
        a = st.mc_check_bounds(coin_spec, params, Z_GRID, 120_000, seed=5, workers=1)
        b = st.mc_check_bounds(coin_spec, params, Z_GRID, 120_000, seed=5, workers=6)
        assert a == b

import math

import numpy as np
import pytest

from bondliq import (
    BondSpec,
    LiquidationSchedule,
    NumericError,
    OptimizerConfig,
    PortfolioSpec,
    evaluate_strategies,
    individual_schedule,
    naive_schedule,
    optimal_time_small_size,
    optimize_portfolio,
    portfolio_total_cost,
    uniform_correlation,
)
from conftest import make_two_bond, random_portfolio

CFG = OptimizerConfig(deadline=100.0)


def single_spec(position, adv=1.0, vol=0.07, price=1.0, alpha=1.0, gamma=0.5, spread=0.0):
    b = BondSpec(id="b", price=price, position=position, adv=adv,
                 vol_annual=vol, min_spread=spread)
    return PortfolioSpec(bonds=(b,), correlation=np.eye(1), gamma=gamma, alpha_inf=alpha)


class TestConfig:
    def test_defaults(self):
        cfg = OptimizerConfig()
        assert cfg.deadline is None
        assert cfg.t_floor == 1e-3
        assert cfg.rel_tol == 1e-8
        assert cfg.max_outer_iters == 200
        assert cfg.multistart == 2

    @pytest.mark.parametrize("kw", [
        {"t_floor": 0.0},
        {"deadline": 1e-4},
        {"rel_tol": 0.0},
        {"max_outer_iters": 0},
        {"multistart": 3},
    ])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            OptimizerConfig(**kw)


class TestNaiveSchedule:
    def test_adv_per_day(self):
        spec = make_two_bond(0.5)
        sched = naive_schedule(spec, CFG)
        assert sched.times[0] == pytest.approx(27.0 / 30.0)
        assert sched.times[1] == pytest.approx(27.0 / 3.0)

    def test_zero_position(self):
        b0 = BondSpec(id="z", price=1.0, position=0.0, adv=1.0, vol_annual=0.1)
        b1 = BondSpec(id="a", price=1.0, position=4.0, adv=2.0, vol_annual=0.1)
        spec = PortfolioSpec(bonds=(b0, b1), correlation=np.eye(2), gamma=0.5, alpha_inf=1.0)
        sched = naive_schedule(spec, CFG)
        assert sched.times[0] == 0.0
        assert sched.times[1] == 2.0

    def test_deadline_clip(self):
        spec = single_spec(position=500.0, adv=1.0)
        sched = naive_schedule(spec, OptimizerConfig(deadline=100.0))
        assert sched.times[0] == 100.0

    def test_floor_clip(self):
        spec = single_spec(position=1e-7, adv=1.0)
        sched = naive_schedule(spec, CFG)
        assert sched.times[0] == CFG.t_floor


class TestIndividualSchedule:
    def test_matches_closed_form_small_size(self):
        # deep small-size optima are tiny horizons, so drop the floor
        spec = single_spec(position=1e-10, adv=1.0, alpha=24.0)
        bond = spec.bonds[0]
        t_closed = optimal_time_small_size(bond, bond.impact_params(24.0), spec.gamma)
        sched = individual_schedule(spec, OptimizerConfig(deadline=100.0, t_floor=1e-9))
        assert sched.times[0] == pytest.approx(t_closed, rel=1e-3)

    def test_deadline_binds(self):
        spec = single_spec(position=1.0, adv=1.0)
        free = individual_schedule(spec, OptimizerConfig(deadline=100.0)).times[0]
        capped = individual_schedule(spec, OptimizerConfig(deadline=free / 2.0)).times[0]
        assert capped == free / 2.0

    def test_correlation_independent(self):
        spec_a = make_two_bond(0.0)
        spec_b = make_two_bond(0.9)
        a = individual_schedule(spec_a, CFG).times
        b = individual_schedule(spec_b, CFG).times
        assert np.array_equal(a, b)

    def test_unbounded_search_expands(self):
        # optimum beyond the initial 100-day bracket
        spec = single_spec(position=4e4, adv=1.0, vol=0.07, alpha=1.0, gamma=0.5)
        sched = individual_schedule(spec, OptimizerConfig())
        assert sched.times[0] > 100.0


class TestOptimizePortfolio:
    def test_d1_reduces_to_individual(self):
        spec = single_spec(position=5.0, adv=2.0, alpha=24.0)
        res = optimize_portfolio(spec, CFG)
        ind = individual_schedule(spec, CFG)
        assert res.schedule.times[0] == pytest.approx(ind.times[0], rel=1e-3)
        assert res.converged

    def test_identical_uncorrelated_assets_equal_times(self):
        bonds = tuple(
            BondSpec(id=f"b{i}", price=1.0, position=5.0, adv=2.0, vol_annual=0.1)
            for i in range(4)
        )
        spec = PortfolioSpec(bonds=bonds, correlation=np.eye(4), gamma=0.5, alpha_inf=24.0)
        res = optimize_portfolio(spec, CFG)
        times = res.schedule.times
        assert np.max(times) / np.min(times) - 1.0 <= 1e-3

    def test_never_worse_than_seeds(self):
        rng = np.random.default_rng(11)
        for _ in range(15):
            d = int(rng.integers(1, 6))
            spec = random_portfolio(rng, d, min_spread=0.002)
            cfg = OptimizerConfig(deadline=100.0)
            res = optimize_portfolio(spec, cfg)
            for seed in (naive_schedule(spec, cfg), individual_schedule(spec, cfg)):
                seed_cost = portfolio_total_cost(spec, seed).total
                assert res.cost.total <= seed_cost * (1.0 + 1e-9) + 1e-12

    def test_bounds_respected(self):
        rng = np.random.default_rng(12)
        spec = random_portfolio(rng, 4)
        cfg = OptimizerConfig(deadline=3.0)
        res = optimize_portfolio(spec, cfg)
        active = [i for i, b in enumerate(spec.bonds) if b.position != 0]
        assert np.all(res.schedule.times[active] >= cfg.t_floor)
        assert np.all(res.schedule.times[active] <= 3.0)

    def test_deadline_binding_reports_tmax_at_deadline(self):
        spec = make_two_bond(0.5)
        free = optimize_portfolio(spec, OptimizerConfig(deadline=100.0))
        deadline = free.t_max / 2.0
        capped = optimize_portfolio(spec, OptimizerConfig(deadline=deadline))
        assert capped.t_max == pytest.approx(deadline, abs=1e-3)

    def test_zero_position_excluded(self):
        b0 = BondSpec(id="z", price=1.0, position=0.0, adv=1.0, vol_annual=0.1)
        b1 = BondSpec(id="a", price=1.0, position=4.0, adv=2.0, vol_annual=0.1)
        spec = PortfolioSpec(bonds=(b0, b1), correlation=uniform_correlation(2, 0.3),
                             gamma=0.5, alpha_inf=24.0)
        res = optimize_portfolio(spec, CFG)
        assert res.schedule.times[0] == 0.0
        assert res.schedule.times[1] > 0.0
        assert res.t_median == res.t_max == res.schedule.times[1]

    def test_all_zero_positions(self):
        bonds = tuple(
            BondSpec(id=f"z{i}", price=1.0, position=0.0, adv=1.0, vol_annual=0.1)
            for i in range(3)
        )
        spec = PortfolioSpec(bonds=bonds, correlation=np.eye(3), gamma=0.5, alpha_inf=1.0)
        res = optimize_portfolio(spec, CFG)
        assert res.converged
        assert res.cost.total == 0.0
        assert np.all(res.schedule.times == 0.0)

    def test_numeric_error_payload(self):
        spec = single_spec(position=1e300, adv=1.0, vol=0.07)
        with np.errstate(all="ignore"):
            with pytest.raises(NumericError) as err:
                optimize_portfolio(spec, CFG)
        assert err.value.asset_index == 0
        assert err.value.time_value > 0

    def test_deterministic(self):
        rng = np.random.default_rng(13)
        spec = random_portfolio(rng, 5, min_spread=0.002)
        r1 = optimize_portfolio(spec, CFG)
        r2 = optimize_portfolio(spec, CFG)
        assert np.array_equal(r1.schedule.times, r2.schedule.times)
        assert r1.cost.total == r2.cost.total
        assert r1.iterations == r2.iterations

    def test_certificate_reported(self):
        spec = make_two_bond(0.3)
        res = optimize_portfolio(spec, CFG)
        assert res.converged
        assert res.iterations >= 1


class TestTwoBondBehavior:
    def test_times_converge_with_correlation(self):
        gaps = {}
        for rho in (0.0, 0.9):
            res = optimize_portfolio(make_two_bond(rho), CFG)
            t = res.schedule.times
            gaps[rho] = abs(t[0] - t[1]) / max(t)
        assert gaps[0.9] < 0.25 * gaps[0.0]

    def test_high_correlation_stretches_times(self):
        lo = optimize_portfolio(make_two_bond(0.5), CFG).schedule.times
        hi = optimize_portfolio(make_two_bond(0.9), CFG).schedule.times
        assert np.all(hi > lo)


class TestEvaluateStrategies:
    def test_three_results_in_order(self):
        res = evaluate_strategies(make_two_bond(0.5), CFG)
        assert [r.strategy for r in res] == ["naive", "individual", "portfolio"]

    def test_portfolio_dominates(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            d = int(rng.integers(1, 5))
            spec = random_portfolio(rng, d, min_spread=0.002)
            res = evaluate_strategies(spec, OptimizerConfig(deadline=50.0))
            by_name = {r.strategy: r for r in res}
            scale = max(abs(by_name["portfolio"].cost.total), 1e-12)
            for other in ("naive", "individual"):
                assert (
                    by_name["portfolio"].cost.total
                    <= by_name[other].cost.total + 1e-8 * scale
                )

    def test_gamma_monotonicity_single_asset(self):
        times = []
        for gamma in (0.25, 0.5, 1.0, 2.0):
            spec = single_spec(position=1e-8, adv=1.0, gamma=gamma, alpha=24.0)
            times.append(individual_schedule(spec, CFG).times[0])
        assert all(b < a * (1 + 1e-6) for a, b in zip(times, times[1:]))

    def test_gamma_monotonicity_portfolio_long_only(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            spec = random_portfolio(rng, 4, long_only=True, min_spread=0.0)
            totals = []
            for gamma in (0.3, 0.9, 2.7):
                scaled = PortfolioSpec(bonds=spec.bonds, correlation=spec.correlation,
                                       gamma=gamma, alpha_inf=spec.alpha_inf)
                res = optimize_portfolio(scaled, CFG)
                totals.append(float(np.sum(res.schedule.times)))
            assert totals[0] >= totals[1] >= totals[2]

    def test_scale_property_small_size(self):
        # quadrupling the position doubles the optimal time (numerical path)
        t = {}
        for n in (1e-10, 4e-10):
            spec = single_spec(position=n, adv=1.0, alpha=24.0)
            cfg = OptimizerConfig(deadline=100.0, t_floor=1e-9)
            t[n] = individual_schedule(spec, cfg).times[0]
        assert t[4e-10] == pytest.approx(2.0 * t[1e-10], rel=1e-3)

    def test_median_and_max_over_nonzero_positions(self):
        bonds = (
            BondSpec(id="z", price=1.0, position=0.0, adv=1.0, vol_annual=0.1),
            BondSpec(id="a", price=1.0, position=2.0, adv=1.0, vol_annual=0.1),
            BondSpec(id="b", price=1.0, position=8.0, adv=1.0, vol_annual=0.1),
        )
        spec = PortfolioSpec(bonds=bonds, correlation=np.eye(3), gamma=0.5, alpha_inf=24.0)
        naive = evaluate_strategies(spec, CFG)[0]
        assert naive.t_median == pytest.approx(5.0)
        assert naive.t_max == pytest.approx(8.0)

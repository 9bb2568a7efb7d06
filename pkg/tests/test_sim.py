import math

import numpy as np
import pytest
from scipy import stats

from limcurate.errors import BudgetExceedsPopulation, UsageError
from limcurate.sim import (
    ARCHETYPE_PRIORS,
    ARCHETYPES,
    Archetype,
    SampleArchetype,
    SimConfig,
    draw_population,
    expected_average_curve,
    latent_curve,
    progressive_precision,
    run_strategy_comparison,
    simulate_log,
)
from limcurate.trajectory import (
    RewardTrajectory,
    TrainingLog,
    compute_average_curve,
    lim_score,
    score_all,
    select_by_threshold,
)

from oracles import mixture_latent_curve, saturating_exponential


class TestArchetype:
    def test_constraints(self):
        SampleArchetype(Archetype.NEAR_ZERO, 0.0, 0.1, 0.5)
        with pytest.raises(ValueError):
            SampleArchetype(Archetype.NEAR_ZERO, 0.0, 0.2, 0.5)
        SampleArchetype(Archetype.FAST_SATURATING, 0.1, 0.9, 2.0)
        with pytest.raises(ValueError):
            SampleArchetype(Archetype.FAST_SATURATING, 0.5, 0.9, 1.0)
        SampleArchetype(Archetype.PROGRESSIVE, 0.1, 0.5, 1.0)
        with pytest.raises(ValueError):
            SampleArchetype(Archetype.PROGRESSIVE, 0.1, 0.4, 0.5)
        with pytest.raises(ValueError):
            SampleArchetype(Archetype.PROGRESSIVE, 0.1, 0.9, 1.5)
        with pytest.raises(ValueError):
            SampleArchetype(Archetype.PROGRESSIVE, 0.1, 0.9, 0.0)

    def test_prior_corners_satisfy_constraints(self):
        for kind in ARCHETYPES:
            prior = ARCHETYPE_PRIORS[kind]
            for p0 in prior["p0"]:
                for p_inf in prior["p_inf"]:
                    for rate in prior["rate"]:
                        SampleArchetype(kind, p0, p_inf, rate)


class TestLatentCurve:
    def test_flat_when_endpoints_equal(self):
        arch = SampleArchetype(Archetype.FAST_SATURATING, 0.7, 0.7, 3.0)
        np.testing.assert_array_equal(latent_curve(arch, np.arange(1, 9)), 0.7)

    def test_asymptote(self):
        arch = SampleArchetype(Archetype.FAST_SATURATING, 0.6, 0.95, 50.0)
        assert latent_curve(arch, 8) == pytest.approx(0.95, abs=1e-6)

    def test_closed_form_value(self):
        arch = SampleArchetype(Archetype.PROGRESSIVE, 0.0, 0.8, 0.5)
        expected = saturating_exponential(0.0, 0.8, 0.5, 2)
        assert expected == pytest.approx(0.8 * (1 - math.exp(-1)), abs=1e-15)
        assert latent_curve(arch, 2) == pytest.approx(expected, abs=1e-15)
        assert latent_curve(arch, 2) == pytest.approx(0.50570, abs=1e-5)


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            {"archetype_mix": (0.5, 0.5, 0.5)},
            {"archetype_mix": (1.2, -0.2, 0.0)},
            {"archetype_mix": (0.5, 0.5)},
            {"epochs": 1},
            {"n_samples": 0},
            {"rollouts": 0},
            {"noise": "gaussian"},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(UsageError):
            SimConfig(**kw)


class TestSimulateLog:
    def test_deterministic(self):
        cfg = SimConfig(n_samples=50, seed=9)
        a, ta = simulate_log(cfg)
        b, tb = simulate_log(cfg)
        assert a == b and ta == tb
        c, _ = simulate_log(SimConfig(n_samples=50, seed=10))
        assert a != c

    def test_rectangular_and_in_range(self):
        for noise in ("bernoulli", "drift", "none"):
            log, truth = simulate_log(SimConfig(n_samples=60, epochs=6, rollouts=4, noise=noise))
            m = log.matrix()
            assert m.shape == (60, 6)
            assert m.min() >= 0.0 and m.max() <= 1.0
            assert set(truth) == set(log.sample_ids)

    def test_pass_rates_are_multiples_of_one_over_g(self):
        log, _ = simulate_log(SimConfig(n_samples=20, rollouts=8))
        m = log.matrix() * 8
        np.testing.assert_allclose(m, np.round(m), atol=1e-12)

    def test_prefix_stable_in_n(self):
        small, _ = simulate_log(SimConfig(n_samples=10, seed=3))
        big, _ = simulate_log(SimConfig(n_samples=30, seed=3))
        for sid in small.sample_ids:
            assert small[sid] == big[sid]

    def test_near_zero_binomial_tail(self):
        # oracle: per-epoch mean over 100 samples x 8 rollouts with p <= 0.1
        trials = 100 * 8
        tail = stats.binom.sf(int(0.2 * trials), trials, 0.1)
        p_any_epoch = 8 * tail
        assert p_any_epoch < 1e-3
        for seed in range(100):
            cfg = SimConfig(n_samples=100, archetype_mix=(1, 0, 0), seed=seed)
            log, truth = simulate_log(cfg)
            assert set(truth.values()) == {Archetype.NEAR_ZERO}
            assert compute_average_curve(log).as_array().max() <= 0.2

    def test_library_expectation_matches_quadrature(self):
        cfg = SimConfig()
        priors = [
            (ARCHETYPE_PRIORS[k]["p0"], ARCHETYPE_PRIORS[k]["p_inf"], ARCHETYPE_PRIORS[k]["rate"])
            for k in ARCHETYPES
        ]
        oracle = mixture_latent_curve(priors, cfg.archetype_mix, cfg.epochs)
        np.testing.assert_allclose(expected_average_curve(cfg), oracle, atol=1e-8)

    def test_average_curve_matches_mixture(self):
        cfg = SimConfig(n_samples=300, epochs=8, rollouts=8)
        priors = [
            (ARCHETYPE_PRIORS[k]["p0"], ARCHETYPE_PRIORS[k]["p_inf"], ARCHETYPE_PRIORS[k]["rate"])
            for k in ARCHETYPES
        ]
        oracle = np.array(mixture_latent_curve(priors, cfg.archetype_mix, cfg.epochs))
        curves = []
        for seed in range(50):
            log, _ = simulate_log(SimConfig(seed=seed))
            curve = compute_average_curve(log).as_array()
            assert np.all(np.abs(curve - oracle) <= 0.1)
            curves.append(curve)
        assert np.all(np.abs(np.mean(curves, axis=0) - oracle) <= 0.05)

    def test_noise_free_sample_on_average_scores_one(self):
        cfg = SimConfig(n_samples=60, noise="none", seed=4)
        log, _ = simulate_log(cfg)
        for sid, arch, _ in draw_population(cfg):
            np.testing.assert_array_equal(
                log[sid].rewards, latent_curve(arch, np.arange(1, cfg.epochs + 1))
            )
        avg = compute_average_curve(log)
        # a sample sitting on the average leaves the average unchanged
        extended = TrainingLog(list(log) + [RewardTrajectory("mean", avg.values)])
        new_avg = compute_average_curve(extended)
        np.testing.assert_allclose(new_avg.values, avg.values, atol=1e-15)
        assert lim_score(extended["mean"], new_avg) == pytest.approx(1.0, abs=1e-12)

    def test_more_rollouts_less_variance(self):
        base = SimConfig(n_samples=400, seed=12)
        latent = np.array(
            [latent_curve(a, np.arange(1, base.epochs + 1)) for _, a, _ in draw_population(base)]
        )
        spread = []
        for g in (1, 4, 8, 32):
            log, _ = simulate_log(SimConfig(n_samples=400, seed=12, rollouts=g))
            spread.append(float(np.mean((log.matrix() - latent) ** 2)))
        assert spread == sorted(spread, reverse=True)
        # expected mean p(1-p)/G, within 15%
        pq = float(np.mean(latent * (1 - latent)))
        for g, s in zip((1, 4, 8, 32), spread):
            assert s == pytest.approx(pq / g, rel=0.15)

    def test_lim_precision_beats_mix_weight(self):
        log, truth = simulate_log(SimConfig(seed=1))
        chosen = select_by_threshold(score_all(log), "lim", 0.6)
        assert progressive_precision(chosen, truth) > 1 / 3


class TestComparison:
    def test_budget_is_population(self):
        cfg = SimConfig(n_samples=60)
        table = run_strategy_comparison(cfg, budget=60, seeds=2)
        for name in ("RAND", "LIM", "LINEAR"):
            assert table.results[name].yields == table.results["FULL"].yields
            assert table.results[name].precisions == table.results["FULL"].precisions

    def test_deterministic(self):
        cfg = SimConfig(n_samples=80, seed=5)
        a = run_strategy_comparison(cfg, budget=20, seeds=1)
        b = run_strategy_comparison(cfg, budget=20, seeds=1)
        assert list(a.rows()) == list(b.rows())

    def test_budget_exceeds(self):
        with pytest.raises(BudgetExceedsPopulation):
            run_strategy_comparison(SimConfig(n_samples=10), budget=11, seeds=1)

    def test_yield_monotone_in_precision(self):
        from limcurate.sim import learning_yield

        cfg = SimConfig(n_samples=100)
        ys = [learning_yield(cfg, f, 77) for f in (0.0, 0.25, 0.5, 1.0)]
        assert ys == sorted(ys)
        assert ys[-1] > ys[0]

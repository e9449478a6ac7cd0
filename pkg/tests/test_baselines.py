"""Baseline tests: queued-update UCB behavior and the no-implicit-exploration
scheduler factory."""

import math

import numpy as np
import pytest

from bobw_bandits.baselines import UcbState, ftrl_no_ix_factory, ucb_delayed_step
from bobw_bandits.environments import InvalidConfig
from bobw_bandits.harness import ExperimentConfig, run_experiment
from bobw_bandits.scheduler import default_threshold_const


class TestUcbStep:
    def test_first_round_plays_lowest_index(self):
        state = UcbState.fresh(3)
        assert ucb_delayed_step(state, []) == 0

    def test_round_robin_while_nothing_arrives(self):
        state = UcbState.fresh(3)
        played = [ucb_delayed_step(state, []) for _ in range(9)]
        assert played == [0, 1, 2, 0, 1, 2, 0, 1, 2]

    def test_arrivals_fold_into_means(self):
        state = UcbState.fresh(2)
        ucb_delayed_step(state, [(0, 1.0), (0, 0.0), (1, 0.5)])
        assert state.counts.tolist() == [2, 1]
        np.testing.assert_allclose(state.means, [0.5, 0.5])

    def test_prefers_lower_loss_arm(self):
        state = UcbState.fresh(2)
        # plenty of data: arm 1 clearly better (lower loss)
        arrivals = [(0, 1.0)] * 50 + [(1, 0.0)] * 50
        arm = ucb_delayed_step(state, arrivals)
        assert arm == 1

    def test_logarithmic_bad_arm_pulls(self):
        """K=2, zero delay, means (0.1, 0.9): the bad arm is pulled
        O(log T) times; spec pins <= 200 pulls at T = 1e4 (median, 20 seeds)."""
        pulls = []
        for seed in range(20):
            rng = np.random.default_rng([seed, 77])
            state = UcbState.fresh(2)
            bad = 0
            pending = []
            for t in range(1, 10_001):
                arm = ucb_delayed_step(state, pending)
                loss = float(rng.random() < (0.1, 0.9)[arm])
                pending = [(arm, loss)]  # zero delay: usable next step
                bad += arm == 1
            pulls.append(bad)
        assert np.median(pulls) <= 200

    def test_more_delay_does_not_help(self):
        """Information monotonicity: regret with zero delay is <= regret
        with constant delay 100, in the median over 20 seeds."""
        def median_regret(delay):
            cfg = ExperimentConfig(
                algorithm="ucb_delayed", num_arms=2, horizon=2000,
                loss={"kind": "stochastic", "means": [0.3, 0.6]},
                delay={"kind": "constant", "value": delay},
                seeds=tuple(range(20)),
            )
            return float(np.median(run_experiment(cfg).final_regrets()))

        assert median_regret(0) <= median_regret(100)


class TestFtrlNoIxFactory:
    def test_default_threshold(self):
        sched = ftrl_no_ix_factory({"num_arms": 3})
        assert not sched.ix_enabled
        assert sched.threshold_const == pytest.approx(default_threshold_const(3))

    def test_plain_log_k_threshold(self):
        sched = ftrl_no_ix_factory({"num_arms": 4, "threshold": "plain_log_k"})
        assert sched.threshold_const == pytest.approx(math.log(4))

    def test_numeric_threshold(self):
        sched = ftrl_no_ix_factory({"num_arms": 2, "threshold": 12.5})
        assert sched.threshold_const == 12.5

    @pytest.mark.parametrize("config", [{}, {"num_arms": 1},
                                        {"num_arms": 2, "threshold": "bogus"},
                                        {"num_arms": 2, "threshold": -3}])
    def test_invalid_configs(self, config):
        with pytest.raises(InvalidConfig):
            ftrl_no_ix_factory(config)

    def test_zero_delay_trajectory_matches_full_algorithm(self):
        """With zero delays D stays 0, lambda is 0 either way, and the two
        algorithms produce identical traces seed by seed."""
        def run(algorithm):
            cfg = ExperimentConfig(
                algorithm=algorithm, num_arms=2, horizon=300,
                loss={"kind": "stochastic", "means": [0.4, 0.6]},
                delay={"kind": "constant", "value": 0},
                seeds=(0, 1, 2),
            )
            return run_experiment(cfg)

        a = run("bobw")
        b = run("ftrl_no_ix")
        for ra, rb in zip(a.results, b.results):
            np.testing.assert_array_equal(ra.regret, rb.regret)

    def test_adversarial_band_against_full_algorithm(self):
        """Sanity band: the no-IX ancestor lands within 3x of the full
        algorithm on the delayed adversarial workload (one seed, scaled-down
        horizon; band, not a paper claim)."""
        def final(algorithm):
            cfg = ExperimentConfig(
                algorithm=algorithm, num_arms=4, horizon=8000,
                loss={"kind": "adversarial", "generator": "two_phase"},
                delay={"kind": "constant", "value": 50},
                seeds=(1,),
            )
            return float(run_experiment(cfg).final_regrets()[0])

        full = final("bobw")
        ancestor = final("ftrl_no_ix")
        assert ancestor <= 3.0 * full
        assert full <= 3.0 * ancestor

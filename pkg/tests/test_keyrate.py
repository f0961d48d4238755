import itertools
import math

import numpy as np
import pytest
from helpers import brute_force_min_hae, entropy_highprec

from rfi_qkd_lab.keyrate import (
    EpsilonBudget,
    FiniteKeyParams,
    asymptotic_rate_tomographic,
    conditional_entropy_AE,
    estimate_channel,
    finite_rate_tomographic,
    finite_rate_ur,
    isotropic_asymptotic_rate,
    leak_ec,
    min_HAE_over_ball,
    mu_fluctuation,
    optimize_rate,
    pa_term_tomographic,
    pa_term_ur,
    shannon_entropy,
    smoothing_term,
    ur_virtual_distribution,
    virtual_difference_distribution,
    widen_distribution,
    zero_rate_qber,
)
from rfi_qkd_lab.states import bell_state, isotropic_bell_spectrum, isotropic_state

ISO2 = isotropic_bell_spectrum(2, 0.01)
H_ISO2 = 0.13613514761019407  # frozen from a 50-digit evaluation
R_TOMO_INF = 1.0 - H_ISO2
H2_001 = 0.08079313589591118  # binary entropy of 0.01, frozen likewise
R_UR_INF = 1.0 - 2.0 * H2_001


class TestEntropy:
    def test_examples(self):
        assert shannon_entropy([1, 0, 0, 0]) == 0.0
        assert abs(shannon_entropy([0.25] * 4) - 2.0) < 1e-15
        assert abs(shannon_entropy(ISO2) - H_ISO2) < 1e-12

    def test_against_high_precision_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            p = rng.dirichlet(np.ones(6))
            assert abs(shannon_entropy(p) - entropy_highprec(p)) < 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            shannon_entropy([0.6, 0.6])
        with pytest.raises(ValueError):
            shannon_entropy([1.2, -0.2])


class TestAsymptotic:
    def test_examples(self):
        assert abs(asymptotic_rate_tomographic([1, 0, 0, 0], 2) - 1.0) < 1e-15
        assert abs(asymptotic_rate_tomographic(ISO2, 2) - R_TOMO_INF) < 1e-12
        assert asymptotic_rate_tomographic(np.full(9, 1 / 9), 3) < 0

    def test_zero_rate_qber_is_six_state_threshold(self):
        q = zero_rate_qber(2)
        assert abs(isotropic_asymptotic_rate(2, q)) < 1e-10
        assert 0.12 < q < 0.13

    @pytest.mark.parametrize("d", (2, 3))
    def test_tomographic_beats_ur_asymptotically(self, d):
        for q in np.linspace(0.0, 0.1, 11):
            lam = isotropic_bell_spectrum(d, q)
            e = lam.sum(axis=1)
            r_tomo = math.log2(d) - shannon_entropy(lam)
            r_ur = math.log2(d) - 2.0 * shannon_entropy(e)
            if q == 0.0:
                assert abs(r_tomo - r_ur) < 1e-12
            else:
                assert r_tomo > r_ur


class TestConditionalEntropy:
    def test_labeled_examples(self):
        assert abs(conditional_entropy_AE(np.array([[1.0, 0], [0, 0]]), 2) - 1.0) < 1e-12
        expected = 1.0 - H_ISO2 + H2_001
        assert abs(conditional_entropy_AE(ISO2, 2) - expected) < 1e-12

    @pytest.mark.parametrize("d", (2, 3))
    def test_recovers_asymptotic_rate_after_shannon_leak(self, d):
        rng = np.random.default_rng(21 + d)
        for _ in range(50):
            table = rng.dirichlet(np.ones(d * d)).reshape(d, d)
            h_e = shannon_entropy(table.sum(axis=1))
            lhs = conditional_entropy_AE(table, d) - h_e
            rhs = asymptotic_rate_tomographic(table.ravel(), d)
            assert abs(lhs - rhs) < 1e-12

    def test_worst_case_labeling_matches_enumeration(self):
        lam = np.array([0.7, 0.2, 0.06, 0.04])
        q_hat = 1.0 - (0.7 + 0.06)  # group {0.7, 0.06} is feasible
        got = conditional_entropy_AE(lam, 2, q_hat=q_hat)
        best = None
        for group0 in itertools.combinations(range(4), 2):
            e0 = sum(lam[i] for i in group0)
            if abs(e0 - (1 - q_hat)) > 1e-6:
                continue
            h_e = shannon_entropy([e0, 1 - e0])
            val = 1.0 - shannon_entropy(lam) + h_e
            best = val if best is None else min(best, val)
        assert best is not None
        assert abs(got - best) < 1e-12

    def test_worst_case_falls_back_to_relaxation(self):
        # spectrum (1,0,0,0) admits no grouping with e0 = 0.8745
        got = conditional_entropy_AE(np.array([1.0, 0.0, 0.0, 0.0]), 2, q_hat=0.1255)
        expected = 1.0 - 0.0 + shannon_entropy([0.8745, 0.1255])
        assert abs(got - expected) < 1e-12

    def test_unlabeled_requires_q_hat(self):
        with pytest.raises(ValueError):
            conditional_entropy_AE(np.array([1.0, 0, 0, 0]), 2)


class TestBallMinimum:
    def test_mu_zero_is_exact(self):
        assert min_HAE_over_ball(ISO2, 0.0, 2) == conditional_entropy_AE(ISO2, 2)

    def test_monotone_nonincreasing_in_mu(self):
        prev = min_HAE_over_ball(ISO2, 0.0, 2)
        for mu in (1e-4, 5e-4, 1e-3, 5e-3, 0.02, 0.1, 0.3):
            cur = min_HAE_over_ball(ISO2, mu, 2)
            assert cur <= prev + 1e-12
            prev = cur

    def test_small_ball_window_example(self):
        base = conditional_entropy_AE(ISO2, 2)
        val = min_HAE_over_ball(ISO2, 0.001, 2)
        assert base - 0.05 <= val <= base

    @pytest.mark.parametrize("mu", (5e-4, 1e-3, 3e-3))
    def test_agrees_with_grid_oracle(self, mu):
        assert abs(min_HAE_over_ball(ISO2, mu, 2) - brute_force_min_hae(ISO2, mu)) < 1e-3

    def test_infeasible_inputs_rejected(self):
        with pytest.raises(ValueError):
            min_HAE_over_ball(np.array([[0.9, 0.4], [-0.2, -0.1]]), 0.01, 2)
        with pytest.raises(ValueError):
            min_HAE_over_ball(ISO2, -0.1, 2)

    def test_d3_monotone(self):
        lam3 = isotropic_bell_spectrum(3, 0.01)
        vals = [min_HAE_over_ball(lam3, mu, 3) for mu in (0.0, 1e-3, 1e-2, 0.1)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


class TestFluctuationAndLeak:
    def test_mu_example(self):
        assert abs(mu_fluctuation(1e6, 1e-10) - 0.003393070212207556) < 1e-15

    def test_mu_scaling(self):
        assert abs(mu_fluctuation(4e6, 1e-10) - mu_fluctuation(1e6, 1e-10) / 2) < 1e-18
        assert mu_fluctuation(1e8, 1e-10) < mu_fluctuation(1e6, 1e-10)
        assert mu_fluctuation(1e6, 1e-2) < mu_fluctuation(1e6, 1e-10)

    def test_leak_examples(self):
        assert leak_ec(10, [1.0, 0.0]) == 0.0
        base = leak_ec(1e6, [0.99, 0.01])
        assert abs(base - 80793.13589591118) < 1e-6
        assert abs(leak_ec(1e6, [0.99, 0.01], 1.1) - 1.1 * base) < 1e-6
        with pytest.raises(ValueError):
            leak_ec(10, [0.99, 0.01], 0.9)


class TestEpsilonBudget:
    def test_composition(self):
        b = EpsilonBudget(1e-20, 2.5e-11, 1e-12, 2.5e-11, 27)
        assert abs(b.composed - (1e-20 + 2.5e-11 + 27e-12 + 2.5e-11)) < 1e-25
        b.validate(1e-10)
        with pytest.raises(ValueError):
            b.validate(7e-11)

    def test_range_checks(self):
        with pytest.raises(ValueError):
            EpsilonBudget(0.0, 0.5, 0.1, 0.1, 1)
        with pytest.raises(ValueError):
            EpsilonBudget(1e-20, 1.5, 1e-12, 1e-12, 1)


class TestFiniteRateTomographic:
    def test_raw_term_limit_recovers_asymptote(self):
        # eps_pa -> 1 and eps_bar -> 2 zero the correction terms exactly
        n = 1e12
        first = conditional_entropy_AE(ISO2, 2)
        leak_per_n = leak_ec(n, [0.99, 0.01]) / n
        rate = first - leak_per_n - pa_term_tomographic(n, 1.0) - smoothing_term(2, n, 2.0)
        assert abs(rate - asymptotic_rate_tomographic(ISO2, 2)) < 1e-9

    def test_smoothing_term_value(self):
        # (2 log2 3 + 3) sqrt(log2(2e12)/1e6), frozen from direct evaluation
        assert abs(smoothing_term(3, 1e6, 1e-12) - 0.03944080201442666) < 1e-12

    def test_breakdown_consistency(self):
        budget = EpsilonBudget(1e-20, 2.5e-11, 1e-12, 2.4e-11, 27)
        p = FiniteKeyParams(
            N=1e6, n=5e5, d=2, lambda_hat=ISO2, q_hat=0.01,
            mu=mu_fluctuation(5e5 / 9, 1e-12), budget=budget,
        )
        res = finite_rate_tomographic(p)
        t = res.terms
        recon = t["sift_fraction"] * (t["first_term"] - t["leak_ec_per_n"] - t["pa_term"] - t["smoothing_term"])
        assert abs(recon - res.rate_per_signal) < 1e-12
        assert abs(res.key_length - res.rate_per_signal * p.N) < 1e-12 * p.N

    def test_below_critical_N_is_nonpositive(self):
        est = estimate_channel(isotropic_state(2, 0.01))
        res = optimize_rate(1e4, est, 1e-10, 1e-20, "tomographic")
        assert res.rate_per_signal <= 0.0
        assert not res.rate_positive


class TestVirtualDistribution:
    def test_bell_state_is_deterministic(self):
        assert np.allclose(virtual_difference_distribution(bell_state(2), 2), [1.0, 0.0], atol=1e-12)

    def test_isotropic_examples(self):
        v2 = ur_virtual_distribution(isotropic_state(2, 0.01), 2, 0.0)
        assert np.allclose(v2, [0.99, 0.01], atol=1e-12)
        v3 = ur_virtual_distribution(isotropic_state(3, 0.01), 3, 0.0)
        assert np.allclose(v3, [0.99, 0.005, 0.005], atol=1e-12)

    def test_from_labeled_spectrum_matches_state(self):
        v_state = ur_virtual_distribution(isotropic_state(3, 0.02), 3, 0.0)
        v_table = ur_virtual_distribution(isotropic_bell_spectrum(3, 0.02), 3, 0.0)
        assert np.allclose(v_state, v_table, atol=1e-10)

    def test_widening_moves_mass_and_raises_entropy(self):
        v = np.array([0.99, 0.01])
        prev = shannon_entropy(v)
        for mu in (0.01, 0.05, 0.2, 0.6):
            w = widen_distribution(v, mu, 2)
            assert abs(w.sum() - 1.0) < 1e-12
            h = shannon_entropy(w)
            assert h >= prev - 1e-12
            prev = h
        assert np.allclose(widen_distribution(v, 0.02, 2)[0], 0.97)
        assert np.allclose(widen_distribution(v, 10.0, 2), [0.5, 0.5])


class TestFiniteRateUr:
    def test_asymptotic_value_and_ordering(self):
        est = estimate_channel(isotropic_state(2, 0.01))
        ur_inf = math.log2(2) - shannon_entropy(est.v0) - shannon_entropy([0.99, 0.01])
        assert abs(ur_inf - R_UR_INF) < 1e-12
        assert R_TOMO_INF > R_UR_INF

    def test_perfect_channel_limit(self):
        v = np.zeros(3)
        v[0] = 1.0
        budget = EpsilonBudget(1e-20, 5e-11, 1e-13, 1e-13, 128)
        table = np.zeros((3, 3))
        table[0, 0] = 1.0
        p = FiniteKeyParams(N=1e12, n=1e12, d=3, lambda_hat=table, q_hat=0.0, mu=0.0, budget=budget)
        res = finite_rate_ur(p, v)
        assert abs(res.rate_per_signal - math.log2(3)) < 1e-9

    def test_pa_term_requires_ordering(self):
        with pytest.raises(ValueError):
            pa_term_ur(1e6, 1e-12, 1e-11)
        budget = EpsilonBudget(1e-20, 1e-12, 5e-11, 5e-11, 27)
        p = FiniteKeyParams(N=1e6, n=1e6, d=2, lambda_hat=ISO2, q_hat=0.01, mu=0.0, budget=budget)
        with pytest.raises(ValueError):
            finite_rate_ur(p, np.array([0.99, 0.01]))

    def test_breakdown_consistency(self):
        budget = EpsilonBudget(1e-20, 5e-11, 1e-12, 1e-12, 27)
        p = FiniteKeyParams(N=1e6, n=8e5, d=2, lambda_hat=ISO2, q_hat=0.01, mu=0.01, budget=budget)
        res = finite_rate_ur(p, widen_distribution(np.array([0.99, 0.01]), 0.01, 2))
        t = res.terms
        recon = t["sift_fraction"] * (t["first_term"] - t["leak_ec_per_n"] - t["pa_term"] - t["smoothing_term"])
        assert abs(recon - res.rate_per_signal) < 1e-12
        assert t["smoothing_term"] == 0.0


class TestOptimizeRate:
    def setup_method(self):
        self.est = estimate_channel(isotropic_state(2, 0.01))

    def test_deterministic(self):
        a = optimize_rate(1e6, self.est, 1e-10, 1e-20, "tomographic")
        b = optimize_rate(1e6, self.est, 1e-10, 1e-20, "tomographic")
        assert a.rate_per_signal == b.rate_per_signal
        assert a.params == b.params

    @pytest.mark.parametrize("method", ("tomographic", "ur"))
    def test_grid_refinement_stability(self, method):
        base = optimize_rate(1e7, self.est, 1e-10, 1e-20, method)
        fine = optimize_rate(1e7, self.est, 1e-10, 1e-20, method, grid_sizes=(36, 24, 16))
        assert abs(base.rate_per_signal - fine.rate_per_signal) < 1e-4

    @pytest.mark.parametrize("method", ("tomographic", "ur"))
    def test_monotone_in_N(self, method):
        rates = [
            optimize_rate(n_total, self.est, 1e-10, 1e-20, method).rate_per_signal
            for n_total in np.geomspace(1e4, 1e10, 13)
        ]
        assert all(b >= a - 1e-9 for a, b in zip(rates, rates[1:]))

    def test_monotone_in_q(self):
        prev = None
        for q in (0.005, 0.02, 0.05, 0.08):
            est = estimate_channel(isotropic_state(2, q))
            rate = optimize_rate(1e7, est, 1e-10, 1e-20, "tomographic").rate_per_signal
            if prev is not None:
                assert rate <= prev + 1e-9
            prev = rate

    def test_budget_composition_of_result(self):
        res = optimize_rate(1e7, self.est, 1e-10, 1e-20, "ur")
        p = res.params
        composed = p["eps_ec"] + p["eps_pa"] + p["n_pe"] * p["eps_pe"] + p["eps_bar"]
        assert composed <= 1e-10 * (1 + 1e-9)

    def test_too_small_N_raises(self):
        with pytest.raises(ValueError, match="feasible"):
            optimize_rate(9, self.est, 1e-10, 1e-20, "tomographic")

    def test_bad_method_and_eps(self):
        with pytest.raises(ValueError):
            optimize_rate(1e6, self.est, 1e-10, 1e-20, "magic")
        with pytest.raises(ValueError):
            optimize_rate(1e6, self.est, 1e-10, 1e-9, "ur")

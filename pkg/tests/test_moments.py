import math

import numpy as np
import pytest

from eqlearn.model import EconomyConfig, Schedule, SectorParams
from eqlearn.moments import (
    LimitDescriptor,
    classify_limit_case,
    expected_belief_path,
    limit_classifier_heuristic,
    mean_field_labor_path,
    mode_indicator,
    mode_sequence_closed_form,
    mode_sequence_pi,
    pd_limit_expectation,
    pd_mode,
    pd_moments,
    pi_limit_expectation,
    pi_mode,
    pi_moments,
)

PARAMS = SectorParams(zeta_star=0.5, m=0.0, sigma=0.1, tau=0.1, zeta0=0.1)  # gamma = 1


def mc_pd(z_history, params, n=10**6, seed=0):
    """Monte Carlo oracle: apply the batch update to raw shock draws."""
    rng = np.random.default_rng(seed)
    z = np.asarray(z_history)
    eps = rng.normal(0.0, params.sigma, size=(n, len(z)))
    s = eps + params.zeta_star * z
    num = params.zeta0 + params.gamma * (s @ z)
    den = 1.0 + params.gamma * float(z @ z)
    draws = np.maximum(0.0, num / den)
    return draws


def mc_pi(zeta_t, z, params, n=10**6, seed=0):
    rng = np.random.default_rng(seed)
    eps = rng.normal(0.0, params.sigma, size=n)
    s = eps + params.zeta_star * z
    draws = np.maximum(0.0, (zeta_t + params.gamma * z * s) / (1.0 + params.gamma * z * z))
    return draws


def check_against_mc(report, draws):
    n = len(draws)
    mean = float(np.mean(draws))
    se_mean = float(np.std(draws)) / math.sqrt(n)
    assert abs(report.expectation - mean) <= 3 * se_mean + 1e-12
    var = float(np.var(draws))
    m4 = float(np.mean((draws - mean) ** 4))
    se_var = math.sqrt(max(m4 - var**2, 0.0) / n)
    assert abs(report.variance - var) <= 3 * se_var + 1e-12


class TestPdMoments:
    def test_cancelling_history_still_carries_noise(self):
        # opposite-sign inputs cancel in the plain sum but not in the noise:
        # each period contributes an independent shock, so the Monte Carlo
        # distribution keeps a sqrt(sum z^2) scale around the 1.1/3 center
        report = pd_moments([1.0, -1.0], PARAMS)
        assert report.vbar == pytest.approx(1.1 / 3.0, rel=1e-14)
        assert report.phibar == pytest.approx(
            PARAMS.gamma * PARAMS.sigma * math.sqrt(2.0) / 3.0, rel=1e-14
        )
        check_against_mc(report, mc_pd([1.0, -1.0], PARAMS, seed=10))

    def test_single_observation_scale_matches_displayed_form(self):
        # for one observation the scale reduces to gamma*sigma*|z|/(1+gamma z^2)
        report = pd_moments([-0.7], PARAMS)
        g = PARAMS.gamma
        assert report.phibar == pytest.approx(
            g * PARAMS.sigma * 0.7 / (1.0 + g * 0.49), rel=1e-14
        )

    def test_prior_dominates_as_gamma_vanishes(self):
        params = SectorParams(zeta_star=0.5, sigma=10.0, tau=0.001, zeta0=0.1)
        report = pd_moments([1.0, 2.0], params)
        assert report.expectation == pytest.approx(0.1, abs=1e-4)

    def test_monte_carlo_three_unit_inputs(self):
        report = pd_moments([1.0, 1.0, 1.0], PARAMS)
        check_against_mc(report, mc_pd([1.0, 1.0, 1.0], PARAMS, seed=11))

    def test_monte_carlo_mixed_history(self):
        z = [0.8, -0.3, 1.4, 0.2]
        report = pd_moments(z, PARAMS)
        check_against_mc(report, mc_pd(z, PARAMS, seed=12))

    def test_variance_nonnegative(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            z = rng.normal(size=rng.integers(1, 8)).tolist()
            report = pd_moments(z, PARAMS)
            assert report.variance >= -1e-12
            assert 0.0 <= report.Ftilde <= 1.0
            assert 0.0 <= report.ftilde <= 1.0 / math.sqrt(2 * math.pi) + 1e-15


class TestModes:
    def test_zero_scale_mode_is_center(self):
        assert pd_mode([1.0, -1.0], PARAMS) == pytest.approx(1.1 / 3.0)

    def test_small_noise_mode_is_center(self):
        params = SectorParams(zeta_star=0.5, sigma=0.001, tau=0.1, zeta0=0.1)
        report = pd_moments([1.0, 0.5], params)
        assert report.mode == report.vbar

    def test_large_scale_small_center_mode_zero(self):
        # big sigma and tau with the center near zero: the atom wins
        params = SectorParams(zeta_star=0.05, sigma=4.0, tau=4.0, zeta0=0.0)
        report = pd_moments([1.0], params)
        assert abs(report.phibar) > 1.0
        assert report.mode == 0.0

    def test_mode_matches_density_maximization(self):
        rng = np.random.default_rng(8)
        for _ in range(40):
            sigma = float(rng.uniform(0.02, 4.0))
            params = SectorParams(
                zeta_star=float(rng.uniform(0.05, 0.9)),
                sigma=sigma,
                tau=float(rng.uniform(0.02, 4.0)),
                zeta0=float(rng.uniform(0.0, 0.5)),
            )
            z = rng.normal(size=int(rng.integers(1, 6))).tolist()
            report = pd_moments(z, params)
            if report.phibar == 0.0:
                continue
            # numeric oracle: continuous peak density vs the atom at zero
            absphi = abs(report.phibar)
            grid = np.linspace(1e-9, report.vbar + 6 * absphi, 20001)
            dens = np.exp(-0.5 * ((grid - report.vbar) / absphi) ** 2) / (
                absphi * math.sqrt(2 * math.pi)
            )
            atom = 0.5 * math.erfc(report.vbar / absphi / math.sqrt(2))
            numeric = float(grid[int(np.argmax(dens))]) if float(np.max(dens)) >= atom else 0.0
            assert (report.mode == 0.0) == (numeric == 0.0)
            if report.mode != 0.0:
                assert report.mode == pytest.approx(numeric, abs=1e-3)


class TestPiMoments:
    def test_zero_signal_degenerate(self):
        report = pi_moments(0.37, 0.0, PARAMS)
        assert report.expectation == 0.37
        assert report.variance == 0.0
        assert pi_mode(0.37, 0.0, PARAMS) == 0.37

    def test_monte_carlo(self):
        report = pi_moments(0.1, 1.0, PARAMS)
        check_against_mc(report, mc_pi(0.1, 1.0, PARAMS, seed=21))

    def test_high_precision_ratio_concentrates_on_truth(self):
        params = SectorParams(zeta_star=0.5, sigma=0.001, tau=1.0, zeta0=0.1)  # gamma = 1e6
        report = pi_moments(0.1, 1.0, params)
        assert report.expectation == pytest.approx(0.5, abs=1e-3)
        check_against_mc(report, mc_pi(0.1, 1.0, params, seed=22))


class TestPdLimits:
    def test_case_three_converges_to_truth(self):
        desc = LimitDescriptor(z1_limit=2.0, z2_limit=math.inf)
        case, value = pd_limit_expectation(desc, PARAMS)
        assert case == 3 and value == PARAMS.zeta_star

    def test_case_two_zero_drift(self):
        desc = LimitDescriptor(z1_limit=0.0, z2_limit=2.0)
        case, value = pd_limit_expectation(desc, PARAMS)
        assert case == 2
        assert value == pytest.approx(1.1 / 3.0, rel=1e-14)

    def test_case_two_nonzero_drift_small_noise(self):
        # with the truncation factors pinned at their small-noise limits the
        # case-2 value reduces to the untruncated center (gamma fixed)
        desc = LimitDescriptor(z1_limit=1.0, z2_limit=2.0)
        tiny = SectorParams(zeta_star=0.5, sigma=1e-9, tau=1e-9 * math.sqrt(2.0), zeta0=0.1)
        case, value = pd_limit_expectation(desc, tiny)
        g = tiny.gamma
        center = (0.1 + g * 0.5 * 2.0) / (1.0 + g * 2.0)
        assert case == 2
        assert value == pytest.approx(center, rel=1e-9)

    def test_case_four_diverges(self):
        desc = LimitDescriptor(z1_limit=math.inf, z2_limit=3.0)
        case, value = pd_limit_expectation(desc, PARAMS)
        assert case == 4 and math.isinf(value)

    def test_case_five_converges_to_truth(self):
        desc = LimitDescriptor(z1_limit=math.inf, z2_limit=math.inf, ratio_limit=math.inf)
        case, value = pd_limit_expectation(desc, PARAMS)
        assert case == 5 and value == PARAMS.zeta_star

    def test_case_one_value(self):
        desc = LimitDescriptor(z1_limit=math.inf, z2_limit=math.inf, ratio_limit=2.0)
        case, value = pd_limit_expectation(desc, PARAMS)
        assert case == 1
        from eqlearn.norm import norm_cdf, norm_pdf

        r12 = PARAMS.zeta_star / (PARAMS.sigma * 2.0)
        expected = PARAMS.zeta_star * (1.0 - norm_cdf(-2.0)) + PARAMS.sigma * norm_pdf(-2.0) * r12
        assert value == pytest.approx(expected, rel=1e-14)

    def test_inconsistent_descriptor_rejected(self):
        with pytest.raises(ValueError):
            pd_limit_expectation(
                LimitDescriptor(z1_limit=math.inf, z2_limit=math.inf), PARAMS
            )
        with pytest.raises(ValueError):
            LimitDescriptor(z1_limit=0.0, z2_limit=-1.0)

    def test_classification(self):
        assert classify_limit_case(LimitDescriptor(1.0, 1.0)) == 2
        assert classify_limit_case(LimitDescriptor(1.0, math.inf)) == 3
        assert classify_limit_case(LimitDescriptor(-math.inf, 1.0)) == 4
        assert classify_limit_case(LimitDescriptor(math.inf, math.inf, ratio_limit=1.0)) == 1


class TestPiLimits:
    def test_labor_away_from_one(self):
        assert pi_limit_expectation(2.0, [0.5, 0.5], PARAMS) == PARAMS.zeta_star

    def test_all_zero_signals_keep_prior(self):
        assert pi_limit_expectation(1.0, [0.0] * 10, PARAMS) == pytest.approx(PARAMS.zeta0)

    def test_partial_product_approaches_truth(self):
        strong = SectorParams(zeta_star=0.5, sigma=0.001, tau=1.0, zeta0=0.1)  # gamma = 1e6
        z = [1.0 / h for h in range(1, 200)]
        value = pi_limit_expectation(1.0, z, strong)
        assert value == pytest.approx(strong.zeta_star, abs=1e-6)
        # growing the horizon moves the partial limit closer to the truth
        shorter = pi_limit_expectation(1.0, z[:10], strong)
        assert abs(value - strong.zeta_star) < abs(shorter - strong.zeta_star) + 1e-15


class TestModeSequence:
    def test_constant_unit_signal_geometric(self):
        states = mode_sequence_pi([1.0] * 30, PARAMS)
        gaps = [abs(s.current_vbar - PARAMS.zeta_star) for s in states]
        for a, b in zip(gaps, gaps[1:]):
            assert b == pytest.approx(a / 2.0, rel=1e-12)
        assert all(s.psi_membership for s in states)

    def test_indicator_zero_restarts_from_zero(self):
        # large shock scale with a small center: the atom dominates and the
        # recursion restarts from zero
        params = SectorParams(zeta_star=0.05, sigma=4.0, tau=4.0, zeta0=0.0)
        states = mode_sequence_pi([1.0, 1.0], params)
        assert not states[0].psi_membership
        assert states[0].current_vbar == 0.0

    def test_closed_form_matches_recursion(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            z = rng.normal(0.0, 1.0, size=10).tolist()
            states = mode_sequence_pi(z, PARAMS)
            indicators = [s.psi_membership for s in states]
            closed = mode_sequence_closed_form(z, indicators, PARAMS)
            assert states[-1].current_vbar == pytest.approx(closed, abs=1e-12)

    def test_mode_indicator_edge(self):
        assert mode_indicator(0.5, 0.0) is True


def _example_config(horizon=120, delta=10.0, growth=None, sigma=0.1, mode="PD"):
    sector = SectorParams(zeta_star=0.5, m=0.0, sigma=sigma, tau=0.1, zeta0=0.1)
    supply = Schedule.linear(delta + 1.0, 1.0) if growth else Schedule.constant(delta)
    return EconomyConfig(
        alpha=0.5,
        sectors=(sector,),
        horizon=horizon,
        labor_supply=supply,
        l0=Schedule.constant(1.0),
        learning_mode=mode,
        seed=77,
    )


class TestMeanFieldPath:
    def test_sigma_zero_matches_stochastic_path(self):
        from eqlearn.engine import run_trajectory

        config = _example_config(sigma=0.0, horizon=40)
        z_mf = mean_field_labor_path(config)
        traj = run_trajectory(config)
        assert np.array_equal(z_mf, np.log(traj.labor))

    def test_constant_supply_sums_finite_and_monotone(self):
        z = mean_field_labor_path(_example_config(horizon=200))[:, 0]
        z2 = np.cumsum(z * z)
        assert np.all(np.isfinite(z2))
        assert np.all(np.diff(z2) >= 0.0)

    def test_growing_supply_sums_unbounded(self):
        z = mean_field_labor_path(_example_config(horizon=300, growth=True))[:, 0]
        z2 = np.cumsum(z * z)
        assert np.all(np.diff(z2) > 0.0)
        assert z2[-1] > 100.0 * z2[len(z2) // 10]


class TestExpectedBeliefPath:
    def test_pd_matches_direct_evaluation(self):
        z = [0.4, 0.2, -0.1]
        path = expected_belief_path(z, PARAMS, mode="PD")
        assert path[0] == PARAMS.zeta0
        assert path[-1] == pytest.approx(pd_moments(z, PARAMS).expectation)

    def test_pi_is_contraction_toward_truth(self):
        z = [0.5] * 50
        path = expected_belief_path(z, PARAMS, mode="PI")
        gaps = np.abs(np.asarray(path) - PARAMS.zeta_star)
        assert np.all(np.diff(gaps) <= 1e-15)


class TestHeuristicClassifier:
    def test_flags_divergent_square_sum(self):
        z = np.full(100, 0.5)
        desc = limit_classifier_heuristic(z)
        assert math.isinf(desc.z2_limit)

    def test_requires_enough_data(self):
        with pytest.raises(ValueError):
            limit_classifier_heuristic([0.1] * 5)

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqlearn.model import (
    ConfigError,
    EconomyConfig,
    Schedule,
    SectorParams,
    draw_shock_matrix,
    lognormal_moment,
    mean_productivity,
    shock_stream,
)


class TestLognormalMoment:
    def test_degenerate_shock(self):
        assert lognormal_moment(0.0, 0.0, 0.5) == 1.0

    def test_against_quadrature_oracle(self):
        # frozen from adaptive quadrature of the log-normal density
        assert lognormal_moment(0.0, 1.0, 1.0) == pytest.approx(1.6487212707001282, abs=1e-12)
        assert lognormal_moment(0.0, 0.1, 0.5) == pytest.approx(1.0012507815756226, abs=1e-12)
        assert lognormal_moment(0.3, 0.7, 0.5) == pytest.approx(1.235221121744387, rel=1e-12)
        assert lognormal_moment(1.0, 0.5, 2.0) == pytest.approx(12.182493960703473, rel=1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(ConfigError):
            lognormal_moment(math.nan, 1.0, 1.0)
        with pytest.raises(ConfigError):
            lognormal_moment(0.0, math.inf, 1.0)
        with pytest.raises(ConfigError):
            lognormal_moment(0.0, -0.1, 1.0)

    @given(
        m=st.floats(-2, 2),
        sigma=st.floats(0, 3),
        a=st.floats(-2, 2),
    )
    @settings(max_examples=100, deadline=None)
    def test_jensen_lower_bound(self, m, sigma, a):
        value = lognormal_moment(m, sigma, a)
        floor = math.exp(a * m)
        assert value >= floor * (1 - 1e-12)
        if sigma * a == 0.0:
            assert value == pytest.approx(floor, rel=1e-12)
        elif abs(sigma * a) > 1e-3:
            assert value > floor

    @given(m=st.floats(-2, 2), sigma=st.floats(0, 2))
    @settings(max_examples=50, deadline=None)
    def test_mean_productivity_consistency(self, m, sigma):
        p = SectorParams(zeta_star=0.5, m=m, sigma=sigma)
        assert mean_productivity(p) == lognormal_moment(m, sigma, 1.0)


class TestMeanProductivity:
    def test_values(self):
        assert mean_productivity(SectorParams(zeta_star=0.5, m=0.0, sigma=0.0)) == 1.0
        assert mean_productivity(SectorParams(zeta_star=0.5, m=0.0, sigma=1.0)) == pytest.approx(
            1.6487212707001282, abs=1e-12
        )
        assert mean_productivity(SectorParams(zeta_star=0.5, m=1.0, sigma=0.0)) == pytest.approx(
            math.e, rel=1e-15
        )


class TestSectorParams:
    def test_defaults_and_gamma(self):
        p = SectorParams(zeta_star=0.5)
        assert p.zeta_lo == 0.05 and p.zeta_hi == 0.95
        assert p.gamma == 1.0
        assert SectorParams(zeta_star=0.5, sigma=0.0).gamma == math.inf

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(zeta_star=0.5, sigma=-1.0),
            dict(zeta_star=0.5, tau=0.0),
            dict(zeta_star=0.02),  # below the default floor
            dict(zeta_star=0.99),  # above the default ceiling
            dict(zeta_star=0.5, zeta_lo=0.0),
            dict(zeta_star=0.5, zeta_hi=1.0),
            dict(zeta_star=0.5, zeta0=-0.1),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            SectorParams(**kwargs)


class TestSchedules:
    def test_linear_growth_convention(self):
        sched = Schedule.linear(start=10.0, growth=2.0)
        assert list(sched.resolve(4)) == [10.0, 12.0, 14.0, 16.0]

    def test_explicit_too_short(self):
        with pytest.raises(ConfigError):
            Schedule.explicit([1.0, 2.0]).resolve(3)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            Schedule(kind="quadratic")


def _config_dict(**updates):
    base = {
        "alpha": 0.5,
        "sectors": [{"zeta_star": 0.5, "m": 0.0, "sigma": 0.1, "tau": 0.1, "zeta0": 0.1}],
        "horizon": 10,
        "labor_supply": {"kind": "constant", "value": 10.0},
        "l0": {"kind": "constant", "value": 1.0},
        "learning_mode": "PD",
        "seed": 42,
    }
    base.update(updates)
    return base


class TestEconomyConfig:
    def test_json_round_trip(self):
        cfg = EconomyConfig.from_json(json.dumps(_config_dict()))
        assert cfg.alpha == 0.5
        assert cfg.n_sectors == 1
        assert cfg.sectors[0].zeta_star == 0.5
        again = EconomyConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            EconomyConfig.from_dict(_config_dict(extra=1))

    def test_unknown_sector_key(self):
        bad = _config_dict()
        bad["sectors"][0]["typo"] = 1.0
        with pytest.raises(ConfigError, match="sectors\\[0\\]"):
            EconomyConfig.from_dict(bad)

    def test_unknown_schedule_key(self):
        bad = _config_dict(labor_supply={"kind": "constant", "value": 10.0, "slope": 1})
        with pytest.raises(ConfigError, match="labor_supply"):
            EconomyConfig.from_dict(bad)

    def test_malformed_json_reports_location(self):
        with pytest.raises(ConfigError, match="line 1"):
            EconomyConfig.from_json("{not json}")

    def test_missing_keys(self):
        bad = _config_dict()
        del bad["alpha"]
        with pytest.raises(ConfigError, match="missing config keys"):
            EconomyConfig.from_dict(bad)

    def test_labor_slack_must_be_positive(self):
        with pytest.raises(ConfigError, match="stay positive"):
            EconomyConfig.from_dict(_config_dict(l0={"kind": "constant", "value": 10.0}))

    def test_default_l0_fraction(self):
        cfg = EconomyConfig.from_dict({k: v for k, v in _config_dict().items() if k != "l0"})
        assert np.allclose(cfg.resolve_l0(), 0.1 * cfg.resolve_delta())

    def test_endogenous_labor_validation(self):
        cfg = EconomyConfig.from_dict(_config_dict(endogenous_labor={"r": 2.0}))
        assert cfg.endogenous_labor == 2.0
        with pytest.raises(ConfigError):
            EconomyConfig.from_dict(_config_dict(endogenous_labor={"r": 1.0}))
        with pytest.raises(ConfigError):
            EconomyConfig.from_dict(_config_dict(endogenous_labor={"rr": 2.0}))


class TestShockStreams:
    PARAMS = SectorParams(zeta_star=0.5, m=0.25, sigma=0.5)

    def test_same_triple_identical(self):
        a = shock_stream(self.PARAMS, seed=1, sector=0, replication=0).eps(64)
        b = shock_stream(self.PARAMS, seed=1, sector=0, replication=0).eps(64)
        assert np.array_equal(a, b)

    def test_distinct_streams(self):
        a = shock_stream(self.PARAMS, seed=1, sector=0, replication=0).eps(64)
        b = shock_stream(self.PARAMS, seed=1, sector=0, replication=1).eps(64)
        c = shock_stream(self.PARAMS, seed=1, sector=1, replication=0).eps(64)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert not np.array_equal(b, c)

    def test_law_of_large_numbers(self):
        eps = shock_stream(self.PARAMS, seed=9, sector=0, replication=0).eps(10**6)
        assert abs(float(np.mean(eps)) - self.PARAMS.m) <= 4 * self.PARAMS.sigma / 10**3

    def test_draws_have_consistent_level(self):
        for draw in shock_stream(self.PARAMS, seed=3, sector=0, replication=0).draws(16):
            assert draw.eta == pytest.approx(math.exp(draw.eps), rel=1e-15)

    def test_chunking_invariance(self):
        whole = shock_stream(self.PARAMS, seed=5, sector=2, replication=3).eps(100)
        stream = shock_stream(self.PARAMS, seed=5, sector=2, replication=3)
        parts = np.concatenate([stream.eps(10) for _ in range(10)])
        assert np.array_equal(whole, parts)

    def test_matrix_matches_streams(self):
        cfg = EconomyConfig.from_dict(_config_dict())
        mat = draw_shock_matrix(cfg, replication=4)
        col = shock_stream(cfg.sectors[0], seed=42, sector=0, replication=4).eps(cfg.horizon)
        assert np.array_equal(mat[:, 0], col)

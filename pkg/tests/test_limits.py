import numpy as np
import pytest
from scipy import integrate

from relaycode.channel import NetworkGeometry, derive_snrs
from relaycode.limits import (
    ENERGY_CODED,
    ENERGY_INFO,
    PER_USER,
    SUM_CONSTRAINED,
    RateAllocation,
    achievable_rate_2user,
    achievable_rate_multiuser,
    bpsk_capacity,
    capacity_threshold,
    decodable,
    threshold_table,
)


def capacity_oracle(es_n0: float) -> float:
    """Independent check via scipy adaptive quadrature: the expected
    uncertainty 1 - E[log2(1 + exp(-L))] over the conditional output
    density, with a softplus-stable integrand."""
    sigma2 = 1.0 / (2.0 * es_n0)
    sigma = np.sqrt(sigma2)

    def integrand(y):
        x = 2.0 * y / sigma2
        softplus = np.log1p(np.exp(-abs(x))) + max(-x, 0.0)
        density = np.exp(-((y - 1.0) ** 2) / (2.0 * sigma2))
        return density * softplus

    lo, hi = 1.0 - 12.0 * sigma, 1.0 + 12.0 * sigma
    value, _ = integrate.quad(integrand, lo, hi, limit=400)
    return 1.0 - value / (np.sqrt(2.0 * np.pi * sigma2) * np.log(2.0))


class TestCapacity:
    def test_limits_at_extremes(self):
        assert bpsk_capacity(-np.inf, "awgn") == 0.0
        assert bpsk_capacity(np.inf, "awgn") == 1.0
        assert bpsk_capacity(-60.0, "rayleigh") < 1e-5
        assert bpsk_capacity(40.0, "rayleigh") > 0.9999

    @pytest.mark.parametrize("gamma_db", [-3.01, 0.0, 3.0, 6.0])
    def test_awgn_matches_independent_quadrature(self, gamma_db):
        mine = bpsk_capacity(gamma_db, "awgn")
        oracle = capacity_oracle(10 ** (gamma_db / 10.0))
        assert mine == pytest.approx(oracle, abs=1e-4)

    def test_classic_anchor_value(self):
        # unit noise variance (Es/N0 = -3.01 dB), the classic ~0.486 point
        assert bpsk_capacity(-3.0103, "awgn") == pytest.approx(
            capacity_oracle(10 ** (-0.30103)), abs=1e-4
        )
        assert bpsk_capacity(-3.0103, "awgn") == pytest.approx(0.486, abs=1e-3)

    def test_rayleigh_matches_independent_nested_quadrature(self):
        gamma_db = 2.0
        es_n0 = 10 ** (gamma_db / 10.0)

        def integrand(t):
            return np.exp(-t) * capacity_oracle(t * es_n0)

        oracle, _ = integrate.quad(integrand, 1e-9, 40.0, limit=300)
        assert bpsk_capacity(gamma_db, "rayleigh") == pytest.approx(
            oracle, abs=1e-4
        )

    def test_rayleigh_below_awgn(self):
        for gamma_db in np.linspace(-6, 10, 9):
            assert (bpsk_capacity(gamma_db, "rayleigh")
                    <= bpsk_capacity(gamma_db, "awgn") + 1e-12)

    def test_monotone_in_gamma(self):
        for model in ("awgn", "rayleigh"):
            values = [bpsk_capacity(g, model) for g in np.linspace(-10, 12, 23)]
            assert np.all(np.diff(values) > 0)


class TestDecodable:
    def test_perfect_channels(self):
        assert decodable((10, 10), (10, 10), 4, 1, 1, 1, 1, 1)

    def test_relay_constraint_fails(self):
        # third inequality: k1 > n1*C(s1d) with zero relay capacity
        assert not decodable((8, 4), (10, 10), 4, 1, 1, 0.5, 1, 0.0)

    def test_boundary_is_non_strict(self):
        assert decodable((5, 5), (10, 10), 0, 0.5, 0.5, 0.5, 0.5, 0.0)

    def test_rejects_bad_lengths(self):
        with pytest.raises(ValueError):
            decodable((0, 5), (10, 10), 4, 1, 1, 1, 1, 1)


class TestAchievableRates:
    def test_equal_allocation_formula(self):
        """Infinite source-relay link, sigma = 1, equal thirds: the sum
        constraint binds and gives C_sd/3 + C_rd/6."""
        geometry = NetworkGeometry()
        alloc = RateAllocation(theta=(1 / 3, 1 / 3, 1 / 3), sigma=1.0)
        snrs = derive_snrs(0.0, geometry)
        snrs_inf_rel = type(snrs)(
            gamma_sd_db=snrs.gamma_sd_db,
            gamma_sr_db=np.inf,
            gamma_rd_db=snrs.gamma_rd_db,
        )
        c_sd = bpsk_capacity(snrs.gamma_sd_db)
        c_rd = bpsk_capacity(snrs.gamma_rd_db)
        rate = achievable_rate_2user(alloc, snrs_inf_rel)
        assert rate == pytest.approx(c_sd / 3 + c_rd / 6, abs=1e-12)

    def test_no_relay_share(self):
        snrs = derive_snrs(0.0, NetworkGeometry())
        snrs = type(snrs)(snrs.gamma_sd_db, np.inf, snrs.gamma_rd_db)
        alloc = RateAllocation(theta=(0.5, 0.5, 0.0), sigma=1.0)
        c_sd = bpsk_capacity(0.0)
        # direct-link terms only; the sum constraint gives (C_sd)/2
        assert achievable_rate_2user(alloc, snrs) == pytest.approx(
            c_sd / 2, abs=1e-12
        )

    def test_relay_constraint_binds(self):
        # weak source-relay link makes the first term the minimum
        snrs = derive_snrs(0.0, NetworkGeometry())
        snrs = type(snrs)(snrs.gamma_sd_db, -15.0, snrs.gamma_rd_db)
        alloc = RateAllocation(theta=(1 / 3, 1 / 3, 1 / 3), sigma=1.0)
        assert achievable_rate_2user(alloc, snrs) == pytest.approx(
            bpsk_capacity(-15.0) / 3, abs=1e-12
        )

    def test_multiuser_reduces_to_two_user(self):
        """With sigma = 1, equal thirds and a maxed-out relay link, the
        two-user minimum is exactly min(1/3, per-user closed form): the
        source-relay terms saturate at theta * 1 under the BPSK cap."""
        geometry = NetworkGeometry()
        for gamma in (-6.0, -1.0, 0.0, 2.0):
            snrs = derive_snrs(gamma, geometry)
            snrs_inf = type(snrs)(snrs.gamma_sd_db, np.inf, snrs.gamma_rd_db)
            alloc = RateAllocation(theta=(1 / 3, 1 / 3, 1 / 3), sigma=1.0)
            two = achievable_rate_2user(alloc, snrs_inf)
            multi = achievable_rate_multiuser(
                2, gamma, geometry, constraint=PER_USER, energy=ENERGY_CODED
            )
            assert two == pytest.approx(min(1 / 3, multi), abs=1e-12)

    def test_perfect_channel_arithmetic(self):
        geometry = NetworkGeometry()
        val = achievable_rate_multiuser(
            4, 60.0, geometry, constraint=PER_USER, energy=ENERGY_CODED
        )
        assert val == pytest.approx(3 / (2 * 5), abs=1e-3)

    def test_allocation_validation(self):
        with pytest.raises(ValueError):
            RateAllocation(theta=(0.5, 0.6, 0.1))
        with pytest.raises(ValueError):
            RateAllocation(theta=(0.4, 0.3, 0.3), sigma=-1.0)


PUBLISHED_CAPACITY = {
    2: -1.0982, 4: 0.0658, 8: 0.8604, 16: 1.3173,
    20: 1.4152, 30: 1.5406, 50: 1.6618, 100: 1.7443,
}


class TestCapacityThreshold:
    def test_published_column_reproduced(self):
        for q, expected in PUBLISHED_CAPACITY.items():
            got = capacity_threshold(q)
            assert got == pytest.approx(expected, abs=0.05), f"q={q}"

    def test_sum_rate_at_threshold(self):
        geometry = NetworkGeometry()
        q = 2
        th = capacity_threshold(q)
        rate = q * achievable_rate_multiuser(
            q, th, geometry, constraint=SUM_CONSTRAINED, energy=ENERGY_INFO
        )
        assert rate == pytest.approx(q / (2 * (q + 1)), abs=1e-3)

    def test_monotone_in_q(self):
        values = [capacity_threshold(q) for q in (2, 4, 8, 16, 100)]
        assert np.all(np.diff(values) > 0)

    def test_per_user_form_q_independent(self):
        """Taken verbatim, the per-user closed form yields the same
        threshold for every q (its relay share is not capped), which is
        exactly why the sum-constrained evaluator is the default."""
        a = capacity_threshold(2, constraint=PER_USER)
        b = capacity_threshold(8, constraint=PER_USER)
        c = capacity_threshold(2, constraint=SUM_CONSTRAINED)
        # info-bit scaling aside, the per-user solution does not move with q
        assert abs(a - (b + 10 * np.log10((8 / 18) / (2 / 6)))) < 0.01
        assert a == pytest.approx(c, abs=0.01)  # q=2: forms coincide

    def test_table_contains_both_forms(self):
        rows = threshold_table(qs=(2, 4))
        assert {"q", "threshold_db", "threshold_per_user_db", "r_eff"} <= set(
            rows[0]
        )
        assert rows[0]["threshold_db"] == pytest.approx(
            rows[0]["threshold_per_user_db"], abs=0.01
        )
        assert rows[1]["threshold_db"] != pytest.approx(
            rows[1]["threshold_per_user_db"], abs=0.5
        )

    def test_bracket_failure_reports_interval(self):
        with pytest.raises(ValueError, match=r"\[-20.0, -15.0\]"):
            capacity_threshold(2, bracket=(-20.0, -15.0))

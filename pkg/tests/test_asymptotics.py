import numpy as np
import pytest

from dbp import (
    ConfigError,
    InfeasibleError,
    InvalidRegimeError,
    MseSpec,
    awgn_mutual_information,
    make_constellation,
    min_antenna_ratio,
    psi_mse,
    se_trajectory,
    sinr_fd,
    sinr_fd_lmmse_closed,
    sinr_fd_zf_closed,
    sinr_pd_closed_form,
    solve_fixed_point,
)
from dbp.asymptotics import asymptotic_sinr, sinr_for_rate
from oracles import lmmse_fixed_point_quadratic, mc_mutual_information

QPSK = make_constellation("qpsk")
QAM16 = make_constellation("qam16")

GRID_DB = (0.0, 5.0, 10.0, 20.0)
GRID_BETA = (0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.75, 0.9)


class TestPsi:
    def test_mrc_constant(self):
        spec = MseSpec("mrc")
        assert psi_mse(spec, 0.01) == 1.0
        assert psi_mse(spec, 100.0) == 1.0

    def test_zf_identity(self):
        assert psi_mse(MseSpec("zf"), 0.37) == 0.37

    def test_lmmse_wiener(self):
        assert psi_mse(MseSpec("lmmse"), 0.5) == pytest.approx(0.5 / 1.5)

    def test_lama_vanishes_at_zero_noise(self):
        spec = MseSpec("lama", constellation=QPSK)
        assert psi_mse(spec, 1e-9) < 1e-7

    def test_lama_below_lmmse(self):
        # the posterior mean beats the linear estimator at every noise level
        spec = MseSpec("lama", constellation=QAM16)
        for s2 in (0.05, 0.2, 1.0, 5.0):
            assert psi_mse(spec, s2) <= psi_mse(MseSpec("lmmse"), s2) + 1e-12

    def test_rejects_nonpositive_sigma2(self):
        with pytest.raises(ConfigError):
            psi_mse(MseSpec("zf"), 0.0)

    def test_lama_requires_constellation(self):
        with pytest.raises(ConfigError):
            MseSpec("lama")


class TestFixedPoint:
    def test_mrc_single_step(self):
        fp = solve_fixed_point(MseSpec("mrc"), n0=0.1, beta=0.25)
        assert fp.sigma2 == pytest.approx(0.1 + 0.25)
        assert fp.iterations == 1

    def test_zf_hand_solved(self):
        fp = solve_fixed_point(MseSpec("zf"), n0=0.1, beta=0.25)
        assert fp.sigma2 == pytest.approx(0.1 / 0.75, rel=1e-11)

    def test_lmmse_quadratic_oracle(self):
        fp = solve_fixed_point(MseSpec("lmmse"), n0=0.1, beta=0.25)
        ref = lmmse_fixed_point_quadratic(0.1, 0.25)
        assert fp.sigma2 == pytest.approx(ref, rel=1e-11)
        assert fp.sinr == pytest.approx(7.784589286804, rel=1e-9)

    def test_sinr_sigma2_product(self):
        fp = solve_fixed_point(MseSpec("lmmse"), n0=0.05, beta=0.4)
        assert fp.sinr * fp.sigma2 == pytest.approx(1.0, rel=1e-12)

    def test_residual_invariant_on_grid(self):
        for kind in ("mrc", "zf", "lmmse"):
            spec = MseSpec(kind)
            for db in GRID_DB:
                n0 = 10.0 ** (-db / 10.0)
                for beta in GRID_BETA:
                    fp = solve_fixed_point(spec, n0, beta)
                    resid = abs(fp.sigma2 - n0 - beta * psi_mse(spec, fp.sigma2))
                    assert resid < 1e-10 * fp.sigma2

    def test_cluster_fraction_scaling(self):
        fp = solve_fixed_point(MseSpec("zf"), n0=0.1, beta=0.1, w=0.5)
        assert fp.sigma2 == pytest.approx(0.1 / (0.5 - 0.1), rel=1e-11)

    def test_zf_invalid_regime(self):
        with pytest.raises(InvalidRegimeError):
            solve_fixed_point(MseSpec("zf"), n0=0.1, beta=1.0)
        with pytest.raises(InvalidRegimeError):
            solve_fixed_point(MseSpec("zf"), n0=0.1, beta=0.3, w=0.25)

    def test_requires_positive_noise(self):
        with pytest.raises(ConfigError):
            solve_fixed_point(MseSpec("mrc"), n0=0.0, beta=0.5)


class TestFixedPointMultiplicity:
    def test_overloaded_qpsk_has_two_solutions(self):
        from dbp.asymptotics import fixed_point_multiplicity

        spec = MseSpec("lama", constellation=QPSK)
        n0 = 10.0 ** (-15.0 / 10.0)
        multiple, largest, smallest = fixed_point_multiplicity(spec, n0, 2.0)
        assert multiple
        assert smallest < 0.5 * largest
        # solve_fixed_point reports the largest branch
        assert solve_fixed_point(spec, n0, 2.0).sigma2 == pytest.approx(
            largest, rel=1e-12)

    def test_underloaded_regime_is_unique(self):
        from dbp.asymptotics import fixed_point_multiplicity

        spec = MseSpec("lama", constellation=QPSK)
        multiple, _, _ = fixed_point_multiplicity(spec, 0.1, 0.25)
        assert not multiple


class TestPdClosedForm:
    def test_mrc_value(self):
        assert sinr_pd_closed_form("mrc", 10.0, 0.25) == pytest.approx(10 / 3.5)

    def test_zf_value(self):
        assert sinr_pd_closed_form("zf", 10.0, 0.25) == pytest.approx(7.5)

    def test_small_beta_limit(self):
        for kind in ("mrc", "zf", "lmmse"):
            v = sinr_pd_closed_form(kind, 10.0, 1e-9)
            assert v == pytest.approx(10.0, rel=1e-6)

    def test_zf_regime_guard(self):
        with pytest.raises(InvalidRegimeError):
            sinr_pd_closed_form("zf", 10.0, 1.0)

    def test_matches_fixed_point_on_grid(self):
        for kind in ("mrc", "zf", "lmmse"):
            spec = MseSpec(kind)
            for db in GRID_DB:
                g = 10.0 ** (db / 10.0)
                for beta in GRID_BETA:
                    fp = solve_fixed_point(spec, 1.0 / g, beta)
                    cf = sinr_pd_closed_form(kind, g, beta)
                    assert abs(fp.sinr - cf) <= 1e-9 * cf


class TestFdSinr:
    def test_single_cluster_equals_pd(self):
        for kind in ("mrc", "zf", "lmmse"):
            r = sinr_fd(MseSpec(kind), 10.0, 0.25, [1.0])
            assert r.sinr == pytest.approx(
                sinr_pd_closed_form(kind, 10.0, 0.25), rel=1e-9)

    def test_zf_two_uniform_clusters(self):
        r = sinr_fd(MseSpec("zf"), 10.0, 0.25, [0.5, 0.5])
        assert r.sinr == pytest.approx(5.0, rel=1e-9)

    def test_lmmse_two_uniform_clusters(self):
        r = sinr_fd(MseSpec("lmmse"), 10.0, 0.25, [0.5, 0.5])
        closed = sinr_fd_lmmse_closed(10.0, 0.25, [0.5, 0.5]).value
        assert r.sinr == pytest.approx(6.216990566028, rel=1e-9)
        assert r.sinr == pytest.approx(closed, rel=1e-9)

    def test_fused_variance_is_harmonic_sum(self):
        r = sinr_fd(MseSpec("lmmse"), 10.0, 0.25, [0.3, 0.7])
        active = r.per_cluster_sinr[r.per_cluster_sinr > 0]
        assert r.sigma2 == pytest.approx(1.0 / np.sum(active), rel=1e-12)

    def test_zero_weight_cluster_ignored(self):
        a = sinr_fd(MseSpec("lmmse"), 10.0, 0.25, [1.0, 0.0])
        assert a.sinr == pytest.approx(
            sinr_pd_closed_form("lmmse", 10.0, 0.25), rel=1e-9)
        assert a.per_cluster_sinr[1] == 0.0

    def test_zf_needs_wide_clusters(self):
        with pytest.raises(InvalidRegimeError):
            sinr_fd(MseSpec("zf"), 10.0, 0.25, [0.8, 0.2])


class TestZfFdClosed:
    def test_single_cluster_matches_pd(self):
        assert sinr_fd_zf_closed(10.0, 0.25, 1) == pytest.approx(
            sinr_pd_closed_form("zf", 10.0, 0.25))

    def test_paper_point(self):
        assert sinr_fd_zf_closed(10.0, 0.25, 2) == pytest.approx(5.0)

    def test_partition_invariance(self):
        rng = np.random.default_rng(0)
        g, beta, c = 10.0 ** (10 / 10), 0.05, 4
        closed = sinr_fd_zf_closed(g, beta, c)
        spec = MseSpec("zf")
        for _ in range(5):
            w = beta + rng.dirichlet(np.ones(c)) * (1 - c * beta)
            r = sinr_fd(spec, g, beta, w)
            assert r.sinr == pytest.approx(closed, rel=1e-9)

    def test_overloaded_partition_rejected(self):
        with pytest.raises(InvalidRegimeError):
            sinr_fd_zf_closed(10.0, 0.3, 4)


class TestLmmseFdClosed:
    def test_uniform_attains_lower_bound(self):
        r = sinr_fd_lmmse_closed(10.0, 0.25, np.full(4, 0.25))
        assert abs(r.value - r.uniform_lower_bound) <= 1e-12

    def test_degenerate_equals_pd(self):
        r = sinr_fd_lmmse_closed(10.0, 0.25, np.array([1.0, 0, 0, 0]))
        assert abs(r.value - r.pd_upper_bound) <= 1e-12

    def test_jensen_bound_random_weights(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            w = rng.dirichlet(np.ones(4))
            r = sinr_fd_lmmse_closed(10.0, 0.25, w)
            assert r.value >= r.uniform_lower_bound - 1e-12
            assert r.value <= r.pd_upper_bound + 1e-12

    def test_paper_point(self):
        r = sinr_fd_lmmse_closed(10.0, 0.25, [0.5, 0.5])
        assert r.value == pytest.approx(6.216990566028, rel=1e-10)


class TestStateEvolution:
    def test_initialization(self):
        traj = se_trajectory(QPSK, n0=0.1, beta=0.25, t=1)
        assert traj.shape == (1,)
        assert traj[0] == pytest.approx(0.1 + 0.25)

    def test_zero_beta_constant(self):
        traj = se_trajectory(QPSK, n0=0.1, beta=0.0, t=5)
        assert np.allclose(traj, 0.1)

    def test_monotone_non_increasing(self):
        traj = se_trajectory(QAM16, n0=0.05, beta=0.25, t=30)
        assert np.all(np.diff(traj) <= 1e-15)

    @pytest.mark.parametrize("const", [QPSK, QAM16])
    @pytest.mark.parametrize("beta", [0.125, 0.25])
    @pytest.mark.parametrize("db", [5.0, 10.0])
    def test_terminal_matches_fixed_point(self, const, beta, db):
        n0 = 10.0 ** (-db / 10.0)
        spec = MseSpec("lama", constellation=const)
        fp = solve_fixed_point(spec, n0, beta)
        traj = se_trajectory(const, n0, beta, t=400)
        assert abs(traj[-1] - fp.sigma2) < 1e-9


class TestMutualInformation:
    def test_zero_at_zero_snr(self):
        assert awgn_mutual_information(QPSK, 0.0) == 0.0

    def test_saturates(self):
        assert awgn_mutual_information(QPSK, 1e6) == pytest.approx(2.0, abs=1e-6)
        assert awgn_mutual_information(QAM16, 1e6) == pytest.approx(4.0, abs=1e-6)

    def test_qpsk_at_zero_db(self):
        rng = np.random.default_rng(2)
        v = awgn_mutual_information(QPSK, 1.0)
        est, se = mc_mutual_information(QPSK.symbols, 1.0, 10_000_000, rng)
        assert v == pytest.approx(0.97, abs=0.01)
        assert abs(v - est) < 3 * se

    def test_rate_inversion_round_trip(self):
        for rate in (0.5, 1.5, 1.99):
            gamma = sinr_for_rate(QPSK, rate)
            assert awgn_mutual_information(QPSK, gamma) == pytest.approx(
                rate, abs=2e-9)

    def test_rate_bounds_checked(self):
        with pytest.raises(ConfigError):
            sinr_for_rate(QPSK, 2.0)


class TestMinAntennaRatio:
    def test_zf_independent_of_rate(self):
        vals = [min_antenna_ratio("zf", "pd", QPSK, r, 1.0)
                for r in (0.3, 1.0, 1.9, 1.99)]
        assert max(vals) - min(vals) < 2e-3
        # analytic value: 1/(1 - 10^{-0.1})
        assert vals[0] == pytest.approx(1.0 / (1.0 - 10 ** -0.1), rel=1e-3)

    def test_low_rate_mrc_matches_lmmse_and_lama(self):
        mrc = min_antenna_ratio("mrc", "pd", QPSK, 0.1, 1.0)
        lmmse = min_antenna_ratio("lmmse", "pd", QPSK, 0.1, 1.0)
        lama = min_antenna_ratio("lama", "pd", QPSK, 0.1, 1.0)
        assert abs(mrc - lmmse) <= 0.05 * lmmse
        assert abs(mrc - lama) <= 0.05 * lama

    def test_high_rate_mrc_far_above_lmmse(self):
        mrc = min_antenna_ratio("mrc", "pd", QPSK, 1.99, 1.0)
        lmmse = min_antenna_ratio("lmmse", "pd", QPSK, 1.99, 1.0)
        assert mrc >= 5.0 * lmmse

    def test_matches_exhaustive_scan(self):
        # brute-force feasibility scan at 1e-5 resolution in beta
        gamma = sinr_for_rate(QPSK, 1.99)
        g = gamma * 10.0 ** 0.1
        betas = np.arange(1e-5, 1.0, 1e-5)
        feasible = sinr_pd_closed_form_vec(g, betas) >= gamma
        beta_scan = betas[feasible].max()
        result = min_antenna_ratio("lmmse", "pd", QPSK, 1.99, 1.0)
        assert abs(1.0 / result - beta_scan) < 1.5e-4

    def test_fd_needs_more_antennas_than_pd(self):
        pd = min_antenna_ratio("lmmse", "pd", QPSK, 1.5, 1.0)
        fd = min_antenna_ratio("lmmse", "fd", QPSK, 1.5, 1.0, c=2)
        assert fd >= pd

    def test_zero_loss_infeasible(self):
        with pytest.raises(InfeasibleError):
            min_antenna_ratio("lmmse", "pd", QPSK, 1.99, 0.0)

    def test_rejects_negative_loss(self):
        with pytest.raises(ConfigError):
            min_antenna_ratio("zf", "pd", QPSK, 1.0, -1.0)


def sinr_pd_closed_form_vec(g, betas):
    x = 1.0 - g * (1.0 - betas)
    return 0.5 * (np.sqrt(x * x + 4.0 * g) - x)


class TestAsymptoticSinrDispatch:
    def test_mrc_same_all_architectures(self):
        for arch in ("centralized", "pd", "fd"):
            v = asymptotic_sinr("mrc", arch, QPSK, 10.0, 0.25,
                                weights=np.full(4, 0.25))
            assert v == pytest.approx(10 / 3.5)

    def test_lama_pd_beats_lmmse_pd(self):
        lama = asymptotic_sinr("lama", "pd", QPSK, 10.0, 0.25)
        lmmse = asymptotic_sinr("lmmse", "pd", QPSK, 10.0, 0.25)
        assert lama >= lmmse

    def test_fd_requires_weights(self):
        with pytest.raises(ConfigError):
            asymptotic_sinr("zf", "fd", QPSK, 10.0, 0.1)

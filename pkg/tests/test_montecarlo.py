import numpy as np
import pytest
from scipy.special import erfc

from dbp import (
    ClusterPartition,
    ConfigError,
    ExperimentConfig,
    make_constellation,
    run_experiment,
    run_trial,
    ser_closed_form,
    wilson_interval,
)
from dbp.montecarlo import predicted_sinr, trial_rng
from oracles import mc_awgn_ser, ml_detect

QPSK = make_constellation("qpsk")
QAM16 = make_constellation("qam16")


def config(**kw):
    base = dict(b=32, u=8, constellation=QPSK,
                partition=ClusterPartition.uniform(32, 2), equalizer="zf",
                architecture="pd", snr_db=(8.0,), trials=50, seed=11)
    base.update(kw)
    return ExperimentConfig(**base)


class TestSerClosedForm:
    def test_zero_snr_is_guessing(self):
        for const in (QPSK, QAM16, make_constellation("qam64")):
            m = const.size
            assert ser_closed_form(const, 0.0) == pytest.approx(
                (m - 1) / m, abs=1e-3)

    def test_qpsk_at_ten_linear(self):
        q = 0.5 * erfc(np.sqrt(10.0 / 2.0))
        expected = 1.0 - (1.0 - q) ** 2
        value = ser_closed_form(QPSK, 10.0)
        assert value == pytest.approx(expected, rel=1e-12)
        assert value == pytest.approx(1.565e-3, rel=1e-3)

    def test_strictly_decreasing(self):
        for const in (QPSK, QAM16):
            grid = np.logspace(-1, 2, 50)
            vals = [ser_closed_form(const, g) for g in grid]
            assert all(b < a for a, b in zip(vals, vals[1:]))


class TestWilson:
    def test_basic_interval(self):
        lo, hi = wilson_interval(10, 100)
        assert 0.0 < lo < 0.1 < hi < 0.2

    def test_zero_errors(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0 and hi > 0.0

    def test_coverage_at_least_93_percent(self):
        rng = np.random.default_rng(77)
        p, n, reps = 0.1, 500, 1000
        covered = 0
        for _ in range(reps):
            errors = rng.binomial(n, p)
            lo, hi = wilson_interval(errors, n)
            covered += lo <= p <= hi
        assert covered / reps >= 0.93


class TestRunTrial:
    def test_noiseless_zf_no_errors(self):
        cfg = config(snr_db=(120.0,))
        for t in range(10):
            assert not run_trial(cfg, t).any()

    def test_deterministic(self):
        cfg = config(snr_db=(6.0,), trials=1)
        a = run_trial(cfg, 3)
        b = run_trial(cfg, 3)
        assert np.array_equal(a, b)

    def test_shared_randomness_across_equalizers(self):
        kinds = ("mrc", "zf", "lmmse", "lama")
        draws = []
        for kind in kinds:
            rng = trial_rng(config(equalizer=kind), 5)
            draws.append(rng.standard_normal(8))
        for d in draws[1:]:
            assert np.array_equal(draws[0], d)

    def test_matches_ml_at_zero_noise(self):
        cfg = ExperimentConfig(
            b=2, u=2, constellation=QPSK,
            partition=ClusterPartition.uniform(2, 1), equalizer="zf",
            architecture="centralized", snr_db=(200.0,), trials=1, seed=9)
        from dbp.model import complex_gaussian, sample_symbols

        rng = trial_rng(cfg, 0)
        h = complex_gaussian(rng, (2, 2), 0.5)
        s0 = sample_symbols(QPSK, 2, rng)
        y = h @ s0
        ml = ml_detect(y, h, QPSK.symbols)
        assert not run_trial(cfg, 0).any()
        assert np.allclose(ml, s0)


class TestRunExperiment:
    def test_full_determinism(self):
        cfg = config(snr_db=(6.0, 9.0), trials=40)
        a = run_experiment(cfg)
        b = run_experiment(cfg)
        assert [(p.errors, p.ser) for p in a.points] == \
               [(p.errors, p.ser) for p in b.points]

    def test_workers_do_not_change_result(self):
        cfg = config(snr_db=(6.0,), trials=24)
        serial = run_experiment(cfg, workers=1)
        parallel = run_experiment(cfg, workers=2)
        assert serial.points[0].errors == parallel.points[0].errors

    def test_mrc_pd_and_fd_identical(self):
        pd = run_experiment(config(equalizer="mrc", architecture="pd",
                                   snr_db=(5.0, 8.0), trials=60))
        fd = run_experiment(config(equalizer="mrc", architecture="fd",
                                   snr_db=(5.0, 8.0), trials=60))
        assert [p.errors for p in pd.points] == [p.errors for p in fd.points]

    def test_centralized_equals_pd(self):
        pd = run_experiment(config(architecture="pd", snr_db=(7.0,), trials=60))
        ce = run_experiment(config(architecture="centralized", snr_db=(7.0,),
                                   trials=60))
        assert pd.points[0].errors == ce.points[0].errors

    def test_single_user_matches_scalar_awgn(self):
        # beta -> 0: ZF on a tall single-user system is the AWGN channel
        cfg = ExperimentConfig(
            b=1000, u=1, constellation=QPSK,
            partition=ClusterPartition.uniform(1000, 1), equalizer="zf",
            architecture="centralized", snr_db=(6.0,), trials=3000, seed=4)
        res = run_experiment(cfg)
        point = res.points[0]
        ref = mc_awgn_ser(QPSK.symbols, 10.0 ** 0.6, 200_000,
                          np.random.default_rng(8))
        assert point.ci_low <= ref <= point.ci_high

    def test_prediction_within_ci_midrange(self):
        cfg = ExperimentConfig(
            b=128, u=8, constellation=QAM16,
            partition=ClusterPartition.uniform(128, 4), equalizer="lmmse",
            architecture="pd", snr_db=(11.5,), trials=1000, seed=21)
        res = run_experiment(cfg)
        p = res.points[0]
        assert p.ci_low <= p.ser_predicted <= p.ci_high

    def test_error_ordering_with_shared_randomness(self):
        results = {}
        for kind in ("mrc", "zf", "lmmse", "lama"):
            cfg = config(equalizer=kind, constellation=QAM16, snr_db=(13.0,),
                         trials=150, b=64, u=8,
                         partition=ClusterPartition.uniform(64, 2))
            results[kind] = run_experiment(cfg).points[0]
        hw = {k: (results[k].ci_high - results[k].ci_low) / 2 for k in results}
        assert results["lama"].ser <= results["lmmse"].ser + hw["lama"] + hw["lmmse"]
        assert results["lmmse"].ser <= results["zf"].ser + hw["lmmse"] + hw["zf"]
        assert results["zf"].ser < results["mrc"].ser

    def test_predicted_sinr_consistency(self):
        cfg = config(equalizer="zf", architecture="fd")
        v = predicted_sinr(cfg, 10.0)
        from dbp import sinr_fd_zf_closed

        assert v == pytest.approx(sinr_fd_zf_closed(10.0, 0.25, 2))


class TestConfigValidation:
    def test_zero_trials_rejected(self):
        with pytest.raises(ConfigError):
            config(trials=0)

    def test_negative_seed_rejected(self):
        with pytest.raises(ConfigError):
            config(seed=-1)

    def test_partition_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            config(partition=ClusterPartition.uniform(16, 2))

    def test_non_finite_snr_rejected(self):
        with pytest.raises(ConfigError):
            config(snr_db=(float("nan"),))

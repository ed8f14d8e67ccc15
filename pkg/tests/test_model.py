import numpy as np
import pytest

from dbp import (
    ClusterPartition,
    ConfigError,
    SystemConfig,
    make_constellation,
    message_volume,
    sample_rayleigh_channel,
    sample_symbols,
    transmit,
)


@pytest.mark.parametrize("name,size", [("qpsk", 4), ("qam16", 16), ("qam64", 64)])
def test_constellation_normalization(name, size):
    c = make_constellation(name)
    assert c.size == size
    assert abs(c.symbols.mean()) < 1e-12
    assert abs(np.mean(np.abs(c.symbols) ** 2) - 1.0) < 1e-12
    assert c.es == 1.0


def test_unknown_constellation_rejected():
    with pytest.raises(ConfigError):
        make_constellation("qam32")


class TestChannel:
    def test_empirical_entry_variance(self):
        cfg = SystemConfig(b=256, u=16, n0=0.1)
        ch = sample_rayleigh_channel(cfg, np.random.default_rng(7))
        var = np.mean(np.abs(ch.h) ** 2)
        assert abs(var - 1.0 / 256) < 0.2 / 256

    def test_same_seed_bit_identical(self):
        cfg = SystemConfig(b=64, u=8, n0=0.1)
        a = sample_rayleigh_channel(cfg, np.random.default_rng(42)).h
        b = sample_rayleigh_channel(cfg, np.random.default_rng(42)).h
        assert np.array_equal(a, b)

    def test_cross_column_correlation_small(self):
        cfg = SystemConfig(b=10_000, u=4, n0=0.1)
        h = sample_rayleigh_channel(cfg, np.random.default_rng(1)).h
        for i in range(4):
            for j in range(4):
                if i != j:
                    corr = np.mean(np.conj(h[:, i]) * h[:, j]) * cfg.b
                    assert abs(corr) < 0.02

    def test_partition_reassembly(self):
        cfg = SystemConfig(b=48, u=6, n0=0.1)
        part = ClusterPartition.from_weights(48, [0.25, 0.25, 0.5])
        ch = sample_rayleigh_channel(cfg, np.random.default_rng(3), part)
        assert np.array_equal(np.vstack(ch.cluster_views), ch.h)
        assert [v.shape[0] for v in ch.cluster_views] == [12, 12, 24]


class TestPartition:
    def test_uniform(self):
        p = ClusterPartition.uniform(64, 4)
        assert p.counts == (16, 16, 16, 16)
        assert np.allclose(p.weights, 0.25)

    def test_non_integer_counts_rejected(self):
        with pytest.raises(ConfigError):
            ClusterPartition.from_weights(10, [1 / 3, 1 / 3, 1 / 3])

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            ClusterPartition.from_weights(10, [0.5, 0.4])

    def test_counts_must_match_b(self):
        with pytest.raises(ConfigError):
            ClusterPartition(10, (4, 4))


class TestTransmit:
    def test_noiseless_is_exact_product(self):
        cfg = SystemConfig(b=12, u=3, n0=0.0)
        rng = np.random.default_rng(0)
        ch = sample_rayleigh_channel(cfg, rng)
        s0 = sample_symbols(make_constellation("qpsk"), 3, rng)
        y = transmit(ch, s0, 0.0, rng)
        assert np.array_equal(y, ch.h @ s0)

    def test_identity_channel_passthrough(self):
        from dbp.model import ChannelRealization

        ch = ChannelRealization(np.eye(4, dtype=complex))
        s0 = sample_symbols(make_constellation("qam16"), 4, np.random.default_rng(1))
        y = transmit(ch, s0, 0.0, np.random.default_rng(2))
        assert np.allclose(y, s0)

    def test_noise_variance_matches_n0(self):
        from dbp.model import ChannelRealization

        rng = np.random.default_rng(11)
        h = np.eye(4, dtype=complex)
        ch = ChannelRealization(h)
        s0 = np.zeros(4, dtype=complex)
        draws = np.array([transmit(ch, s0, 0.1, rng) for _ in range(25_000)])
        var = np.mean(np.abs(draws) ** 2)
        assert abs(var - 0.1) < 0.002

    def test_dimension_mismatch(self):
        from dbp.errors import DimensionMismatchError
        from dbp.model import ChannelRealization

        ch = ChannelRealization(np.eye(4, dtype=complex))
        with pytest.raises(DimensionMismatchError):
            transmit(ch, np.zeros(5, dtype=complex), 0.0, np.random.default_rng(0))


class TestSampleSymbols:
    def test_membership(self):
        c = make_constellation("qpsk")
        s = sample_symbols(c, 4, np.random.default_rng(5))
        assert all(x in c.symbols for x in s)

    def test_uniform_frequencies(self):
        c = make_constellation("qpsk")
        s = sample_symbols(c, 1_000_000, np.random.default_rng(17))
        for sym in c.symbols:
            freq = np.mean(s == sym)
            assert abs(freq - 0.25) < 0.01 * 0.25 + 0.005

    def test_mean_energy(self):
        c = make_constellation("qam64")
        s = sample_symbols(c, 1_000_000, np.random.default_rng(23))
        assert abs(np.mean(np.abs(s) ** 2) - 1.0) < 0.01


class TestMessageVolume:
    def test_paper_scenario_mib(self):
        v = message_volume(u=16, n_sc=1200, n_sym=14, c=4)
        assert round(v.pd_mib, 2) == 17.58
        assert round(v.fd_mib, 2) == 8.20
        assert v.cs_bytes == 2 * v.fd_bytes

    def test_entry_counts_at_c1(self):
        v = message_volume(u=16, n_sc=1200, n_sym=14, c=1, bytes_per_entry=1)
        assert v.pd_bytes == 16 ** 2 * 1200 + 16 * 1200 * 14
        assert v.fd_bytes == 16 * 1200 * 14

    def test_linear_in_c(self):
        v1 = message_volume(u=8, n_sc=100, n_sym=7, c=2)
        v2 = message_volume(u=8, n_sc=100, n_sym=7, c=4)
        assert v2.pd_bytes == 2 * v1.pd_bytes
        assert v2.fd_bytes == 2 * v1.fd_bytes
        assert v2.cs_bytes == 2 * v1.cs_bytes

    def test_rejects_non_positive(self):
        with pytest.raises(ConfigError):
            message_volume(u=0, n_sc=1, n_sym=1, c=1)

"""Self-check suite: every testable invariant of the model, equalizers,
fusion rule, and large-system analysis, runnable from the CLI as a
pass/fail report.

The fusion-optimality check accepts an injectable weight function so a
negative control (deliberately corrupted weights) can demonstrate that the
suite actually detects violations.
"""

import numpy as np

from . import asymptotics
from .equalize import (
    Equalizer,
    FusedStats,
    centralized_stats,
    fuse_partials,
    lama_equalize,
    linear_equalize,
    local_preprocess,
    posterior_stats,
)
from .errors import DbpError
from .fusion import fd_equalize, optimal_fusion_weights
from .model import (
    Architecture,
    ClusterPartition,
    SystemConfig,
    make_constellation,
    sample_rayleigh_channel,
    sample_symbols,
    transmit,
)

_GRID_ES_OVER_N0_DB = (0.0, 5.0, 10.0, 20.0)
_GRID_BETA = (0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.75, 0.9)
_LINEAR_KINDS = (Equalizer.MRC, Equalizer.ZF, Equalizer.LMMSE)


def _random_system(rng, b=64, u=16, n0=0.1, c=4):
    cfg = SystemConfig(b=b, u=u, n0=n0)
    partition = ClusterPartition.uniform(b, c)
    channel = sample_rayleigh_channel(cfg, rng, partition)
    constellation = make_constellation("qpsk")
    s0 = sample_symbols(constellation, u, rng)
    y = transmit(channel, s0, n0, rng)
    return cfg, channel, constellation, s0, y


def check_partition_reassembly(rng):
    _, channel, _, _, y = _random_system(rng)
    stacked = np.vstack(channel.cluster_views)
    y_stacked = np.concatenate([y[s] for s in channel.partition.slices()])
    return np.array_equal(stacked, channel.h) and np.array_equal(y_stacked, y)


def check_seed_determinism(rng):
    cfg = SystemConfig(b=32, u=8, n0=0.1)
    const = make_constellation("qam16")
    draws = []
    for _ in range(2):
        r = np.random.default_rng(1234)
        h = sample_rayleigh_channel(cfg, r).h
        s = sample_symbols(const, cfg.u, r)
        y = transmit(sample_rayleigh_channel(cfg, np.random.default_rng(5)), s, 0.1, r)
        draws.append((h, s, y))
    return all(np.array_equal(a, b) for a, b in zip(draws[0], draws[1]))


def check_constellation_normalization(rng):
    for name in ("qpsk", "qam16", "qam64"):
        c = make_constellation(name)
        if abs(c.symbols.mean()) > 1e-12:
            return False
        if abs(np.mean(np.abs(c.symbols) ** 2) - 1.0) > 1e-12:
            return False
    return True


def check_pd_matches_centralized(rng):
    const = make_constellation("qam16")
    for c in (2, 4, 8):
        cfg = SystemConfig(b=64, u=16, n0=0.05)
        partition = ClusterPartition.uniform(cfg.b, c)
        channel = sample_rayleigh_channel(cfg, rng, partition)
        s0 = sample_symbols(const, cfg.u, rng)
        y = transmit(channel, s0, cfg.n0, rng)
        parts = [local_preprocess(h_c, y[sl])
                 for h_c, sl in zip(channel.cluster_views, partition.slices())]
        fused = fuse_partials(parts)
        central = centralized_stats(channel.h, y)
        for kind in _LINEAR_KINDS:
            a = linear_equalize(kind, fused, cfg.n0)
            b = linear_equalize(kind, central, cfg.n0)
            if np.max(np.abs(a.z - b.z)) > 1e-10:
                return False
            if np.max(np.abs(a.sigma2 - b.sigma2)) > 1e-10:
                return False
        la, _ = lama_equalize(fused, const, cfg.n0, cfg.beta, t_max=5)
        lb, _ = lama_equalize(central, const, cfg.n0, cfg.beta, t_max=5)
        if np.max(np.abs(la.z - lb.z)) > 1e-10:
            return False
    return True


def check_lmmse_approaches_zf(rng):
    _, channel, _, s0, _ = _random_system(rng, n0=0.0)
    y = channel.h @ s0
    stats = centralized_stats(channel.h, y)
    zf = linear_equalize(Equalizer.ZF, stats, 1e-12)
    lmmse = linear_equalize(Equalizer.LMMSE, stats, 1e-12)
    return np.max(np.abs(zf.z - lmmse.z)) < 1e-4


def check_posterior_variance_bounded(rng):
    const = make_constellation("qam16")
    for _ in range(200):
        z = complex(rng.normal(scale=2), rng.normal(scale=2))
        tau = float(10.0 ** rng.uniform(-6, 2))
        _, g = posterior_stats(z, tau, const)
        if not 0.0 <= g <= const.var + 1e-9:
            return False
    return True


def check_lama_noiseless_fixed_point(rng):
    const = make_constellation("qpsk")
    u = 16
    s0 = sample_symbols(const, u, rng)
    stats = FusedStats(gram=np.eye(u, dtype=complex), y_mrc=s0.copy())
    _, trace = lama_equalize(stats, const, n0=1e-12, beta=0.25, t_max=12)
    phis = [st.phi for st in trace]
    return all(b <= a + 1e-15 for a, b in zip(phis, phis[1:])) and phis[-1] < 1e-6


def check_error_variances_nonnegative(rng):
    const = make_constellation("qpsk")
    for _ in range(1000):
        b = int(rng.integers(6, 24))
        u = int(rng.integers(2, min(b, 8) + 1))
        cfg = SystemConfig(b=b, u=u, n0=float(10.0 ** rng.uniform(-3, 0)))
        channel = sample_rayleigh_channel(cfg, rng)
        s0 = sample_symbols(const, u, rng)
        y = transmit(channel, s0, cfg.n0, rng)
        stats = centralized_stats(channel.h, y)
        for kind in _LINEAR_KINDS:
            try:
                out = linear_equalize(kind, stats, cfg.n0)
            except DbpError:
                continue
            if np.any(out.sigma2 < 0):
                return False
        out, _ = lama_equalize(stats, const, cfg.n0, cfg.beta, t_max=3)
        if np.any(out.sigma2 < 0):
            return False
    return True


def check_fusion_weights_normalized(rng):
    sigma2 = 10.0 ** rng.uniform(-3, 1, size=(5, 12))
    nu = optimal_fusion_weights(sigma2).nu
    return np.all(nu >= 0) and np.max(np.abs(nu.sum(axis=0) - 1.0)) < 1e-12


def check_fusion_weights_optimal(rng, weight_fn=None):
    """No random unit-sum alternative fuses to a lower variance than the
    inverse-variance weights."""
    weight_fn = weight_fn or (lambda s2: optimal_fusion_weights(s2).nu)
    c, u = 4, 6
    for _ in range(10):
        sigma2 = 10.0 ** rng.uniform(-3, 1, size=(c, u))
        nu = weight_fn(sigma2)
        fused = np.sum(nu ** 2 * sigma2, axis=0)
        for _ in range(100):
            alt = rng.dirichlet(np.ones(c), size=u).T
            alt_fused = np.sum(alt ** 2 * sigma2, axis=0)
            if np.any(alt_fused < fused - 1e-12):
                return False
    return True


def check_mrc_fd_equals_pd(rng):
    for c in (1, 2, 4, 8):
        cfg, channel, const, s0, y = _random_system(rng, c=c)
        fd = fd_equalize(Equalizer.MRC, channel, y, cfg.n0)
        parts = [local_preprocess(h_c, y[sl])
                 for h_c, sl in zip(channel.cluster_views, channel.partition.slices())]
        pd = linear_equalize(Equalizer.MRC, fuse_partials(parts), cfg.n0)
        if np.max(np.abs(fd.z - pd.z)) > 1e-10:
            return False
    return True


def check_fused_variance_below_minimum(rng):
    cfg, channel, const, s0, y = _random_system(rng)
    fd = fd_equalize(Equalizer.ZF, channel, y, cfg.n0)
    sigma2_c = []
    for h_c, sl in zip(channel.cluster_views, channel.partition.slices()):
        out = linear_equalize(Equalizer.ZF, fuse_partials([local_preprocess(h_c, y[sl])]), cfg.n0)
        sigma2_c.append(out.sigma2)
    return np.all(fd.sigma2 <= np.min(sigma2_c, axis=0) + 1e-12)


def check_closed_form_matches_fixed_point(rng):
    for kind in _LINEAR_KINDS:
        spec = asymptotics.MseSpec(kind)
        for snr_db in _GRID_ES_OVER_N0_DB:
            g = 10.0 ** (snr_db / 10.0)
            for beta in _GRID_BETA:
                fp = asymptotics.solve_fixed_point(spec, 1.0 / g, beta)
                cf = asymptotics.sinr_pd_closed_form(kind, g, beta)
                if abs(fp.sinr - cf) > 1e-9 * cf:
                    return False
    return True


def check_fd_never_beats_pd(rng):
    const = make_constellation("qpsk")
    weights = np.full(4, 0.25)
    for kind in (*_LINEAR_KINDS, Equalizer.LAMA):
        for snr_db in (0.0, 10.0):
            g = 10.0 ** (snr_db / 10.0)
            for beta in (1e-9, 0.02, 0.05):
                pd = asymptotics.asymptotic_sinr(kind, Architecture.PD, const, g, beta)
                fd = asymptotics.asymptotic_sinr(kind, Architecture.FD, const, g,
                                                 beta, weights)
                if fd > pd * (1.0 + 1e-9):
                    return False
                if kind is Equalizer.MRC and abs(fd - pd) > 1e-9 * pd:
                    return False
                if beta == 1e-9 and abs(fd - pd) > 1e-4 * pd:
                    return False
    return True


def check_lmmse_dominates_linear(rng):
    for snr_db in _GRID_ES_OVER_N0_DB:
        g = 10.0 ** (snr_db / 10.0)
        for beta in _GRID_BETA:
            lmmse = asymptotics.sinr_pd_closed_form(Equalizer.LMMSE, g, beta)
            mrc = asymptotics.sinr_pd_closed_form(Equalizer.MRC, g, beta)
            zf = asymptotics.sinr_pd_closed_form(Equalizer.ZF, g, beta)
            if lmmse < max(mrc, zf) * (1.0 - 1e-12):
                return False
    return True


def check_zf_fd_partition_invariant(rng):
    g, beta, c = 10.0, 0.05, 4
    closed = asymptotics.sinr_fd_zf_closed(g, beta, c)
    spec = asymptotics.MseSpec(Equalizer.ZF)
    for _ in range(5):
        w = beta + rng.dirichlet(np.ones(c)) * (1.0 - c * beta)
        fd = asymptotics.sinr_fd(spec, g, beta, w)
        if abs(fd.sinr - closed) > 1e-9 * closed:
            return False
    return True


def check_lmmse_fd_jensen_bound(rng):
    g, beta, c = 10.0, 0.25, 4
    uniform = asymptotics.sinr_fd_lmmse_closed(g, beta, np.full(c, 1.0 / c))
    if abs(uniform.value - uniform.uniform_lower_bound) > 1e-12:
        return False
    for _ in range(100):
        w = rng.dirichlet(np.ones(c))
        r = asymptotics.sinr_fd_lmmse_closed(g, beta, w)
        if r.value < r.uniform_lower_bound - 1e-12:
            return False
    return True


def check_lmmse_fd_degenerate_endpoint(rng):
    g, beta = 10.0, 0.25
    r = asymptotics.sinr_fd_lmmse_closed(g, beta, np.array([1.0, 0.0, 0.0, 0.0]))
    return abs(r.value - r.pd_upper_bound) <= 1e-12


def check_se_matches_fixed_point(rng):
    const = make_constellation("qpsk")
    beta, g = 0.25, 10.0
    spec = asymptotics.MseSpec(Equalizer.LAMA, constellation=const)
    fp = asymptotics.solve_fixed_point(spec, 1.0 / g, beta)
    traj = asymptotics.se_trajectory(const, 1.0 / g, beta, t=200)
    return abs(traj[-1] - fp.sigma2) < 1e-9


ALL_CHECKS = [
    ("partition-reassembly", check_partition_reassembly),
    ("seed-determinism", check_seed_determinism),
    ("constellation-normalization", check_constellation_normalization),
    ("pd-matches-centralized", check_pd_matches_centralized),
    ("lmmse-approaches-zf", check_lmmse_approaches_zf),
    ("posterior-variance-bounded", check_posterior_variance_bounded),
    ("lama-noiseless-fixed-point", check_lama_noiseless_fixed_point),
    ("error-variances-nonnegative", check_error_variances_nonnegative),
    ("fusion-weights-normalized", check_fusion_weights_normalized),
    ("fusion-weights-optimal", check_fusion_weights_optimal),
    ("mrc-fd-equals-pd", check_mrc_fd_equals_pd),
    ("fused-variance-below-minimum", check_fused_variance_below_minimum),
    ("closed-form-matches-fixed-point", check_closed_form_matches_fixed_point),
    ("fd-never-beats-pd", check_fd_never_beats_pd),
    ("lmmse-dominates-linear", check_lmmse_dominates_linear),
    ("zf-fd-partition-invariant", check_zf_fd_partition_invariant),
    ("lmmse-fd-jensen-bound", check_lmmse_fd_jensen_bound),
    ("lmmse-fd-degenerate-endpoint", check_lmmse_fd_degenerate_endpoint),
    ("se-matches-fixed-point", check_se_matches_fixed_point),
]


def _corrupted_weights(sigma2):
    # negative control: weights from 1/sigma instead of 1/sigma^2
    inv = 1.0 / np.sqrt(np.asarray(sigma2, dtype=float))
    return inv / inv.sum(axis=0, keepdims=True)


def run_all(seed=2024, corrupt=None):
    """Run every property; returns a list of (name, passed) pairs.

    corrupt='fusion-weights' swaps in deliberately wrong fusion weights to
    demonstrate the optimality check fails (negative control).
    """
    results = []
    for name, fn in ALL_CHECKS:
        rng = np.random.default_rng(seed)
        if name == "fusion-weights-optimal" and corrupt == "fusion-weights":
            passed = fn(rng, weight_fn=_corrupted_weights)
        else:
            passed = fn(rng)
        results.append((name, bool(passed)))
    return results

"""Finite-dimensional symbol-error-rate experiments with analytic
predictions from the large-system analysis.

Every trial derives its generator from (master seed, SNR index, trial
index), so results are a pure function of the experiment configuration,
trials can run in any order or in parallel, and experiments that differ
only in the equalizer or architecture see identical channel, symbol, and
noise realizations (which sharpens ordering comparisons).
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from . import asymptotics
from .equalize import (
    Equalizer,
    centralized_stats,
    fuse_partials,
    hard_detect,
    lama_equalize,
    linear_equalize,
    local_preprocess,
    unbiased_output,
)
from .errors import ConfigError
from .fusion import fd_equalize
from .model import (
    Architecture,
    ChannelRealization,
    ClusterPartition,
    complex_gaussian,
    sample_symbols,
)

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


def ser_closed_form(constellation, sinr):
    """Symbol error rate of the square-QAM constellation over a complex AWGN
    channel at symbol SNR `sinr`:

        p = 2 (1 - 1/sqrt(M)) Q(sqrt(3 sinr / (M - 1))),   SER = 1 - (1 - p)^2

    which reduces to SER = 1 - (1 - Q(sqrt(sinr)))^2 for QPSK.
    """
    m = constellation.size
    root = int(round(math.sqrt(m)))
    if root * root != m:
        raise ConfigError(f"closed-form SER needs a square QAM set, got M={m}")
    if sinr < 0:
        raise ConfigError("SINR must be nonnegative")
    q = 0.5 * erfc(math.sqrt(1.5 * sinr / (m - 1)))  # Q(sqrt(3 sinr/(M-1)))
    p = 2.0 * (1.0 - 1.0 / root) * q
    return p * (2.0 - p)


def wilson_interval(errors, n, z=_Z95):
    """Wilson score interval for a binomial proportion.

    `errors` may be fractional: experiment code passes the per-trial mean
    error count with n = number of independent trials, since the per-UE
    indicators inside one trial share a channel realization and are not
    independent observations.
    """
    if n <= 0:
        raise ConfigError("interval needs at least one observation")
    phat = errors / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom
    lo = 0.0 if errors == 0 else max(center - half, 0.0)
    hi = 1.0 if errors == n else min(center + half, 1.0)
    return lo, hi


@dataclass(frozen=True)
class ExperimentConfig:
    """One SER experiment: fixed system and equalizer, swept over SNR."""

    b: int
    u: int
    constellation: object
    partition: ClusterPartition
    equalizer: Equalizer
    architecture: Architecture
    snr_db: tuple
    trials: int
    seed: int
    lama_t_max: int = 10
    lama_damping: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "equalizer", Equalizer(self.equalizer))
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.partition.b != self.b:
            raise ConfigError("partition does not match the antenna count")
        if not all(np.isfinite(self.snr_db)):
            raise ConfigError("SNR points must be finite")

    @property
    def beta(self):
        return self.u / self.b

    def lama_params(self):
        return {"t_max": self.lama_t_max, "damping": self.lama_damping}


def trial_rng(config, trial_index, snr_index=0):
    """Deterministic child generator for one (SNR point, trial) pair."""
    seq = np.random.SeedSequence((config.seed, snr_index, trial_index))
    return np.random.default_rng(seq)


def _equalize(config, channel, y, n0):
    kind = config.equalizer
    arch = config.architecture
    if arch is Architecture.FD:
        return fd_equalize(kind, channel, y, n0, es=config.constellation.es,
                           constellation=config.constellation,
                           lama_params=config.lama_params()
                           if kind is Equalizer.LAMA else None)
    if arch is Architecture.PD:
        stats = fuse_partials(
            [local_preprocess(h_c, y[sl]) for h_c, sl in
             zip(channel.cluster_views, channel.partition.slices())]
        )
    else:
        stats = centralized_stats(channel.h, y)
    if kind is Equalizer.LAMA:
        out, _ = lama_equalize(stats, config.constellation, n0, config.beta,
                               **config.lama_params())
        return out
    out = linear_equalize(kind, stats, n0, es=config.constellation.es)
    # detection assumes the decoupled model z = s + e; normalize out the
    # L-MMSE shrinkage (no-op for the unbiased equalizers)
    return unbiased_output(out, es=config.constellation.es)


def run_trial(config, trial_index, snr_index=0):
    """Run one transmission and return the per-UE symbol-error indicators.

    Draw order (channel, symbols, noise) is fixed so that any experiment
    sharing the master seed sees the same realization.
    """
    rng = trial_rng(config, trial_index, snr_index)
    es_over_n0 = 10.0 ** (config.snr_db[snr_index] / 10.0)
    n0 = config.constellation.es / es_over_n0
    h = complex_gaussian(rng, (config.b, config.u), 1.0 / config.b)
    channel = ChannelRealization(h, config.partition)
    s0 = sample_symbols(config.constellation, config.u, rng)
    y = channel.h @ s0 + complex_gaussian(rng, config.b, n0)
    out = _equalize(config, channel, y, n0)
    s_hat = hard_detect(out, config.constellation)
    return s_hat != s0


def _count_errors(config, snr_index, start, stop):
    return int(sum(int(run_trial(config, t, snr_index).sum())
                   for t in range(start, stop)))


@dataclass
class SnrPointResult:
    snr_db: float
    trials: int
    n_symbols: int
    errors: int
    ser: float
    ci_low: float
    ci_high: float
    ser_predicted: float


@dataclass
class SerResult:
    config: ExperimentConfig
    points: list = field(default_factory=list)


def predicted_sinr(config, es_over_n0):
    """Large-system SINR for the experiment's (equalizer, architecture)."""
    return asymptotics.asymptotic_sinr(
        config.equalizer, config.architecture, config.constellation,
        es_over_n0, config.beta, weights=config.partition.weights,
    )


def run_experiment(config, workers=1):
    """Aggregate run_trial over trials x SNR points and attach the analytic
    prediction mapped through the closed-form SER."""
    result = SerResult(config=config)
    n_symbols = config.trials * config.u
    for snr_index, snr_db in enumerate(config.snr_db):
        es_over_n0 = 10.0 ** (snr_db / 10.0)
        if workers and workers > 1:
            bounds = np.linspace(0, config.trials, workers + 1).astype(int)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_count_errors, config, snr_index, int(a), int(b))
                    for a, b in zip(bounds[:-1], bounds[1:]) if b > a
                ]
                errors = sum(f.result() for f in futures)
        else:
            errors = _count_errors(config, snr_index, 0, config.trials)
        ser = errors / n_symbols
        # interval over independent channel realizations (per-trial UE
        # indicators are correlated through the shared channel)
        ci_low, ci_high = wilson_interval(errors / config.u, config.trials)
        ser_pred = ser_closed_form(config.constellation,
                                   predicted_sinr(config, es_over_n0))
        result.points.append(SnrPointResult(
            snr_db=snr_db, trials=config.trials, n_symbols=n_symbols,
            errors=errors, ser=ser, ci_low=ci_low, ci_high=ci_high,
            ser_predicted=ser_pred,
        ))
    return result

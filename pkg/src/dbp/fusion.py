"""Fully decentralized pipeline: per-cluster equalization on the local
receive vector / channel block, and SINR-optimal fusion of the local
estimates via inverse-variance weights.
"""

from dataclasses import dataclass

import numpy as np

from .equalize import (
    Equalizer,
    EqualizerOutput,
    FusedStats,
    lama_equalize,
    linear_equalize,
    local_preprocess,
    unbiased_output,
)
from .errors import ConfigError, DimensionMismatchError

# floor applied to variances before inversion so noiseless runs cannot
# overflow the weight computation
_VARIANCE_FLOOR = 1e-15


@dataclass
class ClusterOutput:
    """Local estimate and per-UE error variances of one cluster."""

    cluster_id: int
    z: np.ndarray
    sigma2: np.ndarray
    equalizer: Equalizer
    # per-UE quantities proportional to the inverse variance of the local
    # matched-filter combination; used instead of sigma2 when fusing MRC so
    # the fused output reproduces the complete diag(G)^{-1} combination
    mrc_gains: np.ndarray = None
    # own-signal coefficient of a biased local estimator (L-MMSE); fusion
    # normalizes it out so the combined estimate follows z = s + e
    signal_gain: np.ndarray = None


def cluster_equalize(kind, h_c, y_c, n0, es=1.0, total_antennas=None,
                     constellation=None, lama_params=None, cluster_id=0):
    """Run one cluster's equalizer on its local statistics.

    The local system is rescaled by the cluster's antenna fraction
    w_c = B_c / total_antennas (Gram and MRC vector by 1/w_c, noise by
    1/w_c) so that the effective channel has unit-variance columns.  Linear
    equalizers are exactly invariant under this rescaling; the
    message-passing equalizer requires it for its posterior variance
    tracking to be calibrated, and runs with the local ratio
    beta_c = U / B_c.  With total_antennas omitted (or C = 1) the rescaling
    is the identity and the output equals the centralized one.
    """
    kind = Equalizer(kind)
    h_c = np.asarray(h_c, dtype=np.complex128)
    b_c, u = h_c.shape
    stats = local_preprocess(h_c, y_c)
    w_c = b_c / total_antennas if total_antennas else 1.0

    if kind is Equalizer.LAMA:
        if constellation is None:
            raise ConfigError("message-passing equalization needs a constellation")
        params = dict(lama_params or {})
        local = FusedStats(gram=stats.gram / w_c, y_mrc=stats.y_mrc / w_c)
        out, _ = lama_equalize(local, constellation, n0=n0 / w_c, beta=u / b_c,
                               **params)
    else:
        out = linear_equalize(kind, stats, n0=n0, es=es)

    gains = np.real(np.diag(stats.gram)) if kind is Equalizer.MRC else None
    return ClusterOutput(cluster_id=cluster_id, z=out.z, sigma2=out.sigma2,
                         equalizer=kind, mrc_gains=gains,
                         signal_gain=out.signal_gain)


def _unbias_cluster(out, es):
    if out.signal_gain is None:
        return out
    fixed = unbiased_output(
        EqualizerOutput(z=out.z, sigma2=out.sigma2, equalizer=out.equalizer,
                        signal_gain=out.signal_gain), es)
    return ClusterOutput(cluster_id=out.cluster_id, z=fixed.z,
                         sigma2=fixed.sigma2, equalizer=out.equalizer,
                         mrc_gains=out.mrc_gains)


@dataclass
class FusionWeights:
    """C x U matrix of per-UE fusion weights; each column sums to one."""

    nu: np.ndarray


def optimal_fusion_weights(sigma2):
    """SINR-maximizing fusion weights nu_{c,u} proportional to the inverse
    of the per-cluster error variances, normalized per UE."""
    sigma2 = np.asarray(sigma2, dtype=float)
    if sigma2.ndim != 2:
        raise DimensionMismatchError("expected a C x U variance matrix")
    if np.any(sigma2 <= 0):
        raise ConfigError("fusion weights need strictly positive variances")
    inv = 1.0 / np.maximum(sigma2, _VARIANCE_FLOOR)
    return FusionWeights(nu=inv / inv.sum(axis=0, keepdims=True))


def fuse_estimates(outputs, weights):
    """Weighted per-UE combination of the local estimates; the fused
    variance is the harmonic combination of the local ones."""
    outputs = list(outputs)
    if not outputs:
        raise ConfigError("cannot fuse an empty list of cluster outputs")
    u = outputs[0].z.shape[0]
    nu = weights.nu
    if nu.shape != (len(outputs), u):
        raise DimensionMismatchError(
            f"weight matrix {nu.shape} does not match {len(outputs)} x {u}"
        )
    z_local = np.stack([o.z for o in outputs])
    sigma2_local = np.stack([o.sigma2 for o in outputs])
    z = np.sum(nu * z_local, axis=0)
    sigma2 = 1.0 / np.sum(1.0 / np.maximum(sigma2_local, _VARIANCE_FLOOR), axis=0)
    return EqualizerOutput(z=z, sigma2=sigma2, equalizer=outputs[0].equalizer)


def fd_equalize(kind, channel, y, n0, es=1.0, constellation=None,
                lama_params=None):
    """Full FD pipeline over a partitioned channel: equalize every cluster
    on its local block, then fuse.

    For MRC the fusion weights are proportional to the local Gram diagonals
    (the inverse variance of the noise-limited matched filter), which makes
    the fused output identical to the complete-statistics MRC combination
    for any partition; the other equalizers use inverse-variance weights
    from their local error variances.
    """
    kind = Equalizer(kind)
    views = channel.cluster_views
    slices = channel.partition.slices()
    outputs = [
        cluster_equalize(kind, h_c, y[sl], n0, es=es, total_antennas=channel.b,
                         constellation=constellation, lama_params=lama_params,
                         cluster_id=i)
        for i, (h_c, sl) in enumerate(zip(views, slices))
    ]
    # fuse in the unbiased domain so every local estimate follows z = s + e
    outputs = [_unbias_cluster(o, es) for o in outputs]
    if kind is Equalizer.MRC:
        gains = np.stack([o.mrc_gains for o in outputs])
        weights = FusionWeights(nu=gains / gains.sum(axis=0, keepdims=True))
    else:
        weights = optimal_fusion_weights(np.stack([o.sigma2 for o in outputs]))
    return fuse_estimates(outputs, weights)

"""System model: constellations, Rayleigh channels, antenna partitioning,
transmission, and feedforward message-volume accounting.

Conventions: constellations are stored with unit average symbol energy
(Es = 1), channel entries are i.i.d. CN(0, 1/B), and all sampling is a
pure function of the supplied generator, so experiments are reproducible
from a seed alone.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DimensionMismatchError

_MIB = 1024.0 * 1024.0


class Architecture(str, Enum):
    """Where equalization happens: in one unit on the full receive vector,
    centrally on fused Gram/MRC statistics (partially decentralized), or
    per cluster with estimate fusion (fully decentralized)."""

    CENTRALIZED = "centralized"
    PD = "pd"
    FD = "fd"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Constellation:
    """Finite symbol set with uniform prior.

    symbols    : complex points, zero mean, normalized to Es = 1
    name       : one of QPSK / QAM16 / QAM64
    es         : average symbol energy (mean |a|^2)
    pam_levels : per-dimension amplitude levels when the set is a square
                 product of a real PAM alphabet (lets quadratures factorize)
    """

    name: str
    symbols: np.ndarray
    es: float
    pam_levels: np.ndarray = None

    def __post_init__(self):
        syms = np.asarray(self.symbols, dtype=np.complex128)
        object.__setattr__(self, "symbols", syms)
        if syms.ndim != 1 or syms.size not in (4, 16, 64):
            raise ConfigError(f"unsupported constellation size {syms.size}")
        if abs(syms.mean()) > 1e-12:
            raise ConfigError("constellation is not zero mean")
        if abs(np.mean(np.abs(syms) ** 2) - self.es) > 1e-12:
            raise ConfigError("stored Es does not match the symbol set")
        if self.pam_levels is not None:
            levels = np.asarray(self.pam_levels, dtype=float)
            object.__setattr__(self, "pam_levels", levels)
            grid = (levels[:, None] + 1j * levels[None, :]).ravel()
            if not np.allclose(np.sort_complex(grid), np.sort_complex(syms),
                               atol=1e-12):
                raise ConfigError("pam_levels do not generate the symbol set")

    @property
    def size(self):
        return self.symbols.size

    @property
    def bits_per_symbol(self):
        return int(np.log2(self.size))

    @property
    def var(self):
        # Var_S[S] = E|S|^2 - |E S|^2 = Es for zero-mean sets.
        return self.es


def _square_qam(levels_per_dim):
    amps = np.arange(-(levels_per_dim - 1), levels_per_dim, 2, dtype=float)
    re, im = np.meshgrid(amps, amps, indexing="ij")
    points = (re + 1j * im).ravel()
    norm = np.sqrt(np.mean(np.abs(points) ** 2))
    return points / norm, amps / norm


def make_constellation(name):
    """Build a unit-energy QPSK/16-QAM/64-QAM constellation by name."""
    key = name.strip().upper().replace("-", "")
    sizes = {"QPSK": 2, "4QAM": 2, "QAM4": 2,
             "QAM16": 4, "16QAM": 4,
             "QAM64": 8, "64QAM": 8}
    if key not in sizes:
        raise ConfigError(f"unknown constellation {name!r}")
    canonical = {2: "QPSK", 4: "QAM16", 8: "QAM64"}[sizes[key]]
    symbols, levels = _square_qam(sizes[key])
    return Constellation(canonical, symbols, 1.0, pam_levels=levels)


@dataclass(frozen=True)
class SystemConfig:
    """Uplink dimensions and noise level.

    b  : BS antenna count
    u  : UE count
    n0 : complex noise variance per receive entry (linear power)
    es : average transmit symbol energy
    """

    b: int
    u: int
    n0: float
    es: float = 1.0

    def __post_init__(self):
        if self.b < 1 or self.u < 1:
            raise ConfigError("antenna and UE counts must be >= 1")
        if self.n0 < 0:
            raise ConfigError("noise variance must be nonnegative")

    @property
    def beta(self):
        return self.u / self.b


@dataclass(frozen=True)
class ClusterPartition:
    """Partition of the B BS antennas into C clusters.

    weights are the antenna fractions w_c; counts are the per-cluster
    antenna numbers B_c = w_c * B.  Non-integer w_c * B is rejected
    rather than rounded so the antenna accounting stays exact.
    """

    b: int
    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if any(c < 1 for c in counts):
            raise ConfigError("every cluster needs at least one antenna")
        if sum(counts) != self.b:
            raise ConfigError(f"cluster counts {counts} do not sum to B={self.b}")

    @classmethod
    def from_weights(cls, b, weights):
        w = np.asarray(weights, dtype=float)
        if abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError("cluster weights must sum to 1")
        counts = w * b
        rounded = np.rint(counts)
        if np.max(np.abs(counts - rounded)) > 1e-9:
            raise ConfigError(f"weights {weights} give non-integer antenna counts for B={b}")
        return cls(b, tuple(int(c) for c in rounded))

    @classmethod
    def uniform(cls, b, c):
        if b % c != 0:
            raise ConfigError(f"B={b} is not divisible into C={c} equal clusters")
        return cls(b, (b // c,) * c)

    @property
    def c(self):
        return len(self.counts)

    @property
    def weights(self):
        return np.asarray(self.counts, dtype=float) / self.b

    def slices(self):
        """Row slices of the stacked receive vector / channel matrix per cluster."""
        edges = np.concatenate(([0], np.cumsum(self.counts)))
        return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


@dataclass
class ChannelRealization:
    """A B x U channel matrix together with its per-cluster row blocks."""

    h: np.ndarray
    partition: ClusterPartition = None

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=np.complex128)
        if self.h.ndim != 2:
            raise DimensionMismatchError("channel matrix must be 2-D")
        if self.partition is None:
            self.partition = ClusterPartition(self.h.shape[0], (self.h.shape[0],))
        if self.partition.b != self.h.shape[0]:
            raise DimensionMismatchError("partition does not match the antenna count")

    @property
    def b(self):
        return self.h.shape[0]

    @property
    def u(self):
        return self.h.shape[1]

    @property
    def cluster_views(self):
        return [self.h[s] for s in self.partition.slices()]


def complex_gaussian(rng, shape, variance):
    """i.i.d. circularly symmetric CN(0, variance) samples (two real Gaussians
    with variance/2 each)."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_rayleigh_channel(cfg, rng, partition=None):
    """Draw a Rayleigh-fading channel with per-entry variance 1/B."""
    h = complex_gaussian(rng, (cfg.b, cfg.u), 1.0 / cfg.b)
    return ChannelRealization(h, partition)


def sample_symbols(constellation, u, rng):
    """u i.i.d. uniform draws from the constellation."""
    idx = rng.integers(0, constellation.size, size=u)
    return constellation.symbols[idx]


def transmit(channel, s0, n0, rng):
    """Pass s0 through the channel and add CN(0, n0) noise per receive entry."""
    s0 = np.asarray(s0, dtype=np.complex128)
    if s0.shape != (channel.u,):
        raise DimensionMismatchError(
            f"symbol vector has shape {s0.shape}, expected ({channel.u},)"
        )
    y = channel.h @ s0
    if n0 > 0:
        y = y + complex_gaussian(rng, channel.b, n0)
    return y


@dataclass(frozen=True)
class MessageVolumes:
    """Feedforward message sizes in bytes (and MiB) for one subframe."""

    pd_bytes: int
    fd_bytes: int
    cs_bytes: int  # consensus sharing, per iteration

    @property
    def pd_mib(self):
        return self.pd_bytes / _MIB

    @property
    def fd_mib(self):
        return self.fd_bytes / _MIB

    @property
    def cs_mib(self):
        return self.cs_bytes / _MIB


def message_volume(u, n_sc, n_sym, c, bytes_per_entry=8):
    """Message volumes of the PD / FD feedforward fusion and of one iteration
    of consensus sharing.

    Entry counts: PD moves the per-cluster Gram matrices (U^2 entries per
    subcarrier, reused across OFDM symbols) plus the per-cluster MRC vectors
    (U entries per subcarrier per symbol); FD moves only the local estimate
    vectors; consensus sharing moves twice the FD volume per iteration
    (gather + broadcast).  bytes_per_entry defaults to 8 (two 4-byte floats
    per complex entry).
    """
    for name, v in (("u", u), ("n_sc", n_sc), ("n_sym", n_sym), ("c", c)):
        if int(v) != v or v < 1:
            raise ConfigError(f"{name} must be a positive integer, got {v}")
    pd_entries = u * u * n_sc * c + u * n_sc * n_sym * c
    fd_entries = u * n_sc * n_sym * c
    return MessageVolumes(
        pd_bytes=pd_entries * bytes_per_entry,
        fd_bytes=fd_entries * bytes_per_entry,
        cs_bytes=2 * fd_entries * bytes_per_entry,
    )

"""Decentralized feedforward equalization for the massive MU-MIMO uplink.

Library layout:

- :mod:`dbp.model`       system model, constellations, partitioning, volumes
- :mod:`dbp.equalize`    preprocessing, fusion of partial statistics, and the
                         MRC/ZF/L-MMSE/message-passing equalizers
- :mod:`dbp.fusion`      per-cluster equalization and optimal estimate fusion
- :mod:`dbp.asymptotics` large-system SINR analysis and rate searches
- :mod:`dbp.montecarlo`  SER experiments against the analytic predictions
- :mod:`dbp.cli`         the `dbp` command-line front end
- :mod:`dbp.kernels`     compiled/pure kernel dispatch for the hot paths
"""

from .asymptotics import (
    FixedPointResult,
    MseSpec,
    awgn_mutual_information,
    min_antenna_ratio,
    psi_mse,
    se_trajectory,
    sinr_fd,
    sinr_fd_lmmse_closed,
    sinr_fd_zf_closed,
    sinr_pd_closed_form,
    solve_fixed_point,
)
from .equalize import (
    Equalizer,
    EqualizerOutput,
    FusedStats,
    LamaState,
    PartialStats,
    centralized_stats,
    fuse_partials,
    hard_detect,
    lama_equalize,
    linear_equalize,
    local_preprocess,
    posterior_stats,
    unbiased_output,
)
from .errors import (
    ConfigError,
    DbpError,
    DimensionMismatchError,
    DivergenceError,
    InfeasibleError,
    InvalidRegimeError,
    NegativeVarianceError,
    NonConvergenceError,
    SingularGramError,
)
from .fusion import (
    ClusterOutput,
    FusionWeights,
    cluster_equalize,
    fd_equalize,
    fuse_estimates,
    optimal_fusion_weights,
)
from .model import (
    Architecture,
    ChannelRealization,
    ClusterPartition,
    Constellation,
    MessageVolumes,
    SystemConfig,
    complex_gaussian,
    make_constellation,
    message_volume,
    sample_rayleigh_channel,
    sample_symbols,
    transmit,
)
from .montecarlo import (
    ExperimentConfig,
    SerResult,
    SnrPointResult,
    run_experiment,
    run_trial,
    ser_closed_form,
    wilson_interval,
)

__version__ = "0.1.0"

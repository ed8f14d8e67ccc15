"""Preprocessing, partial-result fusion, and the equalizers that operate on
the fused MRC vector / Gram matrix (the partially decentralized path).

All equalizers return the estimate together with the exact finite-dimensional
per-UE error-variance vector; large-system limits live in
:mod:`dbp.asymptotics`.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from . import kernels
from .errors import (
    ConfigError,
    DimensionMismatchError,
    DivergenceError,
    NegativeVarianceError,
    SingularGramError,
)

_VAR_TOL = 1e-9  # variances below -_VAR_TOL signal a numerical fault


class Equalizer(str, Enum):
    MRC = "mrc"
    ZF = "zf"
    LMMSE = "lmmse"
    LAMA = "lama"

    def __str__(self):
        return self.value


@dataclass
class PartialStats:
    """Per-cluster Gram contribution G_c = H_c^H H_c and MRC contribution
    y_c^mrc = H_c^H y_c."""

    gram: np.ndarray
    y_mrc: np.ndarray


@dataclass
class FusedStats:
    """Sum of the per-cluster partial statistics: the complete Gram matrix
    and MRC vector."""

    gram: np.ndarray
    y_mrc: np.ndarray

    @property
    def u(self):
        return self.y_mrc.shape[0]


@dataclass
class EqualizerOutput:
    """Estimate z with its per-UE error-variance vector.

    signal_gain holds the per-UE own-signal coefficient when the estimator
    is biased (L-MMSE shrinks each symbol by [(G + rho I)^{-1} G]_uu < 1);
    None means the estimate is already unbiased (z = s + e).
    """

    z: np.ndarray
    sigma2: np.ndarray
    equalizer: Equalizer
    signal_gain: np.ndarray = None


@dataclass
class LamaState:
    """Per-iteration snapshot of the message-passing recursion."""

    t: int
    z: np.ndarray
    s: np.ndarray
    v: np.ndarray
    phi: float


def local_preprocess(h_c, y_c):
    """Gram and MRC contributions of one antenna cluster."""
    h_c = np.asarray(h_c, dtype=np.complex128)
    y_c = np.asarray(y_c, dtype=np.complex128)
    if h_c.ndim != 2 or y_c.shape != (h_c.shape[0],):
        raise DimensionMismatchError(
            f"incompatible shapes H_c {h_c.shape}, y_c {y_c.shape}"
        )
    return PartialStats(gram=h_c.conj().T @ h_c, y_mrc=h_c.conj().T @ y_c)


def fuse_partials(parts):
    """Feedforward adder tree: element-wise sums of the partial statistics."""
    parts = list(parts)
    if not parts:
        raise ConfigError("cannot fuse an empty list of partial statistics")
    u = parts[0].y_mrc.shape[0]
    for p in parts:
        if p.y_mrc.shape != (u,) or p.gram.shape != (u, u):
            raise DimensionMismatchError("partial statistics disagree on U")
    gram = np.sum([p.gram for p in parts], axis=0)
    y_mrc = np.sum([p.y_mrc for p in parts], axis=0)
    return FusedStats(gram=gram, y_mrc=y_mrc)


def centralized_stats(h, y):
    """Fused statistics of the unpartitioned system (C = 1)."""
    return fuse_partials([local_preprocess(h, y)])


def _check_sigma2(sigma2, kind):
    if np.min(sigma2) < -_VAR_TOL:
        raise NegativeVarianceError(
            f"{kind} produced negative error variance {np.min(sigma2):.3e}"
        )
    return np.maximum(sigma2, 0.0)


def _cholesky(matrix, kind):
    try:
        return scipy.linalg.cholesky(matrix, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SingularGramError(f"{kind}: Gram matrix is not positive definite") from exc


def linear_equalize(kind, fused, n0, es=1.0):
    """MRC, ZF, or L-MMSE equalization on fused statistics.

    The error-variance vectors are the exact finite-dimensional expressions
    (noise plus residual interference); ZF and L-MMSE invert through a
    Cholesky factorization of the Hermitian Gram so rank deficiency surfaces
    as :class:`SingularGramError`.
    """
    kind = Equalizer(kind)
    g = np.asarray(fused.gram, dtype=np.complex128)
    y_mrc = np.asarray(fused.y_mrc, dtype=np.complex128)
    u = y_mrc.shape[0]
    eye = np.eye(u)

    if kind is Equalizer.MRC:
        d = np.real(np.diag(g)).copy()
        if np.any(d <= 0.0):
            raise SingularGramError("MRC: Gram diagonal has a nonpositive entry")
        z = y_mrc / d
        dg = g / d[:, None]
        noise = n0 / d  # diag(D G D^H) N0 with D = diag(G)^{-1}
        interference = es * np.sum(np.abs(dg - eye) ** 2, axis=1)
        sigma2 = noise + interference
    elif kind is Equalizer.ZF:
        chol = _cholesky(g, "ZF")
        z = scipy.linalg.cho_solve((chol, True), y_mrc)
        linv = scipy.linalg.solve_triangular(chol, eye, lower=True)
        diag_ginv = np.sum(np.abs(linv) ** 2, axis=0)  # diag(G^{-1}), >= 0
        sigma2 = n0 * diag_ginv
    elif kind is Equalizer.LMMSE:
        if es <= 0:
            raise ConfigError("L-MMSE requires Es > 0")
        rho = n0 / es
        chol = _cholesky(g + rho * eye, "L-MMSE")
        inv = scipy.linalg.cho_solve((chol, True), eye)
        z = inv @ y_mrc
        ag = inv @ g
        noise = n0 * np.real(np.einsum("ij,ij->i", ag, inv.conj()))
        interference = es * np.sum(np.abs(ag - eye) ** 2, axis=1)
        sigma2 = noise + interference
        gain = np.real(np.diag(ag))
        return EqualizerOutput(z=z, sigma2=_check_sigma2(sigma2, kind.value),
                               equalizer=kind, signal_gain=gain)
    else:
        raise ConfigError("use lama_equalize for the message-passing equalizer")

    return EqualizerOutput(z=z, sigma2=_check_sigma2(sigma2, kind.value), equalizer=kind)


def unbiased_output(output, es=1.0):
    """Gain-normalized form of an equalizer output: z_u / c_u estimates s_u
    without bias, with error variance (sigma2_u - (1 - c_u)^2 Es) / c_u^2.

    The decoupled-channel model z = s + e (which detection, fusion, and the
    SINR analysis all assume) describes this form; outputs that are already
    unbiased pass through unchanged.
    """
    c = output.signal_gain
    if c is None:
        return output
    if np.any(c <= 0):
        raise SingularGramError("nonpositive signal gain; cannot unbias")
    sigma2 = (output.sigma2 - (1.0 - c) ** 2 * es) / c ** 2
    return EqualizerOutput(z=output.z / c,
                           sigma2=_check_sigma2(sigma2, output.equalizer.value),
                           equalizer=output.equalizer)


def posterior_stats(z, tau, constellation):
    """Posterior mean and variance of one symbol under a CN(z, tau)
    observation with uniform prior over the constellation."""
    if tau <= 0:
        raise ConfigError(f"posterior variance requires tau > 0, got {tau}")
    f, g = kernels.posterior_mean_var(np.array([z], dtype=np.complex128),
                                      tau, constellation.symbols)
    return complex(f[0]), float(g[0])


def lama_equalize(fused, constellation, n0, beta, t_max=10, damping=1.0):
    """Message-passing equalization on fused statistics.

    Runs t_max iterations of the Gram-domain recursion

        z^t     = y_mrc + (I - G) s^t + v^t
        s^{t+1} = F(z^t, N0 + beta phi^t)
        phi^{t+1} = < G(z^t, N0 + beta phi^t) >
        v^{t+1} = beta phi^{t+1} / (N0 + beta phi^t) * (z^t - s^t)

    initialized at s^1 = E[S], phi^1 = Var[S], v^1 = 0.  beta is passed
    explicitly so decentralized callers can supply the per-cluster ratio.
    With damping < 1 the mean update is relaxed:
    s^{t+1} <- damping * F(...) + (1 - damping) * s^t.

    Returns the final estimate (error variance N0 + beta phi^{t_max}) plus
    the per-iteration trace.
    """
    if t_max < 1:
        raise ConfigError("t_max must be >= 1")
    if not 0.0 < damping <= 1.0:
        raise ConfigError("damping must lie in (0, 1]")
    g = np.asarray(fused.gram, dtype=np.complex128)
    y_mrc = np.asarray(fused.y_mrc, dtype=np.complex128)
    u = y_mrc.shape[0]
    i_minus_g = np.eye(u) - g

    symbols = constellation.symbols
    s = np.full(u, symbols.mean(), dtype=np.complex128)
    v = np.zeros(u, dtype=np.complex128)
    phi = constellation.var

    trace = []
    z = None
    tau = n0 + beta * phi
    for t in range(1, t_max + 1):
        tau = n0 + beta * phi
        z = y_mrc + i_minus_g @ s + v
        # magnitudes beyond ~1e150 overflow |z - a|^2 inside the denoiser
        if not (np.all(np.isfinite(z)) and np.isfinite(tau)
                and np.max(np.abs(z)) < 1e150):
            raise DivergenceError(f"non-finite iterate at t={t}", iteration=t)
        trace.append(LamaState(t=t, z=z.copy(), s=s.copy(), v=v.copy(), phi=phi))
        f, gv = kernels.posterior_mean_var(z, max(tau, 1e-300), symbols)
        phi_next = float(np.mean(gv))
        v = (beta * phi_next) / tau * (z - s)
        s = damping * f + (1.0 - damping) * s
        phi = phi_next

    sigma2 = np.full(u, tau)
    output = EqualizerOutput(z=z, sigma2=sigma2, equalizer=Equalizer.LAMA)
    return output, trace


def hard_detect(z, constellation):
    """Nearest-symbol decision per UE; ties break to the lowest symbol index."""
    if isinstance(z, EqualizerOutput):
        z = z.z
    z = np.asarray(z, dtype=np.complex128)
    idx = np.argmin(np.abs(z[:, None] - constellation.symbols[None, :]) ** 2, axis=1)
    return constellation.symbols[idx]

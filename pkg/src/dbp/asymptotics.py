"""Large-system SINR engine: per-equalizer MSE functions, decoupled
fixed-point solutions, closed-form SINR expressions for both feedforward
architectures, state evolution of the message-passing equalizer, and
achievable-rate searches.

All SINR and Es/N0 quantities are linear (not dB) unless a name says
otherwise.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .equalize import Equalizer
from .errors import (
    ConfigError,
    InfeasibleError,
    InvalidRegimeError,
    NonConvergenceError,
)
from .model import Architecture

_ZF_MARGIN = 1e-9  # ZF validity enforced strictly: beta/w < 1 - margin


@dataclass(frozen=True)
class MseSpec:
    """Which MSE function to use inside the fixed-point equation.

    order=None picks the per-path quadrature default: the factorized 1-D
    rule for square QAM sets, the 2-D rule otherwise.
    """

    kind: Equalizer
    es: float = 1.0
    constellation: object = None
    order: int = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Equalizer(self.kind))
        if self.kind is Equalizer.LAMA and self.constellation is None:
            raise ConfigError("the message-passing MSE function needs a constellation")


def psi_mse(spec, sigma2):
    """MSE of the equalizer's decoupled denoiser at noise variance sigma2.

    MRC is the constant Es, ZF the identity, L-MMSE the scalar Wiener MSE.
    The message-passing kind evaluates the posterior-mean MSE
    E|F(S + sigma Z, sigma2) - S|^2 by exact symbol summation and
    Gauss-Hermite quadrature; square QAM sets use the exact per-dimension
    factorization (twice the PAM MSE), which is both cheaper and accurate
    to below 1e-12, while general sets fall back to the 2-D rule.
    """
    if sigma2 <= 0:
        raise ConfigError(f"MSE function requires sigma2 > 0, got {sigma2}")
    kind = spec.kind
    if kind is Equalizer.MRC:
        return spec.es
    if kind is Equalizer.ZF:
        return sigma2
    if kind is Equalizer.LMMSE:
        return spec.es * sigma2 / (spec.es + sigma2)
    const = spec.constellation
    if const.pam_levels is not None:
        order = spec.order or kernels.DEFAULT_PAM_ORDER
        return kernels.lama_mse_pam(sigma2, const.pam_levels, order)
    order = spec.order or kernels.DEFAULT_QUAD_ORDER
    return kernels.lama_mse(sigma2, const.symbols, order)


@dataclass
class FixedPointResult:
    sigma2: float
    sinr: float
    iterations: int
    converged: bool


def solve_fixed_point(spec, n0, beta, w=1.0, tol=1e-12, max_iter=100_000):
    """Largest solution of the decoupled-variance fixed point
    w * sigma2 = N0 + beta * Psi(sigma2).

    Iterates sigma2 <- (N0 + beta Psi(sigma2)) / w from the state-evolution
    initialization (N0 + beta Es) / w.  Because Psi is nondecreasing, the
    iteration decreases monotonically onto the largest fixed point, which is
    the branch selected throughout the analysis.
    """
    if n0 <= 0:
        raise ConfigError("fixed point requires N0 > 0")
    if w <= 0:
        raise ConfigError("cluster fraction w must be positive")
    if spec.kind is Equalizer.ZF and beta / w >= 1.0 - _ZF_MARGIN:
        raise InvalidRegimeError(
            f"ZF fixed point needs beta/w < 1, got beta={beta}, w={w}"
        )
    sigma2 = (n0 + beta * spec.es) / w
    for iteration in range(1, max_iter + 1):
        new = (n0 + beta * psi_mse(spec, sigma2)) / w
        if abs(new - sigma2) <= tol * sigma2:
            return FixedPointResult(sigma2=new, sinr=spec.es / new,
                                    iterations=iteration, converged=True)
        sigma2 = new
    raise NonConvergenceError(
        f"fixed point did not converge within {max_iter} iterations "
        f"(kind={spec.kind}, beta={beta}, w={w})"
    )


def fixed_point_multiplicity(spec, n0, beta, w=1.0, rel_tol=1e-6):
    """Detect whether the fixed-point equation has more than one solution.

    Runs the iteration a second time from just above the noise floor; in a
    multi-solution regime (overloaded message-passing systems at moderate
    SNR) that orbit settles on a smaller fixed point than the largest one
    that `solve_fixed_point` reports.  Returns (multiple, largest, smallest).
    """
    largest = solve_fixed_point(spec, n0, beta, w=w).sigma2
    sigma2 = n0 / w * (1.0 + 1e-9)
    for _ in range(100_000):
        new = (n0 + beta * psi_mse(spec, sigma2)) / w
        if abs(new - sigma2) <= 1e-12 * sigma2:
            sigma2 = new
            break
        sigma2 = new
    multiple = abs(largest - sigma2) > rel_tol * largest
    return multiple, largest, min(sigma2, largest)


def sinr_pd_closed_form(kind, es_over_n0, beta):
    """Closed-form post-equalization SINR of the PD (= centralized)
    architecture for the three linear equalizers."""
    kind = Equalizer(kind)
    g = es_over_n0
    if kind is Equalizer.MRC:
        return g / (1.0 + beta * g)
    if kind is Equalizer.ZF:
        if beta >= 1.0 - _ZF_MARGIN:
            raise InvalidRegimeError(f"ZF closed form needs beta < 1, got {beta}")
        return g * (1.0 - beta)
    if kind is Equalizer.LMMSE:
        return _lmmse_cluster_sinr(g, beta, 1.0)
    raise ConfigError("no closed form for the message-passing equalizer")


def _lmmse_cluster_sinr(g, beta, w):
    # per-cluster L-MMSE SINR for a cluster holding fraction w of the antennas
    x = 1.0 - g * (w - beta)
    return 0.5 * (math.sqrt(x * x + 4.0 * g * w) - x)


@dataclass
class FdSinrResult:
    per_cluster_sinr: np.ndarray
    sinr: float
    sigma2: float


def sinr_fd(spec, es_over_n0, beta, weights, tol=1e-12):
    """Fully decentralized SINR from per-cluster fixed points.

    Solves w_c sigma_c^2 = N0 + beta Psi(sigma_c^2) per cluster; the fused
    SINR is the sum of the per-cluster SINRs and the fused variance their
    harmonic combination.  The identity
    sigma_FD^2 = N0 + beta sum_c nu_c Psi(sigma_c^2) is verified as an
    internal consistency check.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or abs(weights.sum() - 1.0) > 1e-9 or np.any(weights < 0):
        raise ConfigError(f"invalid cluster weights {weights}")
    n0 = spec.es / es_over_n0
    if spec.kind is Equalizer.ZF:
        active = weights[weights > 0]
        if np.any(beta / active >= 1.0 - _ZF_MARGIN):
            raise InvalidRegimeError(
                "ZF in the FD architecture needs w_c > beta for every cluster"
            )
    per_sinr = np.zeros(weights.size)
    sigma2_c = np.full(weights.size, np.inf)
    for i, w in enumerate(weights):
        if w == 0.0:
            continue  # empty cluster contributes no information
        fp = solve_fixed_point(spec, n0, beta, w=w, tol=tol)
        per_sinr[i] = fp.sinr
        sigma2_c[i] = fp.sigma2
    total = float(per_sinr.sum())
    if total <= 0:
        raise InvalidRegimeError("fused SINR is zero; no cluster carries information")
    sigma2_fd = spec.es / total

    inv = 1.0 / sigma2_c[np.isfinite(sigma2_c)]
    nu = inv / inv.sum()
    psi_terms = [psi_mse(spec, s2) for s2 in sigma2_c[np.isfinite(sigma2_c)]]
    recomputed = n0 + beta * float(np.dot(nu, psi_terms))
    if abs(recomputed - sigma2_fd) > 1e-9 * max(sigma2_fd, 1e-300):
        raise NonConvergenceError(
            f"fused-variance identity violated: {recomputed} vs {sigma2_fd}"
        )
    return FdSinrResult(per_cluster_sinr=per_sinr, sinr=total, sigma2=sigma2_fd)


def sinr_fd_zf_closed(es_over_n0, beta, c):
    """Post-fusion ZF SINR (Es/N0)(1 - C beta); independent of the antenna
    allocation as long as every cluster satisfies w_c > beta."""
    if c * beta >= 1.0 - _ZF_MARGIN:
        raise InvalidRegimeError(f"ZF-FD closed form needs C*beta < 1, got {c * beta}")
    return es_over_n0 * (1.0 - c * beta)


@dataclass
class LmmseFdSinr:
    value: float
    uniform_lower_bound: float
    pd_upper_bound: float


def sinr_fd_lmmse_closed(es_over_n0, beta, weights):
    """Post-fusion L-MMSE SINR: sum of the per-cluster closed forms.

    Also reports the uniform-allocation lower bound (attained exactly at
    w_c = 1/C; Jensen on the convex per-cluster term) and the degenerate
    upper bound, which equals the PD closed form.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or abs(weights.sum() - 1.0) > 1e-9 or np.any(weights < 0):
        raise ConfigError(f"invalid cluster weights {weights}")
    g = es_over_n0
    c = weights.size
    value = float(sum(_lmmse_cluster_sinr(g, beta, w) for w in weights))
    lower = c * _lmmse_cluster_sinr(g, beta, 1.0 / c)
    upper = sinr_pd_closed_form(Equalizer.LMMSE, g, beta)
    return LmmseFdSinr(value=value, uniform_lower_bound=lower, pd_upper_bound=upper)


def se_trajectory(constellation, n0, beta, t, w=1.0, order=None):
    """State-evolution trajectory of the message-passing equalizer:
    sigma_1^2 = (N0 + beta Es)/w, then
    sigma_t^2 = (N0 + beta Psi(sigma_{t-1}^2))/w."""
    if t < 1:
        raise ConfigError("trajectory length must be >= 1")
    spec = MseSpec(Equalizer.LAMA, es=constellation.es,
                   constellation=constellation, order=order)
    traj = np.empty(t)
    sigma2 = (n0 + beta * constellation.es) / w
    traj[0] = sigma2
    for i in range(1, t):
        sigma2 = (n0 + beta * psi_mse(spec, sigma2)) / w
        traj[i] = sigma2
    return traj


def awgn_mutual_information(constellation, sinr, order=kernels.DEFAULT_QUAD_ORDER):
    """Mutual information (bits/channel use) of the uniform constellation
    over a complex AWGN channel at the given SINR."""
    if sinr < 0:
        raise ConfigError("SINR must be nonnegative")
    if sinr == 0.0:
        return 0.0
    noise_var = constellation.es / sinr
    return kernels.mi_awgn(noise_var, constellation.symbols, order)


def sinr_for_rate(constellation, rate, tol_bits=1e-9,
                  order=kernels.DEFAULT_QUAD_ORDER):
    """Invert the mutual information: the SINR at which the AWGN channel
    with this input achieves `rate` bits, by bisection."""
    max_rate = constellation.bits_per_symbol
    if not 0.0 < rate < max_rate:
        raise ConfigError(f"target rate must lie in (0, {max_rate}), got {rate}")
    hi = 1.0
    for _ in range(80):
        if awgn_mutual_information(constellation, hi, order) >= rate:
            break
        hi *= 2.0
    else:
        raise InfeasibleError(f"rate {rate} not reachable at finite SINR")
    lo = 0.0
    while True:
        mid = 0.5 * (lo + hi)
        mi = awgn_mutual_information(constellation, mid, order)
        if abs(mi - rate) <= tol_bits or (hi - lo) <= 1e-12 * max(hi, 1.0):
            return mid
        if mi < rate:
            lo = mid
        else:
            hi = mid


def asymptotic_sinr(kind, architecture, constellation, es_over_n0, beta,
                    weights=None, order=None):
    """Post-equalization SINR of any (equalizer, architecture) pair in the
    large-system limit.  Linear kinds use their closed forms; the
    message-passing kind solves the state-evolution fixed point (per cluster
    for the FD architecture)."""
    kind = Equalizer(kind)
    architecture = Architecture(architecture)
    if architecture is Architecture.FD and kind is not Equalizer.MRC:
        if weights is None:
            raise ConfigError("the FD architecture needs cluster weights")
        weights = np.asarray(weights, dtype=float)
        if kind is Equalizer.ZF:
            return sinr_fd_zf_closed(es_over_n0, beta, weights.size)
        if kind is Equalizer.LMMSE:
            return sinr_fd_lmmse_closed(es_over_n0, beta, weights).value
        spec = MseSpec(Equalizer.LAMA, es=constellation.es,
                       constellation=constellation, order=order)
        return sinr_fd(spec, es_over_n0, beta, weights).sinr
    # PD, centralized, and MRC in every architecture
    if kind is Equalizer.LAMA:
        spec = MseSpec(Equalizer.LAMA, es=constellation.es,
                       constellation=constellation, order=order)
        fp = solve_fixed_point(spec, constellation.es / es_over_n0, beta)
        return fp.sinr
    return sinr_pd_closed_form(kind, es_over_n0, beta)


def min_antenna_ratio(kind, architecture, constellation, target_rate,
                      snr_loss_db, c=1, weights=None, beta_resolution=1e-4,
                      order=None):
    """Smallest BS-to-UE antenna ratio (1/beta) at which the equalizer,
    operating `snr_loss_db` above the AWGN baseline SNR for `target_rate`,
    still achieves that rate.

    The baseline SNR is found by inverting the constellation's mutual
    information; feasibility of a system ratio beta reduces to
    SINR(beta) >= baseline SINR because the mutual information is strictly
    increasing.  The largest feasible beta is located by bisection on
    [1e-6, 1]; for the message-passing kind (whose feasible set is not
    guaranteed to be an interval) a grid scan confirms the bisection result
    and takes over if a feasible point beyond it is detected.
    """
    kind = Equalizer(kind)
    architecture = Architecture(architecture)
    if snr_loss_db < 0:
        raise ConfigError("SNR loss must be nonnegative")
    if weights is None:
        weights = np.full(c, 1.0 / c)
    gamma = sinr_for_rate(constellation, target_rate,
                          order=order or kernels.DEFAULT_QUAD_ORDER)
    es_over_n0 = gamma * 10.0 ** (snr_loss_db / 10.0)

    def feasible(beta):
        try:
            sinr = asymptotic_sinr(kind, architecture, constellation,
                                   es_over_n0, beta, weights, order=order)
        except InvalidRegimeError:
            return False
        return sinr >= gamma

    lo = 1e-6
    if not feasible(lo):
        raise InfeasibleError(
            f"no antenna ratio up to 1e6 achieves rate {target_rate} at "
            f"{snr_loss_db} dB SNR loss"
        )
    if feasible(1.0):
        return 1.0
    hi = 1.0
    while hi - lo > beta_resolution:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    if kind is Equalizer.LAMA:
        # guard against a disconnected feasible set: scan above the bisection
        # boundary and, if anything is feasible there, fall back to a fine scan
        coarse = np.linspace(hi, 1.0, 65)[1:]
        if any(feasible(b) for b in coarse):
            grid = np.arange(1.0, hi, -beta_resolution)
            for b in grid:
                if feasible(b):
                    return 1.0 / b
    return 1.0 / lo

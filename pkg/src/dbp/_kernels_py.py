"""Pure-NumPy implementations of the hot kernels.

Same contracts as the compiled extension in ``_kernels.pyx``; selected at
import time by :mod:`dbp.kernels` when the extension is unavailable (or when
DBP_PURE_PYTHON is set).  All inputs are 1-D contiguous arrays; shape
handling lives in the dispatcher.
"""

import numpy as np

BACKEND = "python"


def posterior_mean_var(z, tau, symbols):
    """Posterior mean/variance of a uniform discrete prior under a CN(z, tau)
    likelihood, evaluated per entry of z.

    Weights are computed in the log domain (the minimum squared distance is
    subtracted before exponentiation) so small tau cannot underflow to 0/0.
    """
    d2 = np.abs(z[:, None] - symbols[None, :]) ** 2
    d2 -= d2.min(axis=1, keepdims=True)
    w = np.exp(-d2 / tau)
    w /= w.sum(axis=1, keepdims=True)
    f = w @ symbols
    second = w @ (np.abs(symbols) ** 2)
    g = np.maximum(second - np.abs(f) ** 2, 0.0)
    return f, g


def lama_mse(sigma2, symbols, nodes, weights):
    """Mean-square error of the posterior-mean denoiser at effective noise
    variance sigma2: exact average over the symbol set, 2-D Gauss-Hermite
    quadrature over the circularly symmetric unit-variance noise."""
    sigma = np.sqrt(sigma2)
    noise = sigma * (nodes[:, None] + 1j * nodes[None, :])
    w2 = (weights[:, None] * weights[None, :]) / np.pi
    total = 0.0
    for s in symbols:
        f, _ = posterior_mean_var((s + noise).ravel(), sigma2, symbols)
        total += float(np.sum(w2.ravel() * np.abs(f - s) ** 2))
    return total / symbols.size


def lama_mse_pam(sigma2, levels, nodes, weights):
    """MSE of the posterior-mean denoiser for a square QAM set, computed per
    real dimension: the complex posterior factorizes over the PAM alphabet,
    so the 2-D integral reduces to twice a 1-D Gauss-Hermite sum."""
    sigma = np.sqrt(sigma2)
    total = 0.0
    for a in levels:
        x = a + sigma * nodes
        d2 = (x[:, None] - levels[None, :]) ** 2
        d2 -= d2.min(axis=1, keepdims=True)
        w = np.exp(-d2 / sigma2)
        f = (w @ levels) / w.sum(axis=1)
        total += float(np.sum(weights * (f - a) ** 2))
    return 2.0 * total / (levels.size * np.sqrt(np.pi))


def mi_awgn(noise_var, symbols, nodes, weights):
    """Mutual information (bits) of the uniform discrete input over a complex
    AWGN channel with noise variance noise_var, by 2-D Gauss-Hermite
    quadrature with log-sum-exp stabilization."""
    m = symbols.size
    scale = np.sqrt(noise_var)
    noise = (scale * (nodes[:, None] + 1j * nodes[None, :])).ravel()
    w2 = ((weights[:, None] * weights[None, :]) / np.pi).ravel()
    penalty = 0.0
    for a in symbols:
        # exponents e_b = -(|a - b + n|^2 - |n|^2)/noise_var; e_a = 0 always
        e = -(np.abs(a - symbols[None, :] + noise[:, None]) ** 2
              - (np.abs(noise) ** 2)[:, None]) / noise_var
        emax = e.max(axis=1)
        lse = emax + np.log(np.sum(np.exp(e - emax[:, None]), axis=1))
        penalty += float(np.sum(w2 * lse)) / np.log(2.0)
    return np.log2(m) - penalty / m

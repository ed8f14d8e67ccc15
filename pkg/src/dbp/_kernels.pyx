# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: discrete-posterior denoiser, its quadrature MSE,
and discrete-input AWGN mutual information.

Mirrors the contracts of ``_kernels_py``; the dispatcher in ``dbp.kernels``
picks whichever implementation imports.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt

BACKEND = "compiled"

DEF MAX_SYMBOLS = 64


cdef inline void _posterior_scalar(double zr, double zi, double tau,
                                   const double complex[::1] symbols,
                                   const double[::1] sym_e2, int m,
                                   double complex *f_out, double *g_out) noexcept nogil:
    cdef double d2[MAX_SYMBOLS]
    cdef double dmin, w, wsum, fr, fi, second, dr, di, g
    cdef int k
    dmin = 1e300
    for k in range(m):
        dr = zr - symbols[k].real
        di = zi - symbols[k].imag
        d2[k] = dr * dr + di * di
        if d2[k] < dmin:
            dmin = d2[k]
    wsum = 0.0
    fr = 0.0
    fi = 0.0
    second = 0.0
    for k in range(m):
        w = exp(-(d2[k] - dmin) / tau)
        wsum += w
        fr += w * symbols[k].real
        fi += w * symbols[k].imag
        second += w * sym_e2[k]
    fr /= wsum
    fi /= wsum
    second /= wsum
    g = second - (fr * fr + fi * fi)
    if g < 0.0:
        g = 0.0
    f_out[0] = fr + 1j * fi
    g_out[0] = g


def posterior_mean_var(const double complex[::1] z, double tau,
                       const double complex[::1] symbols):
    cdef int n = z.shape[0]
    cdef int m = symbols.shape[0]
    cdef cnp.ndarray f_arr = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray g_arr = np.empty(n, dtype=np.float64)
    cdef double complex[::1] f = f_arr
    cdef double[::1] g = g_arr
    cdef double[::1] sym_e2 = np.abs(np.asarray(symbols)) ** 2
    cdef int i
    cdef double complex fval
    cdef double gval
    with nogil:
        for i in range(n):
            _posterior_scalar(z[i].real, z[i].imag, tau, symbols, sym_e2, m,
                              &fval, &gval)
            f[i] = fval
            g[i] = gval
    return f_arr, g_arr


def lama_mse(double sigma2, const double complex[::1] symbols,
             const double[::1] nodes, const double[::1] weights):
    cdef int m = symbols.shape[0]
    cdef int q = nodes.shape[0]
    cdef double[::1] sym_e2 = np.abs(np.asarray(symbols)) ** 2
    cdef double sigma = sqrt(sigma2)
    cdef double total = 0.0, pi = np.pi
    cdef double zr, zi, er, ei, gval, wjk
    cdef double complex fval
    cdef int s, j, k
    with nogil:
        for s in range(m):
            for j in range(q):
                zr = symbols[s].real + sigma * nodes[j]
                for k in range(q):
                    zi = symbols[s].imag + sigma * nodes[k]
                    _posterior_scalar(zr, zi, sigma2, symbols, sym_e2, m,
                                      &fval, &gval)
                    er = fval.real - symbols[s].real
                    ei = fval.imag - symbols[s].imag
                    wjk = weights[j] * weights[k]
                    total += wjk * (er * er + ei * ei)
    return total / (m * pi)


def lama_mse_pam(double sigma2, const double[::1] levels,
                 const double[::1] nodes, const double[::1] weights):
    cdef int m = levels.shape[0]
    cdef int q = nodes.shape[0]
    cdef double sigma = sqrt(sigma2)
    cdef double d2[MAX_SYMBOLS]
    cdef double total = 0.0, sqrt_pi = sqrt(np.pi)
    cdef double x, dmin, w, wsum, f, d
    cdef int a, j, k
    with nogil:
        for a in range(m):
            for j in range(q):
                x = levels[a] + sigma * nodes[j]
                dmin = 1e300
                for k in range(m):
                    d = x - levels[k]
                    d2[k] = d * d
                    if d2[k] < dmin:
                        dmin = d2[k]
                wsum = 0.0
                f = 0.0
                for k in range(m):
                    w = exp(-(d2[k] - dmin) / sigma2)
                    wsum += w
                    f += w * levels[k]
                f /= wsum
                total += weights[j] * (f - levels[a]) * (f - levels[a])
    return 2.0 * total / (m * sqrt_pi)


def mi_awgn(double noise_var, const double complex[::1] symbols,
            const double[::1] nodes, const double[::1] weights):
    cdef int m = symbols.shape[0]
    cdef int q = nodes.shape[0]
    cdef double scale = sqrt(noise_var)
    cdef double e[MAX_SYMBOLS]
    cdef double penalty = 0.0, pi = np.pi, ln2 = log(2.0)
    cdef double nr, ni, n2, dr, di, emax, lse, wjk
    cdef int a, b, j, k
    with nogil:
        for a in range(m):
            for j in range(q):
                nr = scale * nodes[j]
                for k in range(q):
                    ni = scale * nodes[k]
                    n2 = nr * nr + ni * ni
                    emax = -1e300
                    for b in range(m):
                        dr = symbols[a].real - symbols[b].real + nr
                        di = symbols[a].imag - symbols[b].imag + ni
                        e[b] = -((dr * dr + di * di) - n2) / noise_var
                        if e[b] > emax:
                            emax = e[b]
                    lse = 0.0
                    for b in range(m):
                        lse += exp(e[b] - emax)
                    lse = emax + log(lse)
                    wjk = weights[j] * weights[k]
                    penalty += wjk * lse / ln2
    return log(m) / ln2 - penalty / (m * pi)

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampling and iteration kernels.

Arithmetic mirrors ``_pycore`` step for step; both draw their normals through
the same scipy ``ndtri`` routine, so the noise streams agree bit for bit and
iterates agree up to the summation order of dot products.
"""
import numpy as np

from libc.math cimport isfinite, log, sqrt, tanh
from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc
from scipy.special.cython_special cimport ndtri, stdtrit

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t SLOT_MULT = 0xD1B54A32D192ED03ULL
cdef uint64_t SLOT_ADD = 0x8CB92BA72F3D8DD7ULL
cdef int SLOT_SHIFT = 8
cdef double INV_SQRT2 = 0.7071067811865476
cdef double TWO_M53 = 1.1102230246251565e-16

cdef enum:
    GAUSSIAN = 0
    LAPLACE = 1
    STUDENT_T = 2
    CONSTANT = 3


cdef struct Problem:
    int kind
    int d
    int identity
    const double *factor
    const double *beta_star
    int cov_law
    double cov_nu
    int cov_nu_int
    int noise_law
    double noise_nu
    int noise_nu_int
    double noise_scale
    double rho
    double offset
    double tanh_offset


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double slot_uniform(uint64_t h, uint64_t slot) noexcept nogil:
    cdef uint64_t u = mix64(h ^ (slot * SLOT_MULT + SLOT_ADD))
    return (<double>(u >> 11) + 0.5) * TWO_M53


cdef double std_variate(int law, double nu, int nu_int, uint64_t h, uint64_t base) noexcept nogil:
    cdef double u, z, g, chi
    cdef int m
    if law == GAUSSIAN:
        return ndtri(slot_uniform(h, base))
    if law == LAPLACE:
        u = slot_uniform(h, base)
        if u < 0.5:
            return log(2.0 * u) * INV_SQRT2
        return -log(2.0 * (1.0 - u)) * INV_SQRT2
    if law == STUDENT_T:
        if nu_int > 0:
            z = ndtri(slot_uniform(h, base))
            chi = 0.0
            for m in range(1, nu_int + 1):
                g = ndtri(slot_uniform(h, base + m))
                chi = chi + g * g
            return z / sqrt(chi / nu)
        return stdtrit(nu, slot_uniform(h, base))
    return 1.0


cdef void draw(Problem *p, uint64_t h, double *w, double *x, double *y, double *eps) noexcept nogil:
    """Regression: fill x, y, eps. Tanh problem: fill x with xi."""
    cdef int i, j, d = p.d
    cdef double acc
    if p.kind == 0:
        for j in range(d):
            w[j] = std_variate(p.cov_law, p.cov_nu, p.cov_nu_int, h, (<uint64_t>j) << SLOT_SHIFT)
        if p.identity:
            for i in range(d):
                x[i] = w[i]
        else:
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc = acc + p.factor[i * d + j] * w[j]
                x[i] = acc
        eps[0] = p.noise_scale * std_variate(p.noise_law, p.noise_nu, p.noise_nu_int, h,
                                             (<uint64_t>d) << SLOT_SHIFT)
        acc = 0.0
        for i in range(d):
            acc = acc + x[i] * p.beta_star[i]
        y[0] = acc + eps[0]
    else:
        for j in range(d):
            x[j] = p.noise_scale * std_variate(p.noise_law, p.noise_nu, p.noise_nu_int, h,
                                               (<uint64_t>j) << SLOT_SHIFT)


cdef inline void update(Problem *p, double *b, double *x, double y, double alpha) noexcept nogil:
    cdef int i, d = p.d
    cdef double resid, g
    if p.kind == 0:
        resid = 0.0
        for i in range(d):
            resid = resid + x[i] * b[i]
        resid = y - resid
        for i in range(d):
            g = -resid * x[i]
            b[i] = b[i] - alpha * g
    else:
        for i in range(d):
            g = b[i] + p.rho * (tanh(b[i] + p.offset) - p.tanh_offset) - x[i]
            b[i] = b[i] - alpha * g


cdef Problem unpack(problem, const double[:, ::1] factor, const double[::1] beta_star):
    cdef Problem p
    p.kind = problem.kind
    p.d = problem.d
    p.identity = 1 if problem.identity else 0
    p.factor = &factor[0, 0]
    p.beta_star = &beta_star[0]
    p.cov_law = problem.cov_law
    p.cov_nu = problem.cov_nu
    p.cov_nu_int = problem.cov_nu_int
    p.noise_law = problem.noise_law
    p.noise_nu = problem.noise_nu
    p.noise_nu_int = problem.noise_nu_int
    p.noise_scale = problem.noise_scale
    p.rho = problem.rho
    p.offset = problem.offset
    p.tanh_offset = tanh(p.offset)
    return p


def sample(problem, uint64_t key, const uint64_t[::1] ks):
    cdef const double[:, ::1] factor = np.ascontiguousarray(problem.factor, dtype=np.float64)
    cdef const double[::1] beta_star = np.ascontiguousarray(problem.beta_star, dtype=np.float64)
    cdef Problem p = unpack(problem, factor, beta_star)
    cdef Py_ssize_t n = ks.shape[0], t
    cdef int d = p.d
    x_arr = np.empty((n, d))
    y_arr = np.empty(n)
    e_arr = np.empty(n)
    w_arr = np.empty(d)
    cdef double[:, ::1] x = x_arr
    cdef double[::1] y = y_arr, eps = e_arr, w = w_arr
    with nogil:
        for t in range(n):
            draw(&p, mix64(key + ks[t] * GOLDEN), &w[0], &x[t, 0], &y[t], &eps[t])
    if p.kind == 0:
        return {"x": x_arr, "y": y_arr, "eps": e_arr}
    return {"xi": x_arr}


def advance(problem, double[:, :, ::1] beta, mean, const uint64_t[::1] keys,
            long long k0, long long n_steps, double alpha, long long swap_step,
            swap_keys, int swap_chain, trace):
    cdef const double[:, ::1] factor = np.ascontiguousarray(problem.factor, dtype=np.float64)
    cdef const double[::1] beta_star = np.ascontiguousarray(problem.beta_star, dtype=np.float64)
    cdef Problem p = unpack(problem, factor, beta_star)
    cdef Py_ssize_t R = beta.shape[0], C = beta.shape[1], d = beta.shape[2]
    cdef double[:, :, ::1] mv
    cdef double[:, :, :, ::1] tr
    cdef const uint64_t[::1] skeys
    cdef int has_mean = mean is not None
    cdef int has_trace = trace is not None
    cdef int has_swap = swap_keys is not None and swap_step > 0
    if has_mean:
        mv = mean
    if has_trace:
        tr = trace
    if has_swap:
        skeys = swap_keys
    cdef Py_ssize_t r, c, i
    cdef long long t, k, first_bad = 0, rep_bad
    cdef uint64_t key
    cdef double *buf = <double *> malloc(3 * (d + 2) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double *w = buf
    cdef double *x = buf + (d + 2)
    cdef double *xs = buf + 2 * (d + 2)
    cdef double y, ys, eps, kk
    cdef double *b
    cdef double *m
    try:
        with nogil:
            for r in range(R):
                key = keys[r]
                rep_bad = 0
                for t in range(n_steps):
                    k = k0 + 1 + t
                    draw(&p, mix64(key + (<uint64_t>k) * GOLDEN), w, x, &y, &eps)
                    if has_swap and k == swap_step:
                        draw(&p, mix64(skeys[r] + (<uint64_t>k) * GOLDEN), w, xs, &ys, &eps)
                    kk = <double>k
                    for c in range(C):
                        b = &beta[r, c, 0]
                        if has_swap and k == swap_step and c == swap_chain:
                            update(&p, b, xs, ys, alpha)
                        else:
                            update(&p, b, x, y, alpha)
                        if has_mean:
                            m = &mv[r, c, 0]
                            for i in range(d):
                                m[i] = m[i] + (b[i] - m[i]) / kk
                        if has_trace:
                            for i in range(d):
                                tr[r, t, c, i] = b[i]
                        if rep_bad == 0:
                            for i in range(d):
                                if not isfinite(b[i]):
                                    rep_bad = k
                                    break
                if rep_bad > 0 and (first_bad == 0 or rep_bad < first_bad):
                    first_bad = rep_bad
    finally:
        free(buf)
    return first_bad

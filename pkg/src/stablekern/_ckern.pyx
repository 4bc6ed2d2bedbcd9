# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled oscillatory quadrature engine.

Mirrors stablekern._pykern one-for-one (series segment + phase-graded
Gauss-Legendre head + Longman lobes with Wynn epsilon acceleration); see that
module's docstring for the scheme.  Keep the two backends in sync.
"""

from libc.math cimport exp, expm1, cos, sin, log, log1p, pow, fabs, ceil, lgamma, isfinite
from libc.stdlib cimport malloc, free

import numpy as np

from .errors import DomainError, NumericsError

BACKEND_NAME = "cython"

cdef double _MAX_LOG = 45.0
cdef int _MAX_LOBES = 420
cdef int _EPS_CAP = 60
cdef double _SENTINEL = 1e307
cdef int _SERIES_M = 26

cdef double[15] _GL_X
cdef double[15] _GL_W
_GL_X = [-0.9879925180204854, -0.937273392400706, -0.8482065834104272,
         -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
         -0.20119409399743451, 0.0, 0.20119409399743451, 0.3941513470775634,
         0.5709721726085388, 0.7244177313601701, 0.8482065834104272,
         0.937273392400706, 0.9879925180204854]
_GL_W = [0.030753241996118647, 0.07036604748810807, 0.10715922046717177,
         0.1395706779261539, 0.16626920581699378, 0.18616100001556188,
         0.19843148532711125, 0.2025782419255609, 0.19843148532711125,
         0.18616100001556188, 0.16626920581699378, 0.1395706779261539,
         0.10715922046717177, 0.07036604748810807, 0.030753241996118647]

# status codes
cdef int _OK = 0
cdef int _ERR_HEAD = 1
cdef int _ERR_LOBES = 2

cdef int _HEAD_CAP = 49537  # 385 initial edges (diff merge), 7 doublings


# ---------------------------------------------------------------------------
# integrand evaluation

cdef inline double _envelope(double xi, double alpha, double t, int j, bint diff) nogil:
    cdef double d, v
    if diff:
        d = t * (xi * xi - pow(xi, alpha))
        if d < 50.0:
            v = exp(-t * xi * xi) * expm1(d)
        else:
            v = exp(-t * pow(xi, alpha))
        return v
    v = exp(-t * pow(xi, alpha))
    if j == 1:
        v *= xi
    elif j == 2:
        v *= xi * xi
    return v


cdef inline double _f_eval(double xi, double alpha, double t, double x, int j, bint diff) nogil:
    cdef double env = _envelope(xi, alpha, t, j, diff)
    if j % 2 == 0:
        return env * cos(x * xi)
    return env * sin(x * xi)


cdef double _gl_panel(double a, double b, double alpha, double t, double x,
                      int j, bint diff) nogil:
    cdef double half = 0.5 * (b - a)
    cdef double mid = 0.5 * (a + b)
    cdef double s = 0.0
    cdef int i
    for i in range(15):
        s += _GL_W[i] * _f_eval(mid + half * _GL_X[i], alpha, t, x, j, diff)
    return s * half


# ---------------------------------------------------------------------------
# series segment [0, c]

cdef double _series_segment(double alpha, double t, double x, int j, double c,
                            bint diff) nogil:
    cdef double B[26]
    cdef double A[26]
    cdef double r[26]
    cdef int m, l
    cdef double total = 0.0, q, qa, q2, lc = log(c)
    B[0] = 1.0
    for m in range(1, _SERIES_M):
        B[m] = -B[m - 1] * t / m
    if j % 2 == 0:
        A[0] = 1.0
        r[0] = 0.0
        for l in range(1, _SERIES_M):
            A[l] = -A[l - 1] * x * x / ((2 * l - 1) * (2 * l))
            r[l] = 2.0 * l
    else:
        A[0] = x
        r[0] = 1.0
        for l in range(1, _SERIES_M):
            A[l] = -A[l - 1] * x * x / ((2 * l) * (2 * l + 1))
            r[l] = 2.0 * l + 1.0
    if diff:
        for m in range(1, _SERIES_M):
            for l in range(_SERIES_M):
                qa = alpha * m + r[l]
                q2 = 2.0 * m + r[l]
                total += B[m] * A[l] * (exp((qa + 1.0) * lc) / (qa + 1.0)
                                        - exp((q2 + 1.0) * lc) / (q2 + 1.0))
    else:
        for m in range(_SERIES_M):
            for l in range(_SERIES_M):
                q = j + alpha * m + r[l]
                total += B[m] * A[l] * exp((q + 1.0) * lc) / (q + 1.0)
    return total


# ---------------------------------------------------------------------------
# head segment [c, head_end]

cdef double _head_sum(double* edges, int n_panels, double alpha, double t,
                      double x, int j, bint diff) nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(n_panels):
        s += _gl_panel(edges[i], edges[i + 1], alpha, t, x, j, diff)
    return s


cdef int _fill_phase_edges(double* edges, double t, double grade, double lo,
                           double hi, int n) nogil:
    """Edges uniform in phase t*xi^grade; returns edge count n+1."""
    cdef double plo = t * pow(lo, grade)
    cdef double phi = t * pow(hi, grade)
    cdef int i
    for i in range(n + 1):
        edges[i] = pow((plo + (phi - plo) * i / n) / t, 1.0 / grade)
    edges[0] = lo
    edges[n] = hi
    return n + 1


cdef int _merge_edges(double* a, int na, double* b, int nb, double* out) nogil:
    """Merge two sorted edge arrays, dropping exact duplicates."""
    cdef int i = 0, k = 0, n = 0
    cdef double v
    while i < na or k < nb:
        if i < na and (k >= nb or a[i] <= b[k]):
            v = a[i]
            i += 1
        else:
            v = b[k]
            k += 1
        if n == 0 or v != out[n - 1]:
            out[n] = v
            n += 1
    return n


cdef double _head_integral(double* edges, int n_edges, double alpha, double t,
                           double x, int j, bint diff, double tol,
                           double* work, double* err_out) nogil:
    """Doubling refinement of the GL panel sum, mirroring _pykern."""
    cdef double v0 = _head_sum(edges, n_edges - 1, alpha, t, x, j, diff)
    cdef double v1, err = 1e308
    cdef int it, i, n = n_edges
    cdef double* cur = edges
    cdef double* nxt = work
    cdef double* tmp
    for it in range(7):
        # midpoint refinement
        for i in range(n - 1):
            nxt[2 * i] = cur[i]
            nxt[2 * i + 1] = 0.5 * (cur[i] + cur[i + 1])
        nxt[2 * (n - 1)] = cur[n - 1]
        tmp = cur
        cur = nxt
        nxt = tmp
        n = 2 * n - 1
        v1 = _head_sum(cur, n - 1, alpha, t, x, j, diff)
        err = fabs(v1 - v0)
        v0 = v1
        if err <= tol or err <= 4e-14 * fabs(v0):
            err_out[0] = err
            return v0
    err_out[0] = err
    return v0


# ---------------------------------------------------------------------------
# lobe summation with Wynn epsilon

cdef double _lobe_integral(double a, double b, double alpha, double t, double x,
                           int j, bint diff) nogil:
    cdef double scale, width = b - a
    cdef double s = 0.0, lo, hi
    cdef int nsub, i
    scale = 1.0 / (t * alpha * pow(a, alpha - 1.0) + 1e-300)
    if diff:
        if 1.0 / (t * 2.0 * a + 1e-300) < scale:
            scale = 1.0 / (t * 2.0 * a + 1e-300)
    if scale < width / 8.0:
        scale = width / 8.0
    nsub = <int>ceil(width / scale)
    if nsub < 1:
        nsub = 1
    if nsub > 8:
        nsub = 8
    for i in range(nsub):
        lo = a + width * i / nsub
        hi = a + width * (i + 1) / nsub
        s += _gl_panel(lo, hi, alpha, t, x, j, diff)
    return s


cdef double _sum_lobes(double first_zero, double spacing, double head_value,
                       double tol, double alpha, double t, double x, int j,
                       bint diff, int* status, double* achieved) nogil:
    cdef double table[60]
    cdef int tlen = 0
    cdef double partial = head_value
    cdef double scale = fabs(head_value)
    cdef double best_prev = 0.0
    cdef bint have_prev = False
    cdef int stable = 0, dead = 0, k, kk
    cdef double a_k = 0.0, est = head_value, prev, cur, old, denom, nxt, xi, log_env, delta

    for k in range(_MAX_LOBES):
        a_k = _lobe_integral(first_zero + spacing * k,
                             first_zero + spacing * (k + 1), alpha, t, x, j, diff)
        partial += a_k
        if fabs(partial) > scale:
            scale = fabs(partial)
        if fabs(a_k) <= 1e-18 * (1.0 + fabs(partial)) + 1e-300:
            dead += 1
            if dead >= 3:
                status[0] = _OK
                achieved[0] = fabs(a_k)
                return partial
        else:
            dead = 0
        # Wynn epsilon update
        prev = 0.0
        cur = partial
        for kk in range(tlen):
            old = table[kk]
            if (not isfinite(old)) or (not isfinite(cur)) or fabs(cur) >= _SENTINEL or fabs(old) >= _SENTINEL:
                nxt = _SENTINEL
            else:
                denom = cur - old
                nxt = prev + 1.0 / denom if denom != 0.0 else _SENTINEL
            table[kk] = cur
            prev = old
            cur = nxt
        if tlen < _EPS_CAP:
            table[tlen] = cur
            tlen += 1
        est = partial
        kk = tlen - 1
        if kk % 2 == 1:
            kk -= 1
        while kk >= 0:
            if isfinite(table[kk]) and fabs(table[kk]) < _SENTINEL:
                est = table[kk]
                break
            kk -= 2
        if have_prev:
            delta = fabs(est - best_prev)
            if delta <= 0.25 * tol or delta <= 1e-14 * scale:
                stable += 1
                if stable >= 2:
                    status[0] = _OK
                    achieved[0] = delta
                    return est
            else:
                stable = 0
        best_prev = est
        have_prev = True
        # envelope cutoff every 16 lobes, mirroring the chunked fallback
        if (k + 1) % 16 == 0:
            xi = first_zero + spacing * (k + 1)
            log_env = -t * pow(xi, alpha)
            if diff and -t * xi * xi > log_env:
                log_env = -t * xi * xi
            if log_env + 2.0 * log1p(xi) < -_MAX_LOG:
                status[0] = _OK
                achieved[0] = fabs(a_k)
                return partial
    status[0] = _ERR_LOBES
    achieved[0] = fabs(est - best_prev) if have_prev else 1e308
    return partial


# ---------------------------------------------------------------------------
# per-point drivers

cdef double _osc_point(double alpha, double t, double x, int j, double tol,
                       double* work, int* status, double* achieved) nogil:
    cdef double cutoff, first_zero, head_end, c, total, v, err
    cdef int n0, n_edges

    status[0] = _OK
    achieved[0] = 0.0
    if x == 0.0:
        if j % 2 == 1:
            return 0.0
        return exp(lgamma((j + 1.0) / alpha)) / (alpha * pow(t, (j + 1.0) / alpha))

    cutoff = pow((_MAX_LOG + 3.0 * j) / t, 1.0 / alpha)
    if j % 2 == 0:
        first_zero = 0.5 * 3.14159265358979323846 / x
    else:
        first_zero = 3.14159265358979323846 / x
    head_end = first_zero if first_zero < cutoff else cutoff

    c = head_end
    if pow(t, -1.0 / alpha) < c:
        c = pow(t, -1.0 / alpha)
    if 1.0 / x < c:
        c = 1.0 / x
    total = _series_segment(alpha, t, x, j, c, False)
    if c < head_end:
        n0 = <int>(2.0 * t * pow(head_end, alpha)) + 8
        if n0 < 8:
            n0 = 8
        if n0 > 256:
            n0 = 256
        n_edges = _fill_phase_edges(work, t, alpha, c, head_end, n0)
        v = _head_integral(work, n_edges, alpha, t, x, j, False, 0.25 * tol,
                           work + _HEAD_CAP, &err)
        if err > 0.25 * tol and err > 4e-14 * fabs(v):
            status[0] = _ERR_HEAD
            achieved[0] = err
            return total + v
        total += v
    if first_zero >= cutoff:
        return total
    return _sum_lobes(first_zero, 3.14159265358979323846 / x, total, tol,
                      alpha, t, x, j, False, status, achieved)


cdef double _diff_point(double alpha, double t, double x, double tol,
                        double* work, int* status, double* achieved) nogil:
    cdef double cutoff, first_zero, head_end, c, total, v, err
    cdef int n1, n2, na, nb, n_edges

    status[0] = _OK
    achieved[0] = 0.0
    if x == 0.0:
        return (exp(lgamma(1.0 + 1.0 / alpha)) * pow(t, -1.0 / alpha)
                - exp(lgamma(1.5)) / pow(t, 0.5))

    cutoff = pow(_MAX_LOG / t, 1.0 / alpha)
    first_zero = 0.5 * 3.14159265358979323846 / x
    head_end = first_zero if first_zero < cutoff else cutoff

    c = head_end
    if pow(t, -1.0 / alpha) < c:
        c = pow(t, -1.0 / alpha)
    if pow(t, -0.5) < c:
        c = pow(t, -0.5)
    if 1.0 / x < c:
        c = 1.0 / x
    total = _series_segment(alpha, t, x, 0, c, True)
    if c < head_end:
        n1 = <int>(2.0 * t * pow(head_end, alpha)) + 8
        if n1 < 8:
            n1 = 8
        if n1 > 192:
            n1 = 192
        n2 = <int>(2.0 * t * head_end * head_end) + 8
        if n2 < 8:
            n2 = 8
        if n2 > 192:
            n2 = 192
        na = _fill_phase_edges(work, t, alpha, c, head_end, n1)
        nb = _fill_phase_edges(work + na, t, 2.0, c, head_end, n2)
        n_edges = _merge_edges(work, na, work + na, nb, work + na + nb)
        # move merged edges to the front of the workspace
        for n1 in range(n_edges):
            work[n1] = work[na + nb + n1]
        v = _head_integral(work, n_edges, alpha, t, x, 0, True, 0.25 * tol,
                           work + _HEAD_CAP, &err)
        if err > 0.25 * tol and err > 4e-14 * fabs(v):
            status[0] = _ERR_HEAD
            achieved[0] = err
            return total + v
        total += v
    if first_zero >= cutoff:
        return total
    return _sum_lobes(first_zero, 3.14159265358979323846 / x, total, tol,
                      alpha, t, x, 0, True, status, achieved)


# ---------------------------------------------------------------------------
# python-facing API (mirrors _pykern signatures)

cdef _check_args(double alpha, double t, double x, int j):
    if not (0.0 < alpha <= 2.0) or t <= 0.0 or x < 0.0:
        raise DomainError(f"osc_transform: bad (alpha={alpha}, t={t}, x={x})")
    if j not in (0, 1, 2):
        raise DomainError(f"osc_transform: derivative order {j} not supported")


cdef _raise_status(int status, double achieved):
    if status == _ERR_HEAD:
        raise NumericsError("head quadrature did not stabilise", achieved)
    if status == _ERR_LOBES:
        raise NumericsError("oscillatory lobe series did not converge", achieved)


def osc_transform(double alpha, double t, double x, int j, double tol):
    """Compiled twin of _pykern.osc_transform."""
    _check_args(alpha, t, x, j)
    cdef double* work = <double*>malloc(2 * _HEAD_CAP * 2 * sizeof(double))
    if work == NULL:
        raise MemoryError
    cdef int status = 0
    cdef double achieved = 0.0
    cdef double v
    try:
        v = _osc_point(alpha, t, x, j, tol, work, &status, &achieved)
    finally:
        free(work)
    _raise_status(status, achieved)
    return v


def diff_transform(double alpha, double t, double x, double tol):
    """Compiled twin of _pykern.diff_transform."""
    _check_args(alpha, t, x, 0)
    if alpha == 2.0:
        return 0.0
    cdef double* work = <double*>malloc(2 * _HEAD_CAP * 2 * sizeof(double))
    if work == NULL:
        raise MemoryError
    cdef int status = 0
    cdef double achieved = 0.0
    cdef double v
    try:
        v = _diff_point(alpha, t, x, tol, work, &status, &achieved)
    finally:
        free(work)
    _raise_status(status, achieved)
    return v


def osc_transform_many(double alpha, double t, xs, int j, double tol):
    _check_args(alpha, t, 0.0, j)
    cdef double[::1] flat = np.ascontiguousarray(xs, dtype=np.float64).ravel()
    out_arr = np.empty(flat.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double* work = <double*>malloc(2 * _HEAD_CAP * 2 * sizeof(double))
    if work == NULL:
        raise MemoryError
    cdef int status = 0, worst_status = 0
    cdef double achieved = 0.0, worst_achieved = 0.0
    cdef Py_ssize_t i, n = flat.shape[0]
    try:
        with nogil:
            for i in range(n):
                if flat[i] < 0.0:
                    worst_status = -1
                    break
                out[i] = _osc_point(alpha, t, flat[i], j, tol, work, &status, &achieved)
                if status != 0:
                    worst_status = status
                    worst_achieved = achieved
                    break
    finally:
        free(work)
    if worst_status == -1:
        raise DomainError("osc_transform_many: negative x")
    _raise_status(worst_status, worst_achieved)
    return out_arr.reshape(np.shape(xs))


def diff_transform_many(double alpha, double t, xs, double tol):
    _check_args(alpha, t, 0.0, 0)
    cdef double[::1] flat = np.ascontiguousarray(xs, dtype=np.float64).ravel()
    out_arr = np.empty(flat.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    if alpha == 2.0:
        out_arr[:] = 0.0
        return out_arr.reshape(np.shape(xs))
    cdef double* work = <double*>malloc(2 * _HEAD_CAP * 2 * sizeof(double))
    if work == NULL:
        raise MemoryError
    cdef int status = 0, worst_status = 0
    cdef double achieved = 0.0, worst_achieved = 0.0
    cdef Py_ssize_t i, n = flat.shape[0]
    try:
        with nogil:
            for i in range(n):
                if flat[i] < 0.0:
                    worst_status = -1
                    break
                out[i] = _diff_point(alpha, t, flat[i], tol, work, &status, &achieved)
                if status != 0:
                    worst_status = status
                    worst_achieved = achieved
                    break
    finally:
        free(work)
    if worst_status == -1:
        raise DomainError("diff_transform_many: negative x")
    _raise_status(worst_status, worst_achieved)
    return out_arr.reshape(np.shape(xs))

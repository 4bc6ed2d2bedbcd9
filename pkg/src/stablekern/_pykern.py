"""Pure-numpy oscillatory quadrature engine (fallback backend).

Evaluates the half-line Fourier integrals behind every stable-density
computation in the package:

    osc_transform(alpha, t, x, j)  =  int_0^inf  xi^j exp(-t xi^alpha) trig(x xi) dxi
    diff_transform(alpha, t, x)    =  int_0^inf  (exp(-t xi^alpha) - exp(-t xi^2)) cos(x xi) dxi

with trig = cos for even j and sin for odd j (j in {0, 1, 2}).

Scheme, per point:
  1. series segment [0, c]: the integrand's fractional power xi^(m*alpha) at 0
     defeats polynomial quadrature, so the segment with t*xi^alpha <= 1 and
     x*xi <= 1 is summed as an exact double power series;
  2. head segment [c, first zero of the oscillator]: Gauss-Legendre panels
     graded in the phase t*xi^alpha, doubled until two sweeps agree (the
     integrand is analytic and separated from 0, so this converges fast);
  3. past the first zero: lobe-by-lobe integrals between consecutive zeros
     (Longman's method), with the alternating lobe series accelerated by
     Wynn's epsilon algorithm, cut off once the envelope is numerically dead.

The compiled backend mirrors this scheme one-for-one; keep them in sync.
"""

import numpy as np

from .errors import DomainError, NumericsError

BACKEND_NAME = "python"

_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)
_MAX_LOG = 45.0        # envelope considered dead beyond exp(-45) * polynomial
_MAX_LOBES = 420
_EPS_TABLE_CAP = 60
_SENTINEL = 1e307


# ---------------------------------------------------------------------------
# envelopes

def _plain_envelope(xi, alpha, t, j):
    v = np.exp(-t * xi**alpha)
    if j:
        v = v * xi**j
    return v


def _diff_envelope(xi, t, alpha):
    # exp(-t xi^alpha) - exp(-t xi^2), cancellation-safe on both branches
    d = t * (xi * xi - xi**alpha)
    return np.where(
        d < 50.0,
        np.exp(-t * xi * xi) * np.expm1(np.minimum(d, 50.0)),
        np.exp(-t * xi**alpha),
    )


# ---------------------------------------------------------------------------
# series segment [0, c]

def _trig_series_coeffs(x, j, n_terms):
    """Coefficients A_l and powers r_l of trig(x*xi) = sum_l A_l xi^(r_l)."""
    ls = np.arange(n_terms)
    if j % 2 == 0:  # cos
        r = 2.0 * ls
        A = np.empty(n_terms)
        A[0] = 1.0
        for l in range(1, n_terms):
            A[l] = -A[l - 1] * x * x / ((2 * l - 1) * (2 * l))
    else:  # sin
        r = 2.0 * ls + 1.0
        A = np.empty(n_terms)
        A[0] = x
        for l in range(1, n_terms):
            A[l] = -A[l - 1] * x * x / ((2 * l) * (2 * l + 1))
    return A, r


def _series_segment(alpha, t, x, j, c):
    """Exact integral over [0, c] by double power series.

    Requires t*c^alpha <= 1.05 and x*c <= 1.05 so both series decay
    factorially; truncation error is far below 1e-16 relative.
    """
    M, L = 26, 26
    B = np.empty(M)  # (-t)^m / m!
    B[0] = 1.0
    for m in range(1, M):
        B[m] = -B[m - 1] * t / m
    A, r = _trig_series_coeffs(x, j, L)
    ms = np.arange(M)
    # exponent q = j + m*alpha + r_l, integral of xi^q on [0,c] = c^(q+1)/(q+1)
    q = j + alpha * ms[:, None] + r[None, :]
    term = B[:, None] * A[None, :] * c ** (q + 1.0) / (q + 1.0)
    return float(term.sum())


def _series_segment_diff(alpha, t, x, c):
    """Series integral over [0, c] of (e^{-t xi^alpha} - e^{-t xi^2}) cos(x xi)."""
    M, L = 26, 26
    B = np.empty(M)
    B[0] = 1.0
    for m in range(1, M):
        B[m] = -B[m - 1] * t / m
    A, r = _trig_series_coeffs(x, 0, L)
    ms = np.arange(M)
    qa = alpha * ms[:, None] + r[None, :]
    q2 = 2.0 * ms[:, None] + r[None, :]
    # m = 0 terms cancel exactly
    term = B[:, None] * A[None, :] * (c ** (qa + 1.0) / (qa + 1.0) - c ** (q2 + 1.0) / (q2 + 1.0))
    term[0, :] = 0.0
    return float(term.sum())


# ---------------------------------------------------------------------------
# panel machinery

def _gl_panel_sums(f, edges):
    """Per-panel Gauss-Legendre integrals of f over consecutive edges."""
    a = edges[:-1]
    b = edges[1:]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b)[:, None] + half[:, None] * _GL_X[None, :]
    return (f(nodes) @ _GL_W) * half


def _phase_graded_edges(t, alpha, lo, hi, n):
    """Panel edges on [lo, hi], uniform in the phase t*xi^alpha."""
    phis = np.linspace(t * lo**alpha, t * hi**alpha, n + 1)
    return (phis / t) ** (1.0 / alpha)


def _refine_edges(edges):
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(edges.size + mids.size)
    out[0::2] = edges
    out[1::2] = mids
    return out


def _head_integral(f, edges, tol):
    """Integrate f over the panel set, doubling panels until stable.

    Stops at the requested absolute tolerance or at the float64 roundoff
    floor of the integral's own magnitude, whichever is weaker.
    """
    v0 = float(_gl_panel_sums(f, edges).sum())
    err = np.inf
    ok = False
    for _ in range(7):
        edges = _refine_edges(edges)
        v1 = float(_gl_panel_sums(f, edges).sum())
        err = abs(v1 - v0)
        v0 = v1
        if err <= max(tol, 4e-14 * abs(v0)):
            ok = True
            break
    return v0, err, ok


# ---------------------------------------------------------------------------
# Wynn epsilon acceleration of the lobe series

class _Epsilon:
    def __init__(self):
        self._table = []
        self.estimate = None

    def add(self, partial_sum):
        prev = 0.0
        cur = partial_sum
        table = self._table
        for k in range(len(table)):
            old = table[k]
            if not (np.isfinite(old) and np.isfinite(cur)) or abs(cur) >= _SENTINEL or abs(old) >= _SENTINEL:
                nxt = _SENTINEL
            else:
                denom = cur - old
                nxt = prev + 1.0 / denom if denom != 0.0 else _SENTINEL
            table[k] = cur
            prev = old
            cur = nxt
        if len(table) < _EPS_TABLE_CAP:
            table.append(cur)
        # best usable estimate: highest healthy even column
        est = None
        for k in range(len(table) - 1, -1, -1):
            if k % 2 == 0:
                v = table[k]
                if np.isfinite(v) and abs(v) < _SENTINEL:
                    est = v
                    break
        self.estimate = est if est is not None else partial_sum
        return self.estimate


def _decay_scale(xi, t, alpha):
    if xi <= 0.0:
        return np.inf
    return 1.0 / (t * alpha * xi ** (alpha - 1.0) + 1e-300)


def _lobe_chunk_edges(zeros, t, alpha, alpha2=None):
    edges = []
    counts = []
    last = len(zeros) - 2
    for k in range(len(zeros) - 1):
        a, b = zeros[k], zeros[k + 1]
        scale = _decay_scale(a, t, alpha)
        if alpha2 is not None:
            scale = min(scale, _decay_scale(a, t, alpha2))
        nsub = int(np.ceil((b - a) / max(scale, (b - a) / 8.0)))
        nsub = max(1, min(nsub, 8))
        seg = np.linspace(a, b, nsub + 1)
        edges.append(seg if k == last else seg[:-1])
        counts.append(nsub)
    return np.concatenate(edges), np.asarray(counts)


def _sum_lobes(f, first_zero, spacing, head_value, tol, t, alpha, alpha2=None):
    eps = _Epsilon()
    partial = head_value
    scale = abs(head_value)
    best_prev = None
    stable = 0
    dead = 0
    k = 0
    chunk = 16
    while k < _MAX_LOBES:
        zeros = first_zero + spacing * np.arange(k, k + chunk + 1)
        edges, counts = _lobe_chunk_edges(zeros, t, alpha, alpha2)
        sub = _gl_panel_sums(f, edges)
        idx = np.concatenate(([0], np.cumsum(counts)[:-1]))
        lobes = np.add.reduceat(sub, idx)
        for a_k in lobes:
            partial += float(a_k)
            scale = max(scale, abs(partial))
            if abs(a_k) <= 1e-18 * (1.0 + abs(partial)) + 1e-300:
                dead += 1
                if dead >= 3:
                    return partial, abs(float(a_k))
            else:
                dead = 0
            est = eps.add(partial)
            if best_prev is not None:
                delta = abs(est - best_prev)
                if delta <= max(0.25 * tol, 1e-14 * scale):
                    stable += 1
                    if stable >= 2:
                        return est, delta
                else:
                    stable = 0
            best_prev = est
        k += chunk
        # envelope cutoff: remaining lobes are numerically dead
        xi = float(zeros[-1])
        log_env = -t * xi**alpha
        if alpha2 is not None:
            log_env = max(log_env, -t * xi**alpha2)
        if log_env + 2.0 * np.log1p(xi) < -_MAX_LOG:
            return partial, abs(float(lobes[-1]))
    achieved = abs(eps.estimate - best_prev) if best_prev is not None else np.inf
    raise NumericsError("oscillatory lobe series did not converge", achieved)


def _gamma(z):
    from scipy.special import gamma

    return float(gamma(z))


# ---------------------------------------------------------------------------
# public entry points

def osc_transform(alpha, t, x, j, tol):
    """int_0^inf xi^j exp(-t xi^alpha) trig(x xi) dxi, trig=cos (j even) / sin (j odd).

    x must be >= 0; callers apply parity in x.  tol is an absolute tolerance.
    """
    if not (0.0 < alpha <= 2.0) or t <= 0.0 or x < 0.0:
        raise DomainError(f"osc_transform: bad (alpha={alpha}, t={t}, x={x})")
    if j not in (0, 1, 2):
        raise DomainError(f"osc_transform: derivative order {j} not supported")
    if x == 0.0:
        if j % 2 == 1:
            return 0.0
        return _gamma((j + 1.0) / alpha) / (alpha * t ** ((j + 1.0) / alpha))

    cutoff = ((_MAX_LOG + 3.0 * j) / t) ** (1.0 / alpha)
    first_zero = (0.5 * np.pi / x) if j % 2 == 0 else (np.pi / x)
    head_end = min(first_zero, cutoff)

    if j % 2 == 0:
        f = lambda xi: _plain_envelope(xi, alpha, t, j) * np.cos(x * xi)
    else:
        f = lambda xi: _plain_envelope(xi, alpha, t, j) * np.sin(x * xi)

    c = min(head_end, t ** (-1.0 / alpha), 1.0 / x)
    total = _series_segment(alpha, t, x, j, c)
    if c < head_end:
        n0 = min(max(8, int(2.0 * t * head_end**alpha) + 8), 256)
        edges = _phase_graded_edges(t, alpha, c, head_end, n0)
        v, err, ok = _head_integral(f, edges, 0.25 * tol)
        if not ok:
            raise NumericsError("head quadrature did not stabilise", err)
        total += v
    if first_zero >= cutoff:
        return total

    val, _ = _sum_lobes(f, first_zero, np.pi / x, total, tol, t, alpha)
    return val


def diff_transform(alpha, t, x, tol):
    """int_0^inf (exp(-t xi^alpha) - exp(-t xi^2)) cos(x xi) dxi for x >= 0."""
    if not (0.0 < alpha <= 2.0) or t <= 0.0 or x < 0.0:
        raise DomainError(f"diff_transform: bad (alpha={alpha}, t={t}, x={x})")
    if alpha == 2.0:
        return 0.0
    if x == 0.0:
        return _gamma(1.0 + 1.0 / alpha) * t ** (-1.0 / alpha) - _gamma(1.5) * t**-0.5

    cutoff = (_MAX_LOG / t) ** (1.0 / alpha)  # alpha < 2: the slower decay rules
    first_zero = 0.5 * np.pi / x
    head_end = min(first_zero, cutoff)
    f = lambda xi: _diff_envelope(xi, t, alpha) * np.cos(x * xi)

    c = min(head_end, t ** (-1.0 / alpha), t**-0.5, 1.0 / x)
    total = _series_segment_diff(alpha, t, x, c)
    if c < head_end:
        n1 = min(max(8, int(2.0 * t * head_end**alpha) + 8), 192)
        e1 = _phase_graded_edges(t, alpha, c, head_end, n1)
        n2 = min(max(8, int(2.0 * t * head_end**2) + 8), 192)
        e2 = _phase_graded_edges(t, 2.0, c, head_end, n2)
        edges = np.unique(np.concatenate([e1, e2]))
        v, err, ok = _head_integral(f, edges, 0.25 * tol)
        if not ok:
            raise NumericsError("head quadrature did not stabilise", err)
        total += v
    if first_zero >= cutoff:
        return total

    val, _ = _sum_lobes(f, first_zero, np.pi / x, total, tol, t, alpha, alpha2=2.0)
    return val


def osc_transform_many(alpha, t, xs, j, tol):
    xs = np.asarray(xs, dtype=float)
    out = np.empty(xs.shape, dtype=float)
    flat = xs.ravel()
    res = out.ravel()
    for i in range(flat.size):
        res[i] = osc_transform(alpha, t, float(flat[i]), j, tol)
    return out


def diff_transform_many(alpha, t, xs, tol):
    xs = np.asarray(xs, dtype=float)
    out = np.empty(xs.shape, dtype=float)
    flat = xs.ravel()
    res = out.ravel()
    for i in range(flat.size):
        res[i] = diff_transform(alpha, t, float(flat[i]), tol)
    return out

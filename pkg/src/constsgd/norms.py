"""l^s norms with even s, the dimension-adapted order s_d, and moment estimates."""
from __future__ import annotations

import math

import numpy as np

from .stats import EstimateWithCI


def _as_finite(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("input contains non-finite entries")
    return arr


def check_norm_order(s) -> int:
    if isinstance(s, bool) or not float(s).is_integer() or s < 2 or int(s) % 2:
        raise ValueError("s must be even >= 2")
    return int(s)


def check_moment_order(q) -> float:
    if not q >= 2:
        raise ValueError("q must be >= 2")
    return float(q)


def int_power(x: np.ndarray, p: int) -> np.ndarray:
    """``x**p`` for a positive integer ``p`` by repeated squaring."""
    result = None
    base = x
    while p:
        if p & 1:
            result = base if result is None else result * base
        p >>= 1
        if p:
            base = base * base
    return result


def elementwise_power(x, p: int) -> np.ndarray:
    """Coordinatewise power ``(x_1**p, ..., x_d**p)``."""
    if p < 1 or int(p) != p:
        raise ValueError("p must be a positive integer")
    return int_power(_as_finite(x), int(p))


def max_norm(x) -> float:
    x = _as_finite(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def ls_norm(x, s: int) -> float:
    """``(sum |x_i|**s) ** (1/s)`` for even ``s``.

    The largest magnitude is factored out first, so the power sum never
    overflows or underflows to zero.
    """
    s = check_norm_order(s)
    x = np.abs(_as_finite(x)).ravel()
    m = float(x.max()) if x.size else 0.0
    if m == 0.0:
        return 0.0
    return m * math.fsum(int_power(x / m, s)) ** (1.0 / s)


def ls_norms(rows, s: int, chunk: int = 1 << 20) -> np.ndarray:
    """Row-wise :func:`ls_norm` of a 2-d array, processed in chunks."""
    s = check_norm_order(s)
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    n, d = rows.shape
    out = np.empty(n)
    step = max(1, chunk // max(d, 1))
    buf = np.empty((min(step, n), d))
    sq = np.empty_like(buf)
    for start in range(0, n, step):
        stop = min(n, start + step)
        block, tmp = buf[:stop - start], sq[:stop - start]
        np.abs(rows[start:stop], out=block)
        m = block.max(axis=1)
        safe = np.where(m > 0, m, 1.0)
        block /= safe[:, None]
        # block <- block**s by repeated squaring, using tmp as the running base
        p, first = s, True
        np.copyto(tmp, block)
        while p:
            if p & 1:
                if first:
                    np.copyto(block, tmp)
                    first = False
                else:
                    block *= tmp
            p >>= 1
            if p:
                tmp *= tmp
        acc = block.sum(axis=1)
        out[start:stop] = np.where(m > 0, m * acc ** (1.0 / s), 0.0)
    return out


def dual_exponent(s: float) -> float:
    """Conjugate exponent ``s / (s - 1)``."""
    return s / (s - 1.0)


def lp_norms(rows, p: float) -> np.ndarray:
    """Row-wise l^p norms for a real ``p >= 1`` (used for dual exponents)."""
    rows = np.abs(np.asarray(rows, dtype=float))
    if rows.ndim == 1:
        rows = rows[None, :]
    m = rows.max(axis=1)
    safe = np.where(m > 0, m, 1.0)
    acc = ((rows / safe[:, None]) ** p).sum(axis=1)
    return np.where(m > 0, m * acc ** (1.0 / p), 0.0)


def choose_s_d(d: int) -> int:
    """Smallest even ``s = 2l`` with ``2l > ln d``; then ``d**(1/s) <= e``."""
    if int(d) != d or d < 1:
        raise ValueError("dimension must be a positive integer")
    log_d = math.log(d)
    ell = 1
    while 2 * ell <= log_d:
        ell += 1
    return 2 * ell


def lq_moment(samples, q: float, seed: int | None = None) -> EstimateWithCI:
    """Empirical ``(mean v**q) ** (1/q)`` with a delta-method standard error."""
    q = check_moment_order(q)
    v = _as_finite(samples).ravel()
    if v.size < 2:
        raise ValueError("need at least two samples")
    if np.any(v < 0):
        raise ValueError("samples must be nonnegative")
    top = float(v.max())
    if top == 0.0:
        return EstimateWithCI(0.0, 0.0, int(v.size), seed)
    # scaled by the largest sample so huge (diverging) values do not overflow
    powered = (v / top) ** q
    m = float(powered.mean())
    se_m = float(powered.std(ddof=1) / math.sqrt(v.size))
    point = top * m ** (1.0 / q)
    return EstimateWithCI(point, point / (q * m) * se_m, int(v.size), seed)

"""Closed-form step-size thresholds, contraction rates and error bounds.

Universal constants that the theory leaves unspecified are set to one unless a
caller passes calibrated values; every report carries the
``UP_TO_CONSTANTS`` flag so nothing downstream mistakes the levels for
sharp values. Logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .norms import check_moment_order, check_norm_order, choose_s_d

UP_TO_CONSTANTS = "up to universal constants"


class RangeError(ValueError):
    """A step size lies outside the range where a bound is valid."""


def _positive(**values) -> None:
    for name, v in values.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{name} must be positive and finite, got {v}")


def _check(mu, L, s, q) -> tuple[int, float]:
    _positive(mu=mu, L=L)
    return check_norm_order(s), check_moment_order(q)


def alpha_max(mu: float, L: float, s: int, q: float) -> float:
    """Largest step size with guaranteed contraction: ``2 mu / (max(q, s) L^2)``."""
    s, q = _check(mu, L, s, q)
    return 2.0 * mu / (max(q, s) * L * L)


def contraction_rate(mu: float, L: float, s: int, q: float, alpha: float) -> float:
    """``1 - 2 mu alpha + max(q, s) L^2 alpha^2`` for ``0 < alpha < alpha_max``."""
    limit = alpha_max(mu, L, s, q)
    if not 0 < alpha < limit:
        raise RangeError(f"alpha = {alpha} must lie in (0, alpha_max = {limit})")
    return 1.0 - 2.0 * mu * alpha + max(q, s) * L * L * alpha * alpha


def optimal_rate_step(mu: float, L: float, s: int, q: float) -> tuple[float, float]:
    """Minimiser of :func:`contraction_rate` over alpha and the minimal rate."""
    s, q = _check(mu, L, s, q)
    a = mu / (max(q, s) * L * L)
    return a, 1.0 - mu * mu / (max(q, s) * L * L)


def tilde_contraction_rate(mu: float, L: float, s: int, q: float, alpha: float) -> float:
    """``1 - 2 alpha mu + 7 (max(q, s) - 1) alpha^2 L^2`` for ``alpha < alpha_max / 7``."""
    limit = alpha_max(mu, L, s, q) / 7.0
    if not 0 < alpha < limit:
        raise RangeError(f"alpha = {alpha} must lie in (0, alpha_max / 7 = {limit})")
    return 1.0 - 2.0 * alpha * mu + 7.0 * (max(q, s) - 1.0) * alpha * alpha * L * L


def root_function(alpha: float, mu: float, L: float, s: int, q: float) -> float:
    """``-mu + c alpha (1 + L alpha)^(q-2)`` with ``c = (|q-s| + s - 1) L^2 / 2``."""
    c = (abs(q - s) + (s - 1)) * L * L / 2.0
    return -mu + c * alpha * (1.0 + L * alpha) ** (q - 2.0)


def alpha_root(mu: float, L: float, s: int, q: float) -> float:
    """Positive root of :func:`root_function` (bracket by doubling, then bisection)."""
    s, q = _check(mu, L, s, q)
    c = (abs(q - s) + (s - 1)) * L * L / 2.0
    lo = 0.0
    hi = mu / (2.0 * c)
    for _ in range(200):
        if root_function(hi, mu, L, s, q) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ArithmeticError("could not bracket the step-size root")
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if root_function(mid, mu, L, s, q) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def dimension_factor(d: int, s: int, q: float) -> float:
    """``d ** ((q / (q - 1)) (1 - 2 / s))``."""
    return d ** ((q / (q - 1.0)) * (1.0 - 2.0 / s))


def asgd_bound_terms(M: float, L: float, mu: float, d: int, s: int, q: float,
                     alpha: float, k: int, delta0: float) -> tuple[float, float, float]:
    """Variance, initialisation and constant-step bias terms of the averaged-SGD bound.

    ``s`` must equal ``choose_s_d(d)``; constants are set to one.
    """
    if s != choose_s_d(d):
        raise ValueError(f"s must equal choose_s_d(d) = {choose_s_d(d)}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if delta0 < 0:
        raise ValueError("delta0 must be nonnegative")
    r = contraction_rate(mu, L, s, q, alpha)
    m = max(q, s)
    variance = math.sqrt(s / k) * M * (L * math.sqrt(alpha * m) + 1.0)
    init = delta0 / (k * (1.0 - r))
    bias = M * M * m * alpha * dimension_factor(d, s, q)
    return variance, init, bias


def complexity(epsilon: float, M: float, L: float, mu: float, d: int, q: float, delta0: float,
               c1: float = 1.0, c2: float = 1.0, c3: float = 1.0,
               c_q: float = 1.0) -> tuple[float, float]:
    """Recommended ``(alpha, k)`` reaching averaged-SGD error ``epsilon``.

    ``alpha = min(eps / (3 c3 B), alpha_max / 7)`` and
    ``k = max(9 c1^2 c_q s_d V^2 alpha / eps^2, 3 c2 delta0 / (alpha eps))``
    (returned unrounded) with ``V = L M sqrt(max(q, s_d)) + M`` and
    ``B = M^2 max(q, s_d) d^((q/(q-1))(1 - 2/s_d))``.
    """
    _positive(epsilon=epsilon, M=M, L=L, mu=mu)
    if delta0 < 0:
        raise ValueError("delta0 must be nonnegative")
    s = choose_s_d(d)
    m = max(q, s)
    V = L * M * math.sqrt(m) + M
    B = M * M * m * dimension_factor(d, s, q)
    cap = alpha_max(mu, L, s, q) / 7.0
    alpha = min(epsilon / (3.0 * c3 * B), cap) if c3 > 0 else cap
    k_var = 9.0 * c1 * c1 * c_q * s * V * V * alpha / (epsilon * epsilon)
    k_init = 3.0 * c2 * delta0 / (alpha * epsilon)
    return alpha, max(k_var, k_init)


def fuk_nagaev_terms(z: float, k: float, alpha: float, d: int, q: float, M: float,
                     delta0: float) -> tuple[float, float, float]:
    """Initialisation, polynomial and exponential terms of the tail bound."""
    _positive(z=z, k=k, alpha=alpha)
    if d < 2:
        raise ValueError("d must be >= 2 so that ln d > 0")
    ld, lk = math.log(d), math.log(k)
    init = delta0 ** q / (k * alpha * z) ** q
    poly = ld ** (1.5 * q) * lk ** (1.0 + 2.0 * q) * M ** q / (
        z ** q * k ** (q - 1.0) * alpha ** (q / 2.0 - 1.0))
    expo = math.exp(-k * z * z * alpha ** (1.0 - 2.0 / q) / (M * M * ld))
    return init, poly, expo


def fuk_nagaev_bound(z: float, k: float, alpha: float, d: int, q: float, M: float,
                     delta0: float, fitted_constant: float = 1.0) -> float:
    """``C * (init + poly) + exponential``; the exponential's constant is one."""
    init, poly, expo = fuk_nagaev_terms(z, k, alpha, d, q, M, delta0)
    return fitted_constant * (init + poly) + expo


def high_prob_radius_terms(delta: float, k: float, alpha: float, d: int, q: float, M: float,
                           delta0: float) -> tuple[float, float, float]:
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    _positive(k=k, alpha=alpha)
    if d < 2:
        raise ValueError("d must be >= 2 so that ln d > 0")
    ld, lk = math.log(d), math.log(k)
    root = delta ** (1.0 / q)
    first = delta0 ** q / (k * alpha * root)
    second = ld ** 1.5 * lk ** (1.0 / q + 2.0) * M / (
        k ** (1.0 - 1.0 / q) * alpha ** (0.5 - 1.0 / q) * root)
    third = math.sqrt(M * M * ld * math.log(1.0 / delta) / (k * alpha ** (1.0 - 2.0 / q)))
    return first, second, third


def high_prob_radius(delta: float, k: float, alpha: float, d: int, q: float, M: float,
                     delta0: float) -> float:
    """Radius exceeded by the averaged-SGD sup-norm error with probability at most ``delta``."""
    return sum(high_prob_radius_terms(delta, k, alpha, d, q, M, delta0))


@dataclass
class BoundReport:
    inputs: dict
    alpha_max: float
    r: float | None
    r_tilde: float | None
    alpha_root: float
    asgd_terms: tuple | None
    complexity: tuple | None
    fn_bound: float | None
    hp_radius: float | None
    flags: tuple = (UP_TO_CONSTANTS,)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["flags"] = list(self.flags)
        return out


def bound_report(mu: float, L: float, M: float, d: int, q: float, s: int | None = None,
                 alpha: float | None = None, k: int | None = None, delta0: float = 0.0,
                 epsilon: float | None = None, z: float | None = None,
                 delta: float | None = None) -> BoundReport:
    """Evaluate every bound whose inputs are available."""
    s = choose_s_d(d) if s is None else check_norm_order(s)
    inputs = dict(mu=mu, L=L, M=M, d=d, q=q, s=s, alpha=alpha, k=k, delta0=delta0,
                  epsilon=epsilon, z=z, delta=delta)
    amax = alpha_max(mu, L, s, q)
    r = r_tilde = terms = fn = hp = comp = None
    if alpha is not None:
        r = contraction_rate(mu, L, s, q, alpha)
        if alpha < amax / 7.0:
            r_tilde = tilde_contraction_rate(mu, L, s, q, alpha)
        if k is not None:
            if s == choose_s_d(d):
                terms = asgd_bound_terms(M, L, mu, d, s, q, alpha, k, delta0)
            if z is not None and d >= 2:
                fn = fuk_nagaev_bound(z, k, alpha, d, q, M, delta0)
            if delta is not None and d >= 2:
                hp = high_prob_radius(delta, k, alpha, d, q, M, delta0)
    if epsilon is not None:
        comp = complexity(epsilon, M, L, mu, d, q, delta0)
    return BoundReport(inputs, amax, r, r_tilde, alpha_root(mu, L, s, q), terms, comp, fn, hp)

"""Deterministic and exact-enumeration checks of the moment inequalities.

The Taylor-remainder bound is evaluated pointwise in extended precision.
The moment inequalities are evaluated on finite-support distributions whose
expectations are finite sums, so there is no Monte Carlo slack: a single
violation beyond the rounding slack is a genuine counterexample.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .norms import check_moment_order, check_norm_order, choose_s_d, ls_norm, ls_norms
from .problems import FiniteSupportDist

TAYLOR_SLACK = 1e-12
EXACT_SLACK = 1e-10
MAX_PRODUCT_OUTCOMES = 256

_LD = np.longdouble


@dataclass
class CheckSummary:
    """Outcome of one batch of inequality checks."""

    name: str
    instances: int
    violations: int
    worst_ratio: float
    seed: int | None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"name": self.name, "instances": self.instances, "violations": self.violations,
                "worst_ratio": self.worst_ratio, "seed": self.seed, "passed": self.passed,
                "details": self.details}


def _slack_ok(lhs: float, rhs: float, rel: float) -> bool:
    return lhs <= rhs + rel * max(1.0, abs(rhs))


def _ratio(lhs, rhs) -> float:
    if rhs > 0:
        return float(lhs / rhs)
    return 0.0 if lhs <= 0 else math.inf


# ---------------------------------------------------------------- Taylor remainder

def taylor_remainder_batch(x, z, alpha, s, q) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the second-order remainder bound for ``a -> |x - a z|_s^q``, row-wise.

    ``x`` and ``z`` have shape (n, d); ``alpha``, ``s`` and ``q`` broadcast to
    (n,). Everything is evaluated in ``longdouble`` so that the cancellation
    in the left-hand side stays far below the comparison slack.
    """
    x = np.atleast_2d(np.asarray(x, dtype=_LD))
    z = np.atleast_2d(np.asarray(z, dtype=_LD))
    n = x.shape[0]
    alpha = np.broadcast_to(np.asarray(alpha, dtype=_LD), (n,))
    s_int = np.broadcast_to(np.asarray(s), (n,)).astype(int)
    q = np.broadcast_to(np.asarray(q, dtype=_LD), (n,))
    sc = s_int.astype(_LD)[:, None]

    def norm(v):
        return np.sum(np.abs(v) ** sc, axis=1) ** (1 / sc[:, 0])

    nx, nz = norm(x), norm(z)
    nxz = norm(x - alpha[:, None] * z)
    inner = np.sum(x ** (sc - 1) * z, axis=1)
    # |x|^(q-s) <x^(s-1), z> has total degree q - 1 > 0 in x, so it vanishes at x = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        linear = np.where(nx > 0, nx ** (q - s_int) * inner, 0)
    lhs = np.abs(nxz ** q - nx ** q + q * alpha * linear)
    const = q * alpha ** 2 / 2 * (np.abs(q - s_int) + (s_int - 1))
    rhs = const * (nx + alpha * nz) ** (q - 2) * nz ** 2
    return lhs, rhs


def check_taylor_remainder(x, z, alpha: float, s: int, q: float) -> bool:
    """True iff ``LHS <= RHS + 1e-12 max(1, RHS)`` for one tuple."""
    x = np.asarray(x, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if x.shape != z.shape:
        raise ValueError("x and z must have the same dimension")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z)) and math.isfinite(alpha)):
        raise ValueError("inputs must be finite")
    lhs, rhs = taylor_remainder_batch(x, z, alpha, check_norm_order(s), check_moment_order(q))
    return _slack_ok(float(lhs[0]), float(rhs[0]), TAYLOR_SLACK)


def random_taylor_tuples(n: int, rng: np.random.Generator, d_max: int = 16):
    """Random ``(x, z, alpha, s, q)`` with d <= d_max, s in {2,4,6,8}, q in [2, 8].

    Rows are zero-padded to ``d_max`` (padding leaves every norm unchanged).
    About 1% of the rows have ``z = 0`` and another 1% have ``x = 0``.
    """
    d = rng.integers(1, d_max + 1, n)
    mask = np.arange(d_max)[None, :] < d[:, None]
    scale_x = 10.0 ** rng.uniform(-1.0, 0.5, (n, 1))
    scale_z = 10.0 ** rng.uniform(-1.0, 0.5, (n, 1))
    x = rng.uniform(-1, 1, (n, d_max)) * scale_x * mask
    z = rng.uniform(-1, 1, (n, d_max)) * scale_z * mask
    x[rng.random(n) < 0.01] = 0.0
    z[rng.random(n) < 0.01] = 0.0
    alpha = 10.0 ** rng.uniform(-3.0, 0.0, n)
    s = rng.choice([2, 4, 6, 8], n)
    q = rng.uniform(2.0, 8.0, n)
    return x, z, alpha, s, q


def run_taylor_check(n: int = 100_000, seed: int = 0, chunk: int = 20_000) -> CheckSummary:
    rng = np.random.default_rng(seed)
    x, z, alpha, s, q = random_taylor_tuples(n, rng)
    violations, worst = 0, 0.0
    for lo in range(0, n, chunk):
        sl = slice(lo, lo + chunk)
        lhs, rhs = taylor_remainder_batch(x[sl], z[sl], alpha[sl], s[sl], q[sl])
        bad = lhs > rhs + TAYLOR_SLACK * np.maximum(1, np.abs(rhs))
        violations += int(bad.sum())
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0))
        worst = max(worst, float(r.max()))
    return CheckSummary("taylor", n, violations, worst, seed,
                        {"slack": TAYLOR_SLACK, "d_max": 16, "s": [2, 4, 6, 8], "q_range": [2, 8]})


# ---------------------------------------------------------------- Rio-type inequality

def _exact(v) -> tuple:
    return tuple(Fraction(c) for c in np.asarray(v).ravel().tolist())


def conditional_mean_zero(joint: FiniteSupportDist) -> bool:
    """Exact test of ``E[y | x] = 0`` on a distribution of ``(x, y)`` pairs."""
    groups: dict = {}
    for (x, y), p in joint.atoms:
        key = _exact(x)
        acc = groups.setdefault(key, [Fraction(0)] * len(_exact(y)))
        for j, c in enumerate(_exact(y)):
            acc[j] += p * c
    return all(c == 0 for acc in groups.values() for c in acc)


@dataclass(frozen=True)
class RioSides:
    lhs: float
    rhs_general: float
    rhs_conditional: float | None

    def holds(self, rel: float = EXACT_SLACK) -> bool:
        ok = _slack_ok(self.lhs, self.rhs_general, rel)
        if self.rhs_conditional is not None:
            ok = ok and _slack_ok(self.lhs, self.rhs_conditional, rel)
        return ok


def rio_sides(joint: FiniteSupportDist, s: int, q: float) -> RioSides:
    """Exact squared L^q norms of both Rio-type bounds for a joint law of ``(x, y)``.

    The mean-zero display is evaluated only when ``E[y | x] = 0`` holds exactly.
    """
    s = check_norm_order(s)
    q = check_moment_order(q)

    def lq_sq(fn):
        m = joint.expect(fn)
        return m ** (2.0 / q) if m > 0 else 0.0

    def xs(atom):
        return np.asarray(atom[0], dtype=float)

    def ys(atom):
        return np.asarray(atom[1], dtype=float)

    lhs = lq_sq(lambda a: ls_norm(xs(a) + ys(a), s) ** q)
    x_sq = lq_sq(lambda a: ls_norm(xs(a), s) ** q)
    y_sq = lq_sq(lambda a: ls_norm(ys(a), s) ** q)

    def cross(a):
        x, y = xs(a), ys(a)
        nx = ls_norm(x, s)
        if nx == 0.0:
            return 0.0
        return nx ** (q - s) * math.fsum((x ** (s - 1) * y).tolist())

    m = max(q, s) - 1.0
    if x_sq > 0:
        middle = 2.0 * x_sq ** ((2.0 - q) / 2.0) * joint.expect(cross)
    else:
        middle = 0.0
    general = x_sq + middle + m * y_sq
    conditional = x_sq + m * y_sq if conditional_mean_zero(joint) else None
    return RioSides(lhs, general, conditional)


def check_rio_exact(joint: FiniteSupportDist, s: int, q: float) -> bool:
    """True iff every applicable display holds within 1e-10 relative slack."""
    return rio_sides(joint, s, q).holds()


def _rational_probs(rng, n: int) -> list:
    w = rng.integers(1, 10, n).tolist()
    total = sum(w)
    return [Fraction(v, total) for v in w]


def _rational_vector(rng, d: int) -> tuple:
    num = rng.integers(-6, 7, d).tolist()
    den = rng.integers(1, 4, d).tolist()
    return tuple(Fraction(a, b) for a, b in zip(num, den))


def random_rio_instance(rng: np.random.Generator, d_max: int = 3, support_max: int = 4,
                        mean_zero: bool | None = None) -> FiniteSupportDist:
    """Random joint law of ``(x, y)`` with rational atoms and probabilities.

    With ``mean_zero`` the perturbation ``y`` is symmetrised given ``x`` so
    that ``E[y | x] = 0`` exactly.
    """
    d = int(rng.integers(1, d_max + 1))
    if mean_zero is None:
        mean_zero = bool(rng.random() < 0.5)
    if mean_zero:
        n_x = int(rng.integers(1, support_max // 2 + 1))
        probs = _rational_probs(rng, n_x)
        atoms = []
        for p in probs:
            x = _rational_vector(rng, d)
            y = _rational_vector(rng, d)
            neg = tuple(-c for c in y)
            atoms += [((x, y), p / 2), ((x, neg), p / 2)]
    else:
        n = int(rng.integers(1, support_max + 1))
        atoms = [((_rational_vector(rng, d), _rational_vector(rng, d)), p)
                 for p in _rational_probs(rng, n)]
    return FiniteSupportDist(tuple(atoms))


def run_rio_check(n: int = 1000, seed: int = 0) -> CheckSummary:
    rng = np.random.default_rng(seed)
    violations, worst, conditional = 0, 0.0, 0
    for _ in range(n):
        joint = random_rio_instance(rng)
        s = int(rng.choice([2, 4]))
        q = int(rng.choice([2, 3, 4]))
        sides = rio_sides(joint, s, q)
        violations += not sides.holds()
        worst = max(worst, _ratio(sides.lhs, sides.rhs_general))
        if sides.rhs_conditional is not None:
            conditional += 1
            worst = max(worst, _ratio(sides.lhs, sides.rhs_conditional))
    return CheckSummary("rio", n, violations, worst, seed,
                        {"slack": EXACT_SLACK, "conditional_instances": conditional,
                         "d_max": 3, "support_max": 4, "s": [2, 4], "q": [2, 3, 4]})


# ---------------------------------------------------------------- maximal inequality

@dataclass(frozen=True)
class MaximalSides:
    lhs: float
    rhs: float

    def holds(self, rel: float = EXACT_SLACK) -> bool:
        return _slack_ok(self.lhs, self.rhs, rel)


def maximal_sides(vectors, q: float) -> MaximalSides:
    """Exact squared L^q norm of the centred sup-norm sum and the maximal bound."""
    q = check_moment_order(q)
    vectors = list(vectors)
    if not vectors:
        raise ValueError("need at least one vector distribution")
    outcomes = math.prod(len(v.atoms) for v in vectors)
    if outcomes > MAX_PRODUCT_OUTCOMES:
        raise ValueError(f"joint support has {outcomes} outcomes; at most "
                         f"{MAX_PRODUCT_OUTCOMES} can be enumerated")
    dims = {len(_exact(a)) for v in vectors for a, _ in v.atoms}
    if len(dims) != 1:
        raise ValueError("all vectors must share one dimension")
    d = dims.pop()
    centred = []
    for v in vectors:
        exact = [(_exact(a), p) for a, p in v.atoms]
        mean = [sum(p * a[j] for a, p in exact) for j in range(d)]
        centred.append([([a[j] - mean[j] for j in range(d)], p) for a, p in exact])

    def sup(vals):
        return max(abs(float(c)) for c in vals)

    terms = []
    for combo in itertools.product(*centred):
        p = math.prod(float(pp) for _, pp in combo)
        total = [sum(a[j] for a, _ in combo) for j in range(d)]
        terms.append(p * sup(total) ** q)
    m = math.fsum(terms)
    lhs = m ** (2.0 / q) if m > 0 else 0.0
    rhs_sum = 0.0
    for dist in centred:
        mi = math.fsum(float(p) * sup(a) ** q for a, p in dist)
        rhs_sum += mi ** (2.0 / q) if mi > 0 else 0.0
    factor = math.e ** 2 * (max(q, math.log(d)) - 1.0)
    return MaximalSides(lhs, factor * rhs_sum)


def check_maximal_inequality_exact(vectors, q: float) -> bool:
    """True iff the maximal inequality holds within 1e-10 relative slack."""
    return maximal_sides(vectors, q).holds()


def random_vector_dist(rng: np.random.Generator, d: int, support_max: int = 4) -> FiniteSupportDist:
    n = int(rng.integers(1, support_max + 1))
    return FiniteSupportDist(tuple((_rational_vector(rng, d), p)
                                   for p in _rational_probs(rng, n)))


def run_maximal_check(n: int = 200, seed: int = 0) -> CheckSummary:
    rng = np.random.default_rng(seed)
    violations, worst = 0, 0.0
    for _ in range(n):
        d = int(rng.choice([2, 4, 8]))
        q = int(rng.choice([2, 3, 4]))
        count = int(rng.choice([2, 3]))
        sides = maximal_sides([random_vector_dist(rng, d) for _ in range(count)], q)
        violations += not sides.holds()
        worst = max(worst, _ratio(sides.lhs, sides.rhs))
    return CheckSummary("maximal", n, violations, worst, seed,
                        {"slack": EXACT_SLACK, "d": [2, 4, 8], "q": [2, 3, 4], "n": [2, 3]})


# ---------------------------------------------------------------- norm equivalence

def norm_equivalence_violations(rows, s: int | None = None) -> tuple[int, float, float]:
    """Count rows breaking ``max <= |x|_s <= e max``; also the extreme ratios."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    s = choose_s_d(rows.shape[1]) if s is None else s
    ls = ls_norms(rows, s)
    mx = np.abs(rows).max(axis=1)
    bad = (mx > ls) | (ls > math.e * mx)
    nz = mx > 0
    ratio = ls[nz] / mx[nz]
    lo = float(ratio.min()) if ratio.size else 1.0
    hi = float(ratio.max()) if ratio.size else 1.0
    return int(bad.sum()), lo, hi


def check_norm_equivalence(d: int, n: int, seed: int = 0, chunk: int = 1 << 22) -> CheckSummary:
    """Exact sandwich on ``n`` random vectors in dimension ``d`` (no slack).

    Vectors are uniform on the cube with a per-vector scale spread over
    100 orders of magnitude to exercise the overflow-safe evaluation.
    """
    rng = np.random.default_rng([seed, d])
    s = choose_s_d(d)
    step = max(1, chunk // d)
    violations, lo, hi = 0, math.inf, 0.0
    for start in range(0, n, step):
        m = min(step, n - start)
        rows = rng.random((m, d))
        rows -= 0.5
        rows *= 10.0 ** rng.uniform(-50, 50, (m, 1))
        v, a, b = norm_equivalence_violations(rows, s)
        violations += v
        lo, hi = min(lo, a), max(hi, b)
    return CheckSummary(f"norm_equivalence_d{d}", n, violations, hi / math.e, seed,
                        {"d": d, "s": s, "min_ratio": lo, "max_ratio": hi,
                         "bound": math.e, "d_pow_1_over_s": d ** (1.0 / s)})


def run_norm_equivalence(n: int = 100_000, dims=(2, 10, 100, 10_000), seed: int = 0) -> CheckSummary:
    parts = [check_norm_equivalence(d, n, seed) for d in dims]
    return CheckSummary("norm_equivalence", n * len(dims), sum(p.violations for p in parts),
                        max(p.worst_ratio for p in parts), seed,
                        {p.details["d"]: p.details for p in parts})

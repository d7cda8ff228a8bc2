"""Monte Carlo estimates, scaling fits and long-run covariance estimation."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats as sps


@dataclass(frozen=True)
class EstimateWithCI:
    """A Monte Carlo point estimate with its standard error."""

    point: float
    se: float
    replications: int
    seed: int | None = None

    def __post_init__(self):
        if self.se < 0:
            raise ValueError("standard error must be nonnegative")
        if self.replications < 2:
            raise ValueError("an estimate needs at least two replications")

    @property
    def relative_se(self) -> float:
        return self.se / abs(self.point) if self.point != 0 else (0.0 if self.se == 0 else math.inf)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScalingFit:
    """Log-log slope fit checked against a target exponent.

    A fit passes only if the slope is within ``tolerance`` of the target and
    its standard error is below ``tolerance / 2``, so under-powered fits fail.
    """

    grid: list
    fitted_slope: float
    slope_se: float
    target_slope: float
    tolerance: float
    ses: list = field(default_factory=list)
    seed: int | None = None

    @property
    def slope_ok(self) -> bool:
        return abs(self.fitted_slope - self.target_slope) <= self.tolerance

    @property
    def powered(self) -> bool:
        return self.slope_se < self.tolerance / 2

    @property
    def passed(self) -> bool:
        return bool(self.slope_ok and self.powered)

    def to_dict(self) -> dict:
        return {
            "grid": [[float(x), float(y)] for x, y in self.grid],
            "ses": [float(s) for s in self.ses],
            "fitted_slope": self.fitted_slope,
            "slope_se": self.slope_se,
            "target_slope": self.target_slope,
            "tolerance": self.tolerance,
            "slope_ok": self.slope_ok,
            "powered": self.powered,
            "pass": self.passed,
            "seed": self.seed,
        }


def log_slope(xs, ys, ses=None) -> tuple[float, float]:
    """Slope of ``log y`` against ``log x`` and its standard error.

    With standard errors for every point the fit is weighted least squares
    with delta-method variances ``(se/y)^2``; otherwise ordinary least squares
    with the residual variance.
    """
    lx = np.log(np.asarray(xs, dtype=float))
    ys = np.asarray(ys, dtype=float)
    ly = np.log(ys)
    if ses is not None and np.all(np.asarray(ses) > 0):
        var = (np.asarray(ses, dtype=float) / ys) ** 2
        w = 1.0 / var
        xbar = np.sum(w * lx) / np.sum(w)
        sxx = np.sum(w * (lx - xbar) ** 2)
        slope = np.sum(w * (lx - xbar) * ly) / sxx
        return float(slope), float(math.sqrt(1.0 / sxx))
    xbar = lx.mean()
    sxx = np.sum((lx - xbar) ** 2)
    slope = np.sum((lx - xbar) * (ly - ly.mean())) / sxx
    n = len(lx)
    if n <= 2:
        return float(slope), 0.0
    resid = ly - ly.mean() - slope * (lx - xbar)
    return float(slope), float(math.sqrt(np.sum(resid ** 2) / (n - 2) / sxx))


def fit_scaling(xs, estimates, target, tolerance, ses=None, seed=None) -> ScalingFit:
    slope, se = log_slope(xs, estimates, ses)
    return ScalingFit(
        grid=[(float(x), float(y)) for x, y in zip(xs, estimates)],
        fitted_slope=slope,
        slope_se=se,
        target_slope=float(target),
        tolerance=float(tolerance),
        ses=[float(s) for s in (ses if ses is not None else [])],
        seed=seed,
    )


def mean_with_se(values, seed=None) -> EstimateWithCI:
    v = np.asarray(values, dtype=float)
    return EstimateWithCI(float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v))), len(v), seed)


def binomial_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Clopper-Pearson interval; one-sided at the boundaries."""
    a = 1.0 - level
    if successes == 0:
        return 0.0, float(1.0 - a ** (1.0 / trials))
    if successes == trials:
        return float(a ** (1.0 / trials)), 1.0
    lo = sps.beta.ppf(a / 2, successes, trials - successes + 1)
    hi = sps.beta.ppf(1 - a / 2, successes + 1, trials - successes)
    return float(lo), float(hi)


def ks_critical_value(replications: int) -> float:
    """Asymptotic 1% critical value of the one-sample KS statistic."""
    return 1.63 / math.sqrt(replications)


def ks_normal(values, variance: float) -> float:
    return float(sps.kstest(np.asarray(values) / math.sqrt(variance), "norm").statistic)


@dataclass(frozen=True)
class LongRunCovariance:
    matrix: np.ndarray
    bandwidth: int
    sample_length: int

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "bandwidth": self.bandwidth,
                "sample_length": self.sample_length}


def bartlett_weights(bandwidth: int) -> np.ndarray:
    """Weights ``1 - h/(bandwidth+1)`` for lags ``h = 0..bandwidth``."""
    h = np.arange(bandwidth + 1)
    return 1.0 - h / (bandwidth + 1.0)


def lagged_cross_products(x: np.ndarray, max_lag: int) -> np.ndarray:
    """``out[h, i, j] = sum_t x[t, i] * x[t + h, j]`` for ``h = 0..max_lag``."""
    T, d = x.shape
    n = 1 << int(math.ceil(math.log2(T + max_lag + 1)))
    f = np.fft.rfft(x, n=n, axis=0)
    out = np.empty((max_lag + 1, d, d))
    for i in range(d):
        cc = np.fft.irfft(np.conj(f[:, i:i + 1]) * f, n=n, axis=0)
        out[:, i, :] = cc[:max_lag + 1]
    return out


class LongRunCovarianceAccumulator:
    """Bartlett lag-window estimate pooled over several trajectories.

    Each trajectory is centred at ``center`` (for example a grand mean over
    all replications) rather than its own mean.
    """

    def __init__(self, d: int, bandwidth: int, center=None):
        if bandwidth < 1:
            raise ValueError("bandwidth must be at least 1")
        self.bandwidth = int(bandwidth)
        self.center = None if center is None else np.asarray(center, dtype=float)
        self.sums = np.zeros((bandwidth + 1, d, d))
        self.length = 0
        self.count = 0

    def add(self, trajectory: np.ndarray) -> None:
        x = np.asarray(trajectory, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        T = x.shape[0]
        if T < 10 * self.bandwidth:
            raise ValueError(f"trajectory length {T} is shorter than 10 x bandwidth "
                             f"({10 * self.bandwidth})")
        center = x.mean(axis=0) if self.center is None else self.center
        self.sums += lagged_cross_products(x - center, self.bandwidth)
        self.length += T
        self.count += 1

    def result(self) -> LongRunCovariance:
        gamma = self.sums / self.length
        w = bartlett_weights(self.bandwidth)
        xi = gamma[0].copy()
        for h in range(1, self.bandwidth + 1):
            xi += w[h] * (gamma[h] + gamma[h].T)
        xi = 0.5 * (xi + xi.T)
        return LongRunCovariance(xi, self.bandwidth, self.length // max(self.count, 1))


def default_bandwidth(length: int) -> int:
    """``floor(length ** (1/3))`` computed exactly on integers."""
    b = int(round(length ** (1.0 / 3.0)))
    while b ** 3 > length:
        b -= 1
    while (b + 1) ** 3 <= length:
        b += 1
    return b


def estimate_long_run_cov(trajectory, bandwidth: int | None = None, center=None) -> LongRunCovariance:
    """Bartlett lag-window estimate of the long-run covariance of a trajectory.

    ``bandwidth`` defaults to ``floor(T ** (1/3))``.
    """
    x = np.asarray(trajectory, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if bandwidth is None:
        bandwidth = default_bandwidth(x.shape[0])
    acc = LongRunCovarianceAccumulator(x.shape[1], bandwidth, center)
    acc.add(x)
    return acc.result()

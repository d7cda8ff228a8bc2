"""Stochastic objectives: linear regression and a separable tanh-perturbed problem.

Both expose the gradient oracle, the population gradient, counter-based noise
sampling and Monte Carlo estimates of the constants (mu, L, M) that drive the
theory bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import kernels
from .kernels import KernelProblem, LAW_CODES
from .norms import check_moment_order, check_norm_order, dual_exponent, lp_norms, lq_moment, ls_norms
from .streams import stream_key


class MomentError(ValueError):
    """A required moment of the sampling law does not exist."""


@dataclass(frozen=True)
class Law:
    """Sampling law of a coordinate: ``scale`` times a unit-scale variate.

    ``gaussian`` and ``sub_exponential`` (Laplace) variates have unit
    variance; ``student_t`` variates are unstandardised t(nu); ``constant``
    variates are identically one.
    """

    name: str
    nu: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.name not in LAW_CODES:
            raise ValueError(f"unsupported law {self.name!r}; expected one of {sorted(LAW_CODES)}")
        if self.name == "student_t":
            if self.nu is None or not self.nu > 0:
                raise ValueError("student_t needs degrees of freedom nu > 0")
        if not (self.scale >= 0 and math.isfinite(self.scale)):
            raise ValueError("law scale must be finite and nonnegative")

    @property
    def unit_variance(self) -> float:
        if self.name == "student_t":
            return self.nu / (self.nu - 2.0) if self.nu > 2 else math.inf
        return 1.0

    def has_moment(self, p: float) -> bool:
        return self.name != "student_t" or p < self.nu

    def to_dict(self) -> dict:
        out = {"name": self.name, "scale": self.scale}
        if self.nu is not None:
            out["nu"] = self.nu
        return out


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def gershgorin_gap(sigma) -> float:
    """``min_i (sigma_ii - sum_{j != i} |sigma_ij|)``."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("sigma must be a square matrix")
    off = np.abs(sigma).sum(axis=1) - np.abs(np.diag(sigma))
    return float(np.min(np.diag(sigma) - off))


def tridiagonal_sigma(d: int, diagonal: float = 1.0, off_diagonal: float = 0.2) -> np.ndarray:
    return (np.diag(np.full(d, diagonal)) + np.diag(np.full(d - 1, off_diagonal), 1)
            + np.diag(np.full(d - 1, off_diagonal), -1))


@dataclass(frozen=True, eq=False)
class LinearRegressionSpec:
    """``y = x'beta_star + eps`` with ``x = factor @ w`` and i.i.d. ``w_j``.

    The covariate covariance is ``sigma = factor @ factor.T * var(w_j)``.
    """

    d: int
    factor: np.ndarray
    beta_star: np.ndarray
    covariate_law: Law = field(default_factory=lambda: Law("gaussian"))
    noise_law: Law = field(default_factory=lambda: Law("gaussian"))

    kind = "regression"

    def __post_init__(self):
        object.__setattr__(self, "factor", _readonly(self.factor))
        object.__setattr__(self, "beta_star", _readonly(self.beta_star))
        d = self.d
        if self.factor.shape != (d, d) or self.beta_star.shape != (d,):
            raise ValueError("factor must be d x d and beta_star of length d")
        if not (np.all(np.isfinite(self.factor)) and np.all(np.isfinite(self.beta_star))):
            raise ValueError("factor and beta_star must be finite")
        if self.covariate_law.name == "constant" and d != 1:
            raise ValueError("constant covariates are only supported for d = 1")
        if self.covariate_law.name == "student_t" and self.covariate_law.nu <= 2:
            raise MomentError("student_t covariates need nu > 2 for a finite covariance")
        if self.noise_law.name not in ("gaussian", "student_t"):
            raise ValueError("regression noise law must be gaussian or student_t")
        if gershgorin_gap(self.sigma) <= 0:
            raise ValueError("sigma must be strictly diagonally dominant (positive Gershgorin gap)")

    @classmethod
    def from_sigma(cls, sigma, beta_star=None, covariate_law: Law | None = None,
                   noise_law: Law | None = None) -> "LinearRegressionSpec":
        sigma = np.asarray(sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ValueError("sigma must be a square matrix")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-14):
            raise ValueError("sigma must be symmetric")
        covariate_law = covariate_law or Law("gaussian")
        d = sigma.shape[0]
        if not math.isfinite(covariate_law.unit_variance):
            raise MomentError("student_t covariates need nu > 2 for a finite covariance")
        if covariate_law.name == "constant":
            factor = np.sqrt(sigma)
        elif np.array_equal(sigma, np.eye(d)) and covariate_law.unit_variance == 1.0:
            factor = np.eye(d)
        else:
            factor = np.linalg.cholesky(sigma / covariate_law.unit_variance)
        beta_star = np.zeros(d) if beta_star is None else beta_star
        return cls(d, factor, beta_star, covariate_law, noise_law or Law("gaussian"))

    @property
    def sigma(self) -> np.ndarray:
        return self.factor @ self.factor.T * self.covariate_law.unit_variance

    @cached_property
    def kernel_problem(self) -> KernelProblem:
        cov, noise = self.covariate_law, self.noise_law
        return KernelProblem(
            kind=kernels.KIND_REGRESSION, d=self.d,
            factor=np.ascontiguousarray(self.factor),
            identity=bool(np.array_equal(self.factor, np.eye(self.d))),
            beta_star=np.ascontiguousarray(self.beta_star),
            cov_law=LAW_CODES[cov.name], cov_nu=float(cov.nu or 0.0),
            cov_nu_int=kernels.integer_dof(cov.nu),
            noise_law=LAW_CODES[noise.name], noise_nu=float(noise.nu or 0.0),
            noise_nu_int=kernels.integer_dof(noise.nu), noise_scale=float(noise.scale),
            rho=0.0, offset=0.0,
        )

    def check_moments(self, q: float) -> None:
        cov = self.covariate_law
        if cov.name == "student_t" and cov.nu <= 2 * q:
            raise MomentError(f"student_t covariates need nu > 2q = {2 * q}; got nu = {cov.nu}")
        if not self.noise_law.has_moment(q):
            raise MomentError(f"student_t noise needs nu > q = {q}; got nu = {self.noise_law.nu}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "d": self.d, "sigma": self.sigma.tolist(),
                "beta_star": self.beta_star.tolist(),
                "covariate_law": self.covariate_law.to_dict(),
                "noise_law": self.noise_law.to_dict()}


@dataclass(frozen=True, eq=False)
class TanhPerturbedSpec:
    """Separable objective with gradient ``beta + rho*(tanh(beta + c) - tanh(c)) - xi``.

    ``c`` is ``offset``. The minimiser is 0 for every ``c`` and the coordinate
    maps have slopes in ``[1, 1 + rho]``; a nonzero ``c`` breaks the odd
    symmetry of the gradient so the third derivative at the minimiser is
    nonzero.
    """

    d: int
    rho: float = 1.0
    noise_law: Law = field(default_factory=lambda: Law("gaussian"))
    offset: float = 0.0

    kind = "tanh"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if not (self.rho >= 0 and math.isfinite(self.rho)):
            raise ValueError("rho must be finite and nonnegative")
        if not math.isfinite(self.offset):
            raise ValueError("offset must be finite")
        if self.noise_law.name not in ("gaussian", "sub_exponential", "student_t"):
            raise ValueError("tanh noise law must be gaussian, sub_exponential or student_t")
        if self.noise_law.name == "student_t" and self.noise_law.nu <= 1:
            raise MomentError("student_t noise needs nu > 1 for a mean")

    @property
    def beta_star(self) -> np.ndarray:
        return np.zeros(self.d)

    @cached_property
    def kernel_problem(self) -> KernelProblem:
        noise = self.noise_law
        return KernelProblem(
            kind=kernels.KIND_TANH, d=self.d, factor=np.eye(self.d), identity=True,
            beta_star=np.zeros(self.d), cov_law=0, cov_nu=0.0, cov_nu_int=0,
            noise_law=LAW_CODES[noise.name], noise_nu=float(noise.nu or 0.0),
            noise_nu_int=kernels.integer_dof(noise.nu), noise_scale=float(noise.scale),
            rho=float(self.rho), offset=float(self.offset),
        )

    def check_moments(self, q: float) -> None:
        if not self.noise_law.has_moment(q):
            raise MomentError(f"student_t noise needs nu > q = {q}; got nu = {self.noise_law.nu}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "d": self.d, "rho": self.rho, "offset": self.offset,
                "noise_law": self.noise_law.to_dict()}


ProblemSpec = LinearRegressionSpec | TanhPerturbedSpec


@dataclass(frozen=True)
class NoiseSample:
    """One sample: ``(x, y)`` (with the noise ``eps``) for regression, ``xi`` otherwise."""

    index: int
    x: np.ndarray | None = None
    y: float | None = None
    eps: float | None = None
    xi: np.ndarray | None = None


def sample_batch(spec, seed: int, ks, role: str = "main") -> dict:
    """Samples for several indices as arrays with a leading index axis."""
    return kernels.sample(spec.kernel_problem, stream_key(seed, role), ks)


def sample_noise(spec, seed: int, index: int, role: str = "main") -> NoiseSample:
    """Sample ``index`` of the stream ``(seed, role)``; a pure function of its arguments."""
    if index < 1:
        raise ValueError("sample index must be >= 1")
    batch = sample_batch(spec, seed, [index], role)
    if "xi" in batch:
        return NoiseSample(index, xi=batch["xi"][0])
    return NoiseSample(index, x=batch["x"][0], y=float(batch["y"][0]), eps=float(batch["eps"][0]))


def _check_beta(spec, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape[-1] != spec.d:
        raise ValueError(f"beta has dimension {beta.shape[-1]}, expected {spec.d}")
    return beta


def stochastic_gradient(spec, beta, sample: NoiseSample) -> np.ndarray:
    beta = _check_beta(spec, beta)
    if spec.kind == "regression":
        x = np.asarray(sample.x, dtype=float)
        if x.shape != (spec.d,):
            raise ValueError("sample dimension does not match the problem")
        return -(sample.y - x @ beta) * x
    xi = np.asarray(sample.xi, dtype=float)
    if xi.shape != (spec.d,):
        raise ValueError("sample dimension does not match the problem")
    return beta + spec.rho * (np.tanh(beta + spec.offset) - math.tanh(spec.offset)) - xi


def stochastic_gradients(spec, betas, batch: dict) -> np.ndarray:
    """Row-wise gradients for arrays of iterates and a batch of samples."""
    betas = _check_beta(spec, betas)
    if spec.kind == "regression":
        x = batch["x"]
        resid = batch["y"] - np.einsum("...j,...j->...", x, betas)
        return -resid[..., None] * x
    return betas + spec.rho * (np.tanh(betas + spec.offset) - math.tanh(spec.offset)) - batch["xi"]


def population_gradient(spec, beta) -> np.ndarray:
    beta = _check_beta(spec, beta)
    if spec.kind == "regression":
        return (beta - spec.beta_star) @ spec.sigma.T
    return beta + spec.rho * (np.tanh(beta + spec.offset) - math.tanh(spec.offset))


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    se: float
    provenance: str
    replications: int = 0

    def to_dict(self) -> dict:
        return {"value": self.value, "se": self.se, "provenance": self.provenance,
                "replications": self.replications}


@dataclass(frozen=True)
class ProblemConstants:
    mu: float
    L: float
    M: float
    provenance: dict

    def __post_init__(self):
        for name in ("mu", "L", "M"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    def to_dict(self) -> dict:
        return {"mu": self.mu, "L": self.L, "M": self.M,
                "provenance": {k: v.to_dict() for k, v in self.provenance.items()}}


def _mc_inputs(spec, s, q, replications):
    check_norm_order(s)
    q = check_moment_order(q)
    if replications < 100:
        raise ValueError("Monte Carlo constant estimates need at least 100 replications")
    spec.check_moments(q)
    return q


def estimate_mu(spec) -> ConstantEstimate:
    if spec.kind == "regression":
        return ConstantEstimate(gershgorin_gap(spec.sigma), 0.0, "gershgorin")
    return ConstantEstimate(1.0, 0.0, "analytic")


def estimate_L(spec, s: int, q: float, replications: int = 20000, seed: int = 0) -> ConstantEstimate:
    """``(E |x|_s^q |x|_{s*}^q)^(1/q)`` for regression, ``1 + rho`` for tanh."""
    if spec.kind == "tanh":
        return ConstantEstimate(1.0 + spec.rho, 0.0, "analytic")
    q = _mc_inputs(spec, s, q, replications)
    x = sample_batch(spec, seed, np.arange(1, replications + 1), role="pilot")["x"]
    v = ls_norms(x, s) * lp_norms(x, dual_exponent(s))
    est = lq_moment(v, q)
    return ConstantEstimate(est.point, est.se, "monte_carlo", replications)


def estimate_M(spec, s: int, q: float, replications: int = 20000, seed: int = 0) -> ConstantEstimate:
    """``|| |grad g(beta_star, xi)|_s ||_q`` by Monte Carlo."""
    q = _mc_inputs(spec, s, q, replications)
    batch = sample_batch(spec, seed, np.arange(1, replications + 1), role="pilot")
    if spec.kind == "regression":
        grads = -batch["eps"][:, None] * batch["x"]
    else:
        grads = -batch["xi"]
    est = lq_moment(ls_norms(grads, s), q)
    return ConstantEstimate(est.point, est.se, "monte_carlo", replications)


def estimate_constants(spec, s: int, q: float, replications: int = 20000, seed: int = 0) -> ProblemConstants:
    mu = estimate_mu(spec)
    L = estimate_L(spec, s, q, replications, seed)
    M = estimate_M(spec, s, q, replications, seed)
    return ProblemConstants(mu.value, L.value, M.value, {"mu": mu, "L": L, "M": M})


@dataclass(frozen=True)
class FiniteSupportDist:
    """Distribution on at most 64 atoms with exact rational probabilities.

    Atoms are ``(value, probability)`` where ``value`` is a vector or a
    ``(x, y)`` pair of vectors.
    """

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((v, Fraction(p)) for v, p in self.atoms)
        if not atoms:
            raise ValueError("distribution needs at least one atom")
        if len(atoms) > 64:
            raise ValueError("support size must be at most 64")
        if any(p < 0 for _, p in atoms):
            raise ValueError("probabilities must be nonnegative")
        if sum(p for _, p in atoms) != 1:
            raise ValueError("probabilities must sum exactly to 1")
        object.__setattr__(self, "atoms", atoms)

    def expect(self, fn) -> float:
        """``E fn(value)`` with compensated summation."""
        return math.fsum(float(p) * float(fn(v)) for v, p in self.atoms)

    def mean(self) -> np.ndarray:
        values = np.array([np.asarray(v, dtype=float) for v, _ in self.atoms])
        probs = [float(p) for _, p in self.atoms]
        return np.array([math.fsum(p * values[i, j] for i, p in enumerate(probs))
                         for j in range(values.shape[1])])

"""Constant step-size SGD chains, running averages, couplings and burn-in.

Single chains are thin wrappers around the batched kernels: a batch is an
array of shape (R, C, d) holding C coupled chains for each of R independent
replications. The chains of one replication consume the same samples; each
replication has its own seed.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bounds import alpha_max, contraction_rate, RangeError
from .norms import ls_norm, ls_norms
from .problems import ProblemConstants, estimate_constants
from .streams import ball_point, stream_key, stream_keys


class DivergenceError(RuntimeError):
    """An iterate became non-finite."""

    def __init__(self, step: int, alpha: float | None = None):
        self.step = int(step)
        self.alpha = alpha
        super().__init__(f"iterate diverged (non-finite coordinate) at step {step}"
                         + (f" with alpha = {alpha}" if alpha is not None else ""))


@dataclass(frozen=True)
class ChainState:
    beta: np.ndarray
    running_mean: np.ndarray
    k: int = 0
    role_tag: str = "plain"

    def __post_init__(self):
        if np.shape(self.beta) != np.shape(self.running_mean):
            raise ValueError("beta and running_mean must have the same shape")


def initial_state(beta0, role_tag: str = "plain") -> ChainState:
    beta0 = np.array(beta0, dtype=float)
    return ChainState(beta0, np.zeros_like(beta0), 0, role_tag)


@dataclass(frozen=True)
class Trajectory:
    checkpoints: np.ndarray
    betas: np.ndarray
    means: np.ndarray
    seed: int
    alpha: float
    spec: object = field(repr=False, default=None)
    final: ChainState | None = None


@dataclass(frozen=True)
class CoupledPair:
    chain_a: ChainState
    chain_b: ChainState
    distances: np.ndarray


@dataclass(frozen=True)
class StationaryApprox:
    state: ChainState
    burn_in: int
    certificate: float
    tol: float
    D0: float
    rate: float


def default_threads() -> int:
    return int(os.environ.get("CONSTSGD_THREADS", "1"))


def advance_batch(spec, alpha: float, beta: np.ndarray, mean: np.ndarray | None, keys: np.ndarray,
                  k0: int, n_steps: int, threads: int = 1, swap_step: int = 0,
                  swap_keys: np.ndarray | None = None, swap_chain: int = 1,
                  trace: np.ndarray | None = None) -> None:
    """Advance a (R, C, d) batch in place; raise :class:`DivergenceError` on blow-up.

    Replications are split into contiguous blocks over ``threads`` workers;
    results do not depend on the split.
    """
    if n_steps <= 0:
        return
    problem = spec.kernel_problem
    R = beta.shape[0]
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    if swap_keys is not None:
        swap_keys = np.ascontiguousarray(swap_keys, dtype=np.uint64)
    threads = max(1, min(int(threads), R))

    def run(lo, hi):
        return kernels.advance(
            problem, beta[lo:hi], None if mean is None else mean[lo:hi], keys[lo:hi], k0,
            n_steps, alpha, swap_step, None if swap_keys is None else swap_keys[lo:hi],
            swap_chain, None if trace is None else trace[lo:hi])

    if threads == 1:
        bad = [run(0, R)]
    else:
        bounds = np.linspace(0, R, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            bad = list(pool.map(run, bounds[:-1], bounds[1:]))
    bad = [b for b in bad if b]
    if bad:
        raise DivergenceError(min(bad), alpha)


def sgd_step(spec, state: ChainState, alpha: float, seed: int, role: str = "main") -> ChainState:
    """One SGD step using sample ``state.k + 1`` of the stream ``(seed, role)``."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if state.k < 0:
        raise ValueError("step count must be nonnegative")
    beta = np.array(state.beta, dtype=float).reshape(1, 1, -1)
    mean = np.array(state.running_mean, dtype=float).reshape(1, 1, -1)
    keys = np.array([stream_key(seed, role)], dtype=np.uint64)
    advance_batch(spec, alpha, beta, mean, keys, state.k, 1)
    return ChainState(beta[0, 0], mean[0, 0], state.k + 1, state.role_tag)


def run_chain(spec, alpha: float, beta0, k_max: int, seed: int, checkpoints=None,
              role: str = "main") -> Trajectory:
    """Run one chain for ``k_max`` steps, recording iterate and average at checkpoints."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    cps = np.array(sorted(set(checkpoints)) if checkpoints is not None else [k_max], dtype=int)
    if cps[0] < 1 or cps[-1] > k_max:
        raise ValueError("checkpoints must lie in [1, k_max]")
    beta = np.array(beta0, dtype=float).reshape(1, 1, -1)
    mean = np.zeros_like(beta)
    keys = np.array([stream_key(seed, role)], dtype=np.uint64)
    betas, means = [], []
    k = 0
    for cp in cps:
        advance_batch(spec, alpha, beta, mean, keys, k, int(cp) - k)
        k = int(cp)
        betas.append(beta[0, 0].copy())
        means.append(mean[0, 0].copy())
    advance_batch(spec, alpha, beta, mean, keys, k, k_max - k)
    final = ChainState(beta[0, 0].copy(), mean[0, 0].copy(), k_max)
    return Trajectory(cps, np.array(betas), np.array(means), seed, alpha, spec, final)


def run_coupled_pair(spec, alpha: float, beta0_a, beta0_b, k_max: int, seed: int, s: int,
                     role: str = "main") -> CoupledPair:
    """Two chains on the same samples from different starts, with per-step l^s distances."""
    beta = np.stack([np.asarray(beta0_a, dtype=float), np.asarray(beta0_b, dtype=float)])[None]
    mean = np.zeros_like(beta)
    trace = np.empty((1, k_max, 2, beta.shape[-1]))
    keys = np.array([stream_key(seed, role)], dtype=np.uint64)
    advance_batch(spec, alpha, beta, mean, keys, 0, k_max, trace=trace)
    distances = ls_norms(trace[0, :, 0] - trace[0, :, 1], s)
    a = ChainState(beta[0, 0], mean[0, 0], k_max, "coupled_primary")
    b = ChainState(beta[0, 1], mean[0, 1], k_max, "coupled_secondary")
    return CoupledPair(a, b, distances)


def run_single_swap_coupling(spec, alpha: float, k_max: int, swap_index: int, seed: int,
                             seed_prime: int, s: int, beta0=None) -> np.ndarray:
    """Distances between a chain and its copy that swaps sample ``swap_index``.

    The copy uses sample ``swap_index`` of the stream of ``seed_prime`` and
    shares every other sample. Both start at ``beta0`` (default ``beta_star``).
    """
    if not 1 <= swap_index <= k_max:
        raise ValueError("swap index must lie in [1, k_max]")
    start = spec.beta_star if beta0 is None else np.asarray(beta0, dtype=float)
    beta = np.stack([start, start])[None].astype(float)
    trace = np.empty((1, k_max, 2, spec.d))
    keys = np.array([stream_key(seed, "main")], dtype=np.uint64)
    swap_keys = np.array([stream_key(seed_prime, "main")], dtype=np.uint64)
    advance_batch(spec, alpha, beta, None, keys, 0, k_max, swap_step=swap_index,
                  swap_keys=swap_keys, swap_chain=1, trace=trace)
    return ls_norms(trace[0, :, 0] - trace[0, :, 1], s)


def stationary_scale(alpha: float, M: float, s: int, q: float) -> float:
    """A-priori distance scale ``sqrt(6 max(q, s) alpha) M`` of the stationary law."""
    return math.sqrt(6.0 * max(q, s) * alpha) * M


def default_tolerance(alpha: float, M: float) -> float:
    return 0.01 * math.sqrt(alpha) * M


def burn_in_length(rate: float, D0: float, tol: float) -> int:
    """Smallest ``B`` with ``rate**B * D0 <= tol``."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if tol >= D0:
        return 0
    if not 0 < rate < 1:
        raise ValueError("rate must lie in (0, 1)")
    B = math.ceil(math.log(tol / D0) / math.log(rate))
    while rate ** B * D0 > tol:
        B += 1
    return B


@dataclass(frozen=True)
class BurnInPlan:
    steps: int
    certificate: float
    tol: float
    D0: float
    rate: float

    def to_dict(self) -> dict:
        return {"steps": self.steps, "certificate": self.certificate, "tol": self.tol,
                "D0": self.D0, "rate": self.rate}


def plan_burn_in(constants: ProblemConstants, alpha: float, s: int, q: float,
                 tol: float | None = None, D0: float | None = None) -> BurnInPlan:
    limit = alpha_max(constants.mu, constants.L, s, q)
    if not 0 < alpha < limit:
        raise RangeError(f"burn-in needs alpha in (0, alpha_max = {limit}); got {alpha}")
    rate = contraction_rate(constants.mu, constants.L, s, q, alpha)
    D0 = stationary_scale(alpha, constants.M, s, q) if D0 is None else D0
    tol = default_tolerance(alpha, constants.M) if tol is None else tol
    B = burn_in_length(rate, D0, tol)
    return BurnInPlan(B, rate ** B * D0, tol, D0, rate)


def burn_in_stationary(spec, alpha: float, s: int, q: float, tol: float | None = None,
                       seed: int = 0, constants: ProblemConstants | None = None,
                       D0: float | None = None) -> StationaryApprox:
    """Approximate draw from the stationary law: run the certified number of steps from beta_star."""
    if constants is None:
        constants = estimate_constants(spec, s, q, seed=seed)
    plan = plan_burn_in(constants, alpha, s, q, tol, D0)
    state = initial_state(spec.beta_star)
    if plan.steps:
        traj = run_chain(spec, alpha, spec.beta_star, plan.steps, seed, role="burn")
        state = traj.final
    return StationaryApprox(state, plan.steps, plan.certificate, plan.tol, plan.D0, plan.rate)


def burn_in_batch(spec, alpha: float, seeds: np.ndarray, steps: int, threads: int = 1) -> np.ndarray:
    """Burned-in states (R, d) for replication seeds, each run from beta_star."""
    R = len(seeds)
    beta = np.tile(np.asarray(spec.beta_star, dtype=float), (R, 1, 1))
    advance_batch(spec, alpha, beta, None, stream_keys(seeds, "burn"), 0, steps, threads)
    return beta[:, 0].copy()


def cold_start(spec, seed: int, radius: float = 1.0, index: int = 0) -> np.ndarray:
    """Default start ``beta_star + u`` with ``u`` uniform on the sup-norm ball."""
    return np.asarray(spec.beta_star, dtype=float) + ball_point(seed, spec.d, radius, index)


def chain_distance(state_a: ChainState, state_b: ChainState, s: int) -> float:
    return ls_norm(np.asarray(state_a.beta) - np.asarray(state_b.beta), s)

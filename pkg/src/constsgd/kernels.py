"""Backend selection for the SGD inner loops.

Two interchangeable backends implement ``sample`` and ``advance``:

``_core``
    Compiled Cython extension; releases the GIL so replications can be split
    across threads.
``_pycore``
    Pure numpy fallback, vectorised over replications.

The compiled core is used when it imports. Setting ``CONSTSGD_BACKEND=python``
forces the fallback; ``CONSTSGD_BACKEND=compiled`` makes a missing extension
an import error instead of a silent downgrade.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _pycore

LAW_CODES = {"gaussian": 0, "sub_exponential": 1, "student_t": 2, "constant": 3}
KIND_REGRESSION = 0
KIND_TANH = 1

# Student-t variates with integer degrees of freedom up to this value are built
# as a normal over a root mean of squared normals; other values go through the
# inverse CDF, which is much slower.
DIRECT_T_MAX = 200


@dataclass(frozen=True)
class KernelProblem:
    """Flat numeric description of a problem, as consumed by the backends."""

    kind: int
    d: int
    factor: np.ndarray
    identity: bool
    beta_star: np.ndarray
    cov_law: int
    cov_nu: float
    cov_nu_int: int
    noise_law: int
    noise_nu: float
    noise_nu_int: int
    noise_scale: float
    rho: float
    offset: float


def integer_dof(nu: float | None) -> int:
    if nu is None:
        return 0
    if float(nu).is_integer() and 1 <= nu <= DIRECT_T_MAX:
        return int(nu)
    return 0


def _load_backend():
    choice = os.environ.get("CONSTSGD_BACKEND", "auto").lower()
    if choice == "python":
        return _pycore, "python"
    try:
        from . import _core
    except ImportError:
        if choice == "compiled":
            raise
        return _pycore, "python"
    return _core, "compiled"


backend, BACKEND_NAME = _load_backend()


def get_backend(name: str | None = None):
    """Return the backend module by name (``"compiled"`` or ``"python"``)."""
    if name is None:
        return backend
    if name == "python":
        return _pycore
    if name == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")


def sample(problem: KernelProblem, key: int, ks, impl=None) -> dict:
    """Draw the samples with indices ``ks`` from the stream ``key``.

    Returns ``{"x", "y", "eps"}`` for regression or ``{"xi"}`` for the tanh
    problem, each with a leading axis over ``ks``.
    """
    impl = impl or backend
    ks = np.ascontiguousarray(np.atleast_1d(ks), dtype=np.uint64)
    return impl.sample(problem, int(key), ks)


def advance(problem: KernelProblem, beta, mean, keys, k0, n_steps, alpha,
            swap_step=0, swap_keys=None, swap_chain=1, trace=None, impl=None) -> int:
    """Advance ``beta`` of shape (R, C, d) in place by ``n_steps`` steps.

    All C chains of a replication consume the same sample, except chain
    ``swap_chain`` at global step ``swap_step``, which consumes the sample of
    ``swap_keys`` instead. ``mean`` (same shape, may be None) holds running
    averages over steps ``1..k``. ``trace`` (R, n_steps, C, d), if given,
    receives every iterate. Returns the first global step at which any
    coordinate became non-finite, or 0.
    """
    impl = impl or backend
    return impl.advance(problem, beta, mean, keys, int(k0), int(n_steps), float(alpha),
                        int(swap_step), swap_keys, int(swap_chain), trace)

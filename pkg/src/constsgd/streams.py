"""Counter-based random streams.

Every variate is a pure function of ``(key, index, slot)``: the index is the
iteration number and the slot picks a coordinate and sub-variate inside one
sample. Nothing is carried between draws, so two chains that ask for the same
``(key, index)`` see bitwise-identical samples no matter in which order or on
which worker the draws happen.

The mixing function is the splitmix64 finalizer. The compiled kernel in
``_core.pyx`` implements the same arithmetic on ``uint64_t``.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

GOLDEN = 0x9E3779B97F4A7C15
SLOT_MULT = 0xD1B54A32D192ED03
SLOT_ADD = 0x8CB92BA72F3D8DD7
ROLE_MULT = 0xAEF17502108EF2D9

# Sub-variates of one coordinate live in the low byte of the slot.
SLOT_SHIFT = 8

ROLES = {
    "main": 1,
    "burn": 2,
    "init": 3,
    "swap": 4,
    "pilot": 5,
}

_U64 = np.uint64


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorised :func:`mix64`; uint64 array arithmetic wraps like C."""
    z = np.asarray(z, dtype=_U64)
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


def derive_seed(root: int, index: int) -> int:
    """Seed of replication ``index`` under root seed ``root``.

    Replication seeds depend only on ``(root, index)``, so enlarging a run
    never changes the seeds of the replications that were already there.
    """
    return mix64((root + (index + 1) * GOLDEN) & MASK64)


def derive_seeds(root: int, count: int, start: int = 0) -> np.ndarray:
    return np.array([derive_seed(root, i) for i in range(start, start + count)],
                    dtype=_U64)


def stream_key(seed: int, role: str) -> int:
    """Key of the stream with the given role tag under ``seed``."""
    try:
        code = ROLES[role]
    except KeyError:
        raise ValueError(f"unknown stream role {role!r}") from None
    return mix64((seed & MASK64) ^ mix64(code * ROLE_MULT))


def stream_keys(seeds: np.ndarray, role: str) -> np.ndarray:
    seeds = np.atleast_1d(np.asarray(seeds, dtype=_U64))
    return np.array([stream_key(int(s), role) for s in seeds], dtype=_U64)


def index_hash(keys: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Per-sample hash ``mix64(key + k * GOLDEN)`` (broadcasting)."""
    keys = np.asarray(keys, dtype=_U64)
    ks = np.asarray(ks, dtype=_U64)
    return mix64_array(keys + ks * _U64(GOLDEN))


def slot_uniform(h: np.ndarray, slot: int) -> np.ndarray:
    """Uniform variate on the open interval (0, 1) for one slot of a sample."""
    salt = _U64((slot * SLOT_MULT + SLOT_ADD) & MASK64)
    u = mix64_array(np.asarray(h, dtype=_U64) ^ salt)
    return ((u >> _U64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def uniform(seed: int, role: str, k: int, slot: int) -> float:
    """Scalar convenience wrapper around :func:`slot_uniform`."""
    h = index_hash(np.array([stream_key(seed, role)], dtype=_U64), np.array([k]))
    return float(slot_uniform(h, slot)[0])


def ball_point(seed: int, d: int, radius: float = 1.0, index: int = 0,
               role: str = "init") -> np.ndarray:
    """Point drawn uniformly from the sup-norm ball of the given radius."""
    h = index_hash(np.array([stream_key(seed, role)], dtype=_U64), np.array([index]))
    u = np.array([slot_uniform(h, j << SLOT_SHIFT)[0] for j in range(d)])
    return radius * (2.0 * u - 1.0)

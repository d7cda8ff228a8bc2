"""Pure numpy implementation of the sampling and iteration kernels."""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri, stdtrit

from .streams import SLOT_SHIFT, index_hash, slot_uniform

INV_SQRT2 = 0.7071067811865476

GAUSSIAN, LAPLACE, STUDENT_T, CONSTANT = 0, 1, 2, 3


def std_variates(law, nu, nu_int, h, base):
    """Unit-scale variates of the given law from hashes ``h``."""
    if law == GAUSSIAN:
        return ndtri(slot_uniform(h, base))
    if law == LAPLACE:
        u = slot_uniform(h, base)
        return np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u))) * INV_SQRT2
    if law == STUDENT_T:
        if nu_int > 0:
            z = ndtri(slot_uniform(h, base))
            chi = np.zeros(np.shape(h))
            for m in range(1, nu_int + 1):
                g = ndtri(slot_uniform(h, base + m))
                chi = chi + g * g
            return z / np.sqrt(chi / nu)
        return stdtrit(nu, slot_uniform(h, base))
    if law == CONSTANT:
        return np.ones(np.shape(h))
    raise ValueError(f"unknown law code {law}")


def _draw(p, h):
    """Samples for an array of hashes; adds a trailing coordinate axis."""
    d = p.d
    if p.kind == 0:
        w = np.stack([std_variates(p.cov_law, p.cov_nu, p.cov_nu_int, h, j << SLOT_SHIFT)
                      for j in range(d)], axis=-1)
        x = w if p.identity else w @ p.factor.T
        eps = p.noise_scale * std_variates(p.noise_law, p.noise_nu, p.noise_nu_int, h,
                                           d << SLOT_SHIFT)
        y = x @ p.beta_star + eps
        return {"x": x, "y": y, "eps": eps}
    xi = np.stack([p.noise_scale * std_variates(p.noise_law, p.noise_nu, p.noise_nu_int,
                                                h, j << SLOT_SHIFT) for j in range(d)],
                  axis=-1)
    return {"xi": xi}


def sample(p, key, ks):
    h = index_hash(np.array([key], dtype=np.uint64), ks)
    return _draw(p, h)


def _step(p, b, smp, t, alpha):
    if p.kind == 0:
        x = smp["x"][:, t]
        resid = smp["y"][:, t] - np.einsum("rj,rj->r", x, b)
        g = -resid[:, None] * x
    else:
        g = b + p.rho * (np.tanh(b + p.offset) - np.tanh(p.offset)) - smp["xi"][:, t]
    return b - alpha * g


def advance(p, beta, mean, keys, k0, n_steps, alpha, swap_step, swap_keys, swap_chain,
            trace):
    R, C, d = beta.shape
    keys = np.asarray(keys, dtype=np.uint64)
    block = int(max(1, min(256, (1 << 20) // (R * (d + 2)))))
    first_bad = 0
    with np.errstate(all="ignore"):
        for start in range(0, n_steps, block):
            nb = min(block, n_steps - start)
            ks = np.arange(k0 + 1 + start, k0 + 1 + start + nb, dtype=np.uint64)
            smp = _draw(p, index_hash(keys[:, None], ks[None, :]))
            for t in range(nb):
                k = k0 + 1 + start + t
                for c in range(C):
                    if c == swap_chain and k == swap_step:
                        alt = _draw(p, index_hash(np.asarray(swap_keys, dtype=np.uint64)[:, None],
                                                  np.array([[k]], dtype=np.uint64)))
                        new = _step(p, beta[:, c], alt, 0, alpha)
                    else:
                        new = _step(p, beta[:, c], smp, t, alpha)
                    beta[:, c] = new
                    if mean is not None:
                        mean[:, c] = mean[:, c] + (new - mean[:, c]) / k
                if trace is not None:
                    trace[:, start + t] = beta
                if first_bad == 0 and not np.isfinite(beta).all():
                    first_bad = k
    return first_bad

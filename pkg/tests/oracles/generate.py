"""Independent reference values, computed without importing the package.

Run once; the output is frozen in ``frozen_values.json`` and the tests read
that file. Everything here uses mpmath at 60 digits or exact fractions.
"""
import json
from fractions import Fraction
from pathlib import Path

import mpmath as mp
import numpy as np

mp.mp.dps = 60
out = {}

# power-sum norm of 64 uniform entries at s = 40
rng = np.random.default_rng(20240611)
x = rng.uniform(-1.0, 1.0, 64)
out["ls_norm_uniform64_s40"] = {
    "x": [float(v) for v in x],
    "value": float(mp.fsum(mp.mpf(v) ** 40 for v in x) ** (mp.mpf(1) / 40)),
}

# entries of magnitude 1e300 at s = 40: scale 1e300 times the norm of the mantissas
mant = [1.0, -2.5, 3.0, 0.5]
out["ls_norm_huge_s40"] = {
    "x": [m * 1e300 for m in mant],
    "value": float(mp.mpf(10) ** 300 * mp.fsum(mp.mpf(m) ** 40 for m in mant) ** (mp.mpf(1) / 40)),
}

# complexity at (mu, L, M, d, q, delta0, eps) = (1, 1, 1, 10, 2, 1, 1/10), all constants one
s_d, m = 4, 4
V = 1 * 1 * 2 + 1                      # L M sqrt(max(q, s_d)) + M with sqrt(4) = 2
B = 1 * m * 10                         # M^2 max(q, s_d) d^((q/(q-1))(1-2/s_d)) = 4 * 10^1
eps = Fraction(1, 10)
alpha = min(eps / (3 * B), Fraction(2, m) / 7)
k = max(9 * s_d * V * V * alpha / eps ** 2, 3 * 1 / (alpha * eps))
out["complexity_unit_tuple"] = {"alpha": float(alpha), "k": float(k),
                                "alpha_exact": str(alpha), "k_exact": str(k)}

out["tanh_population_gradient_half"] = float(mp.mpf("0.5") + mp.tanh(mp.mpf("0.5")))
out["geometric_0p9_pow_10"] = float(mp.mpf("0.9") ** 10)
out["chi2_2_second_moment_root"] = float(mp.sqrt(8))
out["sqrt2"] = float(mp.sqrt(2))
out["abs_normal_l4"] = float(mp.mpf(3) ** (mp.mpf(1) / 4))
nu = 5
out["t5_fourth_moment"] = float(Fraction(3 * nu ** 2, (nu - 2) * (nu - 4)))

# q = 2 root of -mu + c alpha = 0 with c = (|2 - s| + s - 1) L^2 / 2
out["alpha_root_q2_unit"] = float(Fraction(2, (abs(2 - 2) + 2 - 1)))

# scalar regression x ~ N(0,1), eps ~ N(0,1), beta* = 0:
# beta_k = (1 - a x^2) beta_{k-1} + a x eps; lag-h autocorrelation (1 - a)^h,
# stationary variance a / (2 - 3 a), long-run variance (2 - a) / (2 - 3 a)
a = Fraction(1, 5)
out["ar1_long_run_variance_alpha_0p2"] = {"alpha": float(a),
                                          "value": float((2 - a) / (2 - 3 * a)),
                                          "stationary_variance": float(a / (2 - 3 * a))}

# contraction vertex for (mu, L, s, q) = (1, 2, 2, 4): a* = mu/(m L^2), r* = 1 - mu^2/(m L^2)
out["rate_vertex_1_2_2_4"] = {"alpha": float(Fraction(1, 16)), "rate": float(1 - Fraction(1, 16))}

Path(__file__).with_name("frozen_values.json").write_text(json.dumps(out, indent=2) + "\n")

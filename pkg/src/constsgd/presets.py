"""Built-in configurations for the acceptance suite (``--preset NAME``)."""
from __future__ import annotations

ACCEPTANCE = {
    "gmc": """\
experiment = gmc
problem = regression
d = 16
sigma = tridiagonal
sigma_offdiag = 0.2
q = 2
s = auto
alpha_fraction = 0.25
R = 1000
k_max = 200
""",
    "asgd_gap": """\
experiment = asgd_gap
problem = regression
d = 16
sigma = tridiagonal
sigma_offdiag = 0.2
q = 2
s = auto
alpha_fraction = 0.25
k_grid = 100, 1000, 10000
R = 1000
""",
    "sgd_moment": """\
experiment = sgd_moment
problem = tanh
d = 8
rho = 1
q = 2
s = auto
alpha_grid = 0.001, 0.002, 0.004, 0.008
R = 2000
""",
    "asgd_variance": """\
experiment = asgd_variance
problem = regression
d = 8
sigma = identity
q = 2
s = 2
alpha_fraction = 0.75
k_grid = 1000, 4000, 16000
R = 500
""",
    "bias": """\
experiment = bias
problem = tanh
d = 4
rho = 1
offset = 0.7
q = 2
alpha_grid = 0.01, 0.02, 0.04
k = 20000
R = 5000
""",
    "bias_control": """\
experiment = bias
problem = regression
d = 4
sigma = identity
q = 2
alpha_grid = 0.01, 0.02, 0.04
k = 20000
R = 5000
""",
    "tail": """\
experiment = tail
problem = regression
d = 4
sigma = identity
noise_law = student_t
noise_nu = 5
q = 4
s = 2
alpha_fraction = 0.5
k = 10000
z_grid = 0, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.05, 0.06
R = 20000
""",
    "ga": """\
experiment = ga
problem = regression
d = 4
sigma = identity
q = 2
s = 2
alpha_fraction = 0.5
T = 200000
R = 500
bandwidth = 2000
""",
    "taylor": """\
experiment = inequalities
lemma = taylor
instances = 100000
""",
    "rio": """\
experiment = inequalities
lemma = rio
instances = 1000
""",
    "maximal": """\
experiment = inequalities
lemma = maximal
instances = 200
""",
    "norm_equivalence": """\
experiment = inequalities
lemma = norm_equivalence
instances = 100000
""",
    "complexity": """\
experiment = complexity
problem = regression
d = 10
sigma = identity
q = 2
epsilon = 0.05
R = 50
macro = 20
""",
    "bounds": """\
experiment = bounds
mu = 1
L = 1
M = 1
d = 10
q = 2
""",
}

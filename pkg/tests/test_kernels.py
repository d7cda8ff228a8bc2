import numpy as np
import pytest

from constsgd import _pycore, kernels
from constsgd.problems import Law, LinearRegressionSpec, TanhPerturbedSpec, tridiagonal_sigma
from constsgd.streams import stream_keys

try:
    from constsgd import _core
except ImportError:
    _core = None

needs_compiled = pytest.mark.skipif(_core is None, reason="compiled core not built")

SPECS = {
    "regression_gauss": LinearRegressionSpec.from_sigma(tridiagonal_sigma(5), beta_star=np.arange(5.0)),
    "regression_t": LinearRegressionSpec.from_sigma(np.eye(3), covariate_law=Law("student_t", 9),
                                                    noise_law=Law("student_t", 5, 0.5)),
    "regression_t_fractional": LinearRegressionSpec.from_sigma(
        np.eye(2), noise_law=Law("student_t", 4.5)),
    "tanh_laplace": TanhPerturbedSpec(4, rho=1.0, noise_law=Law("sub_exponential"), offset=0.7),
    "tanh_gauss": TanhPerturbedSpec(2, rho=0.3),
}


def test_backend_name_is_reported():
    assert kernels.BACKEND_NAME in ("compiled", "python")
    assert kernels.get_backend("python") is _pycore
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@needs_compiled
@pytest.mark.parametrize("name", sorted(SPECS))
def test_samples_agree_across_backends(name):
    p = SPECS[name].kernel_problem
    ks = np.arange(1, 2001)
    a = kernels.sample(p, 12345, ks, impl=_pycore)
    b = kernels.sample(p, 12345, ks, impl=_core)
    assert a.keys() == b.keys()
    for key in a:
        np.testing.assert_allclose(a[key], b[key], rtol=1e-12, atol=1e-13)


@needs_compiled
@pytest.mark.parametrize("name", sorted(SPECS))
def test_advance_agrees_across_backends(name):
    spec = SPECS[name]
    p = spec.kernel_problem
    R, C, n = 6, 2, 300
    rng = np.random.default_rng(1)
    beta0 = rng.normal(size=(R, C, spec.d))
    keys = stream_keys(np.arange(R, dtype=np.uint64) + 7, "main")
    swap = stream_keys(np.arange(R, dtype=np.uint64) + 99, "swap")
    out = []
    for impl in (_pycore, _core):
        beta, mean = beta0.copy(), np.zeros_like(beta0)
        trace = np.empty((R, n, C, spec.d))
        bad = kernels.advance(p, beta, mean, keys, 0, n, 0.05, 17, swap, 1, trace, impl=impl)
        assert bad == 0
        out.append((beta, mean, trace))
    for x, y in zip(*out):
        np.testing.assert_allclose(x, y, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("impl", [_pycore] + ([_core] if _core is not None else []),
                         ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_divergence_step_reported(impl):
    spec = LinearRegressionSpec.from_sigma(np.eye(2))
    beta = np.ones((1, 1, 2))
    keys = stream_keys(np.array([3], dtype=np.uint64), "main")
    bad = kernels.advance(spec.kernel_problem, beta, None, keys, 0, 5000, 50.0, impl=impl)
    assert bad > 0


@pytest.mark.parametrize("impl", [_pycore] + ([_core] if _core is not None else []),
                         ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_split_advance_equals_single_advance(impl):
    spec = SPECS["tanh_gauss"]
    keys = stream_keys(np.array([5, 6], dtype=np.uint64), "main")
    one = np.zeros((2, 1, 2))
    kernels.advance(spec.kernel_problem, one, None, keys, 0, 100, 0.1, impl=impl)
    two = np.zeros((2, 1, 2))
    kernels.advance(spec.kernel_problem, two, None, keys, 0, 37, 0.1, impl=impl)
    kernels.advance(spec.kernel_problem, two, None, keys, 37, 63, 0.1, impl=impl)
    assert np.array_equal(one, two)

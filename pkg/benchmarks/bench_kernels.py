"""Compare the compiled and pure-numpy SGD kernels on the acceptance-sized problems.

    python benchmarks/bench_kernels.py [--replications 1000] [--steps 2000] [--repeat 3]

Prints steps x replications per second for each backend and the speedup.
"""
import argparse
import time

import numpy as np

from constsgd import _pycore, kernels
from constsgd.problems import Law, LinearRegressionSpec, TanhPerturbedSpec, tridiagonal_sigma
from constsgd.streams import derive_seeds, stream_keys

try:
    from constsgd import _core
except ImportError:
    _core = None

PROBLEMS = {
    "regression d=16 tridiagonal": LinearRegressionSpec.from_sigma(tridiagonal_sigma(16)),
    "regression d=4 t(5) noise": LinearRegressionSpec.from_sigma(
        np.eye(4), noise_law=Law("student_t", 5)),
    "tanh d=8": TanhPerturbedSpec(8, rho=1.0, offset=0.7),
}


def time_advance(impl, spec, R, steps, repeat):
    p = spec.kernel_problem
    keys = stream_keys(derive_seeds(1, R), "main")
    best = float("inf")
    for _ in range(repeat):
        beta = np.zeros((R, 1, spec.d))
        mean = np.zeros_like(beta)
        start = time.perf_counter()
        kernels.advance(p, beta, mean, keys, 0, steps, 0.01, impl=impl)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--replications", type=int, default=1000)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = [("python", _pycore)] + ([("compiled", _core)] if _core is not None else [])
    if _core is None:
        print("compiled core not built; timing the python backend only")
    work = args.replications * args.steps
    print(f"{'problem':32s} {'backend':9s} {'seconds':>9s} {'steps/s':>12s}")
    for name, spec in PROBLEMS.items():
        times = {}
        for label, impl in backends:
            t = time_advance(impl, spec, args.replications, args.steps, args.repeat)
            times[label] = t
            print(f"{name:32s} {label:9s} {t:9.3f} {work / t:12.3e}")
        if len(times) == 2:
            print(f"{'':32s} speedup   {times['python'] / times['compiled']:9.1f}x")


if __name__ == "__main__":
    main()

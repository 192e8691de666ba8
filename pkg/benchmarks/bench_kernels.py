"""Numba vs numpy kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the two hot paths of the library on realistic sizes:
  * batched GK15 integration of exponential sums (one interval per
    measurement day / Gauss-Legendre node, squared kernel as in Sigma^2),
  * Psi on Monte Carlo paths.
Both backends are also checked to agree before timing.
"""

import argparse
import time

import numpy as np

from degreeday import kernels
from degreeday.car_model import CarModel

NY_ROW = (-0.3364, -1.6105, -2.1618)


def best_of(fn, repeat):
    fn()  # warm-up (JIT compile, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if not kernels.NUMBA_ENABLED:
        print("numba disabled or missing: only the numpy timings are meaningful")

    model = CarModel.from_last_row(NY_ROW, sigma=5.25)
    g = model.coef(0, model.p - 1)
    lam = model.eigenvalues
    rng = np.random.default_rng(0)

    n = 5_000
    lo = np.zeros(n)
    hi = rng.uniform(0.1, 60.0, n)
    z = rng.normal(0.0, 3.0, 1_000_000)

    a, _ = kernels.gk_expsum_numpy(g, g, lam, lo, hi, True)
    b, _ = kernels.gk_expsum_numba(g, g, lam, lo, hi, True)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-14)
    assert np.allclose(kernels.psi_numpy(z), kernels.psi_numba(z), rtol=1e-13, atol=0)

    cases = [
        (f"gk_expsum squared, {n} intervals",
         lambda: kernels.gk_expsum_numpy(g, g, lam, lo, hi, True),
         lambda: kernels.gk_expsum_numba(g, g, lam, lo, hi, True)),
        (f"gk_expsum linear, {n} intervals",
         lambda: kernels.gk_expsum_numpy(g, None, lam, lo, hi, False),
         lambda: kernels.gk_expsum_numba(g, None, lam, lo, hi, False)),
        (f"psi, {z.size} paths",
         lambda: kernels.psi_numpy(z),
         lambda: kernels.psi_numba(z)),
    ]
    print(f"{'kernel':<36}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, np_fn, nb_fn in cases:
        t_np = best_of(np_fn, args.repeat)
        t_nb = best_of(nb_fn, args.repeat)
        print(f"{name:<36}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()

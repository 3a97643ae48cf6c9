"""Benchmark the numba kernels against the pure-numpy fallback.

Times the low-level stencils and reductions on a few grid sizes, then an
end-to-end coupled step loop with each backend patched into the operator
layer. Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 65,129,257 --repeats 7
"""

import argparse
import time

import numpy as np

from thermoflow import kernels
from thermoflow.dynamics import SimConfig, State, step_coupled
from thermoflow.elliptic import SolverSpec
from thermoflow.grid import DIRICHLET, Grid, NEUMANN, ScalarField, VectorField
from thermoflow.kernels import MODE_EVEN, get_backend


def best_of(fn, repeats: int) -> float:
    """Best wall time over ``repeats`` calls, in seconds."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        dt = time.perf_counter() - t0
        if dt < best:
            best = dt
    return best


def kernel_cases(backend, n: int):
    rng = np.random.default_rng(7)
    h = 1.0 / (n - 1)
    a3 = rng.standard_normal((n, n, n))
    b3 = rng.standard_normal((n, n, n))
    w3 = np.full((n, n, n), h**3)
    spacings = (h, h, h)
    return [
        ("ddx", lambda: backend.ddx(a3, 0, h, MODE_EVEN)),
        ("laplacian", lambda: backend.laplacian(a3, spacings, kernels.BC_NEUMANN)),
        ("second_diff", lambda: backend.second_diff(a3, 1, h)),
        ("cross_diff", lambda: backend.cross_diff(a3, 0, 2, h, h)),
        ("weighted_sum", lambda: backend.weighted_sum(a3, w3)),
        ("weighted_dot", lambda: backend.weighted_dot(a3, b3, w3)),
    ]


def bench_kernels(sizes, repeats: int):
    numpy_be = get_backend("numpy")
    try:
        numba_be = get_backend("numba")
    except ImportError:
        numba_be = None
        print("numba not importable; kernel table shows numpy only\n")

    for n in sizes:
        print(f"== kernels on a {n}^3 grid ==")
        print(f"{'kernel':<14} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
        np_cases = kernel_cases(numpy_be, n)
        nb_cases = kernel_cases(numba_be, n) if numba_be is not None else None
        if nb_cases is not None:
            for _, fn in nb_cases:  # warm the jit cache before timing
                fn()
        for idx, (name, np_fn) in enumerate(np_cases):
            t_np = best_of(np_fn, repeats)
            if nb_cases is None:
                print(f"{name:<14} {t_np * 1e3:>12.3f} {'-':>12} {'-':>9}")
                continue
            t_nb = best_of(nb_cases[idx][1], repeats)
            ratio = t_np / t_nb if t_nb > 0 else float("inf")
            print(f"{name:<14} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {ratio:>8.2f}x")
        print()


KERNEL_NAMES = ("ddx", "laplacian", "second_diff", "cross_diff", "weighted_sum", "weighted_dot")


def patch_backend(backend) -> dict:
    """Point the kernel dispatch at ``backend``; returns the previous bindings."""
    old = {name: getattr(kernels, name) for name in KERNEL_NAMES}
    for name in KERNEL_NAMES:
        setattr(kernels, name, getattr(backend, name))
    return old


def restore_backend(old: dict) -> None:
    for name, fn in old.items():
        setattr(kernels, name, fn)


def coupled_run(n: int, steps: int) -> float:
    grid = Grid((n,), (1.0,))
    x = grid.axis_coords(0)
    vx = 0.2 * np.sin(np.pi * x)
    vx[0] = vx[-1] = 0.0
    u = VectorField((ScalarField.zeros(grid, DIRICHLET),))
    v = VectorField((ScalarField(grid, vx, DIRICHLET),))
    theta = ScalarField(grid, 1.0 + 0.3 * np.cos(np.pi * x), NEUMANN)
    state = State(0.0, u, v, theta)
    cfg = SimConfig(dt=1e-3, t_end=steps * 1e-3, solver=SolverSpec(method="spectral"))
    t0 = time.perf_counter()
    for _ in range(steps):
        state = step_coupled(state, cfg)
    return time.perf_counter() - t0


def bench_coupled(n: int, steps: int):
    print(f"== coupled stepping, n={n}, {steps} steps ==")
    try:
        numba_be = get_backend("numba")
    except ImportError:
        numba_be = None
    results = {}
    for label, backend in (("numpy", get_backend("numpy")), ("numba", numba_be)):
        if backend is None:
            continue
        old = patch_backend(backend)
        try:
            coupled_run(n, 2)  # warm up jit / caches outside the timed run
            results[label] = coupled_run(n, steps)
        finally:
            restore_backend(old)
    for label, secs in results.items():
        print(f"{label:<8} {secs:.3f} s  ({secs / steps * 1e3:.3f} ms/step)")
    if len(results) == 2:
        print(f"speedup  {results['numpy'] / results['numba']:.2f}x")
    print()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="33,65", help="comma-separated cube edge sizes")
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats per kernel")
    ap.add_argument("--steps", type=int, default=2000, help="steps for the coupled-run timing")
    ap.add_argument("--coupled-n", type=int, default=257, help="1d grid size for the coupled run")
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    bench_kernels(sizes, args.repeats)
    bench_coupled(args.coupled_n, args.steps)


if __name__ == "__main__":
    main()

"""Time the MAC kernels and one solver step for the numpy and compiled backends.

    python benchmarks/bench_kernels.py [--n 32] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from ekmanqg.ns3d import kernels
from ekmanqg.ns3d.solver import Flow3DState, MACGrid, NS3DSolver
from ekmanqg.pressure import PressureLaw
from ekmanqg.spectral_ops import ViscosityParams


def fields(n, seed=0):
    rng = np.random.default_rng(seed)
    u1, u2, F1, F2 = rng.standard_normal((4, n, n, n))
    u3, F3 = rng.standard_normal((2, n, n, n - 1))
    rho = 1.0 + 0.1 * rng.random((n, n, n))
    return u1, u2, u3, F1, F2, F3, rho


def kernel_cases(mod, n):
    u1, u2, u3, F1, F2, F3, rho = fields(n)
    h = (0.2, 0.2, 1.0 / n)
    return {
        "vortex_force": lambda: mod.vortex_force(u1, u2, u3, F1, F2, F3, rho, 10.0, *h),
        "viscous": lambda: mod.viscous(u1, u2, u3, 1.0, 0.1, 0.1, *h),
        "divergence": lambda: mod.divergence(F1, F2, F3, *h),
        "cell_kinetic": lambda: mod.cell_kinetic(u1, u2, u3),
    }


def step_case(mod, n):
    grid = MACGrid(n, n)
    law = PressureLaw(2.0, 1.0)
    z = grid.z_cells()
    rb = 2.0 - z
    solver = NS3DSolver(grid, law, rb, ViscosityParams(1.0, 0.1, 0.1), 0.1, 2e-3, kernels=mod)
    u1, u2, u3, *_ = fields(n, 1)
    x = (np.arange(n) + 0.5) * grid.dx
    rho = solver.rho_bar * (1 + 0.01 * np.sin(x)[:, None, None])
    state = Flow3DState(rho, 0.1 * u1, 0.1 * u2, 0.1 * u3, 0.0, 0.1)
    solver.step(state)  # builds the preconditioner
    return lambda: solver.step(state)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    backends = {"numpy": kernels.backend("numpy")}
    try:
        backends["cython"] = kernels.backend("cython")
    except ImportError:
        print("compiled backend not built; timing numpy only")
    timings = {}
    for name, mod in backends.items():
        cases = kernel_cases(mod, args.n)
        cases["solver_step"] = step_case(mod, args.n)
        for case, fn in cases.items():
            reps = max(1, args.repeat // 10) if case == "solver_step" else args.repeat
            timings[(case, name)] = min(timeit.repeat(fn, number=1, repeat=reps))
    print(f"grid {args.n}^3, best of {args.repeat} (ms)")
    print(f"{'kernel':<14}" + "".join(f"{b:>10}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for case in list(kernel_cases(backends["numpy"], 4)) + ["solver_step"]:
        row = [timings[(case, b)] * 1e3 for b in backends]
        line = f"{case:<14}" + "".join(f"{t:10.3f}" for t in row)
        if len(row) > 1:
            line += f"{row[0] / row[1]:9.2f}x"
        print(line)


if __name__ == "__main__":
    main()

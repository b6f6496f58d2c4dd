"""Time the compiled stepping kernel against the numpy fallback.

    python benchmarks/bench_kernel.py [--n 4000] [--steps 20000] [--m 2]

Both kernels advance the same point-mass profile by the same number of steps;
the script reports steps per second and checks that the final states agree.
"""

import argparse
import time

import numpy as np

from pme_focus import _kernel_py, exact, solver

try:
    from pme_focus import _kernel
except ImportError:  # extension not built
    _kernel = None


def setup(n, m):
    params = exact.GasParams(m, pde_consistent=True)
    cfg = solver.SolverConfig(params, 3.0, n, t_start=-0.5, t_end=0.25)
    field = exact.BarenblattField.focusing(1.0, -1.0, m, True)
    return cfg, solver.barenblatt_initial_state(cfg, field, -0.5)


def time_kernel(mod, cfg, state, steps, repeat):
    grid = cfg.grid
    coef = cfg.cfl * grid.stability_factor * grid.dx ** 2
    best, u = np.inf, None
    for _ in range(repeat):
        u = state.u.copy()
        start = time.perf_counter()
        mod.advance(u, grid.step_scale, grid.face_weights, cfg.params.m, coef,
                    state.time, 1.0, steps, np.inf)
        best = min(best, time.perf_counter() - start)
    return best, u


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=4000)
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--m", type=float, default=2.0)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    cfg, state = setup(args.n, args.m)
    rows = [("python", _kernel_py)] + ([("compiled", _kernel)] if _kernel is not None else [])
    finals, times = {}, {}
    for name, mod in rows:
        times[name], finals[name] = time_kernel(mod, cfg, state, args.steps, args.repeat)
        print(f"{name:>8}: {times[name]:8.3f} s  {args.steps / times[name]:12.0f} steps/s")
    if len(finals) == 2:
        diff = np.max(np.abs(finals["python"] - finals["compiled"]))
        print(f"max |difference| between final states: {diff:.3e}")
        print(f"speed-up: {times['python'] / times['compiled']:.1f}x")


if __name__ == "__main__":
    main()

"""Benchmark the compiled stepping kernels against the NumPy fallback.

Times the two hot loops (repeated unitary application and fixed-step RK4)
on workloads shaped like the library's own: a (2j+1)-dimensional step
unitary from a spin-j Hamiltonian and the n = 3 co-adjoint flow matrix.

    python3 benchmarks/bench_kernels.py [--spin J] [--steps N] [--repeats R]
"""

import argparse
import time

import numpy as np

from cohstate import _kernels_py
from cohstate.dynamics import HamiltonianSchedule, _grid
from cohstate.liealg import build_spin_rep

try:
    from cohstate import _kernels
except ImportError:
    _kernels = None


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spin", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rep = build_spin_rep(args.spin)
    rng = np.random.default_rng(0)
    h = rng.uniform(-2.0, 2.0, size=rep.n)
    sch = HamiltonianSchedule.constant(h, t_final=1.0)
    dt = 1.0 / args.steps
    (_, segments) = _grid(sch, None, dt)
    coeffs, step, n_steps, _ = segments[0]

    evals, vecs = np.linalg.eigh(rep.hamiltonian(coeffs))
    u = (vecs * np.exp(-1j * evals * step)) @ vecs.conj().T
    psi0 = rng.normal(size=rep.d) + 1j * rng.normal(size=rep.d)
    psi0 /= np.linalg.norm(psi0)
    a = np.einsum("abc,b->ac", rep.structure_constants, h)
    mu0 = rng.normal(size=rep.n)

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.insert(0, ("cython", _kernels))

    print(f"spin {args.spin}, d = {rep.d}, {n_steps} steps, "
          f"best of {args.repeats}")
    print(f"{'kernel':<18}{'backend':<10}{'seconds':>10}{'steps/s':>14}")
    rows = {}
    for name, mod in backends:
        t = best_of(args.repeats, mod.unitary_steps, u, psi0, n_steps)
        rows[("unitary_steps", name)] = t
        print(f"{'unitary_steps':<18}{name:<10}{t:>10.4f}{n_steps / t:>14.0f}")
    for name, mod in backends:
        t = best_of(args.repeats, mod.rk4_linear_steps, a, mu0, step, n_steps)
        rows[("rk4_linear_steps", name)] = t
        print(f"{'rk4_linear_steps':<18}{name:<10}{t:>10.4f}{n_steps / t:>14.0f}")

    if _kernels is not None:
        for kernel in ("unitary_steps", "rk4_linear_steps"):
            speedup = rows[(kernel, "python")] / rows[(kernel, "cython")]
            print(f"{kernel}: cython is {speedup:.1f}x the numpy fallback")


if __name__ == "__main__":
    main()

"""Time the numba and pure-numpy kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat R]

Each kernel is warmed up once (numba compiles on first call) and the best of
``R`` runs is reported.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from qrekit import _accel, hamiltonian, kernels, verify


def _hermitian(d: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def _mc_inputs(name: str):
    spec = hamiltonian.instance(name).spec
    strat = verify.ProverStrategy.honest(hamiltonian.ground(spec).state)
    n, d = spec.n, 1 << spec.n
    table = verify.outcome_table(n, strat)
    cum = np.cumsum(table.reshape(2 * d, d * d), axis=1)
    cum /= cum[:, -1:]
    cum[:, -1] = 1.0
    accept = verify.acceptance_table(spec)
    return spec, table, accept, np.ascontiguousarray(cum), verify._term_arrays(spec)


def cases():
    spec, table, accept, cum, terms = _mc_inputs("ring4")
    n = spec.n
    master = np.uint64(12345)
    trials = 200_000
    for d in (16, 64):
        m = _hermitian(d, d)
        yield f"jacobi_eigh d={d}", lambda f=kernels.jacobi_eigh_numba, m=m: f(m), \
            lambda f=kernels.jacobi_eigh_numpy, m=m: f(m)
    yield "expected_acceptance N=4", lambda: kernels.expected_acceptance_numba(table, accept, n), \
        lambda: kernels.expected_acceptance_numpy(table, accept, n)
    yield f"mc_acceptance N=4 trials={trials}", \
        lambda: kernels.mc_acceptance_numba(master, trials, n, cum, *terms), \
        lambda: kernels.mc_acceptance_numpy(master, trials, n, cum, *terms)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    _accel.configure_threads()
    print(f"{'kernel':36s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speed-up':>9s}")
    for name, fast, slow in cases():
        fast()
        slow()
        t_fast = min(timeit.repeat(fast, number=1, repeat=args.repeat)) * 1e3
        t_slow = min(timeit.repeat(slow, number=1, repeat=args.repeat)) * 1e3
        print(f"{name:36s} {t_fast:12.3f} {t_slow:12.3f} {t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()

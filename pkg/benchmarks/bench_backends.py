#!/usr/bin/env python3
"""Benchmark the jitted kernels against the pure-numpy fallback.

Runs the same workload twice in subprocesses -- once with the default
(numba) backend and once with POTDC_BACKEND=numpy -- and reports wall times
and the agreement of the computed values.

Usage:  python3 benchmarks/bench_backends.py [--sizes 8,10,12] [--repeats 3]
"""

import argparse
import json
import os
import subprocess
import sys
import tempfile
import textwrap

WORKLOAD = textwrap.dedent("""
    import json, sys, time
    import numpy as np
    from potdc import kernels
    from potdc.inner import InnerProblem
    from potdc.solver import exhaustive_search, lower_bound, potdc_solve

    sizes = json.loads(sys.argv[1])
    repeats = int(sys.argv[2])

    def instance(M, seed):
        rng = np.random.default_rng(seed)
        Q = (rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))) / np.sqrt(M)
        X = rng.standard_normal((2 * M, M)) + 1j * rng.standard_normal((2 * M, M))
        R_hat = X.conj().T @ X / (2 * M)
        lam = float(np.linalg.eigvalsh(Q.conj().T @ Q)[-1])
        return R_hat, 2.0, Q, 0.3 * np.sqrt(lam)

    # warm-up (includes jit compilation when applicable)
    R_hat, gamma, Q, eta = instance(6, 0)
    p = InnerProblem(R_hat, gamma, Q, eta)
    potdc_solve(None, gamma, None, eta, problem=p)
    exhaustive_search(problem=p, grid_size=50)
    lower_bound(problem=p)

    out = {"backend": kernels.BACKEND, "timings": {}, "objective": {}}
    for M in sizes:
        t_best = float("inf")
        for r in range(repeats):
            probs = [InnerProblem(*instance(M, 100 + i)) for i in range(5)]
            t0 = time.perf_counter()
            objs = []
            for prob in probs:
                res = potdc_solve(None, prob.gamma, None, prob.eta, problem=prob)
                lb = lower_bound(problem=prob)
                _, ub = exhaustive_search(problem=prob, grid_size=400)
                objs.append((res.objective, lb, ub))
            t_best = min(t_best, (time.perf_counter() - t0) / len(probs))
        out["timings"][str(M)] = t_best
        out["objective"][str(M)] = objs
    print(json.dumps(out))
""")


def run_backend(backend, sizes, repeats):
    env = dict(os.environ)
    if backend == "numpy":
        env["POTDC_BACKEND"] = "numpy"
    else:
        env.pop("POTDC_BACKEND", None)
    with tempfile.NamedTemporaryFile("w", suffix=".py", delete=False) as fh:
        fh.write(WORKLOAD)
        path = fh.name
    try:
        res = subprocess.run(
            [sys.executable, path, json.dumps(sizes), str(repeats)],
            env=env, capture_output=True, text=True, check=True)
    finally:
        os.unlink(path)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="8,12,16,20",
                    help="comma-separated array sizes")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(t) for t in args.sizes.split(",")]

    results = {}
    for backend in ("numba", "numpy"):
        print(f"running {backend} workload ...", flush=True)
        results[backend] = run_backend(backend, sizes, args.repeats)
        got = results[backend]["backend"]
        if got != backend:
            print(f"  note: requested {backend}, kernels report {got}")

    print(f"\n{'M':>4} {'numba (ms)':>12} {'numpy (ms)':>12} {'speedup':>9}")
    for M in sizes:
        tj = results["numba"]["timings"][str(M)] * 1e3
        tn = results["numpy"]["timings"][str(M)] * 1e3
        print(f"{M:>4} {tj:>12.2f} {tn:>12.2f} {tn / tj:>8.1f}x")

    # the two backends must agree on the numbers they produce
    worst = 0.0
    for M in sizes:
        a = results["numba"]["objective"][str(M)]
        b = results["numpy"]["objective"][str(M)]
        for (oa, la, ua), (ob, lb_, ub) in zip(a, b):
            worst = max(worst, abs(oa - ob) / (1 + abs(oa)),
                        abs(la - lb_) / (1 + abs(la)),
                        abs(ua - ub) / (1 + abs(ua)))
    print(f"\nworst relative cross-backend difference: {worst:.3e}")
    if worst > 1e-8:
        print("BACKEND MISMATCH")
        return 1
    print("backends agree")
    return 0


if __name__ == "__main__":
    sys.exit(main())

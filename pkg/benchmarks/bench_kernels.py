"""Compare the compiled and NumPy kernel backends.

Times each batched kernel on random inputs, then a full three-step dressing
of a broadened seed on a 201x201 grid, once per backend (the end-to-end
runs use a subprocess with ``MBD_BACKEND`` set so the whole package picks
up the backend).

    python benchmarks/bench_kernels.py [--points N] [--nodes M] [--repeat R]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from mbdarboux import kernels

END_TO_END = """
import time
from mbdarboux import *
det = DetuningModel(0.2, Gaussian(0.0, 1.0, {nodes}))
chain = DressingChain(ZeroSeed(detuning=det), [DressingStep(0.5 + 0.3j, (1, 1, 1)),
                      DressingStep(0.8 - 0.2j, (0.3, 1, 0.5j)),
                      DressingStep(1.1 + 0.1j, (1, 0.2, 0.7))])
t, z = Grid2D(-10, 10, 201, -10, 10, 201).flat()
state = evaluate_chain(chain)
best = float("inf")
for _ in range({repeat}):
    t0 = time.perf_counter()
    state.evaluate(t, z)
    best = min(best, time.perf_counter() - t0)
print(BACKEND, best)
"""


def random_inputs(n, m, rng):
    c = lambda *shape: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return {"phi": c(n, 3), "chi": c(n, 3), "P": c(n, 3, 3), "A": c(n, m, 3, 3),
            "a": c(n, m, 3), "coef": c(n), "a_mu": c(m), "a_nu": c(m)}


def kernel_cases(x):
    return {
        "hermitian_projector": lambda b: kernels.hermitian_projector(x["phi"], backend=b),
        "outer_projector": lambda b: kernels.outer_projector(x["phi"], x["chi"], backend=b),
        "rank_one_apply": lambda b: kernels.rank_one_apply(x["P"], x["phi"], x["coef"],
                                                           backend=b),
        "dress_bloch": lambda b: kernels.dress_bloch(x["A"], x["P"], x["a_mu"], x["a_nu"],
                                                     0.3 + 0.1j, backend=b),
        "dress_pure": lambda b: kernels.dress_pure(x["a"], x["P"], x["a_nu"], backend=b),
    }


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def end_to_end(backend, nodes, repeat):
    env = dict(os.environ, MBD_BACKEND=backend)
    code = END_TO_END.format(nodes=nodes, repeat=repeat)
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=201 * 201)
    ap.add_argument("--nodes", type=int, default=9)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the NumPy backend is available")
    x = random_inputs(args.points, args.nodes, np.random.default_rng(0))
    print(f"kernels: N={args.points} points, M={args.nodes} nodes, best of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in kernel_cases(x).items():
        times = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<22}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
              + f"{speed:>9.1f}x")

    print(f"\nthree-step chain on a 201x201 grid, {args.nodes} nodes")
    totals = {}
    for b in backends:
        used, sec = end_to_end(b, args.nodes, args.repeat)
        totals[b] = sec
        print(f"  {used:<8} {sec:.3f}s")
    if len(totals) == 2:
        print(f"  speedup  {totals['python'] / totals['cython']:.1f}x")


if __name__ == "__main__":
    main()

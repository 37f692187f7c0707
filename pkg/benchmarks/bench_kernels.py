"""Time the compiled kernels against the numpy fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1]``.
Prints one line per kernel with the best time of each backend and the speedup,
after checking that both backends return the same result.
"""

import argparse
import timeit

import numpy as np

from zerofpr.kernels import backends


def cases(scale, rng):
    n = 100_000 * scale
    x = rng.standard_normal(n)
    C = rng.standard_normal((50, 500 * scale))
    D = rng.standard_normal((20, 50 * scale))
    mem, dim = 10, 5_000 * scale
    S = rng.standard_normal((mem, dim))
    Y = S + 0.1 * rng.standard_normal((mem, dim))
    rho = 1.0 / np.einsum("ij,ij->i", S, Y)
    q = rng.standard_normal(dim)
    return {
        "prox_l_half": (x, 0.3),
        "hard_threshold": (x, 0.5),
        "box_l0_columns": (C, 3, 1.0),
        "sphere_columns": (D,),
        "lbfgs_two_loop": (S, Y, rho, q, 0.9),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20)
    ap.add_argument("--scale", type=int, default=1)
    args = ap.parse_args(argv)

    mods = backends()
    if "cython" not in mods:
        print("compiled backend not built; only the fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16} " + " ".join(f"{name:>12}" for name in mods) + "   speedup")
    for kernel, inputs in cases(args.scale, rng).items():
        outs, times = {}, {}
        for name, mod in mods.items():
            fn = getattr(mod, kernel)
            outs[name] = fn(*inputs)
            t = timeit.repeat(lambda: fn(*inputs), repeat=args.repeat, number=args.number)
            times[name] = min(t) / args.number
        ref = outs["python"]
        for name, out in outs.items():
            if not np.allclose(out, ref, rtol=1e-10, atol=1e-12):
                raise SystemExit(f"{kernel}: backend {name} disagrees with the fallback")
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{kernel:<16} " + " ".join(f"{1e3 * times[n]:10.3f}ms" for n in mods) + f"   {speed:6.2f}x")


if __name__ == "__main__":
    main()

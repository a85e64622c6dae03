"""Compare the compiled and pure-Python kernels on the same runs.

    python3 benchmarks/bench_kernel.py [--size 32] [--length 32] [--steps 200000]

Both kernels are driven from the same seed; the script checks that they
end in the same state and reports steps per second and the speedup.
"""

import argparse
import time
from fractions import Fraction

from lexnet import _backend
from lexnet.automaton import SimParams, Simulation
from lexnet.lexicon import as_epsilon
from lexnet.network import make_torus


def timed_run(net, params, kernel):
    sim = Simulation(net, params, kernel=kernel)
    t0 = time.perf_counter()
    res = sim.run()
    dt = time.perf_counter() - t0
    return res, dt


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=32, help="torus side")
    ap.add_argument("--length", type=int, default=32)
    ap.add_argument("--alphabet", type=int, default=10)
    ap.add_argument("--steps", type=int, default=200_000, help="steps per run")
    ap.add_argument("--epsilon", default="0,1/2,7/10,1", help="comma-separated epsilons")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    net = make_torus(args.size, args.size)
    kernels = [k for k in ("python", "cython") if k in _backend.KERNELS]
    print(f"torus {args.size}x{args.size}, L={args.length}, s={args.alphabet}, {args.steps} steps, "
          f"kernels: {', '.join(kernels)}")
    print(f"{'eps':>5} {'kernel':>7} {'steps':>9} {'sec':>8} {'steps/s':>11} {'speedup':>8} same")
    for text in args.epsilon.split(","):
        eps = as_epsilon(text)
        params = SimParams(epsilon=eps, length=args.length, alphabet=args.alphabet, seed=args.seed,
                           max_steps=args.steps, stop_on_consensus=False)
        out = {k: timed_run(net, params, k) for k in kernels}
        base_rate = None
        ref = out["python"][0]
        for k in kernels:
            res, dt = out[k]
            rate = res.steps / dt
            base_rate = base_rate or rate
            same = (res.config.conveyed.tolist() == ref.config.conveyed.tolist()
                    and res.config.memories == ref.config.memories and res.series.samples == ref.series.samples)
            print(f"{float(Fraction(eps)):>5.2f} {k:>7} {res.steps:>9} {dt:>8.3f} {rate:>11.0f} "
                  f"{rate / base_rate:>7.1f}x {same}")


if __name__ == "__main__":
    main()

"""Time the compiled and pure-Python simplex kernels on the same bounding LPs.

    python3 benchmarks/bench_kernels.py --sizes 10,20,40 --repeat 3
"""
import argparse
import statistics
import time

from otsbm.model import generate_instances, synthetic_network
from otsbm.optcore import solve_lp
from otsbm.optcore.kernel import KERNELS, using_kernel
from otsbm.otsbuild import build_bl_lp, build_bm_lp
from otsbm.tighten import TighteningError, heuristic_cost_bound, initial_bounds


def lp_batch(n_buses: int, seed: int):
    base = synthetic_network(seed, n_buses, n_buses - 1 + max(4, n_buses // 2))
    for net in generate_instances(base, seed, 5):
        try:
            cap, _ = heuristic_cost_bound(net)
        except (TighteningError, ValueError):  # all-closed dispatch infeasible; try the next draw
            continue
        b = initial_bounds(net)
        lps = [build_bl_lp(net, b, cap, lid, d) for lid in (l.id for l in net.lines) for d in ("nm", "mn")]
        lps += [build_bm_lp(net, b, cap, lid, d) for lid in net.switchable_ids for d in ("nm", "mn")]
        return lps
    raise RuntimeError(f"no feasible instance for size {n_buses}")


def time_kernel(name: str, lps, repeat: int):
    samples, objs = [], None
    with using_kernel(name):
        for _ in range(repeat):
            t0 = time.perf_counter()
            out = [solve_lp(lp) for lp in lps]
            samples.append(time.perf_counter() - t0)
            objs = [(o.status, o.objective) for o in out]
    return statistics.median(samples), objs


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="10,20,40", help="comma-separated bus counts")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    kernels = sorted(KERNELS)
    print(f"{'buses':>6} {'LPs':>5} " + " ".join(f"{k + ' [s]':>12}" for k in kernels) + "  speedup  agree")
    for n in (int(s) for s in args.sizes.split(",")):
        lps = lp_batch(n, args.seed)
        res = {k: time_kernel(k, lps, args.repeat) for k in kernels}
        agree = "-"
        speed = "-"
        if len(kernels) == 2:
            (ta, oa), (tb, ob) = res["cython"], res["python"]
            agree = all(sa == sb and abs(va - vb) <= 1e-6 * (1 + abs(va)) if sa == "optimal" else sa == sb
                        for (sa, va), (sb, vb) in zip(oa, ob))
            speed = f"{tb / ta:7.2f}x"
        print(f"{n:>6} {len(lps):>5} " + " ".join(f"{res[k][0]:>12.4f}" for k in kernels) + f"  {speed}  {agree}")


if __name__ == "__main__":
    main()

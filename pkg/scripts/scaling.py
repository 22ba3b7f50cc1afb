"""Wall time of one training epoch against stream length (fixed d and node count).

    python scripts/scaling.py --events 10000 20000 40000 80000
"""

import argparse
import time

from tgalign.config import RunConfig
from tgalign.synthetic import community_stream
from tgalign.training import train


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--events", type=int, nargs="+", default=[10_000, 20_000, 40_000])
    p.add_argument("--nodes", type=int, default=1899)
    p.add_argument("--d", type=int, default=32)
    p.add_argument("--mode", default="full")
    p.add_argument("--repeats", type=int, default=2)
    args = p.parse_args()

    cfg = RunConfig(d=args.d, epochs=1, mode=args.mode)
    prev = None
    print(f"{'events':>8s}  {'seconds':>8s}  {'ratio':>6s}")
    for n in args.events:
        g = community_stream(args.nodes, n, seed=0)
        best = float("inf")
        for _ in range(args.repeats):
            started = time.perf_counter()
            train(cfg, g)
            best = min(best, time.perf_counter() - started)
        ratio = f"{best / prev:6.2f}" if prev else "     -"
        print(f"{n:8d}  {best:8.2f}  {ratio}")
        prev = best


if __name__ == "__main__":
    main()

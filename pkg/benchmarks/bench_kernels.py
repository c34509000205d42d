"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--default-domain]
"""
import argparse

from novabot.harness.kernel_bench import format_report, run_kernel_bench
from novabot.sim.params import FAST_PROFILE, SimConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--default-domain", action="store_true",
                    help="use the 1000 µm domain instead of the fast profile")
    ap.add_argument("--min-time", type=float, default=0.2)
    args = ap.parse_args()
    config = SimConfig() if args.default_domain else SimConfig(**FAST_PROFILE)
    print(format_report(run_kernel_bench(config, args.min_time)))


if __name__ == "__main__":
    main()
